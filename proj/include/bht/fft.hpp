#pragma once

#include <complex>
#include <vector>

namespace bht {

// Unnormalized DFTs of any length (FFTW underneath, plans cached per size).
// forward:  X[k] = sum_n x[n] exp(-2 pi i k n / N)
// backward: x[n] = sum_k X[k] exp(+2 pi i k n / N)
void fft_forward(std::vector<std::complex<double>> &data);
void fft_backward(std::vector<std::complex<double>> &data);

} // namespace bht
