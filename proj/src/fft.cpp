#include "bht/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace bht {

namespace {

// FFTW planning is not thread safe; execution on new arrays is.
std::mutex plan_mutex;
std::map<std::pair<size_t, int>, fftw_plan> plan_cache;

fftw_plan get_plan(size_t n, int sign)
{
   std::lock_guard<std::mutex> lock(plan_mutex);
   auto key = std::make_pair(n, sign);
   auto it = plan_cache.find(key);
   if (it != plan_cache.end()) { return it->second; }
   fftw_complex *buf = fftw_alloc_complex(n);
   fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
   fftw_free(buf);
   if (!p) { throw std::runtime_error("fftw planning failed"); }
   plan_cache.emplace(key, p);
   return p;
}

void run(std::vector<std::complex<double>> &data, int sign)
{
   const size_t n = data.size();
   if (n <= 1) { return; }
   fftw_plan p = get_plan(n, sign);
   auto *buf = reinterpret_cast<fftw_complex *>(data.data());
   fftw_execute_dft(p, buf, buf);
}

} // namespace

void fft_forward(std::vector<std::complex<double>> &data) { run(data, FFTW_FORWARD); }
void fft_backward(std::vector<std::complex<double>> &data) { run(data, FFTW_BACKWARD); }

} // namespace bht
