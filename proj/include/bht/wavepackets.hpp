#pragma once

#include "bht/curves.hpp"
#include "bht/dual_phase.hpp"
#include "bht/quadrature.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace bht {

// Uniform samples of a function on the periodic domain [x0, x0 + n dx).
// Frequencies are angular: xi_k = 2 pi k / period.
struct SampledFunction {
   double x0 = 0.0;
   double dx = 1.0;
   double band_limit = 0.0; // angular; 0 when not declared
   std::vector<cplx> values;

   SampledFunction() = default;
   SampledFunction(double x0_, double dx_, size_t n, double band = 0.0)
      : x0(x0_), dx(dx_), band_limit(band), values(n, cplx(0.0)) {}

   size_t size() const { return values.size(); }
   double period() const { return dx * static_cast<double>(values.size()); }
   double x(size_t i) const { return x0 + dx * static_cast<double>(i); }
   // signed frequency index of FFT bin q
   long freq_index(size_t q) const;
   double xi(size_t q) const;

   // c_k = int f exp(-i xi_k x) dx over one period, in FFT bin order
   std::vector<cplx> spectrum() const;
   static SampledFunction from_spectrum(double x0, double dx, const std::vector<cplx> &spec,
                                        double band = 0.0);

   double l2_norm() const;
   double linf_norm() const;
   double l1_norm() const;
};

// int f conj(g); both on the same grid
cplx inner(const SampledFunction &f, const SampledFunction &g);
// int f g, no conjugation
cplx pairing(const SampledFunction &f, const SampledFunction &g);

SampledFunction operator+(const SampledFunction &a, const SampledFunction &b);
SampledFunction operator*(cplx s, const SampledFunction &a);

void write_csv(const SampledFunction &f, std::ostream &out);
SampledFunction read_csv(std::istream &in);
// little-endian: "BHTSF001", u64 n, f64 x0, f64 dx, f64 band, then n (re, im) pairs
void write_binary(const SampledFunction &f, std::ostream &out);
SampledFunction read_binary(std::istream &in);

struct WavePacketIndex {
   int m = 0;
   double l = 0.0; // half-integer steps allowed
   long p = 0;     // p in [2^m, 2^(m+1)]
   void validate() const;
};

// Window with transform sqrt(2 pi theta(u)(1 - theta(u - 1))) on [0, 2], theta the
// smooth step, so that ||window||_2 = 1 and the integer translates of
// |transform|^2 sum to 2 pi.
double window_hat(double u);

// L2 norm of the periodized packet with transform 2^(m/2) window_hat(2^m xi - p)
// on a torus of length period; packets are divided by it
double packet_norm(int m, long p, double period);

SampledFunction wavepacket(const WavePacketIndex &idx, double x0, double dx, size_t n);

// time step a 2^m (a = 1 is the integer lattice, a = 1/2 the half-integer one),
// frequency indices p_lo..p_hi
struct Lattice {
   int m = 0;
   double a = 0.5;
   long p_lo = 0, p_hi = 0;

   static Lattice standard(int m, double a = 0.5);
   double time_step() const;
   size_t positions(double period) const; // period / time_step, must be integral
   // xi range where sum_p |window_hat(2^m xi - p)|^2 equals 2 pi
   double band_lo() const;
   double band_hi() const;
};

struct CoefficientGrid {
   Lattice lattice;
   size_t n_l = 0;            // positions l = 0, a, 2a, ... (stored by step count)
   std::vector<cplx> data;    // (p - p_lo) * n_l + n

   CoefficientGrid() = default;
   CoefficientGrid(const Lattice &lat, size_t nl)
      : lattice(lat), n_l(nl), data((lat.p_hi - lat.p_lo + 1) * nl, cplx(0.0)) {}
   cplx &at(size_t n, long p) { return data[(p - lattice.p_lo) * n_l + n]; }
   cplx at(size_t n, long p) const { return data[(p - lattice.p_lo) * n_l + n]; }
   double energy() const;
};

// <g, phi_{m, n a, p}> for every lattice point. Throws AliasingError when the
// grid cannot hold the packets or the declared band limit of g.
CoefficientGrid analyze(const SampledFunction &g, const Lattice &lat);

// sum c phi_{m, n a, p}, no dual window
SampledFunction synthesize_raw(const CoefficientGrid &c, double x0, double dx, size_t n);

struct CGOptions {
   double tol = 1e-8;
   int max_iter = 200;
};

// sum c phi~ with phi~ = S^-1 phi, S the frame operator; the inversion is done by
// conjugate gradients and throws FrameError when the residual stays above tol.
SampledFunction synthesize(const CoefficientGrid &c, double x0, double dx, size_t n,
                           const CGOptions &opt = {});

// S g = sum <g, phi> phi
SampledFunction frame_operator(const SampledFunction &g, const Lattice &lat);

struct FrameBounds {
   double A = 0.0, B = 0.0;
   int iterations = 0;
};

// extreme eigenvalues of S on functions with spectrum in [band_lo, band_hi],
// by power iteration
FrameBounds frame_bounds(const Lattice &lat, double x0, double dx, size_t n, double band_lo,
                         double band_hi, int iterations = 60, unsigned long long seed = 7);

// frequency cutoff of the modulated operators: phi_window, |xi| in (3/2, 4)
double freq_cutoff(double xi);

// Q_{m,p} f(y) = (1/2 pi) int f^(xi) cutoff(xi) exp(-i p R(2^m xi / p)) exp(i xi y) dxi,
// R extended evenly to negative arguments
class QOperator {
public:
   QOperator(const Curve &c, int j, int m, bool with_remainder = false);

   // transform of the kernel at xi: cutoff(xi) exp(-i p R(2^m |xi| / p))
   cplx symbol(long p, double xi) const;
   cplx at(const SampledFunction &f, long p, double y) const;
   // Q at y = y0 + step * n, n < count, from the spectrum of f (period given).
   // Uses one FFT when period / step is an integer, a direct sum otherwise.
   std::vector<cplx> on_lattice(const std::vector<cplx> &spec, double period, long p,
                                double y0, double step, size_t count) const;
   // sqrt((1/2 pi) int xi^2 cutoff^2), the Lipschitz constant against ||f||_2
   static double lipschitz_constant();
   // R(|x|), interpolated when there is no closed form
   double R(double x) const;

private:
   RProfile prof_;
   int m_;
   // R and r on a uniform grid over the reachable arguments, for Hermite interpolation
   std::vector<double> R_tab_, r_tab_;
   double t_lo_ = 0.0, t_step_ = 0.0;
};

} // namespace bht
