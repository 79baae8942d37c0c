#include "bht/wavepackets.hpp"

#include "bht/bumps.hpp"
#include "bht/errors.hpp"
#include "bht/fft.hpp"

#include <algorithm>
#include <bit>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace bht {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

size_t wrap(long k, size_t n)
{
   const long r = k % static_cast<long>(n);
   return static_cast<size_t>(r < 0 ? r + static_cast<long>(n) : r);
}

// exp(i x) with x reduced mod 2 pi first, for large integer-ish arguments
cplx expi(double x) { return std::polar(1.0, std::remainder(x, two_pi)); }

void check_same_grid(const SampledFunction &f, const SampledFunction &g)
{
   if (f.size() != g.size() || std::abs(f.dx - g.dx) > 1e-12 * f.dx ||
       std::abs(f.x0 - g.x0) > 1e-12 * std::max(1.0, f.period())) {
      throw DomainError("functions live on different grids");
   }
}

} // namespace

long SampledFunction::freq_index(size_t q) const
{
   const size_t n = size();
   return q < (n + 1) / 2 ? static_cast<long>(q) : static_cast<long>(q) - static_cast<long>(n);
}

double SampledFunction::xi(size_t q) const { return two_pi * freq_index(q) / period(); }

std::vector<cplx> SampledFunction::spectrum() const
{
   std::vector<cplx> s = values;
   fft_forward(s);
   for (size_t q = 0; q < s.size(); ++q) { s[q] *= dx * expi(-xi(q) * x0); }
   return s;
}

SampledFunction SampledFunction::from_spectrum(double x0, double dx, const std::vector<cplx> &spec,
                                               double band)
{
   SampledFunction f(x0, dx, spec.size(), band);
   const double T = f.period();
   for (size_t q = 0; q < spec.size(); ++q) { f.values[q] = spec[q] * expi(f.xi(q) * x0) / T; }
   fft_backward(f.values);
   return f;
}

double SampledFunction::l2_norm() const
{
   double s = 0.0;
   for (const cplx &v : values) { s += std::norm(v); }
   return std::sqrt(s * dx);
}

double SampledFunction::linf_norm() const
{
   double s = 0.0;
   for (const cplx &v : values) { s = std::max(s, std::abs(v)); }
   return s;
}

double SampledFunction::l1_norm() const
{
   double s = 0.0;
   for (const cplx &v : values) { s += std::abs(v); }
   return s * dx;
}

cplx inner(const SampledFunction &f, const SampledFunction &g)
{
   check_same_grid(f, g);
   cplx s = 0.0;
   for (size_t i = 0; i < f.size(); ++i) { s += f.values[i] * std::conj(g.values[i]); }
   return s * f.dx;
}

cplx pairing(const SampledFunction &f, const SampledFunction &g)
{
   check_same_grid(f, g);
   cplx s = 0.0;
   for (size_t i = 0; i < f.size(); ++i) { s += f.values[i] * g.values[i]; }
   return s * f.dx;
}

SampledFunction operator+(const SampledFunction &a, const SampledFunction &b)
{
   check_same_grid(a, b);
   SampledFunction r = a;
   for (size_t i = 0; i < r.size(); ++i) { r.values[i] += b.values[i]; }
   r.band_limit = (a.band_limit > 0 && b.band_limit > 0) ? std::max(a.band_limit, b.band_limit) : 0.0;
   return r;
}

SampledFunction operator*(cplx s, const SampledFunction &a)
{
   SampledFunction r = a;
   for (cplx &v : r.values) { v *= s; }
   return r;
}

void write_csv(const SampledFunction &f, std::ostream &out)
{
   out << "# x0=" << f.x0 << " dx=" << f.dx << " band=" << f.band_limit << "\n";
   out << "x,re,im\n";
   out.precision(17);
   for (size_t i = 0; i < f.size(); ++i) {
      out << f.x(i) << ',' << f.values[i].real() << ',' << f.values[i].imag() << '\n';
   }
}

SampledFunction read_csv(std::istream &in)
{
   std::string line;
   SampledFunction f;
   std::vector<double> xs;
   int lineno = 0;
   while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) { continue; }
      if (line[0] == '#') {
         std::istringstream ss(line.substr(1));
         std::string tok;
         while (ss >> tok) {
            if (tok.rfind("band=", 0) == 0) { f.band_limit = std::stod(tok.substr(5)); }
         }
         continue;
      }
      if (line.rfind("x,", 0) == 0) { continue; }
      double x, re, im;
      char c1, c2;
      std::istringstream ss(line);
      if (!(ss >> x >> c1 >> re >> c2 >> im) || c1 != ',' || c2 != ',') {
         throw ConfigError("csv line " + std::to_string(lineno) + ": expected x,re,im");
      }
      xs.push_back(x);
      f.values.emplace_back(re, im);
   }
   if (xs.size() < 2) { throw ConfigError("csv needs at least two samples"); }
   f.x0 = xs.front();
   f.dx = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
   for (size_t i = 1; i < xs.size(); ++i) {
      if (std::abs(xs[i] - xs[i - 1] - f.dx) > 1e-9 * std::max(1.0, std::abs(f.dx))) {
         throw ConfigError("csv line " + std::to_string(i + 3) + ": grid is not uniform");
      }
   }
   return f;
}

namespace {

constexpr char magic[9] = "BHTSF001";

template <class T> void put_le(std::ostream &out, T v)
{
   unsigned char b[sizeof(T)];
   std::memcpy(b, &v, sizeof(T));
   if constexpr (std::endian::native == std::endian::big) { std::reverse(b, b + sizeof(T)); }
   out.write(reinterpret_cast<const char *>(b), sizeof(T));
}

template <class T> T get_le(std::istream &in)
{
   unsigned char b[sizeof(T)];
   if (!in.read(reinterpret_cast<char *>(b), sizeof(T))) { throw ConfigError("binary file truncated"); }
   if constexpr (std::endian::native == std::endian::big) { std::reverse(b, b + sizeof(T)); }
   T v;
   std::memcpy(&v, b, sizeof(T));
   return v;
}

} // namespace

void write_binary(const SampledFunction &f, std::ostream &out)
{
   out.write(magic, 8);
   put_le<std::uint64_t>(out, f.size());
   put_le(out, f.x0);
   put_le(out, f.dx);
   put_le(out, f.band_limit);
   for (const cplx &v : f.values) {
      put_le(out, v.real());
      put_le(out, v.imag());
   }
}

SampledFunction read_binary(std::istream &in)
{
   char head[8];
   if (!in.read(head, 8) || std::memcmp(head, magic, 8) != 0) { throw ConfigError("not a sampled-function file"); }
   const auto n = get_le<std::uint64_t>(in);
   SampledFunction f;
   f.x0 = get_le<double>(in);
   f.dx = get_le<double>(in);
   f.band_limit = get_le<double>(in);
   f.values.resize(n);
   for (auto &v : f.values) {
      const double re = get_le<double>(in);
      const double im = get_le<double>(in);
      v = cplx(re, im);
   }
   return f;
}

void WavePacketIndex::validate() const
{
   if (m < 0) { throw DomainError("wave packet scale must be >= 0"); }
   const long lo = 1L << m;
   if (p < lo || p > 2 * lo) { throw DomainError("p outside [2^m, 2^(m+1)]"); }
}

double window_hat(double u)
{
   if (u <= 0.0 || u >= 2.0) { return 0.0; }
   const double w = smooth_step(u) * (1.0 - smooth_step(u - 1.0));
   return std::sqrt(two_pi * w);
}

namespace {

// bins k with 2^m xi_k - p in (0, 2)
std::pair<long, long> packet_bins(int m, long p, double T)
{
   const double scale = T / (two_pi * std::ldexp(1.0, m));
   return {static_cast<long>(std::floor(p * scale)), static_cast<long>(std::ceil((p + 2) * scale))};
}

} // namespace

double packet_norm(int m, long p, double T)
{
   auto [k0, k1] = packet_bins(m, p, T);
   const double s = std::ldexp(1.0, m);
   double acc = 0.0;
   for (long k = k0; k <= k1; ++k) {
      const double w = window_hat(s * two_pi * k / T - p);
      acc += s * w * w;
   }
   return std::sqrt(acc / T);
}

namespace {

void check_grid_holds(int m, long p_hi, double dx)
{
   const double xi_max = (p_hi + 2) * std::ldexp(1.0, -m);
   if (xi_max >= std::numbers::pi / dx) {
      throw AliasingError("grid step " + std::to_string(dx) + " cannot hold packets up to xi=" +
                          std::to_string(xi_max));
   }
}

} // namespace

SampledFunction wavepacket(const WavePacketIndex &idx, double x0, double dx, size_t n)
{
   idx.validate();
   check_grid_holds(idx.m, idx.p, dx);
   SampledFunction f(x0, dx, n);
   const double T = f.period();
   const double s = std::ldexp(1.0, idx.m);
   const double norm = packet_norm(idx.m, idx.p, T);
   std::vector<cplx> spec(n, cplx(0.0));
   auto [k0, k1] = packet_bins(idx.m, idx.p, T);
   for (long k = k0; k <= k1; ++k) {
      const double u = s * two_pi * k / T - idx.p;
      const double w = window_hat(u);
      if (w == 0.0) { continue; }
      spec[wrap(k, n)] += std::sqrt(s) * w / norm * expi(-u * idx.l);
   }
   f = SampledFunction::from_spectrum(x0, dx, spec, (idx.p + 2) / s);
   return f;
}

Lattice Lattice::standard(int m, double a)
{
   Lattice lat;
   lat.m = m;
   lat.a = a;
   lat.p_lo = 1L << m;
   lat.p_hi = 2L << m;
   return lat;
}

double Lattice::time_step() const { return a * std::ldexp(1.0, m); }

size_t Lattice::positions(double period) const
{
   const double r = period / time_step();
   const double n = std::round(r);
   if (n < 1 || std::abs(r - n) > 1e-9 * r) {
      throw ConfigError("period " + std::to_string(period) + " is not a multiple of the lattice step");
   }
   return static_cast<size_t>(n);
}

double Lattice::band_lo() const { return (p_lo + 1) * std::ldexp(1.0, -m); }
double Lattice::band_hi() const { return (p_hi + 1) * std::ldexp(1.0, -m); }

double CoefficientGrid::energy() const
{
   double s = 0.0;
   for (const cplx &v : data) { s += std::norm(v); }
   return s;
}

CoefficientGrid analyze(const SampledFunction &g, const Lattice &lat)
{
   if (g.band_limit > 0.0 && g.dx > std::numbers::pi / (2.0 * g.band_limit)) {
      throw AliasingError("grid step exceeds 1/(4 band limit)");
   }
   check_grid_holds(lat.m, lat.p_hi, g.dx);
   const double T = g.period();
   const size_t nl = lat.positions(T);
   CoefficientGrid c(lat, nl);
   const std::vector<cplx> spec = g.spectrum();
   const double s = std::ldexp(1.0, lat.m);
   std::vector<cplx> A(nl);
   for (long p = lat.p_lo; p <= lat.p_hi; ++p) {
      std::fill(A.begin(), A.end(), cplx(0.0));
      const double norm = packet_norm(lat.m, p, T);
      auto [k0, k1] = packet_bins(lat.m, p, T);
      for (long k = k0; k <= k1; ++k) {
         const double w = window_hat(s * two_pi * k / T - p);
         if (w == 0.0) { continue; }
         A[wrap(k, nl)] += spec[wrap(k, g.size())] * (std::sqrt(s) * w / (norm * T));
      }
      fft_backward(A);
      for (size_t n = 0; n < nl; ++n) {
         c.at(n, p) = A[n] * expi(-static_cast<double>(p) * lat.a * static_cast<double>(n));
      }
   }
   return c;
}

SampledFunction synthesize_raw(const CoefficientGrid &c, double x0, double dx, size_t n)
{
   const Lattice &lat = c.lattice;
   check_grid_holds(lat.m, lat.p_hi, dx);
   const double T = dx * static_cast<double>(n);
   if (lat.positions(T) != c.n_l) { throw ConfigError("coefficient grid does not match the period"); }
   const double s = std::ldexp(1.0, lat.m);
   std::vector<cplx> spec(n, cplx(0.0)), A(c.n_l);
   for (long p = lat.p_lo; p <= lat.p_hi; ++p) {
      bool any = false;
      for (size_t q = 0; q < c.n_l; ++q) {
         A[q] = c.at(q, p) * expi(static_cast<double>(p) * lat.a * static_cast<double>(q));
         any = any || A[q] != cplx(0.0);
      }
      if (!any) { continue; }
      fft_forward(A);
      const double norm = packet_norm(lat.m, p, T);
      auto [k0, k1] = packet_bins(lat.m, p, T);
      for (long k = k0; k <= k1; ++k) {
         const double w = window_hat(s * two_pi * k / T - p);
         if (w == 0.0) { continue; }
         spec[wrap(k, n)] += A[wrap(k, c.n_l)] * (std::sqrt(s) * w / norm);
      }
   }
   return SampledFunction::from_spectrum(x0, dx, spec, (lat.p_hi + 2) / s);
}

SampledFunction frame_operator(const SampledFunction &g, const Lattice &lat)
{
   return synthesize_raw(analyze(g, lat), g.x0, g.dx, g.size());
}

SampledFunction synthesize(const CoefficientGrid &c, double x0, double dx, size_t n, const CGOptions &opt)
{
   const SampledFunction b = synthesize_raw(c, x0, dx, n);
   const double bnorm = b.l2_norm();
   SampledFunction x(x0, dx, n, b.band_limit);
   if (bnorm == 0.0) { return x; }
   SampledFunction r = b, d = b;
   double rr = std::real(inner(r, r));
   for (int it = 0; it < opt.max_iter; ++it) {
      if (std::sqrt(rr) <= opt.tol * bnorm) { return x; }
      const SampledFunction Sd = frame_operator(d, c.lattice);
      const cplx dSd = inner(d, Sd);
      if (std::real(dSd) <= 0.0) { break; }
      const double alpha = rr / std::real(dSd);
      for (size_t i = 0; i < n; ++i) {
         x.values[i] += alpha * d.values[i];
         r.values[i] -= alpha * Sd.values[i];
      }
      const double rr_new = std::real(inner(r, r));
      const double beta = rr_new / rr;
      rr = rr_new;
      for (size_t i = 0; i < n; ++i) { d.values[i] = r.values[i] + beta * d.values[i]; }
   }
   if (std::sqrt(rr) <= opt.tol * bnorm) { return x; }
   throw FrameError("frame operator inversion stalled at residual " + std::to_string(std::sqrt(rr) / bnorm));
}

namespace {

SampledFunction band_project(const SampledFunction &f, double lo, double hi)
{
   std::vector<cplx> spec = f.spectrum();
   for (size_t q = 0; q < spec.size(); ++q) {
      const double xi = f.xi(q);
      if (xi < lo || xi > hi) { spec[q] = 0.0; }
   }
   return SampledFunction::from_spectrum(f.x0, f.dx, spec, f.band_limit);
}

// Rayleigh-quotient power iteration for the top eigenvalue of op on the band
double top_eigen(const std::function<SampledFunction(const SampledFunction &)> &op, SampledFunction v,
                 double lo, double hi, int iterations)
{
   double lambda = 0.0;
   for (int it = 0; it < iterations; ++it) {
      const double nv = v.l2_norm();
      if (nv == 0.0) { return 0.0; }
      v = cplx(1.0 / nv) * v;
      SampledFunction w = band_project(op(v), lo, hi);
      lambda = std::real(inner(w, v));
      v = std::move(w);
   }
   return lambda;
}

} // namespace

FrameBounds frame_bounds(const Lattice &lat, double x0, double dx, size_t n, double lo, double hi,
                         int iterations, unsigned long long seed)
{
   std::mt19937_64 rng(seed);
   std::normal_distribution<double> gauss;
   SampledFunction v(x0, dx, n);
   for (cplx &z : v.values) { z = cplx(gauss(rng), gauss(rng)); }
   v = band_project(v, lo, hi);
   auto S = [&](const SampledFunction &f) { return frame_operator(f, lat); };
   FrameBounds fb;
   fb.B = top_eigen(S, v, lo, hi, iterations);
   const double B = fb.B;
   auto shifted = [&](const SampledFunction &f) {
      SampledFunction Sf = S(f);
      for (size_t i = 0; i < Sf.size(); ++i) { Sf.values[i] = B * f.values[i] - Sf.values[i]; }
      return Sf;
   };
   fb.A = B - top_eigen(shifted, v, lo, hi, iterations);
   fb.iterations = iterations;
   return fb;
}

double freq_cutoff(double xi) { return bumps().phi_window(xi); }

QOperator::QOperator(const Curve &c, int j, int m, bool with_remainder)
   : prof_(c, j, with_remainder), m_(m)
{
   if (!prof_.closed_form()) {
      // 2^m |xi| / p stays inside (3/4, 4) for |xi| in (3/2, 4)
      constexpr int n = 512;
      t_lo_ = 0.7;
      t_step_ = (4.2 - t_lo_) / n;
      R_tab_.resize(n + 1);
      r_tab_.resize(n + 1);
      R_tab_[0] = prof_(t_lo_);
      r_tab_[0] = prof_.d1(t_lo_);
      using boost::math::quadrature::gauss_kronrod;
      for (int i = 1; i <= n; ++i) {
         const double a = t_lo_ + (i - 1) * t_step_, b = a + t_step_;
         R_tab_[i] = R_tab_[i - 1] +
                     gauss_kronrod<double, 15>::integrate([this](double v) { return prof_.d1(v); }, a, b, 0, 0.0);
         r_tab_[i] = prof_.d1(b);
      }
   }
}

double QOperator::R(double x) const
{
   x = std::abs(x);
   if (R_tab_.empty()) { return prof_(x); }
   const double u = (x - t_lo_) / t_step_;
   const long i = static_cast<long>(std::floor(u));
   if (i < 0 || i >= static_cast<long>(R_tab_.size()) - 1) { return prof_(x); }
   const double s = u - i, h = t_step_;
   const double s2 = s * s, s3 = s2 * s;
   return (2 * s3 - 3 * s2 + 1) * R_tab_[i] + (s3 - 2 * s2 + s) * h * r_tab_[i] +
          (-2 * s3 + 3 * s2) * R_tab_[i + 1] + (s3 - s2) * h * r_tab_[i + 1];
}

cplx QOperator::symbol(long p, double xi) const
{
   const double w = freq_cutoff(xi);
   if (w == 0.0) { return 0.0; }
   return w * expi(-static_cast<double>(p) * R(std::ldexp(xi, m_) / static_cast<double>(p)));
}

cplx QOperator::at(const SampledFunction &f, long p, double y) const
{
   const std::vector<cplx> spec = f.spectrum();
   return on_lattice(spec, f.period(), p, y, 1.0, 1)[0];
}

std::vector<cplx> QOperator::on_lattice(const std::vector<cplx> &spec, double T, long p, double y0,
                                        double step, size_t count) const
{
   const size_t n = spec.size();
   const long k1 = static_cast<long>(std::ceil(4.0 * T / two_pi));
   const long k0 = static_cast<long>(std::floor(1.5 * T / two_pi));
   if (2 * k1 >= static_cast<long>(n)) { throw AliasingError("f grid cannot hold the frequency cutoff"); }
   std::vector<cplx> out(count, cplx(0.0));
   const double Mr = T / step;
   const double M = std::round(Mr);
   if (count > 1 && M >= 1 && std::abs(Mr - M) <= 1e-9 * Mr) {
      const size_t mm = static_cast<size_t>(M);
      std::vector<cplx> A(mm, cplx(0.0));
      for (long sgn = -1; sgn <= 1; sgn += 2) {
         for (long k = k0; k <= k1; ++k) {
            const long kk = sgn * k;
            const double xi = two_pi * kk / T;
            const cplx sym = symbol(p, xi);
            if (sym == cplx(0.0)) { continue; }
            A[wrap(kk, mm)] += spec[wrap(kk, n)] * sym * expi(xi * y0) / T;
         }
      }
      fft_backward(A);
      for (size_t q = 0; q < count; ++q) { out[q] = A[q % mm]; }
      return out;
   }
   for (long sgn = -1; sgn <= 1; sgn += 2) {
      for (long k = k0; k <= k1; ++k) {
         const long kk = sgn * k;
         const double xi = two_pi * kk / T;
         const cplx sym = symbol(p, xi);
         if (sym == cplx(0.0)) { continue; }
         const cplx base = spec[wrap(kk, n)] * sym / T;
         for (size_t q = 0; q < count; ++q) { out[q] += base * expi(xi * (y0 + step * static_cast<double>(q))); }
      }
   }
   return out;
}

double QOperator::lipschitz_constant()
{
   using boost::math::quadrature::gauss_kronrod;
   static const double c = std::sqrt(
      2.0 * gauss_kronrod<double, 61>::integrate(
               [](double x) {
                  const double w = freq_cutoff(x);
                  return x * x * w * w;
               },
               1.5, 4.0, 10, 1e-14) /
      two_pi);
   return c;
}

} // namespace bht
