#include "bht/exp_sums.hpp"

#include "bht/errors.hpp"
#include "bht/seeding.hpp"

#include <quadmath.h>

#include <algorithm>
#include <cmath>
#include <future>
#include <ostream>
#include <random>
#include <string>

namespace bht {

namespace {

// sum of +-n/d with n, d integers; the integer parts are kept exactly and
// reduced mod 2 pi in quad precision
struct Phase {
   long long whole = 0;
   long double frac = 0.0L;

   void add(long long n, long long d, int sign)
   {
      whole += sign * (n / d);
      frac += sign * static_cast<long double>(n % d) / static_cast<long double>(d);
   }
   double reduced() const
   {
      static const __float128 two_pi = 2 * acosq(static_cast<__float128>(-1));
      __float128 x = static_cast<__float128>(whole);
      x -= two_pi * floorq(x / two_pi);
      return static_cast<double>(x + static_cast<__float128>(frac));
   }
};

cplx cis(const Phase &ph) { return std::polar(1.0, ph.reduced()); }

// Neumaier-compensated complex sum
struct CompensatedSum {
   double re = 0, im = 0, cre = 0, cim = 0;

   static void step(double &s, double &c, double x)
   {
      const double t = s + x;
      c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
      s = t;
   }
   void add(cplx z)
   {
      step(re, cre, z.real());
      step(im, cim, z.imag());
   }
   cplx value() const { return {re + cre, im + cim}; }
};

long lo_of(int m) { return 1L << m; }
long hi_of(int m) { return 2L << m; }

void check_sequence(const std::vector<cplx> &a, int m, const char *name)
{
   if (a.size() != static_cast<size_t>(lo_of(m) + 1)) {
      throw DomainError(std::string(name) + " must have 2^m + 1 entries");
   }
}

double norm2(const std::vector<cplx> &a)
{
   double s = 0;
   for (const cplx &z : a) { s += std::norm(z); }
   return std::sqrt(s);
}

} // namespace

void ExpSumSpec::validate() const
{
   if (m < 1 || m > 20) { throw IndexError("m out of range"); }
   const long lo = lo_of(m), hi = hi_of(m);
   if (p < lo || p > hi || l < lo || l > hi) { throw IndexError("p, l must lie in [2^m, 2^(m+1)]"); }
   const long half = lo / 2;
   if (alpha < 0 || alpha > half || beta < 0 || beta > half) { throw IndexError("alpha, beta must lie in [0, 2^(m-1)]"); }
   if (p - alpha < 1 || l - alpha < 1) { throw IndexError("p - alpha and l - alpha must be >= 1"); }
}

cplx sum_term(const ExpSumSpec &s, long r)
{
   const long long r2 = static_cast<long long>(r) * r;
   const long long rb = static_cast<long long>(r - s.beta) * (r - s.beta);
   Phase ph;
   ph.add(r2, s.p, 1);
   ph.add(r2, s.l, -1);
   ph.add(rb, s.p - s.alpha, -1);
   ph.add(rb, s.l - s.alpha, 1);
   return cis(ph);
}

cplx s_sum(const ExpSumSpec &s)
{
   s.validate();
   CompensatedSum acc;
   for (long r = lo_of(s.m); r <= hi_of(s.m); ++r) { acc.add(sum_term(s, r)); }
   return std::ldexp(1.0, -s.m) * acc.value();
}

namespace {

std::vector<cplx> terms(const ExpSumSpec &s, long extra)
{
   std::vector<cplx> v;
   v.reserve(static_cast<size_t>(lo_of(s.m) + 1 + extra));
   for (long r = lo_of(s.m); r <= hi_of(s.m) + extra; ++r) { v.push_back(sum_term(s, r)); }
   return v;
}

cplx correlation(const std::vector<cplx> &v, long n, long h, int m)
{
   CompensatedSum acc;
   for (long i = 0; i < n; ++i) { acc.add(v[i + h] * std::conj(v[i])); }
   return std::ldexp(1.0, -m) * acc.value();
}

} // namespace

cplx v_h(const ExpSumSpec &s, long h)
{
   s.validate();
   if (h < 0 || h >= lo_of(s.m)) { throw IndexError("h must lie in [0, 2^m)"); }
   const std::vector<cplx> v = terms(s, h);
   return correlation(v, lo_of(s.m) + 1, h, s.m);
}

double vdc_step(const ExpSumSpec &s, long H)
{
   s.validate();
   if (H < 1 || H > lo_of(s.m)) { throw IndexError("H must lie in [1, 2^m]"); }
   const std::vector<cplx> v = terms(s, H);
   const long n = lo_of(s.m) + 1;
   double acc = 0;
   for (long h = 0; h < H; ++h) { acc += std::abs(correlation(v, n, h, s.m)); }
   return std::sqrt(acc / H) + std::ldexp(static_cast<double>(H), -s.m);
}

double s_bound(const ExpSumSpec &s)
{
   const double prod = static_cast<double>(s.alpha) * std::abs(static_cast<double>(s.p - s.l));
   if (prod == 0.0) { return 1.0; }
   return std::min(1.0, std::sqrt(static_cast<double>(s.m)) * std::cbrt(std::ldexp(1.0, s.m) / prod));
}

VdcScan vdc_scan(const ExpSumSpec &s)
{
   s.validate();
   const long N = lo_of(s.m);
   const std::vector<cplx> v = terms(s, N);
   VdcScan out;
   out.abs_S = std::abs(s_sum(s));
   const double prod = static_cast<double>(s.alpha) * std::abs(static_cast<double>(s.p - s.l));
   out.crossover = prod == 0.0 ? INFINITY : std::ldexp(1.0, 2 * s.m) / prod;
   out.predicted = prod == 0.0 ? INFINITY : std::sqrt(static_cast<double>(s.m)) * std::cbrt(std::ldexp(1.0, s.m) / prod);
   double acc = 0;
   long next = 1;
   out.best_bound = INFINITY;
   for (long h = 0; h < N; ++h) {
      acc += std::abs(correlation(v, N + 1, h, s.m));
      if (h + 1 == next) {
         const double b = std::sqrt(acc / next) + std::ldexp(static_cast<double>(next), -s.m);
         out.steps.emplace_back(next, b);
         if (b < out.best_bound) {
            out.best_bound = b;
            out.best_H = next;
         }
         next *= 2;
      }
   }
   return out;
}

std::vector<ExpSumSpec> random_specs(int m, int samples, unsigned long long seed)
{
   std::vector<ExpSumSpec> out;
   const long lo = lo_of(m), half = lo / 2;
   for (int i = 0; i < samples; ++i) {
      std::mt19937_64 rng = item_rng(seed, static_cast<unsigned long long>(i));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      ExpSumSpec s;
      s.m = m;
      s.alpha = std::clamp(std::lround(std::exp2(unit(rng) * (m - 1))), 1L, half);
      const long gap = std::clamp(std::lround(std::exp2(unit(rng) * m)), 1L, lo);
      std::uniform_int_distribution<long> start(lo, 2 * lo - gap);
      s.p = start(rng);
      s.l = s.p + gap;
      if (unit(rng) < 0.5) { std::swap(s.p, s.l); }
      s.beta = std::uniform_int_distribution<long>(1, half)(rng);
      out.push_back(s);
   }
   return out;
}

SBoundReport s_bound_check(int m, int samples, unsigned long long seed, int threads, double limit)
{
   if (m < 6 || m > 14) { throw PreconditionError("s_bound_check needs m in [6, 14]"); }
   const std::vector<ExpSumSpec> specs = random_specs(m, samples, seed);
   SBoundReport rep;
   rep.m = m;
   rep.rows.resize(specs.size());
   auto work = [&](size_t begin, size_t step) {
      for (size_t i = begin; i < specs.size(); i += step) {
         SBoundRow &row = rep.rows[i];
         row.spec = specs[i];
         row.abs_S = std::abs(s_sum(specs[i]));
         row.bound = s_bound(specs[i]);
         row.ratio = row.abs_S / row.bound;
      }
   };
   const size_t nt = static_cast<size_t>(std::max(1, threads));
   std::vector<std::future<void>> jobs;
   for (size_t t = 1; t < nt; ++t) { jobs.push_back(std::async(std::launch::async, work, t, nt)); }
   work(0, nt);
   for (auto &j : jobs) { j.get(); }
   for (const auto &row : rep.rows) { rep.max_ratio = std::max(rep.max_ratio, row.ratio); }
   rep.pass = rep.max_ratio <= limit;
   return rep;
}

void write_csv(const SBoundReport &rep, std::ostream &out)
{
   out << "m,p,l,alpha,beta,abs_S,bound,ratio\n";
   out.precision(17);
   for (const auto &r : rep.rows) {
      out << r.spec.m << ',' << r.spec.p << ',' << r.spec.l << ',' << r.spec.alpha << ',' << r.spec.beta << ','
          << r.abs_S << ',' << r.bound << ',' << r.ratio << '\n';
   }
}

namespace {

// exp(i r^2 / p) for r, p in [2^m, 2^(m+1)], row-major in r
std::vector<cplx> square_table(int m)
{
   const long lo = lo_of(m), n = lo + 1;
   std::vector<cplx> t(static_cast<size_t>(n * n));
   for (long r = 0; r < n; ++r) {
      const long long r2 = static_cast<long long>(r + lo) * (r + lo);
      for (long p = 0; p < n; ++p) {
         Phase ph;
         ph.add(r2, p + lo, 1);
         t[r * n + p] = cis(ph);
      }
   }
   return t;
}

// x_q conj(x_(q - shift)) over the index range, zero where q - shift falls below it
std::vector<cplx> shifted_product(const std::vector<cplx> &x, long shift)
{
   std::vector<cplx> out(x.size(), cplx(0.0));
   for (size_t q = static_cast<size_t>(shift); q < x.size(); ++q) { out[q] = x[q] * std::conj(x[q - shift]); }
   return out;
}

} // namespace

BilinearVdc bilinear_vdc(const std::vector<cplx> &a, const std::vector<cplx> &b, long alpha, long beta, int m)
{
   check_sequence(a, m, "a");
   check_sequence(b, m, "b");
   const long lo = lo_of(m), half = lo / 2;
   if (alpha < 1 || alpha > half || beta < 1 || beta > half) { throw IndexError("alpha, beta must lie in [1, 2^(m-1)]"); }
   CompensatedSum acc;
   for (long i = 0; i <= lo; ++i) {
      if (a[i] == 0.0) { continue; }
      const long p = lo + i;
      cplx row = 0.0;
      for (long k = 0; k <= lo; ++k) {
         const long r = lo + k;
         Phase ph;
         ph.add(static_cast<long long>(r) * r, p, 1);
         ph.add(static_cast<long long>(r - beta) * (r - beta), p - alpha, -1);
         row += b[k] * cis(ph);
      }
      acc.add(a[i] * row);
   }
   BilinearVdc out;
   out.value = std::ldexp(std::abs(acc.value()), -m);
   out.bound = std::pow(static_cast<double>(m), 0.25) * std::pow(static_cast<double>(alpha), -1.0 / 6.0) * norm2(a) * norm2(b);
   out.constant = out.bound > 0 ? out.value / out.bound : 0.0;
   return out;
}

double default_alpha0(int m) { return std::pow(static_cast<double>(m), 3.0 / 14.0) * std::exp2(6.0 * m / 7.0); }

double m_split_bound(const std::vector<cplx> &f, const std::vector<cplx> &g, int m, double alpha0)
{
   check_sequence(f, m, "f");
   check_sequence(g, m, "g");
   const long lo = lo_of(m), half = lo / 2;
   const long a0 = std::clamp(static_cast<long>(std::floor(alpha0)), 0L, half);
   // ||a^alpha||_1,2 for alpha in [0, 2^(m-1)] and ||b^beta||_1,2 for beta in [0, 2^m]
   std::vector<double> a1(half + 1), a2(half + 1), b1(lo + 1), b2(lo + 1);
   for (long s = 0; s <= lo; ++s) {
      double n1 = 0, n2 = 0, k1 = 0, k2 = 0;
      for (long q = s; q <= lo; ++q) {
         const double x = std::abs(f[q] * std::conj(f[q - s]));
         n1 += x;
         n2 += x * x;
         if (s <= half) {
            const double y = std::abs(g[q] * std::conj(g[q - s]));
            k1 += y;
            k2 += y * y;
         }
      }
      b1[s] = n1;
      b2[s] = n2;
      if (s <= half) {
         a1[s] = k1;
         a2[s] = k2;
      }
   }
   double A1 = 0, A2 = 0;
   for (long a = 0; a <= a0; ++a) { A1 += a1[a] * a1[a]; }
   for (long a = a0; a <= half; ++a) { A2 += a2[a]; }
   const double vdc = std::pow(static_cast<double>(m), 0.25) / (std::pow(static_cast<double>(a0), 1.0 / 6.0) + 1.0);
   double total = 0;
   for (long kappa = 0; kappa <= half; ++kappa) {
      double B1 = 0, B2 = 0;
      for (long a = 0; a <= a0; ++a) {
         const long s = a + kappa;
         if (s <= lo) { B1 += b1[s] * b1[s]; }
      }
      for (long a = a0; a <= half; ++a) {
         const long s = a + kappa;
         if (s <= lo) { B2 += b2[s]; }
      }
      total += (std::ldexp(std::sqrt(A1 * B1), -m) + vdc * std::sqrt(A2 * B2)) / (kappa + 1.0);
   }
   return std::ldexp(total, -m);
}

long optimal_alpha0(const std::vector<cplx> &f, const std::vector<cplx> &g, int m)
{
   const long half = lo_of(m) / 2;
   long best = 1;
   double best_v = INFINITY;
   for (long a = 1; a <= half; ++a) {
      const double v = m_split_bound(f, g, m, static_cast<double>(a));
      if (v < best_v) {
         best_v = v;
         best = a;
      }
   }
   return best;
}

MReport m_functional(const std::vector<cplx> &f, const std::vector<cplx> &g, int m, double alpha0)
{
   check_sequence(f, m, "f");
   check_sequence(g, m, "g");
   const long lo = lo_of(m), half = lo / 2, n = lo + 1;
   const std::vector<cplx> T = square_table(m);
   std::vector<std::vector<cplx>> A(half + 1), B(half + 1);
   for (long s = 0; s <= half; ++s) {
      A[s] = shifted_product(g, s);
      B[s] = shifted_product(f, s);
   }
   double total = 0;
   for (long alpha = 0; alpha <= half; ++alpha) {
      for (long beta = 0; beta <= half; ++beta) {
         CompensatedSum acc;
         for (long p = alpha; p < n; ++p) {
            const cplx ap = A[alpha][p];
            if (ap == 0.0) { continue; }
            cplx row = 0.0;
            for (long r = beta; r < n; ++r) { row += B[beta][r] * T[r * n + p] * std::conj(T[(r - beta) * n + p - alpha]); }
            acc.add(ap * row);
         }
         total += std::abs(acc.value()) / (std::abs(alpha - beta) + 1.0);
      }
   }
   MReport rep;
   rep.value = std::ldexp(total, -2 * m);
   rep.alpha0 = alpha0;
   rep.split_bound = m_split_bound(f, g, m, alpha0);
   rep.envelope = std::pow(static_cast<double>(m), 17.0 / 14.0) * std::exp2(-m - m / 7.0);
   const double ff = std::pow(norm2(f), 2), gg = std::pow(norm2(g), 2);
   rep.constant = ff * gg > 0 ? rep.value / (rep.envelope * ff * gg) : 0.0;
   return rep;
}

} // namespace bht
