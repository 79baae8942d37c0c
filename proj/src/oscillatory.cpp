#include "bht/oscillatory.hpp"

#include "bht/bumps.hpp"
#include "bht/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace bht {

SymbolSample compute_mj(const Curve &c, int j, double xi, double eta, const QuadOptions &opt)
{
   const double u = std::ldexp(1.0, -j);
   const BumpKit &bk = bumps();
   RealFn phase = [&](double t) { return -xi * u * t + eta * c.eval(u * t); };
   RealFn dphase = [&](double t) { return -xi * u + eta * u * c.d1(u * t); };
   RealFn amp = [&](double t) { return bk.rho(t); };
   SymbolSample neg = integrate_oscillatory(phase, dphase, amp, -1.0, -0.25, opt);
   SymbolSample pos = integrate_oscillatory(phase, dphase, amp, 0.25, 1.0, opt);
   SymbolSample s;
   s.value = neg.value + pos.value;
   s.est_error = neg.est_error + pos.est_error;
   s.panels = neg.panels + pos.panels;
   s.converged = neg.converged && pos.converged;
   return s;
}

namespace {

SymbolSample scaled(const Curve &c, int j, double xi, double eta, double factor, const QuadOptions &opt)
{
   if (factor == 0.0) { return SymbolSample{}; }
   SymbolSample s = compute_mj(c, j, xi, eta, opt);
   s.value *= factor;
   s.est_error *= std::abs(factor);
   return s;
}

} // namespace

SymbolSample compute_mj_kl(const Curve &c, int j, int k, int l, double xi, double eta,
                           const QuadOptions &opt)
{
   if (k < 0 || k > 2 || l < 0 || l > 2) { throw DomainError("k, l must be in {0,1,2}"); }
   const double u = std::ldexp(1.0, -j);
   const BumpKit &bk = bumps();
   const double f = bk.nu(k, xi * u) * bk.nu(l, u * c.d1(u) * eta);
   return scaled(c, j, xi, eta, f, opt);
}

SymbolSample compute_m22_piece(const Curve &c, int j, int m, int n, double xi, double eta,
                               const QuadOptions &opt)
{
   if (m < 0 || n < 0) { throw DomainError("m, n must be non-negative"); }
   const double u = std::ldexp(1.0, -j);
   const BumpKit &bk = bumps();
   const double f = bk.phi_window(xi / std::ldexp(1.0, m + j)) *
                    bk.phi_window(eta * c.d1(u) / std::ldexp(1.0, n + j));
   return scaled(c, j, xi, eta, f, opt);
}

cplx stationary_phase_model(const RealFn &omega, const RealFn &omega_d1, const RealFn &omega_d2,
                            const RealFn &a, double lambda, double p)
{
   if (std::abs(omega_d1(p)) > 1e-8) { throw NotStationary("omega'(p) is not zero"); }
   const double w2 = omega_d2(p);
   if (w2 == 0.0) { throw NotStationary("omega''(p) vanishes"); }
   const double ap = a(p);
   if (ap == 0.0) { return 0.0; }
   // int exp(-pi i lambda w2 x^2 / 2) dx = sqrt(2 / (lambda |w2|)) exp(-i pi sgn(w2) / 4)
   const double sg = w2 > 0 ? 1.0 : -1.0;
   const cplx fresnel = std::polar(std::sqrt(2.0), -sg * std::numbers::pi / 4);
   return fresnel * std::polar(1.0, -std::numbers::pi * lambda * omega(p)) / std::sqrt(lambda * std::abs(w2)) * ap;
}

DecayFit stationary_phase_error_sweep(const std::vector<double> &lambdas)
{
   std::vector<std::pair<double, double>> pts;
   RealFn w = [](double x) { return x * x; };
   RealFn w1 = [](double x) { return 2 * x; };
   RealFn w2 = [](double) { return 2.0; };
   RealFn a = [](double x) { return std::exp(-x * x); };
   QuadOptions opt;
   opt.tol = 1e-13;
   for (double lam : lambdas) {
      const double k = -std::numbers::pi * lam;
      SymbolSample q = integrate_oscillatory([&](double x) { return k * w(x); },
                                             [&](double x) { return k * w1(x); }, a, -6.5, 6.5, opt);
      const cplx main = stationary_phase_model(w, w1, w2, a, lam, 0.0);
      pts.emplace_back(std::log2(lam), std::abs(q.value - main));
   }
   return fit_decay(pts);
}

StationaryPoint stationary_point(const Curve &c, int j, double xi, double eta)
{
   const double u = std::ldexp(1.0, -j);
   if (eta == 0.0) { throw NoStationaryPoint("eta = 0"); }
   double s = 0.0;
   try {
      s = invert_gamma_prime(c, xi / eta, Branch::positive, side_of_scale(j));
   } catch (const std::exception &) {
      throw NoStationaryPoint("xi/eta outside the range of gamma'");
   }
   const double t = s / u;
   if (!(t > 0.25 && t < 1.0)) { throw NoStationaryPoint("t_m outside supp rho"); }
   StationaryPoint sp;
   sp.t = t;
   sp.phase = -xi * u * t + eta * c.eval(u * t);
   sp.phase_d2 = eta * u * u * c.d2(u * t);
   return sp;
}

cplx main_term_m22(const Curve &c, int j, int m, double xi, double eta)
{
   const StationaryPoint sp = stationary_point(c, j, xi, eta);
   const double u = std::ldexp(1.0, -j);
   const BumpKit &bk = bumps();
   const double cut = bk.phi_window(xi / std::ldexp(1.0, m + j)) *
                      bk.phi_window(eta * c.d1(u) / std::ldexp(1.0, m + j));
   if (cut == 0.0) { return 0.0; }
   // exp(i phase) integrated against rho: sqrt(2 pi / |phase''|) exp(i pi sgn / 4) rho(t_m)
   const double sg = sp.phase_d2 > 0 ? 1.0 : -1.0;
   const cplx rho_star = bk.rho(sp.t) * std::sqrt(2 * std::numbers::pi * std::ldexp(1.0, m) / std::abs(sp.phase_d2)) *
                         std::polar(1.0, sg * std::numbers::pi / 4);
   return std::pow(2.0, -0.5 * m) * std::polar(1.0, sp.phase) * rho_star * cut;
}

namespace {

// (xi, eta) grid covering supp phi(xi/2^(m+j)) x supp phi(eta gamma'(2^-j)/2^(n+j))
std::vector<std::pair<double, double>> support_grid(const Curve &c, int j, int m, int n, int samples)
{
   const double u = std::ldexp(1.0, -j);
   const double g1 = c.d1(u);
   std::vector<std::pair<double, double>> pts;
   for (int a = 0; a < samples; ++a) {
      const double x = 1.5 + 2.5 * (a + 0.5) / samples;
      for (int b = 0; b < samples; ++b) {
         const double y = 1.5 + 2.5 * (b + 0.5) / samples;
         pts.emplace_back(std::ldexp(x, m + j), std::ldexp(y, n + j) / g1);
      }
   }
   return pts;
}

} // namespace

SweepReport diagonal_error_sweep(const Curve &c, int j, const std::vector<int> &ms, int samples)
{
   SweepReport rep;
   std::vector<std::pair<double, double>> pts;
   QuadOptions opt;
   opt.tol = 1e-12;
   for (int m : ms) {
      SweepPoint row;
      row.m = m;
      for (auto [xi, eta] : support_grid(c, j, m, m, samples)) {
         const SymbolSample s = compute_m22_piece(c, j, m, m, xi, eta, opt);
         cplx main = 0.0;
         try {
            main = main_term_m22(c, j, m, xi, eta);
         } catch (const NoStationaryPoint &) {
         }
         row.sup = std::max(row.sup, std::abs(s.value - main));
         row.est_error = std::max(row.est_error, s.est_error);
      }
      rep.rows.push_back(row);
      pts.emplace_back(m, row.sup);
   }
   rep.fit = fit_decay(pts);
   return rep;
}

SweepReport offdiagonal_decay_check(const Curve &c, int j, const std::vector<int> &ms, int offset,
                                    int samples, int min_gap)
{
   if (std::abs(offset) <= min_gap) {
      throw PreconditionError("off-diagonal check needs |m - n| > " + std::to_string(min_gap));
   }
   SweepReport rep;
   std::vector<std::pair<double, double>> pts;
   QuadOptions opt;
   opt.tol = 1e-14;
   for (int m : ms) {
      const int n = m + offset;
      if (n < 0) { continue; }
      SweepPoint row;
      row.m = m;
      for (auto [xi, eta] : support_grid(c, j, m, n, samples)) {
         const SymbolSample s = compute_m22_piece(c, j, m, n, xi, eta, opt);
         row.sup = std::max(row.sup, std::abs(s.value));
         row.est_error = std::max(row.est_error, s.est_error);
      }
      rep.rows.push_back(row);
      pts.emplace_back(std::max(m, n), row.sup);
   }
   rep.fit = fit_decay(pts);
   return rep;
}

HMReport check_hm_symbol(const Curve &c, int k, int l, std::pair<int, int> jr, int points,
                         unsigned long long seed)
{
   if (k < 0 || k > 1 || l < 0 || l > 1) { throw DomainError("k, l must be in {0,1}"); }
   std::mt19937_64 rng(seed);
   std::uniform_real_distribution<double> expo(-8.0, 8.0);
   std::bernoulli_distribution sign(0.5);
   QuadOptions opt;
   opt.tol = 1e-12;
   auto total = [&](double xi, double eta) {
      cplx s = 0.0;
      for (int j = jr.first; j <= jr.second; ++j) { s += compute_mj_kl(c, j, k, l, xi, eta, opt).value; }
      return s;
   };
   HMReport rep;
   constexpr double h = 1e-4;
   for (int i = 0; i < points; ++i) {
      const double xi = (sign(rng) ? -1 : 1) * std::exp2(expo(rng));
      const double eta = (sign(rng) ? -1 : 1) * std::exp2(expo(rng));
      const cplx dx = (total(xi * (1 + h), eta) - total(xi * (1 - h), eta)) / (2 * h);
      const cplx dy = (total(xi, eta * (1 + h)) - total(xi, eta * (1 - h))) / (2 * h);
      rep.max_xi = std::max(rep.max_xi, std::abs(dx));
      rep.max_eta = std::max(rep.max_eta, std::abs(dy));
      ++rep.points;
   }
   return rep;
}

} // namespace bht
