#include "bht/dual_phase.hpp"

#include "bht/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <memory>

namespace bht {

namespace {

using boost::math::quadrature::gauss_kronrod;

double quad(const RealFn &f, double a, double b)
{
   if (a == b) { return 0.0; }
   return gauss_kronrod<double, 31>::integrate(f, a, b, 12, 1e-13);
}

} // namespace

PhasePair make_dual(RealFn phi, RealFn phi_prime, double t_lo, double t_hi)
{
   if (!(t_hi > t_lo)) { throw DomainError("make_dual: empty interval"); }
   constexpr int K = 256;
   int dir = 0;
   double prev = phi_prime(t_lo);
   for (int i = 1; i <= K; ++i) {
      const double v = phi_prime(t_lo + (t_hi - t_lo) * i / K);
      const int d = v > prev ? 1 : (v < prev ? -1 : 0);
      if (d == 0 || (dir != 0 && d != dir)) {
         throw MonotonicityError("phi' is not strictly monotone on the interval");
      }
      dir = d;
      prev = v;
   }
   PhasePair pp;
   pp.phi = phi;
   pp.phi_prime = phi_prime;
   pp.t_lo = t_lo;
   pp.t_hi = t_hi;
   const double a = phi_prime(t_lo), b = phi_prime(t_hi);
   pp.xi_lo = std::min(a, b);
   pp.xi_hi = std::max(a, b);

   pp.psi_prime = [phi_prime, t_lo, t_hi, dir](double xi) {
      double lo = t_lo, hi = t_hi;
      auto f = [&](double t) { return dir * (phi_prime(t) - xi); };
      if (f(lo) > 0 || f(hi) < 0) { throw RangeError("psi': xi outside phi'(interval)"); }
      while (hi - lo > 1e-6 * std::max(1.0, std::abs(lo))) {
         const double mid = 0.5 * (lo + hi);
         (f(mid) < 0 ? lo : hi) = mid;
      }
      double t = 0.5 * (lo + hi);
      for (int it = 0; it < 40; ++it) {
         const double h = 1e-6 * std::max(1.0, std::abs(t));
         const double d = (f(t + h) - f(t - h)) / (2 * h);
         const double step = f(t) / d;
         double nt = t - step;
         if (!(nt >= lo && nt <= hi)) { break; }
         t = nt;
         if (std::abs(step) <= 1e-12 * std::max(1.0, std::abs(t))) { break; }
      }
      return t;
   };
   const RealFn psip = pp.psi_prime;
   const double xi0 = a, anchor = t_lo * a - phi(t_lo);
   pp.psi = [psip, xi0, anchor](double xi) { return anchor + quad(psip, xi0, xi); };
   return pp;
}

RProfile::RProfile(const Curve &c, int j, bool with_remainder)
   : curve_(c), j_(j), side_(side_of_scale(j))
{
   closed_ = !with_remainder && has_limit(c, side_);
   if (closed_) {
      const double k = side_ == Side::origin ? c.power_origin : c.power_infinity;
      expo_ = 1.0 / (k - 1.0);
   }
}

double RProfile::r_at(double s) const
{
   return closed_ ? std::pow(s, expo_) : profile_r(curve_, j_, s);
}

double RProfile::operator()(double x) const
{
   if (closed_) {
      const double e = expo_ + 1.0;
      return (std::pow(x, e) - 1.0) / e;
   }
   return quad([this](double v) { return r_at(v); }, 1.0, x);
}

double RProfile::d1(double x) const { return r_at(x); }

double RProfile::d2(double x) const
{
   if (closed_) { return expo_ * std::pow(x, expo_ - 1.0); }
   const double h = 1e-4 * std::abs(x);
   return (r_at(x - 2 * h) - 8 * r_at(x - h) + 8 * r_at(x + h) - r_at(x + 2 * h)) / (12 * h);
}

double R_profile(const Curve &c, int j, double x, bool with_remainder)
{
   return RProfile(c, j, with_remainder)(x);
}

PhasePair phi_pair(int p, int q, const Curve &c, int j, bool with_remainder)
{
   if (p == q) { throw DegenerateError("phi_pair needs p != p'"); }
   if (p <= 0 || q <= 0) { throw DomainError("phi_pair: p, p' must be positive"); }
   const int m = static_cast<int>(std::floor(std::log2(std::min(p, q))));
   auto R = std::make_shared<RProfile>(c, j, with_remainder);
   const double pd = p, qd = q;
   RealFn phi = [R, pd, qd](double t) { return pd * (*R)(t / pd) - qd * (*R)(t / qd); };
   RealFn dphi = [R, pd, qd](double t) { return R->d1(t / pd) - R->d1(t / qd); };
   const double scale = std::ldexp(1.0, m);
   return make_dual(phi, dphi, 0.5 * scale, 4.0 * scale);
}

double mean_value_factor(int p, int q, double t, const Curve &c, int j)
{
   if (p == q) { throw DegenerateError("mean_value_factor needs p != p'"); }
   RProfile R(c, j);
   const double num = R.d1(t / p) - R.d1(t / q);
   return num / (t * (1.0 / p - 1.0 / q));
}

} // namespace bht
