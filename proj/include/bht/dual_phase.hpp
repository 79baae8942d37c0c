#pragma once

#include "bht/curves.hpp"

namespace bht {

struct PhasePair {
   RealFn phi, phi_prime;
   RealFn psi_prime; // inverse of phi_prime
   RealFn psi;       // anchored so psi(phi'(t0)) = t0 phi'(t0) - phi(t0), t0 = t_lo
   double t_lo = 0.0, t_hi = 0.0;   // where phi lives
   double xi_lo = 0.0, xi_hi = 0.0; // phi_prime image, sorted
};

// Legendre dual of phi on [t_lo, t_hi]. phi_prime must be strictly monotone there.
PhasePair make_dual(RealFn phi, RealFn phi_prime, double t_lo, double t_hi);

// R(x) = int_1^x r(v) dv for the curve at scale j. By default r is the
// limit profile when it has a closed form; with_remainder uses the exact
// scale-j profile (R + R_j), integrated numerically.
class RProfile {
public:
   RProfile(const Curve &c, int j, bool with_remainder = false);

   double operator()(double x) const; // R
   double d1(double x) const;         // r
   double d2(double x) const;         // r'
   bool closed_form() const { return closed_; }

private:
   double r_at(double s) const;
   Curve curve_;
   int j_;
   Side side_;
   bool closed_;
   double expo_ = 0.0; // r(s) = s^expo_ in closed form
};

double R_profile(const Curve &c, int j, double x, bool with_remainder = false);

// Phi(t) = p R(t/p) - p' R(t/p') on |t| ~ 2^m, m = floor(log2 p)
PhasePair phi_pair(int p, int p_prime, const Curve &c, int j, bool with_remainder = false);

// Phi'(t) / (t (1/p - 1/p')), the R'' value hidden in the mean value identity
double mean_value_factor(int p, int p_prime, double t, const Curve &c, int j);

} // namespace bht
