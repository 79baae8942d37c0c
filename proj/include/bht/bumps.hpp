#pragma once

namespace bht {

// exp(-1/x) for x > 0, zero otherwise.
double smooth_exp(double x);

// C-infinity step: 0 for x <= 0, 1 for x >= 1.
double smooth_step(double x);

// exp(-1/(1-x^2)) on (-1,1).
double mollifier(double x);

// mollifier affinely moved onto (a,b).
double bump_on(double x, double a, double b);

// The fixed cutoffs used by the multiplier decomposition.
class BumpKit {
public:
   BumpKit();

   // odd, supported in 1/4 < |t| < 1, integral over (1/4,1) equal to 1
   double rho(double t) const;
   double rho_d1(double t) const;

   double nu0(double x) const;
   double nu1(double x) const;
   double nu2(double x) const;
   double nu(int k, double x) const;

   // nu2(x) - nu2(x/2); supported in 3/2 < |x| < 4, so that
   // sum_{m>=0} phi_window(x/2^m) = nu2(x).
   double phi_window(double x) const;

   double rho_normalization() const { return rho_scale_; }

private:
   void raw_nu(double x, double &b0, double &b1, double &b2) const;
   double rho_scale_;
};

const BumpKit &bumps();

} // namespace bht
