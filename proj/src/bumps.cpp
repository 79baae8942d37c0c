#include "bht/bumps.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <stdexcept>

namespace bht {

double smooth_exp(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

double smooth_step(double x)
{
   if (x <= 0.0) { return 0.0; }
   if (x >= 1.0) { return 1.0; }
   const double a = smooth_exp(x), b = smooth_exp(1.0 - x);
   return a / (a + b);
}

double mollifier(double x)
{
   const double s = 1.0 - x * x;
   return s > 0.0 ? std::exp(-1.0 / s) : 0.0;
}

double bump_on(double x, double a, double b)
{
   return mollifier((2.0 * x - a - b) / (b - a));
}

BumpKit::BumpKit()
{
   using boost::math::quadrature::gauss_kronrod;
   const double area = gauss_kronrod<double, 61>::integrate(
      [](double t) { return bump_on(t, 0.25, 1.0); }, 0.25, 1.0, 15, 1e-15);
   rho_scale_ = 1.0 / area;
}

double BumpKit::rho(double t) const
{
   const double a = std::abs(t);
   const double v = rho_scale_ * bump_on(a, 0.25, 1.0);
   return t < 0.0 ? -v : v;
}

double BumpKit::rho_d1(double t) const
{
   // d/dt of sign(t) C exp(-1/(1-u^2)), u = (2|t| - 5/4)/(3/4); even in t
   const double a = std::abs(t);
   const double u = (2.0 * a - 1.25) / 0.75;
   const double s = 1.0 - u * u;
   if (s <= 0.0) { return 0.0; }
   const double v = rho_scale_ * std::exp(-1.0 / s);
   return v * (-2.0 * u / (s * s)) * (2.0 / 0.75);
}

void BumpKit::raw_nu(double x, double &b0, double &b1, double &b2) const
{
   const double a = std::abs(x);
   b0 = mollifier(x / 0.9);
   b1 = bump_on(a, 0.5, 2.0);
   b2 = smooth_exp(a - 1.5);
}

double BumpKit::nu0(double x) const { return nu(0, x); }
double BumpKit::nu1(double x) const { return nu(1, x); }
double BumpKit::nu2(double x) const { return nu(2, x); }

double BumpKit::nu(int k, double x) const
{
   double b[3];
   raw_nu(x, b[0], b[1], b[2]);
   if (k < 0 || k > 2) { throw std::out_of_range("nu index"); }
   return b[k] / (b[0] + b[1] + b[2]);
}

double BumpKit::phi_window(double x) const { return nu2(x) - nu2(0.5 * x); }

const BumpKit &bumps()
{
   static const BumpKit kit;
   return kit;
}

} // namespace bht
