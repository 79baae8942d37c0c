#pragma once

#include <complex>
#include <functional>
#include <stdexcept>

namespace bht {

using cplx = std::complex<double>;
using RealFn = std::function<double(double)>;

struct SymbolSample {
   cplx value{0.0, 0.0};
   double est_error = 0.0;
   int panels = 0;
   bool converged = true;
};

struct ToleranceNotMet : std::runtime_error {
   ToleranceNotMet(const std::string &what, SymbolSample s)
      : std::runtime_error(what), best(s) {}
   SymbolSample best;
};

struct QuadOptions {
   double tol = 1e-10;        // absolute
   double rel_tol = 0.0;      // optional, against |value|
   double panel_cap = 0.25;   // widest panel allowed
   int max_panels = 400000;
   bool throw_on_fail = true;
};

// integral over [a,b] of exp(i phase(t)) amplitude(t) dt. Panels are kept narrower
// than 2 pi / max|phase'| so each sees at most one oscillation, then refined
// adaptively with 7/15-point Gauss-Kronrod pairs. est_error includes a
// round-off floor proportional to eps * |phase| * integral |amplitude|.
SymbolSample integrate_oscillatory(const RealFn &phase, const RealFn &phase_deriv,
                                   const RealFn &amplitude, double a, double b,
                                   const QuadOptions &opt = {});

// Same engine for a plain complex integrand (no phase hint).
SymbolSample integrate_complex(const std::function<cplx(double)> &f, double a,
                               double b, const QuadOptions &opt = {});

} // namespace bht
