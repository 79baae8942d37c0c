#include "bht/quadrature.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace bht {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Panel {
   double a, b;
   cplx value;
   double err;    // |K15 - G7|
   double floor;  // round-off estimate
   bool operator<(const Panel &o) const { return err < o.err; }
};

struct GK15 {
   const std::array<double, 8> &xk = boost::math::quadrature::gauss_kronrod<double, 15>::abscissa();
   const std::array<double, 8> &wk = boost::math::quadrature::gauss_kronrod<double, 15>::weights();
   const std::array<double, 4> &wg = boost::math::quadrature::gauss<double, 7>::weights();
};

const GK15 &gk() {
   static const GK15 t;
   return t;
}

template <class F>
Panel eval_panel(const F &f, double a, double b)
{
   const GK15 &t = gk();
   const double c = 0.5 * (a + b), h = 0.5 * (b - a);
   cplx k = 0.0, g = 0.0;
   double absum = 0.0, phmax = 0.0;
   for (int i = 0; i < 8; ++i) {
      const int nodes = i == 0 ? 1 : 2;
      for (int s = 0; s < nodes; ++s) {
         const double x = s == 0 ? c + h * t.xk[i] : c - h * t.xk[i];
         double ph = 0.0;
         const cplx v = f(x, ph);
         k += t.wk[i] * v;
         if (i % 2 == 0) { g += t.wg[i / 2] * v; }
         absum += t.wk[i] * std::abs(v);
         phmax = std::max(phmax, std::abs(ph));
      }
   }
   Panel p{a, b, k * h, std::abs((k - g) * h), 0.0};
   p.floor = 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + phmax) * absum * h;
   return p;
}

template <class F>
SymbolSample adapt(const F &f, std::vector<std::pair<double, double>> start,
                   const QuadOptions &opt)
{
   std::priority_queue<Panel> q;
   cplx total = 0.0;
   double err = 0.0, floor = 0.0;
   for (auto [a, b] : start) {
      Panel p = eval_panel(f, a, b);
      total += p.value;
      err += p.err;
      floor += p.floor;
      q.push(p);
   }
   int count = static_cast<int>(q.size());
   auto target = [&]() {
      return std::max(opt.tol, opt.rel_tol * std::abs(total));
   };
   // refinement cannot beat the round-off floor, so stop once the
   // discretization error drops below it
   while (!q.empty() && err > std::max(target(), floor) && count < opt.max_panels) {
      Panel p = q.top();
      if (p.err <= 0.0) { break; }
      q.pop();
      const double mid = 0.5 * (p.a + p.b);
      if (!(mid > p.a && mid < p.b)) { q.push(p); break; }
      Panel l = eval_panel(f, p.a, mid), r = eval_panel(f, mid, p.b);
      total += l.value + r.value - p.value;
      err += l.err + r.err - p.err;
      floor += l.floor + r.floor - p.floor;
      q.push(l);
      q.push(r);
      ++count;
   }
   // recompute the sums once to drop accumulated drift
   total = 0.0;
   err = 0.0;
   floor = 0.0;
   while (!q.empty()) {
      total += q.top().value;
      err += q.top().err;
      floor += q.top().floor;
      q.pop();
   }
   SymbolSample s;
   s.value = total;
   s.est_error = err + floor;
   s.panels = count;
   s.converged = err <= std::max(std::max(opt.tol, opt.rel_tol * std::abs(total)), floor);
   if (!s.converged && opt.throw_on_fail) {
      throw ToleranceNotMet("oscillatory quadrature did not reach tolerance", s);
   }
   return s;
}

} // namespace

SymbolSample integrate_oscillatory(const RealFn &phase, const RealFn &phase_deriv,
                                   const RealFn &amplitude, double a, double b,
                                   const QuadOptions &opt)
{
   if (!(b > a)) { return SymbolSample{}; }
   std::vector<std::pair<double, double>> start;
   double x = a;
   while (x < b) {
      double w = std::min(opt.panel_cap, b - x);
      for (int it = 0; it < 6; ++it) {
         double d = 0.0;
         for (int s = 0; s <= 4; ++s) {
            d = std::max(d, std::abs(phase_deriv(x + w * s / 4.0)));
         }
         const double wmax = kTwoPi / std::max(1.0, d);
         if (w <= wmax) { break; }
         w = std::max(wmax, 1e-12 * (b - a));
      }
      const double nx = (b - x - w < 1e-14 * (b - a)) ? b : x + w;
      start.emplace_back(x, nx);
      x = nx;
      if (static_cast<int>(start.size()) >= opt.max_panels) {
         start.emplace_back(x, b);
         break;
      }
   }
   auto f = [&](double t, double &ph) {
      const double amp = amplitude(t);
      if (amp == 0.0) { ph = 0.0; return cplx(0.0); }
      ph = phase(t);
      return amp * cplx(std::cos(ph), std::sin(ph));
   };
   return adapt(f, start, opt);
}

SymbolSample integrate_complex(const std::function<cplx(double)> &g, double a,
                               double b, const QuadOptions &opt)
{
   if (!(b > a)) { return SymbolSample{}; }
   std::vector<std::pair<double, double>> start;
   const int n = std::max(1, static_cast<int>(std::ceil((b - a) / opt.panel_cap)));
   for (int i = 0; i < n; ++i) {
      start.emplace_back(a + (b - a) * i / n, i + 1 == n ? b : a + (b - a) * (i + 1) / n);
   }
   auto f = [&](double t, double &ph) { ph = 0.0; return g(t); };
   return adapt(f, start, opt);
}

} // namespace bht
