#include "bht/curves.hpp"

#include "bht/errors.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace bht {

const char *to_string(Side s) { return s == Side::origin ? "origin" : "infinity"; }

bool Curve::valid_at(double t, Side side) const
{
   if (!(t > 0.0) || !std::isfinite(t)) { return false; }
   return side == Side::origin ? (near_zero && t <= origin_hi)
                               : (near_infinity && t >= infinity_lo);
}

Curve Curve::reflected() const
{
   Curve r = *this;
   auto e = eval, a = d1, b = d2, c = d3, d = d4;
   r.name = name + "(-t)";
   r.eval = [e](double t) { return e(-t); };
   r.d1 = [a](double t) { return -a(-t); };
   r.d2 = [b](double t) { return b(-t); };
   r.d3 = [c](double t) { return -c(-t); };
   r.d4 = [d](double t) { return d(-t); };
   return r;
}

const Curve &Curve::on_branch(Branch b, Curve &scratch) const
{
   if (b == Branch::positive) { return *this; }
   scratch = reflected();
   return scratch;
}

Curve monomial(int d)
{
   Curve c;
   c.name = "monomial:" + std::to_string(d);
   const double p = d;
   c.eval = [p](double t) { return std::pow(t, p); };
   c.d1 = [p](double t) { return p * std::pow(t, p - 1); };
   c.d2 = [p](double t) { return p * (p - 1) * std::pow(t, p - 2); };
   c.d3 = [p](double t) { return p * (p - 1) * (p - 2) * std::pow(t, p - 3); };
   c.d4 = [p](double t) { return p * (p - 1) * (p - 2) * (p - 3) * std::pow(t, p - 4); };
   c.power_origin = c.power_infinity = p;
   return c;
}

Curve laurent(const std::vector<std::pair<int, double>> &terms_in)
{
   std::vector<std::pair<int, double>> terms;
   for (auto [k, a] : terms_in) {
      if (k != 0 && a != 0.0) { terms.emplace_back(k, a); }
   }
   if (terms.empty()) { throw ConfigError("laurent curve needs a non-constant term"); }
   std::sort(terms.begin(), terms.end());
   Curve c;
   std::ostringstream nm;
   nm << "laurent:";
   for (size_t i = 0; i < terms.size(); ++i) {
      nm << (i ? "," : "") << terms[i].first << "=" << terms[i].second;
   }
   c.name = nm.str();
   auto deriv = [terms](int n) {
      return [terms, n](double t) {
         double s = 0.0;
         for (auto [k, a] : terms) {
            double f = a;
            for (int i = 0; i < n; ++i) { f *= (k - i); }
            if (f != 0.0) { s += f * std::pow(t, k - n); }
         }
         return s;
      };
   };
   c.eval = deriv(0);
   c.d1 = deriv(1);
   c.d2 = deriv(2);
   c.d3 = deriv(3);
   c.d4 = deriv(4);
   c.power_origin = terms.front().first;
   c.power_infinity = terms.back().first;
   return c;
}

Curve powerlog(double alpha, double beta)
{
   Curve c;
   std::ostringstream nm;
   nm << "powerlog:" << alpha << "," << beta;
   c.name = nm.str();
   // f^(n)(t) = t^(alpha-n) sum_k coef[n][k] g^(k)(log t),  g(L) = |L|^beta
   auto make = [alpha, beta](int n) {
      std::vector<std::vector<double>> coef(n + 1, std::vector<double>(n + 1, 0.0));
      coef[0][0] = 1.0;
      for (int i = 1; i <= n; ++i) {
         for (int k = 0; k <= i; ++k) {
            double v = (alpha - i + 1) * coef[i - 1][k];
            if (k > 0) { v += coef[i - 1][k - 1]; }
            coef[i][k] = v;
         }
      }
      std::vector<double> last = coef[n];
      return [alpha, beta, n, last](double t) {
         const double a = std::abs(t);
         const double L = std::log(a);
         const double sg = L < 0 ? -1.0 : 1.0;
         double s = 0.0, fall = 1.0;
         for (int k = 0; k <= n; ++k) {
            if (last[k] != 0.0) {
               const double gk = beta == 0.0 ? (k == 0 ? 1.0 : 0.0)
                                             : fall * std::pow(std::abs(L), beta - k) * std::pow(sg, k);
               s += last[k] * gk;
            }
            fall *= (beta - k);
         }
         const double v = std::pow(a, alpha - n) * s;
         return (t < 0 && n % 2 == 1) ? -v : v;
      };
   };
   c.eval = make(0);
   c.d1 = make(1);
   c.d2 = make(2);
   c.d3 = make(3);
   c.d4 = make(4);
   if (beta == 0.0) {
      c.power_origin = c.power_infinity = alpha;
   } else {
      const double edge = std::exp(4.0 * (1.0 + std::abs(beta)));
      c.origin_hi = 1.0 / edge;
      c.infinity_lo = edge;
   }
   return c;
}

Curve linear_curve()
{
   Curve c;
   c.name = "linear";
   c.eval = [](double t) { return t; };
   c.d1 = [](double) { return 1.0; };
   c.d2 = c.d3 = c.d4 = [](double) { return 0.0; };
   c.power_origin = c.power_infinity = 1.0;
   return c;
}

Curve exp_curve()
{
   Curve c;
   c.name = "exp";
   c.eval = c.d1 = c.d2 = c.d3 = c.d4 = [](double t) { return std::exp(t); };
   return c;
}

Curve make_curve(const std::string &spec)
{
   std::string s = spec;
   for (char &ch : s) {
      if (ch == ':' || ch == ',' || ch == ';') { ch = ' '; }
   }
   std::istringstream in(s);
   std::string name;
   in >> name;
   std::vector<std::string> args;
   for (std::string a; in >> a;) { args.push_back(a); }
   auto num = [&](size_t i, double dflt) {
      if (i >= args.size()) { return dflt; }
      try {
         size_t used = 0;
         const double v = std::stod(args[i], &used);
         if (used != args[i].size()) { throw std::invalid_argument(args[i]); }
         return v;
      } catch (const std::exception &) {
         throw ConfigError("curve '" + spec + "': bad number '" + args[i] + "'");
      }
   };
   if (name == "monomial") {
      const double d = num(0, 2.0);
      if (d != std::floor(d) || d < 1) { throw ConfigError("monomial degree must be a positive integer"); }
      return monomial(static_cast<int>(d));
   }
   if (name == "laurent") {
      std::vector<std::pair<int, double>> terms;
      for (const std::string &a : args) {
         const auto eq = a.find('=');
         if (eq == std::string::npos) { throw ConfigError("laurent term must be power=coefficient: " + a); }
         try {
            terms.emplace_back(std::stoi(a.substr(0, eq)), std::stod(a.substr(eq + 1)));
         } catch (const std::exception &) {
            throw ConfigError("laurent term not understood: " + a);
         }
      }
      if (terms.empty()) { terms = {{2, 1.0}, {-2, 1.0}}; }
      return laurent(terms);
   }
   if (name == "powerlog") { return powerlog(num(0, 1.5), num(1, 0.0)); }
   if (name == "linear") { return linear_curve(); }
   if (name == "exp") { return exp_curve(); }
   throw ConfigError("unknown curve '" + spec + "'");
}

Side side_of_scale(int j) { return j >= 0 ? Side::origin : Side::infinity; }

namespace {

struct Window {
   double lo, hi;
};

Window validity(const Curve &c, Side side)
{
   if (side == Side::origin) {
      return {1e-60, std::min(c.origin_hi, 1e60)};
   }
   return {std::max(c.infinity_lo, 1e-60), 1e60};
}

// root of gamma'(t) = s inside [lo, hi] (positive t), scanning in log t first
bool invert_in(const Curve &c, double s, double lo, double hi, double &out)
{
   constexpr int K = 48;
   const double a = std::log(lo), b = std::log(hi);
   std::vector<double> ts(K + 1), vs(K + 1), ss(K + 1);
   for (int i = 0; i <= K; ++i) {
      ts[i] = std::exp(a + (b - a) * i / K);
      vs[i] = c.d1(ts[i]);
      ss[i] = c.d2(ts[i]);
   }
   int sign = 0;
   for (int i = 0; i <= K; ++i) {
      if (std::isnan(ss[i]) || std::isnan(vs[i])) { continue; }
      // underflow of both derivatives says nothing about monotonicity
      if (ss[i] == 0.0 && (vs[i] == 0.0 || !std::isfinite(vs[i]))) { continue; }
      const int sg = ss[i] > 0 ? 1 : (ss[i] < 0 ? -1 : 0);
      if (sg == 0) {
         throw MonotonicityError("gamma'' vanishes on the branch of " + c.name);
      }
      if (sign != 0 && sg != sign) {
         throw MonotonicityError("gamma'' changes sign on the branch of " + c.name);
      }
      sign = sg;
   }
   int cell = -1;
   for (int i = 0; i < K; ++i) {
      const double f0 = vs[i] - s, f1 = vs[i + 1] - s;
      if (std::isnan(f0) || std::isnan(f1)) { continue; }
      if (f0 == 0.0) { out = ts[i]; return true; }
      if ((f0 < 0) != (f1 < 0) || f1 == 0.0) { cell = i; break; }
   }
   if (cell < 0) { return false; }
   double l = ts[cell], h = ts[cell + 1];
   double fl = vs[cell] - s;
   // bisection in log t down to relative width 1e-6
   while (h / l - 1.0 > 1e-6) {
      const double mid = std::sqrt(l * h);
      const double fm = c.d1(mid) - s;
      if ((fm < 0) == (fl < 0)) { l = mid; fl = fm; } else { h = mid; }
   }
   double t = std::sqrt(l * h);
   for (int it = 0; it < 60; ++it) {
      const double f = c.d1(t) - s;
      if (std::abs(f) <= 1e-15 * std::abs(s)) { break; }
      const double d = c.d2(t);
      double nt = t - f / d;
      if (!(nt > l && nt < h) || !std::isfinite(nt)) {
         nt = 0.5 * (l + h);
      }
      const double fn = c.d1(nt) - s;
      if ((fn < 0) == (fl < 0)) { l = nt; fl = fn; } else { h = nt; }
      if (std::abs(nt - t) <= 1e-16 * std::abs(t)) { t = nt; break; }
      t = nt;
   }
   out = t;
   return true;
}

} // namespace

double invert_gamma_prime(const Curve &c0, double s, Branch branch, Side side)
{
   Curve scratch;
   const Curve &c = c0.on_branch(branch, scratch);
   const Window w = validity(c, side);
   // the reflected curve has derivative -gamma'(-u)
   const double target = branch == Branch::positive ? s : -s;
   double t = 0.0;
   if (!invert_in(c, target, w.lo, w.hi, t)) {
      throw RangeError("s outside the range of gamma' for " + c0.name + " on this branch");
   }
   return branch == Branch::positive ? t : -t;
}

namespace {

double invert_near(const Curve &c, double s, double hint, Side side)
{
   const Window w = validity(c, side);
   const double lo = std::max(w.lo, hint / 4096.0), hi = std::min(w.hi, hint * 4096.0);
   double t = 0.0;
   if (lo < hi && invert_in(c, s, lo, hi, t)) { return t; }
   if (!invert_in(c, s, w.lo, w.hi, t)) {
      throw RangeError("s outside the range of gamma' for " + c.name);
   }
   return t;
}

} // namespace

double profile_Q_raw(const Curve &c, int j, double t)
{
   const double u = std::ldexp(1.0, -j);
   return c.eval(u * t) / (u * c.d1(u));
}

double profile_Q(const Curve &c, int j, double t)
{
   const double a = std::abs(t);
   if (a < 0.25 || a > 4.0) { throw DomainError("profile_Q: t outside I"); }
   const double u = std::ldexp(1.0, -j);
   if (!c.valid_at(u * a, side_of_scale(j))) {
      throw DomainError("profile_Q: 2^-j t outside the validity region");
   }
   return profile_Q_raw(c, j, t);
}

double profile_r(const Curve &c, int j, double s)
{
   const double u = std::ldexp(1.0, -j);
   const Side side = side_of_scale(j);
   if (!c.valid_at(u, side)) { throw DomainError("profile_r: 2^-j outside the validity region"); }
   const double t = invert_near(c, s * c.d1(u), u, side);
   return t / u;
}

bool has_limit(const Curve &c, Side side)
{
   const double k = side == Side::origin ? c.power_origin : c.power_infinity;
   return std::isfinite(k) && k != 0.0 && k != 1.0;
}

double limit_Q(const Curve &c, Side side, double t)
{
   if (!has_limit(c, side)) { return std::numeric_limits<double>::quiet_NaN(); }
   const double k = side == Side::origin ? c.power_origin : c.power_infinity;
   return std::pow(t, k) / k;
}

double limit_r(const Curve &c, Side side, double s)
{
   if (!has_limit(c, side)) { return std::numeric_limits<double>::quiet_NaN(); }
   const double k = side == Side::origin ? c.power_origin : c.power_infinity;
   return std::pow(s, 1.0 / (k - 1.0));
}

int check_variation(const Curve &c, int j_max, Side side)
{
   std::vector<double> v;
   for (int i = 0; i <= j_max; ++i) {
      const int j = side == Side::origin ? i : -i;
      const double u = std::ldexp(1.0, -j);
      if (!c.valid_at(u, side)) { continue; }
      const double val = std::abs(u * c.d1(u));
      if (std::isfinite(val)) { v.push_back(val); }
   }
   int best = 0;
   for (double a : v) {
      int n = 0;
      for (double x : v) {
         if (x >= a && x <= 2.0 * a) { ++n; }
      }
      best = std::max(best, n);
   }
   return best;
}

std::pair<int, int> default_j_range(Side side)
{
   return side == Side::origin ? std::pair{2, 20} : std::pair{-20, -2};
}

namespace {

double d2_5pt(const std::vector<double> &f, size_t i, double h)
{
   return (-f[i + 2] + 16 * f[i + 1] - 30 * f[i] + 16 * f[i - 1] - f[i - 2]) / (12 * h * h);
}

double d1_5pt(const std::vector<double> &f, size_t i, double h)
{
   return (f[i - 2] - 8 * f[i - 1] + 8 * f[i + 1] - f[i + 2]) / (12 * h);
}

std::string fmt_num(double v)
{
   std::ostringstream o;
   o.precision(4);
   o << v;
   return o.str();
}

std::vector<int> tested_scales(const Curve &c, Side side, std::pair<int, int> jr)
{
   std::vector<int> js;
   const int lo = std::min(jr.first, jr.second), hi = std::max(jr.first, jr.second);
   for (int j = lo; j <= hi; ++j) {
      const double u = std::ldexp(1.0, -j);
      if (c.valid_at(u / 8.0, side) && c.valid_at(u * 8.0, side)) { js.push_back(j); }
   }
   // order from far to near the limit
   if (side == Side::infinity) { std::reverse(js.begin(), js.end()); }
   return js;
}

BranchReport analyze_branch(const Curve &c, const Curve &orig, Side side,
                            const std::vector<int> &js, int N, const NonFlatThresholds &th)
{
   BranchReport br;
   const bool closed = has_limit(orig, side);
   const int jref = js.back();
   const double h = 3.75 / (N - 1);

   auto Qref = [&](double t) { return closed ? limit_Q(orig, side, t) : profile_Q_raw(c, jref, t); };

   // Q on I with a two-point margin for the stencil
   std::vector<double> qr(N + 4);
   for (int i = -2; i < N + 2; ++i) { qr[i + 2] = Qref(0.25 + h * i); }
   double infq = std::numeric_limits<double>::infinity();
   for (int i = 0; i < N; ++i) {
      const double v = std::abs(d2_5pt(qr, i + 2, h));
      infq = std::isfinite(v) ? std::min(infq, v) : 0.0;
   }
   br.inf_Q2 = infq;

   // J as the intersection of the images gamma'(2^-j t)/gamma'(2^-j), t in I
   double Jlo = -std::numeric_limits<double>::infinity(), Jhi = -Jlo;
   for (int j : js) {
      const double u = std::ldexp(1.0, -j);
      const double g1 = c.d1(u);
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (int i = 0; i < N; ++i) {
         const double v = c.d1(u * (0.25 + h * i)) / g1;
         lo = std::min(lo, v);
         hi = std::max(hi, v);
      }
      Jlo = std::max(Jlo, lo);
      Jhi = std::min(Jhi, hi);
   }
   br.J_lo = Jlo;
   br.J_hi = Jhi;

   bool r_ok = std::isfinite(Jlo) && std::isfinite(Jhi) && Jhi > Jlo;
   std::vector<double> sg(N), rr(N);
   // J is sampled uniformly in log s (J spans decades for high powers)
   const bool pos = Jlo > 0;
   const double hs = !r_ok ? 0.0 : pos ? std::log(Jhi / Jlo) / (N - 1) : (Jhi - Jlo) / (N - 1);
   if (!r_ok) { br.reasons.push_back("J is empty"); }
   try {
      if (r_ok) {
         for (int i = 0; i < N; ++i) {
            sg[i] = pos ? Jlo * std::exp(hs * i) : Jlo + hs * i;
            rr[i] = closed ? limit_r(orig, side, sg[i]) : profile_r(c, jref, sg[i]);
         }
      }
   } catch (const std::exception &e) {
      r_ok = false;
      br.reasons.push_back(std::string("r undefined: ") + e.what());
   }
   if (r_ok) {
      double infr = std::numeric_limits<double>::infinity();
      std::vector<double> w;
      std::vector<double> sw;
      for (int i = 2; i < N - 2; ++i) {
         const double d = d1_5pt(rr, i, hs) / (pos ? sg[i] : 1.0);
         infr = std::min(infr, std::abs(d));
         w.push_back(sg[i] * d);
         sw.push_back(sg[i]);
      }
      double infw = std::numeric_limits<double>::infinity();
      for (size_t a = 0; a < w.size(); ++a) {
         for (size_t b = a + 1; b < w.size(); ++b) {
            infw = std::min(infw, std::abs(w[a] - w[b]) / std::abs(sw[a] - sw[b]));
         }
      }
      br.inf_r1 = infr;
      br.inf_quot = infw;
   }

   // a_j: sup distance of the scale-j profiles from the reference
   for (int j : js) {
      double a = 0.0;
      for (int i = 0; i < N; ++i) {
         const double t = 0.25 + h * i;
         const double d = std::abs(profile_Q_raw(c, j, t) - qr[i + 2]);
         a = std::isfinite(d) ? std::max(a, d) : std::numeric_limits<double>::infinity();
      }
      if (r_ok) {
         try {
            for (int i = 0; i < N; ++i) {
               const double d = std::abs(profile_r(c, j, sg[i]) - rr[i]);
               a = std::isfinite(d) ? std::max(a, d) : std::numeric_limits<double>::infinity();
            }
         } catch (const std::exception &) {
            a = std::numeric_limits<double>::infinity();
         }
      }
      br.a_j.emplace_back(j, a);
   }
   bool dec = true;
   for (size_t i = 0; i + 1 < br.a_j.size(); ++i) {
      const double a0 = br.a_j[i].second, a1 = br.a_j[i + 1].second;
      if (!std::isfinite(a1)) { dec = false; break; }
      if (a1 <= th.zero_floor) { continue; }
      if (!(a1 <= th.decay_per_octave * a0)) { dec = false; break; }
   }
   br.decays = dec && !br.a_j.empty();
   return br;
}

} // namespace

double check_convtr(const Curve &c, Side side, int N, std::pair<int, int> jr)
{
   if (jr.first == 0 && jr.second == 0) { jr = default_j_range(side); }
   double best = std::numeric_limits<double>::infinity();
   for (Branch b : {Branch::positive, Branch::negative}) {
      Curve scratch;
      const Curve &cb = c.on_branch(b, scratch);
      for (int j : tested_scales(c, side, jr)) {
         const double u = std::ldexp(1.0, -j);
         for (int i = 0; i < N; ++i) {
            const double t = u * std::pow(2.0, -2.0 + 4.0 * i / (N - 1));
            const double v = std::abs(t * cb.d2(t) / cb.d1(t));
            if (std::isfinite(v)) { best = std::min(best, v); }
         }
      }
   }
   return std::isfinite(best) ? best : 0.0;
}

NonFlatReport check_nonflat(const Curve &c, Side side, std::pair<int, int> j_range,
                            int grid_density, const NonFlatThresholds &th)
{
   NonFlatReport rep;
   rep.side = side;
   rep.thresholds = th;
   const int N = std::max(grid_density, 9);
   const bool defined = side == Side::origin ? c.near_zero : c.near_infinity;
   const std::vector<int> js = tested_scales(c, side, j_range);
   if (!defined || js.size() < 2) {
      rep.reasons.push_back("curve not defined on the requested side");
      return rep;
   }
   rep.variation_max = check_variation(c, std::max(std::abs(j_range.first), std::abs(j_range.second)), side);
   rep.pass_variation = rep.variation_max <= th.variation_cap;

   Curve refl = c.reflected();
   rep.positive = analyze_branch(c, c, side, js, N, th);
   rep.negative = analyze_branch(refl, c, side, js, N, th);

   for (size_t i = 0; i < rep.positive.a_j.size(); ++i) {
      rep.a_j_table.emplace_back(rep.positive.a_j[i].first,
                                 std::max(rep.positive.a_j[i].second, rep.negative.a_j[i].second));
   }
   const BranchReport *brs[2] = {&rep.positive, &rep.negative};
   double cg = std::numeric_limits<double>::infinity();
   double q2 = cg, r1 = cg, qt = cg;
   for (const BranchReport *b : brs) {
      q2 = std::min(q2, b->inf_Q2);
      r1 = std::min(r1, b->inf_r1);
      qt = std::min(qt, b->inf_quot);
      for (const std::string &s : b->reasons) { rep.reasons.push_back(s); }
   }
   cg = std::min({q2, r1, qt});
   rep.c_gamma = cg;
   rep.pass_cgamma = cg >= th.c_gamma;
   rep.pass_decay = rep.positive.decays && rep.negative.decays;
   rep.convtr_inf = check_convtr(c, side, N, j_range);
   rep.pass_convtr = rep.convtr_inf >= th.c_gamma;

   auto note = [&](const char *what, double v) {
      if (v >= th.c_gamma) { return; }
      rep.reasons.push_back(std::string(what) + "=" + (v <= 1e-8 ? std::string("0") : fmt_num(v)));
   };
   note("inf|Q''|", q2);
   note("inf|r'|", r1);
   note("inf|(t r')'|", qt);
   if (!rep.pass_decay) { rep.reasons.push_back("a_j does not decay"); }
   if (!rep.pass_convtr) { rep.reasons.push_back("convtr=" + fmt_num(rep.convtr_inf)); }
   if (!rep.pass_variation) { rep.reasons.push_back("variation=" + std::to_string(rep.variation_max)); }
   rep.passes = rep.pass_variation && rep.pass_decay && rep.pass_cgamma && rep.pass_convtr;
   return rep;
}

} // namespace bht
