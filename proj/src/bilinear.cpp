#include "bht/bilinear.hpp"

#include "bht/bumps.hpp"
#include "bht/dual_phase.hpp"
#include "bht/errors.hpp"
#include "bht/fft.hpp"
#include "bht/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <string>

namespace bht {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

size_t wrap(long k, size_t n)
{
   const long r = k % static_cast<long>(n);
   return static_cast<size_t>(r < 0 ? r + static_cast<long>(n) : r);
}

cplx expi(double x) { return std::polar(1.0, std::remainder(x, two_pi)); }

bool near_integer(double x) { return std::abs(x - std::round(x)) <= 1e-9 * std::max(1.0, std::abs(x)); }

SampledFunction conj_of(const SampledFunction &f)
{
   SampledFunction r = f;
   for (cplx &v : r.values) { v = std::conj(v); }
   return r;
}

void check_grid(const SampledFunction &u, size_t n, double dx, const char *what)
{
   if (u.size() != n || std::abs(u.dx - dx) > 1e-12 * dx) {
      throw DomainError(std::string(what) + " is not on the grid of this (j, m)");
   }
}

void check_regime(const BilinearGrid &G, Regime r)
{
   if (G.regime != r) {
      throw RegimeMismatch(std::string("gamma'(2^-j) puts (j, m) in the ") + to_string(G.regime) +
                           " regime, not " + to_string(r));
   }
}

// bins k of a torus of length T with |xi_k| in (3/2, 4), both signs
std::vector<long> cutoff_bins(double T)
{
   const long k0 = static_cast<long>(std::floor(1.5 * T / two_pi));
   const long k1 = static_cast<long>(std::ceil(4.0 * T / two_pi));
   std::vector<long> ks;
   for (long k = k0; k <= k1; ++k) {
      ks.push_back(k);
      ks.push_back(-k);
   }
   return ks;
}

struct Entry {
   long l, k;
   double y;
};

std::vector<Entry> entries_of(const BilinearGrid &G)
{
   std::vector<Entry> e;
   for (long l = 0; l < G.L; ++l) {
      for (long k = 0; k <= G.K; ++k) { e.push_back({l, k, l * G.delta + static_cast<double>(k)}); }
   }
   return e;
}

// Packets at scale 1/slope used by the large regime:
// slope^(1/2) window(slope x - y) exp(i p 2^-m x), unit norm on the x torus
class TildeBasis {
public:
   TildeBasis(const BilinearGrid &G) : G_(G)
   {
      fast_ = near_integer(G.delta) && near_integer(G.Tf);
      M_ = fast_ ? static_cast<size_t>(std::llround(G.Tf)) : 0;
   }

   std::pair<long, long> bins(long p) const
   {
      const double w0 = omega(p);
      return {static_cast<long>(std::floor(w0 * G_.Tx / two_pi)),
              static_cast<long>(std::ceil((w0 + 2 * G_.slope) * G_.Tx / two_pi))};
   }

   double omega(long p) const { return std::ldexp(static_cast<double>(p), -G_.m); }

   double raw_hat(long p, long K) const
   {
      return window_hat((two_pi * K / G_.Tx - omega(p)) / G_.slope) / std::sqrt(G_.slope);
   }

   double norm(long p) const
   {
      auto [a, b] = bins(p);
      double s = 0.0;
      for (long K = a; K <= b; ++K) { s += raw_hat(p, K) * raw_hat(p, K); }
      return std::sqrt(s / G_.Tx);
   }

   // spec += sum_e a_e phi~_{y_e, p}
   void scatter(std::vector<cplx> &spec, long p, const std::vector<Entry> &es, const std::vector<cplx> &a) const
   {
      auto [K0, K1] = bins(p);
      const double nrm = norm(p), w0 = omega(p);
      if (fast_) {
         std::vector<cplx> A(M_, cplx(0.0));
         for (size_t i = 0; i < es.size(); ++i) {
            const long y = std::lround(es[i].y);
            A[wrap(y, M_)] += a[i] * expi(w0 * es[i].y / G_.slope);
         }
         fft_forward(A);
         for (long K = K0; K <= K1; ++K) {
            const double hv = raw_hat(p, K);
            if (hv != 0.0) { spec[wrap(K, spec.size())] += hv / nrm * A[wrap(K, M_)]; }
         }
         return;
      }
      for (long K = K0; K <= K1; ++K) {
         const double hv = raw_hat(p, K);
         if (hv == 0.0) { continue; }
         const double xi = two_pi * K / G_.Tx;
         cplx s = 0.0;
         for (size_t i = 0; i < es.size(); ++i) { s += a[i] * expi(-(xi - w0) * es[i].y / G_.slope); }
         spec[wrap(K, spec.size())] += hv / nrm * s;
      }
   }

   // <u, phi~_{y_e, p}> for every entry, from the spectrum of u
   std::vector<cplx> gather(const std::vector<cplx> &uspec, long p, const std::vector<Entry> &es) const
   {
      auto [K0, K1] = bins(p);
      const double nrm = norm(p), w0 = omega(p);
      std::vector<cplx> out(es.size(), cplx(0.0));
      if (fast_) {
         std::vector<cplx> A(M_, cplx(0.0));
         for (long K = K0; K <= K1; ++K) {
            const double hv = raw_hat(p, K);
            if (hv != 0.0) { A[wrap(K, M_)] += uspec[wrap(K, uspec.size())] * (hv / (nrm * G_.Tx)); }
         }
         fft_backward(A);
         for (size_t i = 0; i < es.size(); ++i) {
            out[i] = A[wrap(std::lround(es[i].y), M_)] * expi(-w0 * es[i].y / G_.slope);
         }
         return out;
      }
      for (long K = K0; K <= K1; ++K) {
         const double hv = raw_hat(p, K);
         if (hv == 0.0) { continue; }
         const double xi = two_pi * K / G_.Tx;
         const cplx base = uspec[wrap(K, uspec.size())] * (hv / (nrm * G_.Tx));
         for (size_t i = 0; i < es.size(); ++i) { out[i] += base * expi((xi - w0) * es[i].y / G_.slope); }
      }
      return out;
   }

   bool fast() const { return fast_; }
   size_t M() const { return M_; }

private:
   const BilinearGrid &G_;
   bool fast_;
   size_t M_;
};

// Q_{m,p} f at every entry
std::vector<cplx> q_at_entries(const QOperator &Q, const std::vector<cplx> &Fs, const BilinearGrid &G, long p,
                               const std::vector<Entry> &es, const TildeBasis &tb)
{
   std::vector<cplx> out(es.size());
   if (tb.fast()) {
      const std::vector<cplx> v = Q.on_lattice(Fs, G.Tf, p, 0.0, 1.0, tb.M());
      for (size_t i = 0; i < es.size(); ++i) { out[i] = v[wrap(std::lround(es[i].y), tb.M())]; }
      return out;
   }
   for (size_t i = 0; i < es.size(); ++i) { out[i] = Q.on_lattice(Fs, G.Tf, p, es[i].y, 1.0, 1)[0]; }
   return out;
}

double small_prefactor(const BilinearGrid &G) { return std::ldexp(1.0, -G.m) * std::sqrt(G.delta); }
double large_prefactor(const BilinearGrid &G) { return std::ldexp(1.0, -G.m); }

// w with lambda(f, g, h) = sum_{l,p} <g, phi_{l,p}> w_{l,p}
CoefficientGrid lambda_weights(const SampledFunction &f, const SampledFunction &h, const BilinearGrid &G)
{
   const Lattice lat = G.lattice();
   CoefficientGrid w(lat, static_cast<size_t>(G.Lx));
   const std::vector<cplx> Fs = f.spectrum();
   QOperator Q(G.curve, G.j, G.m);
   if (G.regime == Regime::small) {
      CoefficientGrid hb = analyze(conj_of(h), lat);
      const double pref = small_prefactor(G);
      for (long p = lat.p_lo; p <= lat.p_hi; ++p) {
         const std::vector<cplx> qv = Q.on_lattice(Fs, G.Tf, p, 0.0, G.delta, static_cast<size_t>(G.L));
         for (long l = 0; l < G.L; ++l) { w.at(l, p) = pref * qv[l] * std::conj(hb.at(l, p)); }
      }
      return w;
   }
   const std::vector<Entry> es = entries_of(G);
   TildeBasis tb(G);
   const std::vector<cplx> Hs = conj_of(h).spectrum();
   const double pref = large_prefactor(G);
   for (long p = lat.p_lo; p <= lat.p_hi; ++p) {
      const std::vector<cplx> qv = q_at_entries(Q, Fs, G, p, es, tb);
      const std::vector<cplx> hb = tb.gather(Hs, p, es);
      for (size_t i = 0; i < es.size(); ++i) { w.at(es[i].l, p) += pref * qv[i] * std::conj(hb[i]); }
   }
   return w;
}

} // namespace

const char *to_string(Regime r) { return r == Regime::small ? "small" : "large"; }

Regime regime_of(const Curve &c, int j, int m)
{
   const double s = std::abs(c.d1(std::ldexp(1.0, -j)));
   return s <= std::ldexp(1.0, -m) ? Regime::small : Regime::large;
}

int small_regime_j(const Curve &c, int m, double delta_max)
{
   for (int j = 0; j <= 60; ++j) {
      if (std::ldexp(std::abs(c.d1(std::ldexp(1.0, -j))), m) <= delta_max) { return j; }
   }
   throw PreconditionError("no j in [0, 60] with 2^m gamma'(2^-j) <= " + std::to_string(delta_max));
}

std::vector<double> BilinearGrid::sample_positions() const
{
   std::vector<double> ys;
   for (const Entry &e : entries_of(*this)) { ys.push_back(e.y); }
   return ys;
}

BilinearGrid make_grid(const Curve &c, int j, int m, long lx_factor)
{
   if (m < 0) { throw DomainError("m must be >= 0"); }
   if (lx_factor < 1) { throw DomainError("lx_factor must be >= 1"); }
   BilinearGrid G;
   G.curve = c;
   G.j = j;
   G.m = m;
   G.slope = std::abs(c.d1(std::ldexp(1.0, -j)));
   if (!(G.slope > 0.0) || !std::isfinite(G.slope)) { throw DomainError("gamma'(2^-j) must be finite and nonzero"); }
   G.regime = regime_of(c, j, m);
   G.delta = std::ldexp(G.slope, m);
   const double inv = 1.0 / G.slope;
   if (inv > 1e7) { throw DomainError("gamma'(2^-j) too small for a desk-scale grid"); }
   G.L = static_cast<long>(std::floor(inv * (1 + 1e-12))) + 1;
   G.K = G.regime == Regime::large ? static_cast<long>(std::floor(G.delta * (1 + 1e-12))) : 0;
   // at least 16 packet widths, so every packet spans enough frequency bins
   G.Lx = std::max(G.L, 16L) * lx_factor;
   G.Tx = std::ldexp(static_cast<double>(G.Lx), m);
   // room for the packets, the large-regime packets and the continuous output
   const double band_x = 2.0 + std::ldexp(2.0, -m) + 4.0 * G.slope;
   G.dx_x = 0.5;
   while (G.dx_x > std::numbers::pi / (2.0 * band_x)) { G.dx_x *= 0.5; }
   G.Nx = static_cast<size_t>(std::llround(G.Tx / G.dx_x));
   G.Tf = G.slope * G.Tx;
   G.Nf = std::max<size_t>(16, static_cast<size_t>(std::ceil(G.Tf / 0.375)));
   G.Nf += G.Nf % 2;
   G.dx_f = G.Tf / static_cast<double>(G.Nf);
   return G;
}

double frame_symbol(int m, double eta, double Tx)
{
   const double u = std::ldexp(eta, m);
   const long lo = 1L << m, hi = 2L << m;
   double s = 0.0;
   for (long p = static_cast<long>(std::floor(u)) - 2; p <= static_cast<long>(std::floor(u)); ++p) {
      if (p < lo || p > hi) { continue; }
      const double w = window_hat(u - p) / packet_norm(m, p, Tx);
      s += w * w;
   }
   return s;
}

SampledFunction random_f(const BilinearGrid &G, std::mt19937_64 &rng)
{
   std::normal_distribution<double> gauss;
   SampledFunction f = G.zero_f();
   std::vector<cplx> spec(G.Nf, cplx(0.0));
   for (long k : cutoff_bins(G.Tf)) {
      const double xi = two_pi * k / G.Tf;
      const double re = gauss(rng), im = gauss(rng);
      spec[wrap(k, G.Nf)] = cplx(re, im) * freq_cutoff(xi);
   }
   return SampledFunction::from_spectrum(0.0, G.dx_f, spec, 4.0);
}

SampledFunction random_g(const BilinearGrid &G, std::mt19937_64 &rng)
{
   std::normal_distribution<double> gauss;
   std::vector<cplx> spec(G.Nx, cplx(0.0));
   const double top = 2.0 + std::ldexp(2.0, -G.m);
   const long k0 = static_cast<long>(std::floor(G.Tx / two_pi));
   const long k1 = static_cast<long>(std::ceil(top * G.Tx / two_pi));
   for (long k = k0; k <= k1; ++k) {
      const double eta = two_pi * k / G.Tx;
      const double w = frame_symbol(G.m, eta, G.Tx);
      const double re = gauss(rng), im = gauss(rng);
      if (w > 0.0) { spec[wrap(k, G.Nx)] = cplx(re, im) * std::sqrt(w / two_pi); }
   }
   return SampledFunction::from_spectrum(0.0, G.dx_x, spec, top);
}

SampledFunction random_h(const BilinearGrid &G, std::mt19937_64 &rng)
{
   const long n = std::lround(G.Tx);
   std::vector<double> eps(static_cast<size_t>(n));
   std::bernoulli_distribution coin(0.5);
   for (double &e : eps) { e = coin(rng) ? 1.0 : -1.0; }
   SampledFunction h = G.zero_x();
   double sup = 0.0;
   for (size_t i = 0; i < h.size(); ++i) {
      const double x = h.x(i);
      const long n0 = static_cast<long>(std::floor(x));
      const double t = smooth_step(x - n0);
      const double v = eps[wrap(n0, eps.size())] * (1.0 - t) + eps[wrap(n0 + 1, eps.size())] * t;
      h.values[i] = v;
      sup = std::max(sup, std::abs(v));
   }
   for (cplx &v : h.values) { v /= sup; }
   return h;
}

SampledFunction apply_Bjm_continuous(const SampledFunction &f, const SampledFunction &g, const BilinearGrid &G)
{
   check_grid(f, G.Nf, G.dx_f, "f");
   check_grid(g, G.Nx, G.dx_x, "g");
   const std::vector<cplx> Fs = f.spectrum(), Gs = g.spectrum();
   QOperator Q(G.curve, G.j, G.m);
   const double top = 2.0 + std::ldexp(2.0, -G.m);
   const long g0 = static_cast<long>(std::floor(G.Tx / two_pi));
   const long g1 = static_cast<long>(std::ceil(top * G.Tx / two_pi));
   std::vector<std::pair<long, cplx>> gterms;
   std::vector<double> etas;
   for (long k = g0; k <= g1; ++k) {
      const double eta = two_pi * k / G.Tx;
      const double w = frame_symbol(G.m, eta, G.Tx);
      if (w == 0.0) { continue; }
      gterms.emplace_back(k, Gs[wrap(k, G.Nx)] * w);
      etas.push_back(eta);
   }
   const double pref = small_prefactor(G) / G.Tf;
   const double scale = std::ldexp(1.0, G.m);
   std::vector<cplx> out(G.Nx, cplx(0.0));
   for (long kf : cutoff_bins(G.Tf)) {
      const double xi = two_pi * kf / G.Tf;
      const double cut = freq_cutoff(xi);
      if (cut == 0.0) { continue; }
      const cplx fv = Fs[wrap(kf, G.Nf)] * (cut * pref);
      if (fv == cplx(0.0)) { continue; }
      for (size_t i = 0; i < gterms.size(); ++i) {
         const double eta = etas[i];
         const cplx ph = expi(-scale * eta * Q.R(std::abs(xi) / eta));
         out[wrap(kf + gterms[i].first, G.Nx)] += fv * gterms[i].second * ph;
      }
   }
   return SampledFunction::from_spectrum(0.0, G.dx_x, out);
}

SampledFunction apply_Bjm_discrete(const SampledFunction &f, const SampledFunction &g, const BilinearGrid &G,
                                   Regime regime)
{
   check_regime(G, regime);
   check_grid(f, G.Nf, G.dx_f, "f");
   check_grid(g, G.Nx, G.dx_x, "g");
   const Lattice lat = G.lattice();
   const CoefficientGrid cg = analyze(g, lat);
   const std::vector<cplx> Fs = f.spectrum();
   QOperator Q(G.curve, G.j, G.m);
   if (regime == Regime::small) {
      CoefficientGrid coef(lat, cg.n_l);
      const double pref = small_prefactor(G);
      for (long p = lat.p_lo; p <= lat.p_hi; ++p) {
         const std::vector<cplx> qv = Q.on_lattice(Fs, G.Tf, p, 0.0, G.delta, static_cast<size_t>(G.L));
         for (long l = 0; l < G.L; ++l) { coef.at(l, p) = pref * cg.at(l, p) * qv[l]; }
      }
      return synthesize_raw(coef, 0.0, G.dx_x, G.Nx);
   }
   const std::vector<Entry> es = entries_of(G);
   TildeBasis tb(G);
   const double pref = large_prefactor(G);
   std::vector<cplx> spec(G.Nx, cplx(0.0)), a(es.size());
   for (long p = lat.p_lo; p <= lat.p_hi; ++p) {
      const std::vector<cplx> qv = q_at_entries(Q, Fs, G, p, es, tb);
      for (size_t i = 0; i < es.size(); ++i) { a[i] = pref * cg.at(es[i].l, p) * qv[i]; }
      tb.scatter(spec, p, es, a);
   }
   return SampledFunction::from_spectrum(0.0, G.dx_x, spec);
}

SampledFunction apply_Djm(const SampledFunction &g, const SampledFunction &h, const BilinearGrid &G, Regime regime)
{
   check_regime(G, regime);
   check_grid(g, G.Nx, G.dx_x, "g");
   check_grid(h, G.Nx, G.dx_x, "h");
   const Lattice lat = G.lattice();
   const CoefficientGrid cg = analyze(g, lat);
   QOperator Q(G.curve, G.j, G.m);
   const std::vector<long> ks = cutoff_bins(G.Tf);
   std::vector<cplx> spec(G.Nf, cplx(0.0));
   if (regime == Regime::small) {
      const CoefficientGrid hb = analyze(conj_of(h), lat);
      const double pref = small_prefactor(G);
      const size_t lx = static_cast<size_t>(G.Lx);
      std::vector<cplx> A(lx);
      for (long p = lat.p_lo; p <= lat.p_hi; ++p) {
         std::fill(A.begin(), A.end(), cplx(0.0));
         for (long l = 0; l < G.L; ++l) { A[l] = pref * cg.at(l, p) * std::conj(hb.at(l, p)); }
         fft_forward(A);
         for (long k : ks) {
            const double xi = two_pi * k / G.Tf;
            spec[wrap(k, G.Nf)] += Q.symbol(p, -xi) * A[wrap(k, lx)];
         }
      }
      return SampledFunction::from_spectrum(0.0, G.dx_f, spec);
   }
   const std::vector<Entry> es = entries_of(G);
   TildeBasis tb(G);
   const std::vector<cplx> Hs = conj_of(h).spectrum();
   const double pref = large_prefactor(G);
   for (long p = lat.p_lo; p <= lat.p_hi; ++p) {
      const std::vector<cplx> hb = tb.gather(Hs, p, es);
      if (tb.fast()) {
         std::vector<cplx> A(tb.M(), cplx(0.0));
         for (size_t i = 0; i < es.size(); ++i) {
            A[wrap(std::lround(es[i].y), tb.M())] += pref * cg.at(es[i].l, p) * std::conj(hb[i]);
         }
         fft_forward(A);
         for (long k : ks) {
            const double xi = two_pi * k / G.Tf;
            spec[wrap(k, G.Nf)] += Q.symbol(p, -xi) * A[wrap(k, tb.M())];
         }
         continue;
      }
      for (long k : ks) {
         const double xi = two_pi * k / G.Tf;
         cplx s = 0.0;
         for (size_t i = 0; i < es.size(); ++i) {
            s += pref * cg.at(es[i].l, p) * std::conj(hb[i]) * expi(-xi * es[i].y);
         }
         spec[wrap(k, G.Nf)] += Q.symbol(p, -xi) * s;
      }
   }
   return SampledFunction::from_spectrum(0.0, G.dx_f, spec);
}

cplx trilinear_lambda(const SampledFunction &f, const SampledFunction &g, const SampledFunction &h,
                      const BilinearGrid &G)
{
   return pairing(apply_Bjm_discrete(f, g, G, G.regime), h);
}

LambdaSplit trilinear_split(const SampledFunction &f, const SampledFunction &g, const SampledFunction &h,
                            const BilinearGrid &G, double y_cut)
{
   const Lattice lat = G.lattice();
   const CoefficientGrid cg = analyze(g, lat);
   const std::vector<cplx> Fs = f.spectrum();
   QOperator Q(G.curve, G.j, G.m);
   LambdaSplit s;
   if (G.regime == Regime::small) {
      const CoefficientGrid hb = analyze(conj_of(h), lat);
      const double pref = small_prefactor(G);
      for (long p = lat.p_lo; p <= lat.p_hi; ++p) {
         const std::vector<cplx> qv = Q.on_lattice(Fs, G.Tf, p, 0.0, G.delta, static_cast<size_t>(G.L));
         for (long l = 0; l < G.L; ++l) {
            const cplx t = pref * cg.at(l, p) * qv[l] * std::conj(hb.at(l, p));
            (l * G.delta <= y_cut ? s.near : s.far) += t;
         }
      }
   } else {
      const std::vector<Entry> es = entries_of(G);
      TildeBasis tb(G);
      const std::vector<cplx> Hs = conj_of(h).spectrum();
      const double pref = large_prefactor(G);
      for (long p = lat.p_lo; p <= lat.p_hi; ++p) {
         const std::vector<cplx> qv = q_at_entries(Q, Fs, G, p, es, tb);
         const std::vector<cplx> hb = tb.gather(Hs, p, es);
         for (size_t i = 0; i < es.size(); ++i) {
            const cplx t = pref * cg.at(es[i].l, p) * qv[i] * std::conj(hb[i]);
            (es[i].y <= y_cut ? s.near : s.far) += t;
         }
      }
   }
   s.total = s.near + s.far;
   return s;
}

double interaction_diagonal()
{
   static const double d = [] {
      QuadOptions opt;
      opt.tol = 1e-15;
      const SymbolSample s = integrate_complex(
         [](double x) {
            const double w = freq_cutoff(x);
            return cplx(w * w);
         },
         1.5, 4.0, opt);
      return 2.0 * s.value.real() / two_pi;
   }();
   return d;
}

InteractionSample interaction(const Curve &c, int j, int m, long l, long p, long l2, long p2, long k, long k2)
{
   const long lo = 1L << m, hi = 2L << m;
   if (p < lo || p > hi || p2 < lo || p2 > hi) { throw DomainError("p, p' must lie in [2^m, 2^(m+1)]"); }
   if (l < 0 || l2 < 0 || k < 0 || k2 < 0) { throw DomainError("lattice indices must be non-negative"); }
   const double slope = std::abs(c.d1(std::ldexp(1.0, -j)));
   const double delta = std::ldexp(slope, m);
   InteractionSample s;
   s.l = l;
   s.p = p;
   s.l2 = l2;
   s.p2 = p2;
   s.k = k;
   s.k2 = k2;
   s.shift = delta * static_cast<double>(l - l2) + static_cast<double>(k - k2);
   s.critical = critical_condition(c, j, m, l, l2, p, p2, k, k2);
   const double a = std::abs(s.shift);
   s.r_bucket = a < 1.0 ? 0 : static_cast<int>(std::lround(std::log2(a)));
   const RProfile R(c, j);
   const double sc = std::ldexp(1.0, m), pd = p, qd = p2, shift = s.shift;
   QuadOptions opt;
   opt.tol = 1e-12;
   opt.throw_on_fail = false;
   RealFn amp = [](double x) {
      const double w = freq_cutoff(x);
      return w * w;
   };
   cplx total = 0.0;
   for (double sg : {1.0, -1.0}) {
      RealFn ph = [&, sg](double x) {
         const double ax = sg * x;
         return -pd * R(sc * ax / pd) + qd * R(sc * ax / qd) + shift * x;
      };
      RealFn dph = [&, sg](double x) {
         const double ax = sg * x;
         return sg * sc * (-R.d1(sc * ax / pd) + R.d1(sc * ax / qd)) + shift;
      };
      const double a0 = sg > 0 ? 1.5 : -4.0, a1 = sg > 0 ? 4.0 : -1.5;
      constexpr int grid = 256;
      double prev = dph(a0);
      for (int i = 1; i <= grid && !s.stationary; ++i) {
         const double cur = dph(a0 + (a1 - a0) * i / grid);
         if (prev == 0.0 || (prev < 0.0) != (cur < 0.0)) { s.stationary = true; }
         prev = cur;
      }
      const SymbolSample q = p == p2 && shift == 0.0 ? integrate_complex([&](double x) { return cplx(amp(x)); }, a0, a1, opt)
                                                     : integrate_oscillatory(ph, dph, amp, a0, a1, opt);
      total += q.value;
      s.est_error += q.est_error / two_pi;
   }
   s.value = total / two_pi;
   return s;
}

bool critical_condition(const Curve &c, int j, int m, long l, long l2, long p, long p2, long k, long k2)
{
   const double slope = std::abs(c.d1(std::ldexp(1.0, -j)));
   const double a = std::abs(std::ldexp(slope, m) * static_cast<double>(l - l2) + static_cast<double>(k - k2));
   const double b = std::abs(static_cast<double>(p - p2));
   if (a == 0.0 && b == 0.0) { return true; }
   if (a == 0.0 || b == 0.0) { return false; }
   return a <= 4.0 * b && b <= 4.0 * a;
}

namespace {

struct PairDraw {
   long l, l2, k, k2, p, p2;
};

// indices realizing a shift close to `target` and |p - p2| = dp; false when
// the lattice cannot hold them
bool realize(const BilinearGrid &G, double target, long dp, bool flip_shift, bool flip_p, std::mt19937_64 &rng,
             PairDraw &d)
{
   long dl = 0, dk = 0;
   if (G.regime == Regime::small) {
      dl = std::max(1L, std::lround(target / G.delta));
      if (dl > G.L - 1) { return false; }
   } else {
      dl = std::min(static_cast<long>(std::floor(target / G.delta)), G.L - 1);
      dk = std::lround(target - dl * G.delta);
      if (dk > G.K || dk < 0) { return false; }
   }
   const long lo = 1L << G.m, hi = 2L << G.m;
   if (dp > hi - lo) { return false; }
   std::uniform_int_distribution<long> pick(lo, hi - dp);
   const long p = pick(rng);
   d = {dl, 0, dk, 0, p, p + dp};
   if (flip_shift) {
      std::swap(d.l, d.l2);
      std::swap(d.k, d.k2);
   }
   if (flip_p) { std::swap(d.p, d.p2); }
   return true;
}

} // namespace

InteractionDecayReport interaction_decay(const Curve &c, int j, int m, int samples_per_bucket,
                                         unsigned long long seed)
{
   if (m < 4) { throw DomainError("interaction_decay needs m >= 4"); }
   const BilinearGrid G = make_grid(c, j, m);
   const double diag = interaction_diagonal();
   InteractionDecayReport rep;
   std::vector<std::pair<double, double>> pts;
   for (int r = 0; r <= m; ++r) {
      std::mt19937_64 rng = item_rng(seed, static_cast<unsigned long long>(r));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      std::bernoulli_distribution coin(0.5);
      BucketRow row;
      row.r = r;
      int attempts = 0;
      while (row.samples < samples_per_bucket && attempts < 50 * samples_per_bucket) {
         ++attempts;
         const double target = std::ldexp(1.0 + unit(rng), r);
         const double rho = std::exp2(-2.0 + 4.0 * unit(rng));
         PairDraw d;
         const long dp = std::max(1L, std::lround(target * rho));
         if (!realize(G, target, dp, coin(rng), coin(rng), rng, d)) { continue; }
         const InteractionSample s = interaction(c, j, m, d.l, d.p, d.l2, d.p2, d.k, d.k2);
         if (!s.critical || s.r_bucket != r) { continue; }
         row.max_abs = std::max(row.max_abs, std::abs(s.value));
         row.est_error = std::max(row.est_error, s.est_error);
         ++row.samples;
         // one off-critical companion per critical sample, for the error-term law
         const double far = std::exp2((coin(rng) ? 1 : -1) * (3.0 + 3.0 * unit(rng)));
         const long dp2 = std::max(1L, std::lround(target * far));
         PairDraw e;
         if (realize(G, target, dp2, coin(rng), coin(rng), rng, e)) {
            const InteractionSample t = interaction(c, j, m, e.l, e.p, e.l2, e.p2, e.k, e.k2);
            if (!t.critical) {
               const double w = 1.0 + std::abs(static_cast<double>(t.p - t.p2)) + std::abs(t.shift);
               rep.noncritical_ratio = std::max(rep.noncritical_ratio, std::abs(t.value) * w / diag);
               ++rep.noncritical_samples;
            }
         }
      }
      if (row.samples == 0) { continue; }
      rep.rows.push_back(row);
      pts.emplace_back(r, row.max_abs);
   }
   if (pts.size() < 6) { throw InsufficientSamples("fewer than 6 populated buckets"); }
   rep.fit = fit_decay(pts, 2);
   return rep;
}

AgreementReport critical_agreement(const Curve &c, int j, int m, int samples, double min_gap, double slack,
                                   unsigned long long seed)
{
   const BilinearGrid G = make_grid(c, j, m);
   std::mt19937_64 rng = item_rng(seed, 0);
   std::uniform_real_distribution<double> unit(0.0, 1.0);
   std::bernoulli_distribution coin(0.5);
   AgreementReport rep;
   const double top = std::log2(std::ldexp(1.0, m)), bot = std::log2(min_gap);
   int attempts = 0;
   while (static_cast<int>(rep.points.size()) < samples && attempts < 50 * samples) {
      ++attempts;
      const double target = std::exp2(bot + (top - bot) * unit(rng));
      const long dp = std::lround(std::exp2(bot + (top - bot) * unit(rng)));
      PairDraw d;
      if (!realize(G, target, dp, coin(rng), coin(rng), rng, d)) { continue; }
      InteractionSample s = interaction(c, j, m, d.l, d.p, d.l2, d.p2, d.k, d.k2);
      // ratios within `slack` of the factor-4 boundary are left out
      const double ratio = std::abs(s.shift) / static_cast<double>(std::max(1L, std::labs(s.p - s.p2)));
      if (std::abs(std::abs(std::log2(ratio)) - 2.0) < std::log2(slack)) {
         ++rep.excluded;
         continue;
      }
      rep.points.push_back(s);
   }
   std::vector<double> off;
   for (const auto &s : rep.points) {
      if (!s.stationary) { off.push_back(std::abs(s.value)); }
   }
   if (off.empty() || rep.points.size() < 10) { throw InsufficientSamples("agreement needs off-critical samples"); }
   std::nth_element(off.begin(), off.begin() + off.size() / 2, off.end());
   rep.threshold = 10.0 * off[off.size() / 2];
   for (const auto &s : rep.points) {
      const bool sig = std::abs(s.value) > rep.threshold;
      rep.critical += s.critical;
      rep.significant += sig;
      rep.agree += (sig == s.critical);
   }
   rep.samples = static_cast<int>(rep.points.size());
   rep.rate = static_cast<double>(rep.agree) / rep.samples;
   return rep;
}

NormEstimate norm_D_estimate(const Curve &c, int j, int m, int trials, unsigned long long seed)
{
   const BilinearGrid G = make_grid(c, j, m);
   check_regime(G, Regime::small);
   NormEstimate est;
   for (int t = 0; t < trials; ++t) {
      std::mt19937_64 rng = item_rng(seed, static_cast<unsigned long long>(t));
      const SampledFunction g = random_g(G, rng);
      const SampledFunction h = random_h(G, rng);
      const double r = apply_Djm(g, h, G, Regime::small).l2_norm() / (g.l2_norm() * h.linf_norm());
      est.trials.push_back(r);
      est.value = std::max(est.value, r);
   }
   return est;
}

NormEstimate norm_B_estimate(const Curve &c, int j, int m, int trials, NormKind kind, unsigned long long seed)
{
   const BilinearGrid G = make_grid(c, j, m);
   NormEstimate est;
   for (int t = 0; t < trials; ++t) {
      std::mt19937_64 rng = item_rng(seed, static_cast<unsigned long long>(t));
      const SampledFunction f = random_f(G, rng);
      const SampledFunction g = random_g(G, rng);
      const SampledFunction B = apply_Bjm_discrete(f, g, G, G.regime);
      const double l1 = B.l1_norm(), l2 = B.l2_norm();
      est.l1.push_back(l1);
      est.l2.push_back(l2);
      if (l1 > std::sqrt(G.Tx) * l2 * (1 + 1e-12)) { est.cauchy_schwarz = false; }
      const double r = (kind == NormKind::L1 ? l1 : l2) / (f.l2_norm() * g.l2_norm());
      est.trials.push_back(r);
      est.value = std::max(est.value, r);
   }
   return est;
}

bool large_far_branch(const BilinearGrid &G, double exponent) { return G.delta > std::exp2(exponent * G.m); }

Phase2D bilinear_phase(double tau)
{
   return {[tau](double x, double y) { return tau * x * y; }, [tau](double x, double) { return tau * x; }};
}

Phase2D curve_phase(const Curve &c, int j, double tau)
{
   auto R = std::make_shared<RProfile>(c, j);
   const double g1 = std::abs(c.d1(std::ldexp(1.0, -j)));
   auto piece = [R](double x) {
      const double a = std::abs(x);
      return (*R)(a) - a * R->d1(a);
   };
   Phase2D ph;
   ph.phase = [R, g1, tau](double x, double y) {
      const double y2 = y + g1 * tau;
      return y * (*R)(std::abs(x / y)) - y2 * (*R)(std::abs((x - tau) / y2));
   };
   ph.d_eta = [piece, g1, tau](double x, double y) {
      const double y2 = y + g1 * tau;
      return piece(x / y) - piece((x - tau) / y2);
   };
   return ph;
}

double mixed_derivative_min(const Phase2D &ph, double a0, double a1, double b0, double b1, int grid)
{
   double mn = std::numeric_limits<double>::infinity();
   for (int i = 0; i < grid; ++i) {
      const double x = a0 + (a1 - a0) * i / (grid - 1);
      const double h = 1e-5 * std::max(1.0, std::abs(x));
      for (int k = 0; k < grid; ++k) {
         const double y = b0 + (b1 - b0) * k / (grid - 1);
         const double v = (ph.d_eta(x + h, y) - ph.d_eta(x - h, y)) / (2 * h);
         mn = std::min(mn, std::abs(v));
      }
   }
   return mn;
}

HormanderReport hormander_check(const RealFn &F, double a0, double a1, const RealFn &G, double b0, double b1,
                                const Phase2D &phase, int m, double tau, double c)
{
   HormanderReport rep;
   rep.lambda = std::ldexp(tau, m);
   if (tau != 0.0) {
      rep.mixed_min = mixed_derivative_min(phase, a0, a1, b0, b1) / std::abs(tau);
      if (rep.mixed_min < c) {
         throw MixedDerivativeTooSmall("min |d_xi d_eta phase| / |tau| = " + std::to_string(rep.mixed_min));
      }
   }
   QuadOptions plain;
   plain.tol = 1e-13;
   rep.normF = std::sqrt(integrate_complex([&](double x) { return cplx(F(x) * F(x)); }, a0, a1, plain).value.real());
   rep.normG = std::sqrt(integrate_complex([&](double x) { return cplx(G(x) * G(x)); }, b0, b1, plain).value.real());
   const double sc = std::ldexp(1.0, m);
   QuadOptions in_opt;
   in_opt.tol = 1e-13;
   in_opt.throw_on_fail = false;
   double inner_err = 0.0;
   auto inner = [&](double x) -> cplx {
      const double fx = F(x);
      if (fx == 0.0) { return 0.0; }
      const SymbolSample s = integrate_oscillatory([&](double y) { return -sc * phase.phase(x, y); },
                                                   [&](double y) { return -sc * phase.d_eta(x, y); }, G, b0, b1,
                                                   in_opt);
      inner_err = std::max(inner_err, s.est_error);
      return fx * s.value;
   };
   QuadOptions out_opt;
   out_opt.tol = 1e-11;
   out_opt.throw_on_fail = false;
   const SymbolSample outer = integrate_complex(inner, a0, a1, out_opt);
   rep.value = outer.value;
   rep.est_error = outer.est_error + inner_err * (a1 - a0);
   rep.bound = tau == 0.0 ? 1.0 : std::min(1.0, 1.0 / std::sqrt(std::abs(rep.lambda)));
   rep.ratio = std::abs(rep.value) / (rep.normF * rep.normG);
   rep.C = rep.ratio / rep.bound;
   return rep;
}

DecayFit hormander_sweep(const std::vector<double> &lambdas, std::vector<HormanderReport> *rows)
{
   RealFn bump = [](double x) { return std::exp(-x * x); };
   std::vector<std::pair<double, double>> pts;
   for (double lam : lambdas) {
      const HormanderReport r = hormander_check(bump, -4.5, 4.5, bump, -4.5, 4.5, bilinear_phase(lam), 0, lam);
      if (rows) { rows->push_back(r); }
      pts.emplace_back(std::log2(lam), r.ratio);
   }
   return fit_decay(pts);
}

double sigma_uniform_norm(const SampledFunction &F, const PhaseFamily &fam)
{
   const double nrm = F.l2_norm();
   if (nrm == 0.0) { return 0.0; }
   if (fam.d < 2) { throw DomainError("phase family needs d >= 2"); }
   const double e = static_cast<double>(fam.d) / (fam.d - 1);
   std::vector<double> pw(F.size());
   for (size_t i = 0; i < F.size(); ++i) { pw[i] = std::pow(std::max(0.0, F.x(i)), e); }
   double best = 0.0;
   for (int sg : {1, -1}) {
      for (int ia = 0; ia < fam.a_count; ++ia) {
         const double t = fam.a_count == 1 ? 0.0 : -fam.a_octaves + 2.0 * fam.a_octaves * ia / (fam.a_count - 1);
         const double a = sg * std::exp2(fam.m + t);
         // b for which q' vanishes somewhere in [0, 1], plus a margin
         const double reach = std::abs(a) * e;
         const double blo = (a > 0 ? -reach : 0.0) - two_pi, bhi = (a > 0 ? 0.0 : reach) + two_pi;
         for (int ib = 0; ib < fam.b_count; ++ib) {
            const double b = fam.b_count == 1 ? blo : blo + (bhi - blo) * ib / (fam.b_count - 1);
            cplx s = 0.0;
            for (size_t i = 0; i < F.size(); ++i) { s += F.values[i] * expi(-(a * pw[i] + b * F.x(i))); }
            best = std::max(best, std::abs(s) * F.dx / nrm);
         }
      }
   }
   return best;
}

Lemma2Report lemma2_check(int d, int j, int m, int trials, unsigned long long seed)
{
   if (d < 2) { throw DomainError("lemma2_check needs d >= 2"); }
   if (j * (d - 1) < m) { throw PreconditionError("lemma2_check needs j(d-1) >= m"); }
   const Curve c = monomial(d);
   const BilinearGrid G = make_grid(c, j, m);
   const double e = static_cast<double>(d) / (d - 1);
   const double N = std::exp2(0.5 * m);
   const double l_cut = N * std::exp2(j * (d - 1) - m);
   const double y_cut = l_cut * G.delta;
   const double y_top = (G.L - 1) * G.delta + G.K;
   Lemma2Report rep;
   const Lattice lat = G.lattice();
   for (int t = 0; t < trials; ++t) {
      std::mt19937_64 rng = item_rng(seed, static_cast<unsigned long long>(t));
      std::uniform_int_distribution<long> pick(lat.p_lo, lat.p_hi);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      // a matched to the symbol of Q_{m,p*}: p R(2^m xi / p) = p^(1-e) 2^(m e) xi^e / e - p / e
      const double ps = static_cast<double>(pick(rng));
      const double a = std::pow(ps, 1.0 - e) * std::exp2(m * e) / e;
      const double b = -y_top * unit(rng);
      std::vector<cplx> spec(G.Nf, cplx(0.0));
      for (size_t q = 0; q < G.Nf; ++q) {
         const long k = q < G.Nf / 2 ? static_cast<long>(q) : static_cast<long>(q) - static_cast<long>(G.Nf);
         const double xi = two_pi * k / G.Tf;
         if (xi <= 0.0) { continue; }
         const double cut = freq_cutoff(xi);
         if (cut != 0.0) { spec[q] = cut * expi(a * std::pow(xi, e) + b * xi); }
      }
      const SampledFunction f0 = SampledFunction::from_spectrum(0.0, G.dx_f, spec, 4.0);
      const SampledFunction h = random_h(G, rng);
      const CoefficientGrid w = lambda_weights(f0, h, G);
      CoefficientGrid cw(lat, w.n_l);
      for (size_t i = 0; i < w.data.size(); ++i) { cw.data[i] = std::conj(w.data[i]); }
      const SampledFunction g = synthesize_raw(cw, 0.0, G.dx_x, G.Nx);
      const SampledFunction gr = random_g(G, rng);
      const double fn = f0.l2_norm();
      auto lam = [&](const SampledFunction &gg) {
         const CoefficientGrid cg = analyze(gg, lat);
         cplx s = 0.0;
         for (size_t i = 0; i < cg.data.size(); ++i) { s += cg.data[i] * w.data[i]; }
         return std::abs(s) / (fn * gg.l2_norm() * h.linf_norm());
      };
      const double gn = g.l2_norm();
      if (gn == 0.0) { continue; }
      const double v = lam(g);
      rep.random_g = std::max(rep.random_g, lam(gr));
      if (v > rep.value) {
         rep.value = v;
         rep.a_best = a;
         rep.b_best = b;
         const LambdaSplit sp = trilinear_split(f0, g, h, G, y_cut);
         const double scale = fn * gn * h.linf_norm();
         rep.near = std::abs(sp.near) / scale;
         rep.far = std::abs(sp.far) / scale;
      }
   }
   return rep;
}

} // namespace bht
