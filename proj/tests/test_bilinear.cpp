#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bht/bilinear.hpp"
#include "bht/bumps.hpp"
#include "bht/errors.hpp"
#include "bht/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace bht;

namespace {

double max_abs(const SampledFunction &f)
{
   double s = 0.0;
   for (const cplx &v : f.values) { s = std::max(s, std::abs(v)); }
   return s;
}

double diff_norm(const SampledFunction &a, const SampledFunction &b)
{
   double s = 0.0;
   for (size_t i = 0; i < a.size(); ++i) { s += std::norm(a.values[i] - b.values[i]); }
   return std::sqrt(s * a.dx);
}

// duality defect |int B h - int f D| / (|f| |g| |h|_inf)
double duality_defect(const BilinearGrid &G, unsigned long long seed)
{
   std::mt19937_64 rng = item_rng(seed, 0);
   const SampledFunction f = random_f(G, rng), g = random_g(G, rng), h = random_h(G, rng);
   const cplx lhs = pairing(apply_Bjm_discrete(f, g, G, G.regime), h);
   const cplx rhs = pairing(f, apply_Djm(g, h, G, G.regime));
   return std::abs(lhs - rhs) / (f.l2_norm() * g.l2_norm() * h.linf_norm());
}

} // namespace

TEST_CASE("regimes")
{
   const Curve sq = monomial(2);
   // gamma'(2^-j) = 2^(1-j) against 2^-m
   CHECK(regime_of(sq, 6, 5) == Regime::small);
   CHECK(regime_of(sq, 5, 5) == Regime::large);
   CHECK(regime_of(sq, 0, 4) == Regime::large);
   CHECK(small_regime_j(sq, 5) == 7);
   CHECK(small_regime_j(sq, 5, 1.0) == 6);
   CHECK(make_grid(sq, 7, 5).delta == doctest::Approx(0.5));
   CHECK_THROWS_AS(apply_Bjm_discrete(SampledFunction(), SampledFunction(), make_grid(sq, 7, 4), Regime::large),
                   RegimeMismatch);
}

TEST_CASE("continuous operator is bilinear")
{
   const Curve sq = monomial(2);
   const BilinearGrid G = make_grid(sq, 7, 4);
   std::mt19937_64 rng(3);
   const SampledFunction f1 = random_f(G, rng), f2 = random_f(G, rng), g = random_g(G, rng);
   CHECK(max_abs(apply_Bjm_continuous(G.zero_f(), g, G)) == 0.0);
   const cplx a(1.5, -0.5);
   const SampledFunction lhs = apply_Bjm_continuous(a * f1 + f2, g, G);
   const SampledFunction rhs = a * apply_Bjm_continuous(f1, g, G) + apply_Bjm_continuous(f2, g, G);
   CHECK(diff_norm(lhs, rhs) <= 1e-10 * rhs.l2_norm());
   const SampledFunction lg = apply_Bjm_continuous(f1, a * g, G);
   CHECK(diff_norm(lg, a * apply_Bjm_continuous(f1, g, G)) <= 1e-10 * lg.l2_norm());
}

TEST_CASE("discrete operators: zero inputs")
{
   const Curve sq = monomial(2);
   for (const BilinearGrid &G : {make_grid(sq, 7, 5), make_grid(sq, 0, 4)}) {
      std::mt19937_64 rng(1);
      const SampledFunction f = random_f(G, rng), g = random_g(G, rng), h = random_h(G, rng);
      CHECK(max_abs(apply_Bjm_discrete(G.zero_f(), g, G, G.regime)) == 0.0);
      CHECK(max_abs(apply_Djm(g, G.zero_x(), G, G.regime)) == 0.0);
      CHECK(trilinear_lambda(f, G.zero_x(), h, G) == cplx(0.0));
      CHECK(trilinear_lambda(f, g, G.zero_x(), G) == cplx(0.0));

      // negative frequencies meet no lattice packet
      SampledFunction neg = G.zero_x();
      for (size_t i = 0; i < neg.size(); ++i) {
         neg.values[i] = std::polar(1.0, -2 * std::numbers::pi * 5 * neg.x(i) / neg.period());
      }
      CHECK(max_abs(apply_Bjm_discrete(f, neg, G, G.regime)) <= 1e-12);
   }
}

TEST_CASE("duality and Hoelder in both regimes")
{
   const Curve sq = monomial(2);
   for (const BilinearGrid &G : {make_grid(sq, 7, 5), make_grid(sq, 0, 4)}) {
      for (unsigned long long s = 1; s <= 3; ++s) { CHECK(duality_defect(G, s) <= 1e-6); }
      std::mt19937_64 rng(8);
      const SampledFunction f = random_f(G, rng), g = random_g(G, rng), h = random_h(G, rng);
      const cplx lam = trilinear_lambda(f, g, h, G);
      CHECK(std::abs(lam - pairing(f, apply_Djm(g, h, G, G.regime))) <= 1e-6 * std::abs(lam));
      CHECK(std::abs(lam) <= apply_Bjm_discrete(f, g, G, G.regime).l1_norm() * h.linf_norm() * (1 + 1e-12));
      const LambdaSplit sp = trilinear_split(f, g, h, G, 0.5 * G.Tx);
      CHECK(std::abs(sp.near + sp.far - sp.total) <= 1e-12 * std::abs(sp.total));
      CHECK(std::abs(sp.total - lam) <= 1e-8 * std::abs(lam));
   }
}

TEST_CASE("interaction samples")
{
   const Curve sq = monomial(2);
   const InteractionSample d = interaction(sq, 0, 6, 3, 70, 3, 70);
   CHECK(std::abs(d.value.imag()) <= 1e-12);
   CHECK(d.value.real() == doctest::Approx(interaction_diagonal()).epsilon(1e-9));
   CHECK(d.value.real() > 0.0);

   const InteractionSample a = interaction(sq, 0, 6, 2, 70, 5, 90, 3, 11);
   const InteractionSample b = interaction(sq, 0, 6, 5, 90, 2, 70, 11, 3);
   CHECK(std::abs(a.value - std::conj(b.value)) <= 1e-12);

   // t^2: the phase is a xi^2 / 2 with a = 2^(2m) (1/p - 1/p2), stationary at xi = shift / a
   const int m = 8;
   const long p = 256, p2 = 300, k = 94;
   const double acoef = std::ldexp(1.0, 2 * m) * (1.0 / p - 1.0 / p2);
   const double xs = k / acoef;
   const double cut = bumps().phi_window(xs);
   const double predicted = cut * cut * std::sqrt(2 * std::numbers::pi / acoef) / (2 * std::numbers::pi);
   const InteractionSample s = interaction(sq, 0, m, 0, p, 0, p2, k, 0);
   CHECK(std::abs(s.value) == doctest::Approx(predicted).epsilon(0.1));
   CHECK(s.stationary);
}

TEST_CASE("critical_condition")
{
   const Curve sq = monomial(2);
   // j = 7, m = 5: 2^m gamma'(2^-j) = 1/2
   CHECK_FALSE(critical_condition(sq, 7, 5, 4, 4, 33, 60));
   CHECK(critical_condition(sq, 7, 5, 10, 30, 40, 50));
   CHECK(critical_condition(sq, 7, 5, 4, 4, 40, 40));
   CHECK_FALSE(critical_condition(sq, 7, 5, 0, 60, 40, 41));
}

TEST_CASE("interaction decay at small scale")
{
   const InteractionDecayReport rep = interaction_decay(monomial(2), 0, 7, 20);
   CHECK(rep.rows.front().max_abs == doctest::Approx(interaction_diagonal()).epsilon(0.5));
   CHECK(rep.fit.slope < 0.0);
   CHECK(rep.noncritical_ratio <= 10.0);
   CHECK_THROWS_AS(interaction_decay(monomial(2), 0, 3, 4), DomainError);
}

TEST_CASE("norm estimates")
{
   const Curve sq = monomial(2);
   const NormEstimate d = norm_D_estimate(sq, 6, 4, 4);
   CHECK(d.trials.size() == 4);
   double run = 0.0;
   for (double t : d.trials) { run = std::max(run, t); }
   CHECK(d.value == run);

   const NormEstimate b1 = norm_B_estimate(sq, 0, 4, 3, NormKind::L1);
   CHECK(b1.cauchy_schwarz);
   const BilinearGrid G = make_grid(sq, 0, 4);
   for (size_t i = 0; i < b1.l1.size(); ++i) { CHECK(b1.l1[i] <= std::sqrt(G.Tx) * b1.l2[i] * (1 + 1e-12)); }
}

TEST_CASE("hormander_check")
{
   auto F = [](double x) { return std::exp(-20 * (x - 0.5) * (x - 0.5)); };
   const HormanderReport z = hormander_check(F, 0.0, 1.0, F, 0.0, 1.0, bilinear_phase(0.0), 4, 0.0);
   CHECK(z.bound == 1.0);
   CHECK(z.ratio <= 1.0 + 1e-12);

   const HormanderReport r = hormander_check(F, 0.0, 1.0, F, 0.0, 1.0, bilinear_phase(1.0), 6, 1.0);
   CHECK(r.lambda == 64.0);
   CHECK(r.bound == doctest::Approx(0.125));
   CHECK(r.mixed_min == doctest::Approx(1.0));
   CHECK_THROWS_AS(hormander_check(F, 0.0, 1.0, F, 0.0, 1.0, bilinear_phase(1.0), 6, 1.0, 2.0),
                   MixedDerivativeTooSmall);

   const double tau = 0.05;
   const Phase2D cp = curve_phase(monomial(2), 0, tau);
   CHECK(mixed_derivative_min(cp, 1.5, 4.0, 1.5, 4.0) >= 0.01 * tau);
}

TEST_CASE("sigma uniformity")
{
   const int m = 4;
   PhaseFamily fam;
   fam.m = m;
   const size_t n = 4096;
   SampledFunction F(0.0, 1.0 / n, n);
   CHECK(sigma_uniform_norm(F, fam) == 0.0);

   const double a = std::ldexp(1.0, m);
   for (size_t i = 0; i < n; ++i) {
      const double x = F.x(i);
      F.values[i] = std::polar(1.0, a * x * x - a * x);
   }
   const double self = sigma_uniform_norm(F, fam);
   CHECK(self >= 0.9);
   CHECK(self <= 1.0 + 1e-9);

   std::mt19937_64 rng(4);
   std::bernoulli_distribution coin;
   double prev = 1e300;
   for (int k : {6, 9, 12}) {
      SampledFunction S(0.0, 1.0 / n, n);
      const size_t run = n >> k;
      for (size_t i = 0; i < n; i += run) {
         const double v = coin(rng) ? 1.0 : -1.0;
         for (size_t q = 0; q < run; ++q) { S.values[i + q] = v; }
      }
      const double val = sigma_uniform_norm(S, fam);
      CHECK(val < prev);
      prev = val;
   }
   CHECK(prev < 0.2);
}

TEST_CASE("lemma2_check aligned beats random")
{
   const Lemma2Report r = lemma2_check(2, 6, 4, 2);
   CHECK(r.value > 0.0);
   CHECK(r.random_g <= r.value);
}
