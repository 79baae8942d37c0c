#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bht/bumps.hpp"
#include "bht/curves.hpp"
#include "bht/dual_phase.hpp"
#include "bht/errors.hpp"
#include "bht/oscillatory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace bht;

namespace {

template <class F>
auto simpson(F f, double a, double b, int n) -> decltype(f(a))
{
   if (n % 2) { ++n; }
   const double h = (b - a) / n;
   auto s = f(a) + f(b);
   for (int i = 1; i < n; ++i) { s += f(a + i * h) * (i % 2 ? 4.0 : 2.0); }
   return s * (h / 3.0);
}

// m_j by brute force Simpson
cplx mj_reference(const Curve &c, int j, double xi, double eta)
{
   const double u = std::ldexp(1.0, -j);
   auto f = [&](double t) { return std::polar(bumps().rho(t), -xi * u * t + eta * c.eval(u * t)); };
   return simpson(f, -1.0, -0.25, 200000) + simpson(f, 0.25, 1.0, 200000);
}

} // namespace

TEST_CASE("make_dual: quadratic phases")
{
   const PhasePair sq = make_dual([](double t) { return t * t; }, [](double t) { return 2 * t; }, 0.0, 10.0);
   for (double xi : {0.5, 3.0, 11.0, 19.0}) {
      CHECK(sq.psi(xi) == doctest::Approx(xi * xi / 4).epsilon(1e-8));
      CHECK(sq.psi_prime(xi) == doctest::Approx(xi / 2).epsilon(1e-10));
   }
   const double eta = 3.0;
   const PhasePair s3 = make_dual([&](double t) { return eta * t * t; }, [&](double t) { return 2 * eta * t; }, 0.0, 10.0);
   CHECK(s3.psi(7.0) == doctest::Approx(49.0 / 12).epsilon(1e-8));
   for (double t : {0.3, 2.0, 9.0}) { CHECK(s3.psi_prime(s3.phi_prime(t)) == doctest::Approx(t).epsilon(1e-8)); }
}

TEST_CASE("make_dual: cubic phase against the Legendre sup")
{
   const PhasePair cu = make_dual([](double t) { return t * t * t; }, [](double t) { return 3 * t * t; }, 0.1, 10.0);
   for (double xi : {0.5, 4.0, 40.0, 250.0}) {
      double best = -1e300;
      for (int i = 0; i <= 400000; ++i) {
         const double t = 0.1 + 9.9 * i / 400000.0;
         best = std::max(best, t * xi - t * t * t);
      }
      CHECK(cu.psi(xi) == doctest::Approx(best).epsilon(1e-6));
   }
   CHECK_THROWS_AS(make_dual([](double t) { return t * t; }, [](double t) { return 2 * t; }, -1.0, 1.0).psi(-5.0),
                   RangeError);
   CHECK_THROWS_AS(make_dual([](double t) { return std::sin(t); }, [](double t) { return std::cos(t); }, 0.0, 6.0),
                   MonotonicityError);
}

TEST_CASE("R_profile")
{
   CHECK(R_profile(monomial(2), 0, 2.0) == doctest::Approx(1.5));
   CHECK(R_profile(monomial(3), 0, 4.0) == doctest::Approx(14.0 / 3));

   const Curve c = laurent({{2, 1.0}, {4, 1.0}});
   const double ref = simpson([&](double v) { return profile_r(c, 8, v); }, 1.0, 1.5, 4000);
   CHECK(R_profile(c, 8, 1.5, true) == doctest::Approx(ref).epsilon(1e-10));

   const RProfile R(c, 8, true);
   const double y = 1.2;
   const double piece = simpson([&](double v) { return profile_r(c, 8, v); }, y, 1.5, 4000);
   CHECK(std::abs(R(1.5) - (R(y) + piece)) <= 1e-10);
}

TEST_CASE("phi_pair and mean_value_factor")
{
   const Curve sq = monomial(2);
   const int p = 256, q = 260;
   const PhasePair pp = phi_pair(p, q, sq, 0);
   for (double t : {200.0, 300.0, 480.0}) {
      CHECK(pp.phi(t) == doctest::Approx((1.0 / p - 1.0 / q) * t * t / 2 + (q - p) / 2.0).epsilon(1e-12));
      CHECK(pp.phi_prime(t) == doctest::Approx(t * (1.0 / p - 1.0 / q)).epsilon(1e-12));
      CHECK(mean_value_factor(p, q, t, sq, 0) == doctest::Approx(1.0).epsilon(1e-12));
   }
   CHECK_THROWS_AS(phi_pair(p, p, sq, 0), DegenerateError);
   CHECK_THROWS_AS(mean_value_factor(p, p, 300.0, sq, 0), DegenerateError);

   const Curve cu = monomial(3);
   const PhasePair pc = phi_pair(p, q, cu, 0);
   const double t = 300.0, h = 1e-3;
   CHECK(pc.phi_prime(t) == doctest::Approx((pc.phi(t + h) - pc.phi(t - h)) / (2 * h)).epsilon(1e-6));

   // R'' = 1 / (2 sqrt x) for t^3; the factor must lie between the bracket values
   const double mv = mean_value_factor(p, q, t, cu, 0);
   const double lo = 1 / (2 * std::sqrt(t / p)), hi = 1 / (2 * std::sqrt(t / q));
   CHECK(mv >= std::min(lo, hi) - 1e-12);
   CHECK(mv <= std::max(lo, hi) + 1e-12);
   const double near0 = mean_value_factor(p, q, 1e-3, cu, 0);
   CHECK(near0 == doctest::Approx(1 / (2 * std::sqrt(1e-3 / q))).epsilon(0.02));
}

TEST_CASE("phase pairs carry the mixed lower bound")
{
   const Curve cu = monomial(3);
   const double cg = check_nonflat(cu, Side::origin, default_j_range(Side::origin)).c_gamma;
   for (int q : {257, 300, 400, 511}) {
      const PhasePair pp = phi_pair(256, q, cu, 0);
      for (double x = 256; x <= 512; x += 16) {
         const double h = 1e-3 * x;
         const double d2 = (pp.phi_prime(x + h) - pp.phi_prime(x - h)) / (2 * h);
         CHECK(std::abs(d2) >= 0.5 * cg * std::abs(pp.phi_prime(x)) / x);
      }
   }
}

TEST_CASE("stationary_phase_model")
{
   auto w = [](double x) { return x * x + 1; };
   auto w1 = [](double x) { return 2 * x; };
   auto w2 = [](double) { return 2.0; };
   auto a = [](double x) { return std::exp(-x * x); };
   const double lam = 64.0;
   const cplx main = stationary_phase_model(w, w1, w2, a, lam, 0.0);
   const cplx shifted = stationary_phase_model([](double x) { return x * x; }, w1, w2, a, lam, 0.0);
   CHECK(std::abs(main - shifted * std::polar(1.0, -std::numbers::pi * lam)) <= 1e-14);

   const cplx quad = simpson([&](double x) { return std::polar(a(x), -std::numbers::pi * lam * w(x)); }, -8.0, 8.0, 400000);
   CHECK(std::abs(quad - main) <= 2.0 * std::pow(lam, -1.5));

   CHECK(stationary_phase_model(w, w1, w2, [](double x) { return x; }, lam, 0.0) == cplx(0.0));
   CHECK_THROWS_AS(stationary_phase_model(w, w1, w2, a, lam, 0.5), NotStationary);

   const DecayFit f = stationary_phase_error_sweep({16, 32, 64, 128, 256, 512, 1024});
   CHECK(f.slope <= -1.4);
}

TEST_CASE("compute_mj")
{
   const Curve sq = monomial(2);
   CHECK(std::abs(compute_mj(sq, 0, 0.0, 0.0).value) <= 1e-12);
   CHECK(std::abs(compute_mj(sq, 0, 0.0, 50.0).value - mj_reference(sq, 0, 0.0, 50.0)) <= 1e-9);
   CHECK(std::abs(compute_mj(sq, 3, 17.0, -40.0).value - mj_reference(sq, 3, 17.0, -40.0)) <= 1e-9);

   // even gamma, odd rho: m(-xi, eta) = conj m(xi, -eta) = -m(xi, eta)
   for (double xi : {3.0, 40.0}) {
      const cplx a = compute_mj(sq, 1, -xi, 25.0).value;
      const cplx b = compute_mj(sq, 1, xi, -25.0).value;
      const cplx c = compute_mj(sq, 1, xi, 25.0).value;
      CHECK(std::abs(a - std::conj(b)) <= 1e-10);
      CHECK(std::abs(a + c) <= 1e-10);
   }
}

TEST_CASE("compute_mj_kl partitions m_j")
{
   const Curve cu = monomial(3);
   std::mt19937_64 rng(11);
   std::uniform_real_distribution<double> U(-6.0, 6.0);
   for (int i = 0; i < 100; ++i) {
      const int j = 3;
      const double xi = std::copysign(std::exp2(std::abs(U(rng))), U(rng));
      const double eta = std::copysign(std::exp2(std::abs(U(rng)) + 2), U(rng));
      cplx sum = 0.0;
      for (int k = 0; k < 3; ++k) {
         for (int l = 0; l < 3; ++l) { sum += compute_mj_kl(cu, j, k, l, xi, eta).value; }
      }
      CHECK(std::abs(sum - compute_mj(cu, j, xi, eta).value) <= 1e-10);
   }
   // nu0(5) = 0
   CHECK(compute_mj_kl(cu, 0, 0, 1, 5.0, 3.0).value == cplx(0.0));

   const int j = 3;
   const double xi = 40.0, eta = 900.0; // xi / 8 = 5, 2^-3 gamma'(2^-3) eta = 5.27
   const double u = std::ldexp(1.0, -j);
   const cplx ref = mj_reference(cu, j, xi, eta) * bumps().nu2(xi * u) * bumps().nu2(u * cu.d1(u) * eta);
   CHECK(std::abs(compute_mj_kl(cu, j, 2, 2, xi, eta).value - ref) <= 1e-9);
   CHECK_THROWS_AS(compute_mj_kl(cu, 0, 3, 0, 1.0, 1.0), DomainError);
}

TEST_CASE("compute_m22_piece")
{
   const Curve sq = monomial(2);
   CHECK(compute_m22_piece(sq, 0, 6, 6, 1.0, 1.0).value == cplx(0.0));

   const double xi = 20.0, eta = 7.0;
   cplx sum = 0.0;
   for (int m = 0; m <= 12; ++m) {
      for (int n = 0; n <= 12; ++n) { sum += compute_m22_piece(sq, 0, m, n, xi, eta).value; }
   }
   CHECK(std::abs(sum - compute_mj_kl(sq, 0, 2, 2, xi, eta).value) <= 1e-8);

   // m = n = 6: xi in 64 (3/2, 4), eta gamma'(1) in 64 (3/2, 4), t_m = xi / (2 eta) = 0.7
   const double x6 = 160.0, e6 = x6 / 1.4;
   const double ref = std::abs(mj_reference(sq, 0, x6, e6)) * bumps().phi_window(x6 / 64) * bumps().phi_window(2 * e6 / 64);
   CHECK(std::abs(compute_m22_piece(sq, 0, 6, 6, x6, e6).value) == doctest::Approx(ref).epsilon(1e-8));
}

TEST_CASE("main_term_m22")
{
   const Curve sq = monomial(2);
   CHECK_THROWS_AS(main_term_m22(sq, 0, 8, 512.0, 100.0), NoStationaryPoint);

   const int m = 8;
   const double xi = 512.0, eta = xi / 1.2;
   const StationaryPoint sp = stationary_point(sq, 0, xi, eta);
   CHECK(sp.t == doctest::Approx(0.6).epsilon(1e-12));
   const cplx main = main_term_m22(sq, 0, m, xi, eta);
   const cplx piece = compute_m22_piece(sq, 0, m, m, xi, eta).value;
   CHECK(std::abs(piece - main) <= 0.25 * std::abs(main));

   // -Psi_eta(xi) for Phi = eta t^2
   const PhasePair pp = make_dual([&](double t) { return eta * t * t; }, [&](double t) { return 2 * eta * t; }, 0.0, 2.0);
   CHECK(sp.phase == doctest::Approx(-pp.psi(xi)).epsilon(1e-6));
}

TEST_CASE("off-diagonal and diagonal sweeps")
{
   const Curve sq = monomial(2);
   const SweepReport off = offdiagonal_decay_check(sq, 0, {3, 4, 5, 6, 7, 8}, 5, 6);
   CHECK(off.fit.slope <= -0.9);
   CHECK_THROWS_AS(offdiagonal_decay_check(sq, 0, {3, 4, 5, 6}, 0, 4), PreconditionError);
}

TEST_CASE("check_hm_symbol")
{
   const Curve sq = monomial(2);
   // points reach 2^8 and the j tail decays like 2^(8 - j), so +-16 is already converged
   const HMReport a = check_hm_symbol(sq, 0, 0, {-16, 16}, 20);
   CHECK(std::isfinite(a.max_xi));
   CHECK(std::isfinite(a.max_eta));
   CHECK(a.points == 20);
   const HMReport b = check_hm_symbol(sq, 0, 0, {-32, 32}, 20);
   CHECK(std::abs(b.max_xi - a.max_xi) <= 0.05 * a.max_xi);
   CHECK(std::abs(b.max_eta - a.max_eta) <= 0.05 * a.max_eta);
   CHECK_THROWS_AS(check_hm_symbol(sq, 2, 0, {-8, 8}, 20), DomainError);
}
