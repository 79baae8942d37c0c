#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bht/curves.hpp"
#include "bht/errors.hpp"
#include "bht/wavepackets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace bht;

namespace {

SampledFunction random_band(const Lattice &lat, double dx, size_t n, std::mt19937_64 &rng)
{
   SampledFunction g(0.0, dx, n);
   std::normal_distribution<double> N;
   std::vector<cplx> spec(n, cplx(0.0));
   for (size_t q = 0; q < n; ++q) {
      const double xi = g.xi(q);
      if (xi > lat.band_lo() && xi < lat.band_hi()) { spec[q] = {N(rng), N(rng)}; }
   }
   return SampledFunction::from_spectrum(0.0, dx, spec, lat.band_hi());
}

double diff_norm(const SampledFunction &a, const SampledFunction &b)
{
   double e = 0.0;
   for (size_t i = 0; i < a.size(); ++i) { e += std::norm(a.values[i] - b.values[i]); }
   return std::sqrt(e * a.dx);
}

double rel_error(const SampledFunction &a, const SampledFunction &b)
{
   double e = 0.0;
   for (size_t i = 0; i < a.size(); ++i) { e += std::norm(a.values[i] - b.values[i]); }
   return std::sqrt(e * a.dx) / b.l2_norm();
}

} // namespace

TEST_CASE("wave packets are unit normalized")
{
   const double dx = 0.5;
   for (int m : {0, 3, 6}) {
      const size_t n = static_cast<size_t>(16 * (1 << m) / dx);
      for (long p : {1L << m, (1L << m) + 1, 2L << m}) {
         for (double l : {0.0, 2.5, 7.0}) {
            CHECK(wavepacket({m, l, p}, 0.0, dx, n).l2_norm() == doctest::Approx(1.0).epsilon(1e-10));
         }
      }
   }
   CHECK(window_hat(0.0) == 0.0);
   CHECK(window_hat(2.0) == 0.0);
   CHECK(window_hat(-0.5) == 0.0);
   CHECK_THROWS_AS(wavepacket({4, 0.0, 15}, 0.0, 0.5, 512), DomainError);
   CHECK_THROWS_AS(wavepacket({4, 0.0, 32}, 0.0, 2.0, 512), AliasingError);
}

TEST_CASE("translation by one lattice step")
{
   // phi_{m,l+1,p}(x) = exp(i p) phi_{m,l,p}(x - 2^m): the modulation is tied to x, not to the window
   const int m = 4;
   const long p = 21;
   const double dx = 0.5;
   const size_t n = 1024;
   const SampledFunction a = wavepacket({m, 2.0, p}, 0.0, dx, n);
   const SampledFunction b = wavepacket({m, 3.0, p}, 0.0, dx, n);
   const size_t shift = static_cast<size_t>((1 << m) / dx);
   const cplx phase = std::polar(1.0, static_cast<double>(p));
   double err = 0.0;
   for (size_t i = 0; i < n; ++i) { err = std::max(err, std::abs(b.values[i] - phase * a.values[(i + n - shift) % n])); }
   CHECK(err <= 1e-12);
}

TEST_CASE("packet inner product matches direct quadrature")
{
   const double dx = 0.5;
   const size_t n = static_cast<size_t>(64 * 64 / dx);
   const SampledFunction a = wavepacket({6, 0.0, 64}, 0.0, dx, n);
   const SampledFunction b = wavepacket({6, 3.0, 64}, 0.0, dx, n);
   long double re = 0, im = 0;
   for (size_t i = 0; i < n; ++i) {
      const cplx v = a.values[i] * std::conj(b.values[i]);
      re += v.real();
      im += v.imag();
   }
   const cplx direct(static_cast<double>(re * dx), static_cast<double>(im * dx));
   CHECK(std::abs(inner(a, b) - direct) <= 1e-13);
   CHECK(std::abs(inner(a, a) - 1.0) <= 1e-10);
}

TEST_CASE("analysis on the lattice")
{
   const int m = 5;
   const double dx = 0.5;
   const size_t n = static_cast<size_t>(32 * (1 << m) / dx);
   const Lattice full = Lattice::standard(m, 1.0);
   const long p0 = (1L << m) + 5;
   const CoefficientGrid c = analyze(wavepacket({m, 3.0, p0}, 0.0, dx, n), full);
   CHECK(std::abs(c.at(3, p0)) == doctest::Approx(1.0).epsilon(1e-10));
   double off = 0.0;
   for (size_t l = 0; l < c.n_l; ++l) {
      for (long p = full.p_lo; p <= full.p_hi; ++p) {
         if (l != 3 || p != p0) { off = std::max(off, std::abs(c.at(l, p))); }
      }
   }
   CHECK(off < 1.0);

   const CoefficientGrid z = analyze(SampledFunction(0.0, dx, n), full);
   CHECK(z.energy() == 0.0);

   std::mt19937_64 rng(5);
   const Lattice half = Lattice::standard(m, 0.5);
   const SampledFunction f = random_band(half, dx, n, rng), g = random_band(half, dx, n, rng);
   const cplx alpha(0.3, -1.2), beta(2.0, 0.5);
   const CoefficientGrid cf = analyze(f, half), cg = analyze(g, half), cs = analyze(alpha * f + beta * g, half);
   double lin = 0.0, scale = 0.0;
   for (size_t i = 0; i < cs.data.size(); ++i) {
      lin = std::max(lin, std::abs(cs.data[i] - alpha * cf.data[i] - beta * cg.data[i]));
      scale = std::max(scale, std::abs(cs.data[i]));
   }
   CHECK(lin <= 1e-10 * scale);

   const FrameBounds fb = frame_bounds(half, 0.0, dx, n, half.band_lo(), half.band_hi(), 30);
   const double ratio = cf.energy() / std::pow(f.l2_norm(), 2);
   CHECK(fb.B / fb.A <= 1.2);
   // power iteration resolves the bounds to about 1e-4
   CHECK(ratio >= fb.A * (1 - 1e-3));
   CHECK(ratio <= fb.B * (1 + 1e-3));

   SampledFunction coarse(0.0, 4.0, n / 8);
   coarse.band_limit = 1.0;
   CHECK_THROWS_AS(analyze(coarse, full), AliasingError);
}

TEST_CASE("integer lattice is a tight frame with bound 2 pi")
{
   const int m = 4;
   const double dx = 0.5;
   const size_t n = static_cast<size_t>(32 * (1 << m) / dx);
   const Lattice full = Lattice::standard(m, 1.0);
   std::mt19937_64 rng(2);
   const SampledFunction g = random_band(full, dx, n, rng);
   // tight up to the per-p discrete normalization of the packets
   const SampledFunction Sg = frame_operator(g, full);
   CHECK(diff_norm(Sg, (2 * std::numbers::pi) * g) <= 1e-3 * 2 * std::numbers::pi * g.l2_norm());

   const FrameBounds fb = frame_bounds(full, 0.0, dx, n, full.band_lo(), full.band_hi(), 30);
   CHECK(fb.A == doctest::Approx(2 * std::numbers::pi).epsilon(1e-3));
   CHECK(fb.B == doctest::Approx(2 * std::numbers::pi).epsilon(1e-3));
}

TEST_CASE("reconstruction from the half-step lattice")
{
   std::mt19937_64 rng(17);
   int inputs = 0;
   for (int m = 4; m <= 6; ++m) {
      const Lattice lat = Lattice::standard(m, 0.5);
      const double dx = 0.5;
      const size_t n = static_cast<size_t>(32 * (1 << m) / dx);
      for (int k = 0; k < 3; ++k, ++inputs) {
         const SampledFunction g = random_band(lat, dx, n, rng);
         const SampledFunction r = synthesize(analyze(g, lat), 0.0, dx, n);
         CHECK(rel_error(r, g) <= 1e-6);
      }
      const SampledFunction z = synthesize(CoefficientGrid(lat, lat.positions(n * dx)), 0.0, dx, n);
      CHECK(z.l2_norm() == 0.0);
   }
   CHECK(inputs == 9);
}

TEST_CASE("csv and binary round trips")
{
   const SampledFunction f = wavepacket({3, 1.5, 11}, -4.0, 0.25, 256);
   std::stringstream csv;
   write_csv(f, csv);
   const SampledFunction g = read_csv(csv);
   CHECK(g.size() == f.size());
   CHECK(g.dx == doctest::Approx(f.dx).epsilon(1e-12));
   CHECK(g.x0 == doctest::Approx(f.x0).epsilon(1e-12));
   for (size_t i = 0; i < f.size(); ++i) { CHECK(std::abs(g.values[i] - f.values[i]) <= 1e-15); }

   std::stringstream bin;
   write_binary(f, bin);
   const SampledFunction h = read_binary(bin);
   CHECK(h.values == f.values);
   CHECK(h.dx == f.dx);
   CHECK(h.band_limit == f.band_limit);

   std::stringstream junk("nonsense");
   CHECK_THROWS_AS(read_binary(junk), ConfigError);
   std::stringstream bad("x,re,im\n0,1,0\n0.5,1,0\n2,1,0\n");
   CHECK_THROWS_AS(read_csv(bad), ConfigError);
}

TEST_CASE("Q operator")
{
   const Curve sq = monomial(2);
   const double dx = 0.25, T = 256.0;
   const size_t n = static_cast<size_t>(T / dx);

   {
      // spectrum outside (3/2, 4): the cutoff removes everything
      QOperator Q(sq, 0, 4);
      SampledFunction f(0.0, dx, n);
      const double xi = 2 * std::numbers::pi * 20 / T; // about 0.49
      for (size_t i = 0; i < n; ++i) { f.values[i] = std::polar(1.0, xi * f.x(i)); }
      CHECK(std::abs(Q.at(f, 20, 3.0)) <= 1e-12);
   }

   // gamma = t^2: p R(2^m xi / p) = (2^(2m) xi^2 / p - p) / 2
   for (int m : {3, 6}) {
      QOperator Q(sq, 0, m);
      for (long p : {1L << m, (3L << m) / 2}) {
         for (double xi : {1.7, 2.9, -3.5}) {
            const double ph = (std::ldexp(1.0, 2 * m) * xi * xi / p - p) / 2;
            CHECK(std::abs(Q.symbol(p, xi) - freq_cutoff(xi) * std::polar(1.0, -ph)) <= 1e-9);
         }
      }
   }

   // Lipschitz in y: the extremal input attains the constant, random inputs stay below it
   const double C = QOperator::lipschitz_constant();
   std::mt19937_64 rng(9);
   std::normal_distribution<double> N;
   const SampledFunction grid(0.0, dx, n);
   double lo = 1e300, hi = 0.0;
   for (int m = 3; m <= 10; ++m) {
      QOperator Q(sq, 0, m);
      for (long p : {1L << m, (3L << m) / 2, 2L << m}) {
         std::vector<cplx> ext(n), rnd(n);
         for (size_t q = 0; q < n; ++q) {
            const double xi = grid.xi(q);
            ext[q] = std::conj(cplx(0, xi) * Q.symbol(p, xi));
            if (freq_cutoff(xi) > 0) { rnd[q] = {N(rng), N(rng)}; }
         }
         const SampledFunction fe = SampledFunction::from_spectrum(0.0, dx, ext);
         const SampledFunction fr = SampledFunction::from_spectrum(0.0, dx, rnd);
         const double h = 1e-4;
         const double q = std::abs(Q.at(fe, p, h) - Q.at(fe, p, -h)) / (2 * h * fe.l2_norm());
         lo = std::min(lo, q);
         hi = std::max(hi, q);
         CHECK(q <= C * (1 + 1e-6));
         for (double y : {0.0, 17.0, 100.0}) {
            for (double d : {0.05, 0.5, 3.0}) {
               CHECK(std::abs(Q.at(fr, p, y + d) - Q.at(fr, p, y)) <= C * d * fr.l2_norm() * (1 + 1e-9));
            }
         }
      }
   }
   CHECK(hi / lo <= 2.0);
   CHECK(hi == doctest::Approx(C).epsilon(1e-3));
}
