// One line per acceptance criterion; `--only N` runs a single one.
#include "bht/bilinear.hpp"
#include "bht/curves.hpp"
#include "bht/harness.hpp"
#include "bht/oscillatory.hpp"
#include "bht/seeding.hpp"
#include "bht/wavepackets.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace bht;

namespace {

struct Outcome {
   bool pass = false;
   std::string detail;
};

struct Criterion {
   int id;
   const char *name;
   double budget_s;
   std::function<Outcome()> body;
};

std::string fmt(const char *f, double v)
{
   char buf[64];
   std::snprintf(buf, sizeof buf, f, v);
   return buf;
}

std::string out_dir;

// runs a harness command with pinned limits; every stored check must pass
Outcome via_harness(const std::string &command, ExperimentConfig cfg, const std::map<std::string, double> &limits)
{
   cfg.out_dir = out_dir;
   cfg.tolerances.insert(limits.begin(), limits.end());
   const VerificationReport rep = run(command, cfg);
   Outcome o{rep.pass(), ""};
   for (const auto &st : rep.stages) {
      for (const auto &c : st.checks) {
         o.detail += c.name + "=" + fmt("%.4g", c.value) + (c.upper ? " (<= " : " (>= ") + fmt("%.4g", c.limit) + ") ";
      }
   }
   return o;
}

Outcome curve_corpus()
{
   struct Case {
      const char *spec;
      Side side;
   };
   const Case expected_pass[] = {{"monomial:2", Side::origin}, {"monomial:2", Side::infinity},
                                 {"monomial:3", Side::origin}, {"monomial:3", Side::infinity},
                                 {"monomial:4", Side::origin}, {"monomial:4", Side::infinity},
                                 {"laurent:2=1,-2=1", Side::origin}, {"laurent:2=1,-2=1", Side::infinity},
                                 {"powerlog:1.5,0", Side::origin}, {"powerlog:1.5,0", Side::infinity}};
   Outcome o{true, ""};
   for (const Case &c : expected_pass) {
      const NonFlatReport r = check_nonflat(make_curve(c.spec), c.side, default_j_range(c.side));
      const bool ok = r.passes && r.c_gamma >= 0.05;
      if (!ok) {
         o.pass = false;
         std::string why;
         for (const auto &s : r.reasons) { why += (why.empty() ? "" : ", ") + s; }
         o.detail += std::string(c.spec) + "@" + to_string(c.side) + " fails [" + why + "] ";
      }
   }
   const NonFlatReport lin = check_nonflat(linear_curve(), Side::origin, default_j_range(Side::origin));
   const bool lin_ok = !lin.passes && std::find(lin.reasons.begin(), lin.reasons.end(), "inf|Q''|=0") != lin.reasons.end();
   const NonFlatReport ex = check_nonflat(exp_curve(), Side::infinity, default_j_range(Side::infinity));
   const bool ex_ok = !ex.passes && !ex.pass_decay;
   if (!lin_ok) { o.detail += "linear is not rejected by inf|Q''|=0 "; }
   if (!ex_ok) { o.detail += "exp is not rejected by a_j "; }
   o.pass = o.pass && lin_ok && ex_ok;
   if (o.pass) { o.detail = "all corpus verdicts as expected "; }
   return o;
}

Outcome stationary_phase()
{
   const DecayFit f = stationary_phase_error_sweep({16, 32, 64, 128, 256, 512, 1024});
   return {f.slope <= -1.4 && f.max_residual <= 0.2,
           "slope=" + fmt("%.3f", f.slope) + " (<= -1.4) residual=" + fmt("%.3f", f.max_residual) + " (<= 0.2) "};
}

Outcome diagonal()
{
   const SweepReport r = diagonal_error_sweep(monomial(2), 0, {4, 5, 6, 7, 8, 9, 10}, 10);
   return {r.fit.slope <= -0.9, "slope=" + fmt("%.3f", r.fit.slope) + " (<= -0.9) "};
}

Outcome offdiagonal()
{
   const SweepReport r = offdiagonal_decay_check(monomial(2), 0, {3, 4, 5, 6, 7, 8}, 5, 8);
   return {r.fit.slope <= -0.9, "slope=" + fmt("%.3f", r.fit.slope) + " (<= -0.9) over max(m,n)=8..13 "};
}

Outcome frames()
{
   double worst = 0.0;
   int inputs = 0;
   for (int m = 4; m <= 8; ++m) {
      const Lattice lat = Lattice::standard(m, 0.5);
      const double dx = 0.5;
      const size_t n = static_cast<size_t>(32 * (1 << m) / dx);
      for (int k = 0; k < 10; ++k, ++inputs) {
         std::mt19937_64 rng = item_rng(static_cast<unsigned long long>(m), static_cast<unsigned long long>(k));
         std::normal_distribution<double> N;
         SampledFunction g(0.0, dx, n);
         std::vector<cplx> spec(n, cplx(0.0));
         for (size_t q = 0; q < n; ++q) {
            const double xi = g.xi(q);
            if (xi > lat.band_lo() && xi < lat.band_hi()) { spec[q] = {N(rng), N(rng)}; }
         }
         g = SampledFunction::from_spectrum(0.0, dx, spec, lat.band_hi());
         const SampledFunction r = synthesize(analyze(g, lat), 0.0, dx, n);
         double e = 0.0;
         for (size_t i = 0; i < n; ++i) { e += std::norm(r.values[i] - g.values[i]); }
         worst = std::max(worst, std::sqrt(e * dx) / g.l2_norm());
      }
   }
   return {worst <= 1e-6, "inputs=" + std::to_string(inputs) + " max_rel_error=" + fmt("%.3e", worst) + " (<= 1e-6) "};
}

Outcome duality()
{
   const Curve sq = monomial(2);
   const int m = 5;
   const BilinearGrid grids[] = {make_grid(sq, m + 2, m), make_grid(sq, 0, m)};
   double worst[2] = {0.0, 0.0};
   for (int g = 0; g < 2; ++g) {
      const BilinearGrid &G = grids[g];
      for (unsigned long long t = 0; t < 10; ++t) {
         std::mt19937_64 rng = item_rng(40 + g, t);
         const SampledFunction f = random_f(G, rng), gg = random_g(G, rng), h = random_h(G, rng);
         const cplx lhs = pairing(apply_Bjm_discrete(f, gg, G, G.regime), h);
         const cplx rhs = pairing(f, apply_Djm(gg, h, G, G.regime));
         worst[g] = std::max(worst[g], std::abs(lhs - rhs) / (f.l2_norm() * gg.l2_norm() * h.linf_norm()));
      }
   }
   return {worst[0] <= 1e-6 && worst[1] <= 1e-6,
           "small(j=7,m=5)=" + fmt("%.2e", worst[0]) + " large(j=0,m=5)=" + fmt("%.2e", worst[1]) + " (<= 1e-6, 10 triples each) "};
}

std::vector<Criterion> criteria()
{
   return {
      {1, "curve corpus", 30, curve_corpus},
      {2, "stationary phase error order", 60, stationary_phase},
      {3, "diagonal main term", 300, diagonal},
      {4, "off-diagonal decay", 300, offdiagonal},
      {5, "frame reconstruction", 120, frames},
      {6, "duality identity", 300, duality},
      {7, "interaction decay", 600,
       [] {
          return via_harness("interaction", parse_config("curve=monomial:2\nj=0\nm=10\n"),
                             {{"bucket_slope", -0.45}, {"agreement_rate", 0.9}});
       }},
      {8, "norm decay, small regime", 900,
       [] { return via_harness("norm-decay", parse_config("curve=monomial:2\nm=4..9\nregime=small\n"), {{"slope", -0.25}}); }},
      {9, "norm decay, large regime", 900,
       [] {
          return via_harness("norm-decay", parse_config("curve=monomial:2\nj=0\nm=4..9\nregime=large\n"),
                             {{"slope", -1.0 / 16}});
       }},
      {10, "Hoermander bound", 120, [] { return via_harness("hormander", parse_config(""), {{"slope", -0.45}}); }},
      {11, "van der Corput suite", 600,
       [] {
          return via_harness("vdc", parse_config(""),
                             {{"S_ratio", 10.0}, {"bilinear_constant", 20.0}, {"M_constant", 50.0}, {"vdc_samples", 500}});
       }},
      {12, "aligned trilinear decay", 600,
       [] { return via_harness("sigma", parse_config("curve=monomial:2\nm=4..9\n"), {{"aligned_slope", -0.2}}); }},
   };
}

} // namespace

int main(int argc, char **argv)
{
   CLI::App app{"acceptance criteria"};
   int only = 0;
   app.add_option("--only", only, "run a single criterion (1-12)");
   out_dir = (std::filesystem::temp_directory_path() / "bht_acceptance").string();
   app.add_option("--out", out_dir, "directory for the harness reports");
   CLI11_PARSE(app, argc, argv);

   int failed = 0, ran = 0;
   for (const Criterion &c : criteria()) {
      if (only && c.id != only) { continue; }
      ++ran;
      const auto t0 = std::chrono::steady_clock::now();
      Outcome o;
      try {
         o = c.body();
      } catch (const std::exception &e) {
         o = {false, std::string("error: ") + e.what() + " "};
      }
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const bool in_time = secs <= c.budget_s;
      const bool pass = o.pass && in_time;
      failed += pass ? 0 : 1;
      std::printf("[%s] %2d %s: %s%.1f s (budget %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                  c.budget_s);
      std::fflush(stdout);
   }
   if (ran == 0) {
      std::fprintf(stderr, "no criterion %d\n", only);
      return 2;
   }
   return failed ? 1 : 0;
}
