#pragma once

#include "bht/curves.hpp"
#include "bht/fit.hpp"
#include "bht/wavepackets.hpp"

#include <functional>
#include <random>
#include <vector>

namespace bht {

// small: gamma'(2^-j) <= 2^-m, large otherwise
enum class Regime { small, large };
const char *to_string(Regime r);
Regime regime_of(const Curve &c, int j, int m);
// smallest j >= 0 with 2^m gamma'(2^-j) <= delta_max
int small_regime_j(const Curve &c, int m, double delta_max = 0.5);

// Periodic grids for one (j, m) pair. g, h and B(f, g) live on the x torus of
// length 2^m L_x; f and D(g, h) on the f torus of length gamma' * 2^m L_x, so
// that Q f(gamma' x) is periodic in x.
struct BilinearGrid {
   Curve curve;
   int j = 0, m = 0;
   Regime regime = Regime::small;
   double slope = 0.0;   // |gamma'(2^-j)|
   double delta = 0.0;   // 2^m |gamma'(2^-j)|
   long L = 0;           // l = 0..L-1, L = floor(1/slope) + 1
   long K = 0;           // large regime: k = 0..K, K = floor(delta)
   long Lx = 0;          // lattice positions on the x torus
   double Tx = 0.0, dx_x = 0.0, Tf = 0.0, dx_f = 0.0;
   size_t Nx = 0, Nf = 0;

   double support_length() const { return std::ldexp(1.0, m) / slope; }
   SampledFunction zero_x() const { return SampledFunction(0.0, dx_x, Nx); }
   SampledFunction zero_f() const { return SampledFunction(0.0, dx_f, Nf); }
   Lattice lattice() const { return Lattice::standard(m, 1.0); }
   // positions y = l delta (+ k) where Q f is sampled; index i lists (l, k)
   std::vector<double> sample_positions() const;
};

// lx_factor >= 1 enlarges the x torus (more l positions than the sum uses)
BilinearGrid make_grid(const Curve &c, int j, int m, long lx_factor = 1);

// Random inputs: f and g are complex Gaussians on their frequency windows,
// h a +-1 pattern smoothed at scale 1 with sup norm 1.
SampledFunction random_f(const BilinearGrid &G, std::mt19937_64 &rng);
SampledFunction random_g(const BilinearGrid &G, std::mt19937_64 &rng);
SampledFunction random_h(const BilinearGrid &G, std::mt19937_64 &rng);

// sum_p |window_hat(2^m eta - p)|^2 / norm_p^2 on the integer lattice; the
// g-side cutoff of the continuous operator
double frame_symbol(int m, double eta, double Tx);

SampledFunction apply_Bjm_continuous(const SampledFunction &f, const SampledFunction &g,
                                     const BilinearGrid &G);
SampledFunction apply_Bjm_discrete(const SampledFunction &f, const SampledFunction &g,
                                   const BilinearGrid &G, Regime regime);
// dual form on the f torus: int B(f, g) h = int f D(g, h), no conjugation
SampledFunction apply_Djm(const SampledFunction &g, const SampledFunction &h, const BilinearGrid &G,
                          Regime regime);
// int B(f, g) h through the discrete operator
cplx trilinear_lambda(const SampledFunction &f, const SampledFunction &g, const SampledFunction &h,
                      const BilinearGrid &G);

// The coefficient sum behind lambda, split at position y_cut:
// near = terms with sample position y <= y_cut, far = the rest
struct LambdaSplit {
   cplx total = 0.0, near = 0.0, far = 0.0;
};
LambdaSplit trilinear_split(const SampledFunction &f, const SampledFunction &g, const SampledFunction &h,
                            const BilinearGrid &G, double y_cut);

struct InteractionSample {
   long l = 0, p = 0, l2 = 0, p2 = 0, k = 0, k2 = 0;
   double shift = 0.0; // delta (l - l2) + k - k2
   cplx value = 0.0;
   double est_error = 0.0;
   int r_bucket = 0;
   bool critical = false;   // critical_condition
   bool stationary = false; // the phase has a stationary point inside the cutoff support
};

// <psi_{l,p}, psi_{l2,p2}>: the modulated kernels of Q_{m,p} placed at
// l delta + k, i.e. (1/2 pi) int cutoff^2 exp(-i [p R(2^m xi/p) - p2 R(2^m xi/p2)]) exp(i shift xi)
InteractionSample interaction(const Curve &c, int j, int m, long l, long p, long l2, long p2, long k = 0,
                              long k2 = 0);

// delta |l - l2 (+ k - k2)| and |p - p2| within a factor of 4; both zero counts
// as critical, exactly one zero does not
bool critical_condition(const Curve &c, int j, int m, long l, long l2, long p, long p2, long k = 0,
                        long k2 = 0);

// (1/2 pi) int cutoff^2, the diagonal interaction
double interaction_diagonal();

struct BucketRow {
   int r = 0;
   double max_abs = 0.0;
   double est_error = 0.0;
   int samples = 0;
};

struct InteractionDecayReport {
   std::vector<BucketRow> rows;
   DecayFit fit;
   // max over non-critical samples of |value| (1 + |p - p2| + |shift|) / diagonal
   double noncritical_ratio = 0.0;
   int noncritical_samples = 0;
};

InteractionDecayReport interaction_decay(const Curve &c, int j, int m, int samples_per_bucket,
                                         unsigned long long seed = 1);

struct AgreementReport {
   double rate = 0.0;
   double threshold = 0.0; // 10 x median |value| over samples without a stationary point
   int samples = 0, critical = 0, significant = 0, agree = 0;
   int excluded = 0;       // draws inside the boundary slack
   std::vector<InteractionSample> points;
};

// critical_condition against {|interaction| > 10 median off-critical}; pairs
// drawn with |shift| and |p - p2| log-uniform in [min_gap, 2^m] and random signs.
// Draws whose ratio |shift| / |p - p2| is within a factor `slack` of 4 or 1/4
// are skipped.
AgreementReport critical_agreement(const Curve &c, int j, int m, int samples, double min_gap = 32.0,
                                   double slack = 2.0, unsigned long long seed = 2);

enum class NormKind { L1, L2 };

struct NormEstimate {
   double value = 0.0;               // running max of the ratios
   std::vector<double> trials;       // per-trial ratio
   std::vector<double> l1, l2;       // per-trial norms of B (B estimates only)
   bool cauchy_schwarz = true;       // l1 <= sqrt(Tx) l2 on every trial
};

// max over trials of ||D(g, h)||_2 / ||g||_2, ||h||_inf = 1; small regime only
NormEstimate norm_D_estimate(const Curve &c, int j, int m, int trials, unsigned long long seed = 1);
// max over trials of ||B(f, g)||_kind / (||f||_2 ||g||_2); L1 over the x torus
NormEstimate norm_B_estimate(const Curve &c, int j, int m, int trials, NormKind kind,
                             unsigned long long seed = 1);

// which side of the large-regime sub-split (2^m gamma' against 2^(m * exponent))
bool large_far_branch(const BilinearGrid &G, double exponent = 0.25);

struct HormanderReport {
   cplx value = 0.0;
   double est_error = 0.0;
   double lambda = 0.0;   // 2^m tau
   double bound = 1.0;    // min{1, |lambda|^-1/2}
   double normF = 0.0, normG = 0.0;
   double ratio = 0.0;    // |value| / (normF normG)
   double C = 0.0;        // ratio / bound
   double mixed_min = 0.0; // min |d_xi d_eta phase| / |tau| over the support grid
};

struct Phase2D {
   std::function<double(double, double)> phase;   // phi_tau(xi, eta)
   std::function<double(double, double)> d_eta;   // d phi_tau / d eta
};

// int int F(xi) G(eta) exp(-i 2^m phase(xi, eta)) over [a0,a1] x [b0,b1].
// Throws MixedDerivativeTooSmall when |d_xi d_eta phase| < c |tau| somewhere
// on the support grid (skipped for tau = 0).
HormanderReport hormander_check(const RealFn &F, double a0, double a1, const RealFn &G, double b0,
                                double b1, const Phase2D &phase, int m, double tau, double c = 0.5);

Phase2D bilinear_phase(double tau);
// eta R(xi/eta) - (eta + gamma' tau) R((xi - tau)/(eta + gamma' tau))
Phase2D curve_phase(const Curve &c, int j, double tau);
// min over a grid of |d_xi d_eta phase| on [a0,a1] x [b0,b1]
double mixed_derivative_min(const Phase2D &ph, double a0, double a1, double b0, double b1, int grid = 41);

// Gaussian bumps, phase tau xi eta with 2^m tau = lambda for each lambda
DecayFit hormander_sweep(const std::vector<double> &lambdas, std::vector<HormanderReport> *rows = nullptr);

// q(xi) = a xi^(d/(d-1)) + b xi
struct PhaseFamily {
   int d = 2;
   int m = 0;
   int a_octaves = 3;   // |a| in 2^(m +- a_octaves)
   int a_count = 13;    // per sign, log spaced
   int b_count = 64;    // per a, spanning the b with a stationary point in [0, 1]
};

// sup over the family of |int_0^1 F exp(-i q)| / ||F||_2, F sampled on [0, 1]
double sigma_uniform_norm(const SampledFunction &F, const PhaseFamily &family);

struct Lemma2Report {
   double value = 0.0;   // max |lambda| / (||f0|| ||g|| ||h||_inf)
   double a_best = 0.0, b_best = 0.0;
   double near = 0.0, far = 0.0; // split at l <= N 2^(j(d-1)-m), N = 2^(m/2), for the maximizer
   double random_g = 0.0;        // same maximum with g random instead of aligned
};

// f0 with transform exp(i q) cutoff on xi > 0; g aligned with the coefficients
// of (f0, h) or random, h random; gamma = t^d with j(d-1) >= m
Lemma2Report lemma2_check(int d, int j, int m, int trials, unsigned long long seed = 1);

} // namespace bht
