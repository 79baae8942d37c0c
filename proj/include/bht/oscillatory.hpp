#pragma once

#include "bht/curves.hpp"
#include "bht/fit.hpp"
#include "bht/quadrature.hpp"

#include <vector>

namespace bht {

// m_j(xi, eta) = int exp(-i xi 2^-j t + i eta gamma(2^-j t)) rho(t) dt
SymbolSample compute_mj(const Curve &c, int j, double xi, double eta, const QuadOptions &opt = {});

// m_j * nu_k(xi / 2^j) * nu_l(2^-j gamma'(2^-j) eta), k, l in {0,1,2}
SymbolSample compute_mj_kl(const Curve &c, int j, int k, int l, double xi, double eta,
                           const QuadOptions &opt = {});

// m_j * phi(xi / 2^(m+j)) * phi(eta gamma'(2^-j) / 2^(n+j))
SymbolSample compute_m22_piece(const Curve &c, int j, int m, int n, double xi, double eta,
                               const QuadOptions &opt = {});

// Leading term of int exp(-pi i lambda omega(x)) a(x) dx at the stationary point p.
cplx stationary_phase_model(const RealFn &omega, const RealFn &omega_d1, const RealFn &omega_d2,
                            const RealFn &a, double lambda, double p);

// The model sweep: omega = x^2, a = exp(-x^2), error of the leading term
// against quadrature for each lambda, fitted in log2 lambda.
DecayFit stationary_phase_error_sweep(const std::vector<double> &lambdas);

struct StationaryPoint {
   double t = 0.0;       // t_m in supp rho
   double phase = 0.0;   // -xi 2^-j t + eta gamma(2^-j t) at t_m
   double phase_d2 = 0.0;
};

// t_m = 2^j (gamma')^-1(xi/eta), throws NoStationaryPoint when t_m is not in (1/4, 1)
StationaryPoint stationary_point(const Curve &c, int j, double xi, double eta);

// diagonal main term 2^(-m/2) exp(i phase(t_m)) rho*(t_m) phi phi, where rho* is
// the stationary-phase amplitude measured at t_m
cplx main_term_m22(const Curve &c, int j, int m, double xi, double eta);

struct SweepPoint {
   int m = 0;
   double sup = 0.0;      // sup over the sampled (xi, eta)
   double est_error = 0.0;
};

struct SweepReport {
   std::vector<SweepPoint> rows;
   DecayFit fit;
};

// sup over a samples x samples grid of the (m, m) supports of |m22 - main term|
SweepReport diagonal_error_sweep(const Curve &c, int j, const std::vector<int> &ms, int samples);

// sup |m22_{j,m,m+offset}| per m, fitted against max(m, n). |offset| must exceed min_gap.
SweepReport offdiagonal_decay_check(const Curve &c, int j, const std::vector<int> &ms, int offset,
                                    int samples, int min_gap = 3);

struct HMReport {
   double max_xi = 0.0;  // max |xi d/dxi sum_j m_j^kl|
   double max_eta = 0.0; // max |eta d/deta sum_j m_j^kl|
   int points = 0;
};

// log-uniform points in 2^[-8, 8] x 2^[-8, 8], both signs
HMReport check_hm_symbol(const Curve &c, int k, int l, std::pair<int, int> j_range, int points,
                         unsigned long long seed = 1);

} // namespace bht
