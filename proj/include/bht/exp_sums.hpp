#pragma once

#include <complex>
#include <iosfwd>
#include <vector>

namespace bht {

using cplx = std::complex<double>;

// S = 2^-m sum_{r = 2^m}^{2^(m+1)} v_r with
// v_r = exp(i (r^2/p - r^2/l - (r - beta)^2/(p - alpha) + (r - beta)^2/(l - alpha)))
struct ExpSumSpec {
   int m = 0;
   long p = 0, l = 0;         // in [2^m, 2^(m+1)]
   long alpha = 0, beta = 0;  // in [0, 2^(m-1)]
   void validate() const;     // IndexError
};

// v_r for any r >= 0, phase reduced mod 2 pi in extended precision
cplx sum_term(const ExpSumSpec &s, long r);

cplx s_sum(const ExpSumSpec &s);
// 2^-m sum_r v_(r+h) conj(v_r), 0 <= h < 2^m
cplx v_h(const ExpSumSpec &s, long h);
// ((1/H) sum_{h<H} |V_h|)^(1/2) + H / 2^m, 1 <= H <= 2^m
double vdc_step(const ExpSumSpec &s, long H);

// min{1, m^(1/2) (2^m / (alpha |p - l|))^(1/3)}
double s_bound(const ExpSumSpec &s);

struct VdcScan {
   long best_H = 1;
   double best_bound = 0.0;
   double abs_S = 0.0;
   double crossover = 0.0;   // 2^(2m) / (alpha |p - l|)
   double predicted = 0.0;   // m^(1/2) (2^m / (alpha |p - l|))^(1/3)
   std::vector<std::pair<long, double>> steps; // (H, vdc_step) over powers of two
};
VdcScan vdc_scan(const ExpSumSpec &s);

struct SBoundRow {
   ExpSumSpec spec;
   double abs_S = 0.0, bound = 0.0, ratio = 0.0;
};

struct SBoundReport {
   int m = 0;
   double max_ratio = 0.0;
   std::vector<SBoundRow> rows;
   bool pass = false; // max_ratio <= limit
};

// alpha and |p - l| log-uniform, beta uniform; m in [6, 14]
std::vector<ExpSumSpec> random_specs(int m, int samples, unsigned long long seed);
SBoundReport s_bound_check(int m, int samples, unsigned long long seed = 1, int threads = 1,
                           double limit = 10.0);
void write_csv(const SBoundReport &rep, std::ostream &out);

struct BilinearVdc {
   double value = 0.0;
   double bound = 0.0;    // m^(1/4) alpha^(-1/6) ||a|| ||b||
   double constant = 0.0; // value / bound
};

// |2^-m sum_{p,r} a_p b_r exp(i (r^2/p - (r - beta)^2/(p - alpha)))|, a and b
// indexed over [2^m, 2^(m+1)]
BilinearVdc bilinear_vdc(const std::vector<cplx> &a, const std::vector<cplx> &b, long alpha, long beta, int m);

double default_alpha0(int m); // m^(3/14) 2^(6m/7)

struct MReport {
   double value = 0.0;        // the weighted (alpha, beta) sum, evaluated directly
   double split_bound = 0.0;  // l1 / van der Corput form split at alpha0
   double alpha0 = 0.0;
   double envelope = 0.0;     // m^(17/14) 2^-m 2^(-m/7)
   double constant = 0.0;     // value / (envelope ||f||^2 ||g||^2)
};

// f and g are coefficient arrays over [2^m, 2^(m+1)]
MReport m_functional(const std::vector<cplx> &f, const std::vector<cplx> &g, int m, double alpha0);
double m_split_bound(const std::vector<cplx> &f, const std::vector<cplx> &g, int m, double alpha0);
// alpha0 in [1, 2^(m-1)] minimizing m_split_bound
long optimal_alpha0(const std::vector<cplx> &f, const std::vector<cplx> &g, int m);

} // namespace bht
