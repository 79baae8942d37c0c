#pragma once

#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace bht {

using RealFn = std::function<double(double)>;

enum class Side { origin, infinity };
enum class Branch { positive, negative };

const char *to_string(Side s);

struct Curve {
   std::string name;
   RealFn eval, d1, d2, d3, d4;
   bool near_zero = true;
   bool near_infinity = true;
   // positive-branch validity: (0, origin_hi] near zero, [infinity_lo, inf) near infinity
   double origin_hi = std::numeric_limits<double>::infinity();
   double infinity_lo = 0.0;
   // exponent k of the dominant power |t|^k on each side, NaN if none;
   // gives the closed-form limits Q = t^k/k and r = s^(1/(k-1))
   double power_origin = std::numeric_limits<double>::quiet_NaN();
   double power_infinity = std::numeric_limits<double>::quiet_NaN();

   bool valid_at(double t, Side side) const;
   // t -> gamma(-t), so the negative branch is the positive branch of this curve
   Curve reflected() const;
   const Curve &on_branch(Branch b, Curve &scratch) const;
};

Curve monomial(int d);
// sum of c * t^k; constant terms are dropped (they only translate g)
Curve laurent(const std::vector<std::pair<int, double>> &terms);
// |t|^alpha |log|t||^beta, even extension
Curve powerlog(double alpha, double beta);
Curve linear_curve();
Curve exp_curve();

// registry: "monomial:2", "laurent:2=1,-2=1", "powerlog:1.5,0", "linear", "exp";
// spaces work as separators too ("monomial 3")
Curve make_curve(const std::string &spec);

Side side_of_scale(int j);

// t on the requested branch with gamma'(t) = s; searched inside the validity
// region of `side`.
double invert_gamma_prime(const Curve &c, double s, Branch branch = Branch::positive,
                          Side side = Side::origin);

// gamma(2^-j t) / (2^-j gamma'(2^-j)), t in I = {1/4 <= |t| <= 4}
double profile_Q(const Curve &c, int j, double t);
// (gamma')^-1(s gamma'(2^-j)) / (gamma')^-1(gamma'(2^-j)) on the positive branch
double profile_r(const Curve &c, int j, double s);

// same quotients without the I check (used for stencils reaching past I)
double profile_Q_raw(const Curve &c, int j, double t);

// closed-form limits when power_* is set; NaN otherwise
double limit_Q(const Curve &c, Side side, double t);
double limit_r(const Curve &c, Side side, double s);
bool has_limit(const Curve &c, Side side);

int check_variation(const Curve &c, int j_max, Side side = Side::origin);

struct NonFlatThresholds {
   double c_gamma = 0.05;
   double decay_per_octave = 0.9; // a_{j+1} <= 0.9 a_j
   double zero_floor = 1e-9;      // a_j below this counts as converged
   int variation_cap = 4;
};

struct BranchReport {
   double inf_Q2 = 0.0;        // inf_I |Q''|
   double inf_r1 = 0.0;        // inf_J |r'|
   double inf_quot = 0.0;      // inf |t1 r'(t1) - t2 r'(t2)| / |t1 - t2|
   double J_lo = 0.0, J_hi = 0.0;
   std::vector<std::pair<int, double>> a_j; // (j, a_j)
   bool decays = false;
   double convtr = 0.0;
   std::vector<std::string> reasons;
};

struct NonFlatReport {
   Side side = Side::origin;
   int variation_max = 0;
   std::vector<std::pair<int, double>> a_j_table; // max over branches
   double c_gamma = 0.0;
   double convtr_inf = 0.0;
   bool pass_variation = false, pass_decay = false, pass_cgamma = false, pass_convtr = false;
   bool passes = false;
   NonFlatThresholds thresholds;
   BranchReport positive, negative;
   std::vector<std::string> reasons;
};

// default tested scales: origin j in [2, 20], infinity j in [-20, -2]
std::pair<int, int> default_j_range(Side side);

NonFlatReport check_nonflat(const Curve &c, Side side, std::pair<int, int> j_range,
                            int grid_density = 241, const NonFlatThresholds &th = {});

// grid infimum of |t gamma''/gamma'| over the dyadic annuli 2^-j [1/4, 4], both branches
double check_convtr(const Curve &c, Side side, int grid_density = 241,
                    std::pair<int, int> j_range = {0, 0});

} // namespace bht
