#pragma once

#include <utility>
#include <vector>

namespace bht {

// least squares of log2(value) against scale
struct DecayFit {
   std::vector<std::pair<double, double>> points; // (scale, value) used in the fit
   double slope = 0.0;
   double intercept = 0.0;
   double max_residual = 0.0;
   int dropped_nonpositive = 0; // values <= 0 that were excluded
};

// drop_smallest removes that many of the smallest scales first.
// Throws InsufficientPoints when fewer than 4 usable points remain.
DecayFit fit_decay(std::vector<std::pair<double, double>> points, int drop_smallest = 0);

} // namespace bht
