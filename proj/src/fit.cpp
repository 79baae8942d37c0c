#include "bht/fit.hpp"

#include "bht/errors.hpp"

#include <algorithm>
#include <cmath>

namespace bht {

DecayFit fit_decay(std::vector<std::pair<double, double>> points, int drop_smallest)
{
   std::sort(points.begin(), points.end());
   DecayFit fit;
   const size_t skip = std::min<size_t>(std::max(drop_smallest, 0), points.size());
   for (size_t i = skip; i < points.size(); ++i) {
      if (points[i].second > 0.0 && std::isfinite(points[i].second)) {
         fit.points.push_back(points[i]);
      } else {
         ++fit.dropped_nonpositive;
      }
   }
   const size_t n = fit.points.size();
   if (n < 4) {
      throw InsufficientPoints("fit_decay needs at least 4 positive points, got " + std::to_string(n));
   }
   double sx = 0, sy = 0;
   for (auto [x, v] : fit.points) {
      sx += x;
      sy += std::log2(v);
   }
   const double mx = sx / n, my = sy / n;
   double sxx = 0, sxy = 0;
   for (auto [x, v] : fit.points) {
      sxx += (x - mx) * (x - mx);
      sxy += (x - mx) * (std::log2(v) - my);
   }
   if (sxx == 0.0) { throw InsufficientPoints("fit_decay: all scales coincide"); }
   fit.slope = sxy / sxx;
   fit.intercept = my - fit.slope * mx;
   for (auto [x, v] : fit.points) {
      fit.max_residual = std::max(fit.max_residual, std::abs(std::log2(v) - fit.intercept - fit.slope * x));
   }
   return fit;
}

} // namespace bht
