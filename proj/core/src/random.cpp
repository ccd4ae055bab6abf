#include "gpdc/random.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace gpdc {

std::size_t argmax_random_tie(std::span<const double> scores, Rng& rng, double rel_tol) {
  if (scores.empty()) return 0;
  double best = -std::numeric_limits<double>::infinity();
  for (double s : scores) {
    if (!std::isnan(s)) best = std::max(best, s);
  }
  const double tol = std::isfinite(best) ? rel_tol * std::max(1.0, std::abs(best)) : 0.0;
  std::vector<std::size_t> tied;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isnan(scores[i]) && scores[i] >= best - tol) tied.push_back(i);
  }
  if (tied.empty()) return uniform_index(rng, scores.size());
  if (tied.size() == 1) return tied.front();
  return tied[uniform_index(rng, tied.size())];
}

}  // namespace gpdc
