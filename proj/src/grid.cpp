#include "quantrack/grid.hpp"

#include <cmath>
#include <string>

#include "quantrack/error.hpp"

namespace quantrack {

QuantileGrid::QuantileGrid(std::vector<double> probs, std::optional<std::size_t> center)
    : probs_(std::move(probs)), center_(0) {
  if (probs_.empty()) throw ConstraintError("quantile grid must not be empty");
  for (std::size_t k = 0; k < probs_.size(); ++k) {
    const double q = probs_[k];
    if (!(q > 0.0 && q < 1.0)) {
      throw ConstraintError("quantile probability " + std::to_string(q) +
                            " is outside (0, 1)");
    }
    if (k > 0 && !(probs_[k - 1] < q)) {
      throw ConstraintError("quantile probabilities must be strictly increasing");
    }
  }
  if (center) {
    if (*center >= probs_.size()) throw ConstraintError("grid center index out of range");
    center_ = *center;
  } else {
    double best = std::abs(probs_[0] - 0.5);
    for (std::size_t k = 1; k < probs_.size(); ++k) {
      const double d = std::abs(probs_[k] - 0.5);
      if (d < best - 1e-12) {
        best = d;
        center_ = k;
      }
    }
  }
}

QuantileGrid QuantileGrid::evenly_spaced(std::size_t count) {
  std::vector<double> probs(count);
  for (std::size_t k = 0; k < count; ++k) {
    probs[k] = static_cast<double>(k + 1) / static_cast<double>(count + 1);
  }
  return QuantileGrid(std::move(probs));
}

}  // namespace quantrack
