#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace quantrack {

/// Strictly increasing target probabilities with a central index.
///
/// The center is zero-based. When not given it is the probability closest to
/// 0.5, ties resolved towards the lower index.
class QuantileGrid {
 public:
  explicit QuantileGrid(std::vector<double> probs,
                        std::optional<std::size_t> center = std::nullopt);

  /// q_k = k / (count + 1), k = 1..count (count = 19 gives 0.05, ..., 0.95).
  static QuantileGrid evenly_spaced(std::size_t count);

  std::size_t size() const noexcept { return probs_.size(); }
  std::size_t center() const noexcept { return center_; }
  double prob(std::size_t k) const { return probs_.at(k); }
  std::span<const double> probs() const noexcept { return probs_; }

  bool operator==(const QuantileGrid&) const = default;

 private:
  std::vector<double> probs_;
  std::size_t center_;
};

}  // namespace quantrack
