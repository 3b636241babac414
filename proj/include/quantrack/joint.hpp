#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quantrack/estimators.hpp"
#include "quantrack/grid.hpp"

namespace quantrack {

enum class TrackerKind { ShiftQ, CondQ, Mdumiqe, ParallelDumiqe };

std::string_view to_string(TrackerKind kind) noexcept;
TrackerKind parse_tracker_kind(std::string_view name);

struct TrackerParams {
  double lambda = 0.01;
  double gamma = 0.01;
  /// rho = rho_ratio * lambda for every QEWA unit.
  double rho_ratio = 0.01;
  /// Added to every observation before a multiplicative update and removed
  /// from the reported estimates. Only DUMIQE based trackers use it.
  double offset = 0.0;
};

/// Common interface of the joint K-quantile trackers.
class JointTracker {
 public:
  virtual ~JointTracker() = default;

  /// Consumes one observation and returns the K updated estimates.
  virtual std::span<const double> step(double x) = 0;
  virtual std::span<const double> estimates() const noexcept = 0;
  virtual const QuantileGrid& grid() const noexcept = 0;
  virtual TrackerKind kind() const noexcept = 0;
  virtual std::unique_ptr<JointTracker> clone() const = 0;
};

/// Joint tracking with DUMIQE units on shifted variables.
///
/// The central quantile is tracked directly. Each other quantile is tracked as
/// a strictly positive gap to its already-updated inner neighbour, so the
/// reconstructed estimates are strictly increasing at every step.
class ShiftQ final : public JointTracker {
 public:
  /// `initial` holds K strictly increasing estimates in stream units.
  ShiftQ(QuantileGrid grid, const TrackerParams& params, std::span<const double> initial);

  std::span<const double> step(double x) override;
  std::span<const double> estimates() const noexcept override { return estimates_; }
  const QuantileGrid& grid() const noexcept override { return grid_; }
  TrackerKind kind() const noexcept override { return TrackerKind::ShiftQ; }
  std::unique_ptr<JointTracker> clone() const override {
    return std::make_unique<ShiftQ>(*this);
  }

  /// Unit k: the central estimator (k == center, offset included) or the gap
  /// estimator for quantile k.
  const Dumiqe& unit(std::size_t k) const { return units_.at(k); }

 private:
  QuantileGrid grid_;
  double offset_;
  std::vector<Dumiqe> units_;
  std::vector<double> estimates_;
};

/// Initial state of one QEWA unit of a CondQ tracker.
struct QewaSeed {
  double estimate;
  double mu_minus;
  double mu_plus;
};

/// Joint tracking with QEWA units on conditional shifted variables.
///
/// Quantile k < c is the q_k / q_{k+1} quantile of X - Q(q_{k+1}) given that
/// it is negative; quantile k > c is the (q_k - q_{k-1}) / (1 - q_{k-1})
/// quantile of X - Q(q_{k-1}) given that it is positive. A unit is left
/// untouched when the observation falls outside its conditional support.
class CondQ final : public JointTracker {
 public:
  /// seeds[center] is in stream units. Other seeds describe the shifted
  /// conditional variables: strictly negative below the center, strictly
  /// positive above.
  CondQ(QuantileGrid grid, const TrackerParams& params, std::span<const QewaSeed> seeds);

  std::span<const double> step(double x) override;
  std::span<const double> estimates() const noexcept override { return estimates_; }
  const QuantileGrid& grid() const noexcept override { return grid_; }
  TrackerKind kind() const noexcept override { return TrackerKind::CondQ; }
  std::unique_ptr<JointTracker> clone() const override {
    return std::make_unique<CondQ>(*this);
  }

  const Qewa& unit(std::size_t k) const { return units_.at(k); }

  /// Conditional probability tracked by unit k.
  static double conditional_prob(const QuantileGrid& grid, std::size_t k);

 private:
  QuantileGrid grid_;
  std::vector<Qewa> units_;
  std::vector<double> estimates_;
};

/// Heuristic monotone DUMIQE: every quantile takes its own DUMIQE step, capped
/// so it stays strictly between its already-updated lower neighbour and its
/// not-yet-updated upper neighbour. Not a faithful reimplementation of the
/// published MDUMIQE.
class Mdumiqe final : public JointTracker {
 public:
  Mdumiqe(QuantileGrid grid, const TrackerParams& params, std::span<const double> initial);

  std::span<const double> step(double x) override;
  std::span<const double> estimates() const noexcept override { return estimates_; }
  const QuantileGrid& grid() const noexcept override { return grid_; }
  TrackerKind kind() const noexcept override { return TrackerKind::Mdumiqe; }
  std::unique_ptr<JointTracker> clone() const override {
    return std::make_unique<Mdumiqe>(*this);
  }

 private:
  QuantileGrid grid_;
  double offset_;
  std::vector<Dumiqe> units_;
  std::vector<double> estimates_;
};

/// K independent DUMIQE estimators. Ordering is not enforced; this is the
/// baseline that exhibits monotone-property violations.
class ParallelDumiqe final : public JointTracker {
 public:
  ParallelDumiqe(QuantileGrid grid, const TrackerParams& params,
                 std::span<const double> initial);

  std::span<const double> step(double x) override;
  std::span<const double> estimates() const noexcept override { return estimates_; }
  const QuantileGrid& grid() const noexcept override { return grid_; }
  TrackerKind kind() const noexcept override { return TrackerKind::ParallelDumiqe; }
  std::unique_ptr<JointTracker> clone() const override {
    return std::make_unique<ParallelDumiqe>(*this);
  }

 private:
  QuantileGrid grid_;
  double offset_;
  std::vector<Dumiqe> units_;
  std::vector<double> estimates_;
};

/// Empirical (linearly interpolated) quantiles of a warmup window, made
/// strictly increasing by spreading ties outwards from the center with
/// epsilon = 1e-6 * range (at least 1e-6).
std::vector<double> warmup_quantiles(std::span<const double> samples, const QuantileGrid& grid);

/// CondQ seeds from a warmup window: quantiles as above, conditional means
/// from the samples on each side, clamped so every bracket is valid.
std::vector<QewaSeed> warmup_condq_seeds(std::span<const double> samples,
                                         const QuantileGrid& grid);

/// Builds a tracker of the given kind from at least K + 1 warmup samples.
std::unique_ptr<JointTracker> warmup_init(std::span<const double> samples,
                                          const QuantileGrid& grid, TrackerKind kind,
                                          const TrackerParams& params);

/// True when estimates are strictly increasing.
bool strictly_increasing(std::span<const double> estimates) noexcept;

}  // namespace quantrack
