#pragma once

#include <limits>

namespace quantrack {

/// Multiplicative incremental quantile estimator (DUMIQE).
///
/// The estimate is scaled up by (1 + lambda q) when it lies below the
/// observation and down by (1 - lambda (1 - q)) otherwise, so a positive
/// estimate stays positive forever. Streams with non-positive support must be
/// shifted by the caller.
class Dumiqe {
 public:
  Dumiqe(double q, double lambda, double initial_estimate);

  void update(double x) noexcept {
    if (estimate_ < x) {
      estimate_ *= 1.0 + lambda_ * q_;
    } else {
      estimate_ *= 1.0 - lambda_ * (1.0 - q_);
    }
  }

  /// Same update, but the result is kept inside (lo, hi): it stops short of a
  /// bound by 1e-6 of the previous distance to it, and keeps the previous
  /// estimate when rounding would reach a bound. Either bound may be infinite.
  void update_within(double x, double lo, double hi) noexcept;

  double estimate() const noexcept { return estimate_; }
  double q() const noexcept { return q_; }
  double lambda() const noexcept { return lambda_; }

  bool operator==(const Dumiqe&) const = default;

 private:
  double q_;
  double lambda_;
  double estimate_;
};

/// Quantile estimation by a generalized exponentially weighted average (QEWA).
///
/// Besides the quantile estimate it tracks the conditional means below and
/// above the estimate; their distances to the estimate set the adaptive weight
/// used by the next update. The weight always lies strictly inside (0, lambda).
///
/// An optional support interval (lo, hi) bounds the conditional means. It is
/// used for conditional variables known to live on one side of zero.
class Qewa {
 public:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  /// Initial weight is lambda / 2, the value for a symmetric bracket.
  Qewa(double q, double lambda, double rho, double initial_estimate, double mu_minus,
       double mu_plus, double support_lo = -kInf, double support_hi = kInf);

  void update(double x) noexcept;

  /// The averaging step with a caller-supplied constant weight and no weight update;
  /// tracks the mean of the stream instead of a quantile.
  void update_fixed_weight(double x, double weight) noexcept;

  double estimate() const noexcept { return estimate_; }
  double mu_minus() const noexcept { return mu_minus_; }
  double mu_plus() const noexcept { return mu_plus_; }
  double weight() const noexcept { return weight_; }
  double q() const noexcept { return q_; }
  double lambda() const noexcept { return lambda_; }
  double rho() const noexcept { return rho_; }

  bool operator==(const Qewa&) const = default;

 private:
  void shift_means(double x, double previous) noexcept;
  void repair_bracket() noexcept;

  double q_;
  double lambda_;
  double rho_;
  double estimate_;
  double mu_minus_;
  double mu_plus_;
  double weight_;
  double support_lo_;
  double support_hi_;
};

}  // namespace quantrack
