#include "quantrack/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "quantrack/error.hpp"

namespace quantrack {
namespace {

void require_probability(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    std::ostringstream msg;
    msg << "probability q = " << q << " must lie in (0, 1)";
    throw ConstraintError(msg.str());
  }
}

double bracket_epsilon(double estimate) noexcept {
  return 1e-12 * std::max(1.0, std::abs(estimate));
}

}  // namespace

Dumiqe::Dumiqe(double q, double lambda, double initial_estimate)
    : q_(q), lambda_(lambda), estimate_(initial_estimate) {
  require_probability(q);
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw ConstraintError("DUMIQE step size lambda must lie in (0, 1)");
  }
  if (!(initial_estimate > 0.0) || !std::isfinite(initial_estimate)) {
    std::ostringstream msg;
    msg << "DUMIQE initial estimate " << initial_estimate
        << " must be strictly positive (shift the stream with an offset)";
    throw ConstraintError(msg.str());
  }
}

void Dumiqe::update_within(double x, double lo, double hi) noexcept {
  const double previous = estimate_;
  update(x);
  if (std::isfinite(hi) && estimate_ > hi - 1e-6 * (hi - previous)) {
    estimate_ = hi - 1e-6 * (hi - previous);
  }
  if (std::isfinite(lo) && estimate_ < lo + 1e-6 * (previous - lo)) {
    estimate_ = lo + 1e-6 * (previous - lo);
  }
  if (!(estimate_ > lo && estimate_ < hi)) estimate_ = previous;
}

Qewa::Qewa(double q, double lambda, double rho, double initial_estimate, double mu_minus,
           double mu_plus, double support_lo, double support_hi)
    : q_(q),
      lambda_(lambda),
      rho_(rho),
      estimate_(initial_estimate),
      mu_minus_(mu_minus),
      mu_plus_(mu_plus),
      weight_(lambda / 2.0),
      support_lo_(support_lo),
      support_hi_(support_hi) {
  require_probability(q);
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw ConstraintError("QEWA step size lambda must lie in (0, 1]");
  }
  if (!(rho > 0.0 && rho < 1.0)) throw ConstraintError("QEWA rate rho must lie in (0, 1)");
  if (!std::isfinite(initial_estimate) || !std::isfinite(mu_minus) || !std::isfinite(mu_plus)) {
    throw ConstraintError("QEWA initial values must be finite");
  }
  if (!(mu_minus < initial_estimate && initial_estimate < mu_plus)) {
    std::ostringstream msg;
    msg << "QEWA initial values violate mu_minus < estimate < mu_plus (" << mu_minus << ", "
        << initial_estimate << ", " << mu_plus << ")";
    throw ConstraintError(msg.str());
  }
  if (!(support_lo <= mu_minus && mu_plus <= support_hi)) {
    throw ConstraintError("QEWA conditional means lie outside the support interval");
  }
}

void Qewa::shift_means(double x, double previous) noexcept {
  const double shift = estimate_ - previous;
  if (x > previous) {
    mu_plus_ = shift + (1.0 - rho_) * mu_plus_ + rho_ * x;
    mu_minus_ = shift + mu_minus_;
  } else {
    mu_plus_ = shift + mu_plus_;
    mu_minus_ = shift + (1.0 - rho_) * mu_minus_ + rho_ * x;
  }
}

void Qewa::repair_bracket() noexcept {
  // Means outside the support are pulled halfway between estimate and bound.
  if (mu_plus_ >= support_hi_) mu_plus_ = estimate_ + 0.5 * (support_hi_ - estimate_);
  if (mu_minus_ <= support_lo_) mu_minus_ = estimate_ - 0.5 * (estimate_ - support_lo_);
  const double eps = bracket_epsilon(estimate_);
  if (mu_plus_ - estimate_ <= eps) mu_plus_ = estimate_ + eps;
  if (estimate_ - mu_minus_ <= eps) mu_minus_ = estimate_ - eps;
}

void Qewa::update(double x) noexcept {
  // a = (q / gap_plus) / (q / gap_plus + (1 - q) / gap_minus); the weight is
  // lambda * a above the estimate and lambda * (1 - a) at or below it. Both
  // shares are formed without dividing by the gaps.
  const double previous = estimate_;
  const double up = q_ * (previous - mu_minus_);
  const double down = (1.0 - q_) * (mu_plus_ - previous);
  const double share = (x <= previous) ? down / (up + down) : up / (up + down);
  weight_ = lambda_ * share;
  if (!(weight_ < lambda_)) weight_ = std::nextafter(lambda_, 0.0);
  if (!(weight_ > 0.0)) weight_ = std::numeric_limits<double>::denorm_min();

  estimate_ = (1.0 - weight_) * previous + weight_ * x;
  shift_means(x, previous);
  repair_bracket();
}

void Qewa::update_fixed_weight(double x, double weight) noexcept {
  const double previous = estimate_;
  estimate_ = (1.0 - weight) * previous + weight * x;
  shift_means(x, previous);
  repair_bracket();
}

}  // namespace quantrack
