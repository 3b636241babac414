#include "quantrack/streams.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "quantrack/error.hpp"

namespace quantrack {
namespace {

void require_open_unit(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    std::ostringstream msg;
    msg << "probability " << q << " must lie in (0, 1)";
    throw ConstraintError(msg.str());
  }
}

}  // namespace

std::string_view to_string(Family family) noexcept {
  return family == Family::Normal ? "normal" : "chisquare";
}

std::string_view to_string(Variant variant) noexcept {
  switch (variant) {
    case Variant::Periodic:
      return "periodic";
    case Variant::Switch:
      return "switch";
    case Variant::Static:
      return "static";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  if (name == "normal") return Family::Normal;
  if (name == "chisquare" || name == "chi2") return Family::ChiSquare;
  throw ConstraintError("unknown stream family '" + std::string(name) +
                        "' (expected normal or chisquare)");
}

Variant parse_variant(std::string_view name) {
  if (name == "periodic") return Variant::Periodic;
  if (name == "switch") return Variant::Switch;
  if (name == "static") return Variant::Static;
  throw ConstraintError("unknown stream variant '" + std::string(name) +
                        "' (expected periodic, switch or static)");
}

void StreamConfig::validate() const {
  if (period < 2) throw ConstraintError("stream period T must be at least 2");
  if (!std::isfinite(a) || !std::isfinite(b)) throw ConstraintError("a and b must be finite");
  if (family == Family::ChiSquare) {
    if (variant == Variant::Static) {
      if (!(b > 0.0)) throw ConstraintError("static chi-square stream requires b > 0");
    } else if (!(b > a && a > 0.0)) {
      throw ConstraintError("chi-square stream requires b > a > 0");
    }
  }
}

double param_at(const StreamConfig& config, std::int64_t n) noexcept {
  double level = 0.0;
  switch (config.variant) {
    case Variant::Periodic:
      level = config.a * std::sin(2.0 * std::numbers::pi * static_cast<double>(n) /
                                  static_cast<double>(config.period));
      break;
    case Variant::Switch:
      // n mod T <= T / 2, evaluated in integers.
      level = 2 * (n % config.period) <= config.period ? config.a : -config.a;
      break;
    case Variant::Static:
      return config.family == Family::Normal ? config.a : config.b;
  }
  return config.family == Family::Normal ? level : level + config.b;
}

StreamGenerator::StreamGenerator(const StreamConfig& config)
    : config_(config), rng_(config.seed) {
  config_.validate();
}

double StreamGenerator::next() {
  ++n_;
  const double p = param_at(config_, n_);
  if (config_.family == Family::Normal) {
    return p + normal_(rng_);
  }
  using Param = std::gamma_distribution<double>::param_type;
  return gamma_(rng_, Param(p / 2.0, 2.0));
}

TrueQuantileOracle::TrueQuantileOracle(const StreamConfig& config) : config_(config) {
  config_.validate();
}

double TrueQuantileOracle::quantile(std::int64_t n, double q) const {
  require_open_unit(q);
  const double p = param_at(config_, n);
  if (config_.family == Family::Normal) return p + normal_quantile(q);
  return chi_square_quantile(p, q);
}

double normal_quantile(double q) {
  require_open_unit(q);
  return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), q);
}

double chi_square_quantile(double nu, double q) {
  require_open_unit(q);
  if (!(nu > 0.0)) throw ConstraintError("chi-square degrees of freedom must be positive");
  return 2.0 * boost::math::gamma_p_inv(nu / 2.0, q);
}

double chi_square_cdf(double nu, double x) {
  if (!(nu > 0.0)) throw ConstraintError("chi-square degrees of freedom must be positive");
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(nu / 2.0, x / 2.0);
}

}  // namespace quantrack
