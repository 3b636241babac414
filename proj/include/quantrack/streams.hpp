#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace quantrack {

enum class Family { Normal, ChiSquare };

/// Periodic: sinusoidal location / degrees of freedom. Switch: square wave.
/// Static: frozen parameters (mu = a for normal, nu = b for chi-square); used
/// for convergence and moment checks.
enum class Variant { Periodic, Switch, Static };

std::string_view to_string(Family family) noexcept;
std::string_view to_string(Variant variant) noexcept;
Family parse_family(std::string_view name);
Variant parse_variant(std::string_view name);

/// Synthetic dynamic stream definition. Normal streams have unit standard
/// deviation and location mu_n; chi-square streams have nu_n degrees of freedom.
struct StreamConfig {
  Family family = Family::Normal;
  Variant variant = Variant::Periodic;
  double a = 2.0;
  double b = 6.0;
  std::int64_t period = 100;
  std::uint64_t seed = 1;

  /// Throws ConstraintError on T < 2 or, for chi-square, unless b > a > 0.
  void validate() const;
};

/// mu_n (normal) or nu_n (chi-square) at step n >= 1.
double param_at(const StreamConfig& config, std::int64_t n) noexcept;

/// Seeded sample source; the first call to next() returns x_1.
class StreamGenerator {
 public:
  explicit StreamGenerator(const StreamConfig& config);

  double next();
  /// Index of the most recently returned sample (0 before the first call).
  std::int64_t index() const noexcept { return n_; }
  const StreamConfig& config() const noexcept { return config_; }

 private:
  StreamConfig config_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
  std::gamma_distribution<double> gamma_;
  std::int64_t n_ = 0;
};

/// Analytic quantile of the stream distribution at step n.
class TrueQuantileOracle {
 public:
  explicit TrueQuantileOracle(const StreamConfig& config);

  double quantile(std::int64_t n, double q) const;

 private:
  StreamConfig config_;
};

/// Standard normal inverse CDF.
double normal_quantile(double q);
/// Chi-square inverse CDF, |CDF(result) - q| < 1e-10.
double chi_square_quantile(double nu, double q);
/// Chi-square CDF (regularized lower incomplete gamma P(nu / 2, x / 2)).
double chi_square_cdf(double nu, double x);

}  // namespace quantrack
