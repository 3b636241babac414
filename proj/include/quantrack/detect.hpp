#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "quantrack/joint.hpp"

namespace quantrack {

enum class DetectorMethod { EdShiftQ, EdCondQ, Md };

std::string_view to_string(DetectorMethod method) noexcept;
DetectorMethod parse_detector_method(std::string_view name);

inline constexpr std::size_t kAxes = 3;
using AxisSample = std::array<double, kAxes>;

struct DetectorConfig {
  DetectorMethod method = DetectorMethod::EdCondQ;
  double lambda = 0.01;
  double gamma = 0.1;
  double rho_ratio = 0.01;
  /// DUMIQE offset for ed-shiftq. Accelerometer readings lie within about
  /// +-20 m/s^2, so the default keeps every shifted input positive.
  double offset = 30.0;
  /// EWMA rate of the MD mean / second moment.
  double nu = 0.01;
  /// EWMA rate of the distance statistic moments.
  double xi = 0.05;
  /// Look-back horizon in seconds.
  double horizon = 10.0;
  /// Threshold in standard deviations of the distance statistic.
  double eta = 25.0;
  double sample_rate = 20.0;
  std::vector<double> probs{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  /// Samples used to (re)initialise trackers or MD moments, in seconds.
  double init_seconds = 1.0;
  /// Statistic values observed before thresholding is armed, in seconds.
  double arm_seconds = 5.0;

  void validate() const;
  std::size_t horizon_samples() const;
  std::size_t init_samples() const;
  std::size_t arm_samples() const;
};

/// EWMA of a value and of its square; sd() = sqrt(max(0, E[v^2] - E[v]^2)).
/// The effective rate is max(rate, 1 / count), so the moments are plain
/// running averages until 1 / rate values have been seen.
class EwmaMoments {
 public:
  explicit EwmaMoments(double rate) : rate_(rate) {}

  void update(double v) noexcept;
  void reset() noexcept { count_ = 0; }

  double mean() const noexcept { return mean_; }
  double sd() const noexcept;
  std::int64_t count() const noexcept { return count_; }

 private:
  double rate_;
  double mean_ = 0.0;
  double mean_sq_ = 0.0;
  std::int64_t count_ = 0;
};

double euclidean_distance(std::span<const double> a, std::span<const double> b);

struct Detection {
  std::int64_t index = 0;  // 0-based sample index
  double time = 0.0;
  std::size_t dimension = 0;
  double statistic = 0.0;  // ED or MD value in the firing dimension
  double score = 0.0;      // (statistic - mean) / sd
};

/// Online change detector over three acceleration axes.
///
/// Each axis tracks a quantile vector (ED) or an EWMA mean and spread (MD),
/// compares it with the value one horizon back, and fires when the distance
/// exceeds its running mean by eta running standard deviations in any axis.
/// The running moments used for the test exclude the value being tested.
/// After a detection everything restarts: trackers are re-initialised from
/// the next init window, the horizon buffer refills, and arm_seconds of
/// statistic values are collected before the next detection can fire.
class ChangeDetector {
 public:
  explicit ChangeDetector(DetectorConfig config);

  std::optional<Detection> step(const AxisSample& sample, double time);

  std::int64_t samples_seen() const noexcept { return index_; }
  bool armed() const noexcept;
  const DetectorConfig& config() const noexcept { return config_; }
  /// Current quantile estimates of an axis (ED methods, after initialisation).
  std::span<const double> estimates(std::size_t axis) const;
  /// Per-axis standardized distance of the last step; NaN while not armed.
  const std::array<double, kAxes>& last_scores() const noexcept { return scores_; }

 private:
  struct Axis {
    std::unique_ptr<JointTracker> tracker;
    double mean = 0.0;
    double mean_sq = 0.0;
    std::vector<double> ring;  // horizon_samples rows of `width`
    std::size_t head = 0;
    std::size_t filled = 0;
    EwmaMoments moments{0.0};
  };

  void restart();
  void initialise();
  bool is_ed() const noexcept { return config_.method != DetectorMethod::Md; }
  std::size_t width() const noexcept;

  DetectorConfig config_;
  QuantileGrid grid_;
  std::array<Axis, kAxes> axes_;
  std::array<std::vector<double>, kAxes> window_;
  bool initialised_ = false;
  std::int64_t index_ = 0;
  std::vector<double> current_;
  std::array<double, kAxes> scores_{};
};

std::vector<Detection> run_detector(const DetectorConfig& config,
                                    std::span<const AxisSample> samples,
                                    std::span<const double> times);

struct ScoreReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  /// Mean time from a true change to the detection credited to it.
  double mean_delay = 0.0;
  std::size_t detections = 0;
  std::size_t correct = 0;
  std::size_t true_changes = 0;
};

/// Accumulates scoring over several independent sequences (e.g. users).
class ScoreTally {
 public:
  /// Both lists sorted. The first detection at or after a true change and
  /// before the next one is correct (if within `tolerance`); all others are
  /// false detections.
  void add(std::span<const double> detections, std::span<const double> truth,
           double tolerance = std::numeric_limits<double>::infinity());
  ScoreReport report() const;

 private:
  std::size_t detections_ = 0;
  std::size_t correct_ = 0;
  std::size_t changes_ = 0;
  double delay_sum_ = 0.0;
};

ScoreReport score(std::span<const double> detections, std::span<const double> truth,
                  double tolerance = std::numeric_limits<double>::infinity());

}  // namespace quantrack
