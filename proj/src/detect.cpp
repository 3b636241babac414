#include "quantrack/detect.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "quantrack/error.hpp"

namespace quantrack {
namespace {

std::size_t seconds_to_samples(double seconds, double rate) {
  return static_cast<std::size_t>(std::ceil(seconds * rate - 1e-9));
}

void require_rate(double v, std::string_view name) {
  if (!(v > 0.0 && v < 1.0)) {
    throw ConstraintError(std::string(name) + " must lie in (0, 1)");
  }
}

}  // namespace

std::string_view to_string(DetectorMethod method) noexcept {
  switch (method) {
    case DetectorMethod::EdShiftQ:
      return "ed-shiftq";
    case DetectorMethod::EdCondQ:
      return "ed-condq";
    case DetectorMethod::Md:
      return "md";
  }
  return "unknown";
}

DetectorMethod parse_detector_method(std::string_view name) {
  for (auto m : {DetectorMethod::EdShiftQ, DetectorMethod::EdCondQ, DetectorMethod::Md}) {
    if (name == to_string(m)) return m;
  }
  throw ConstraintError("unknown detector method '" + std::string(name) +
                        "' (expected ed-shiftq, ed-condq or md)");
}

void DetectorConfig::validate() const {
  if (method == DetectorMethod::Md) {
    require_rate(nu, "nu");
  } else {
    require_rate(lambda, "lambda");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConstraintError("gamma must lie in (0, 1)");
    require_rate(rho_ratio * lambda, "rho");
  }
  require_rate(xi, "xi");
  if (!(horizon > 0.0)) throw ConstraintError("horizon h must be positive");
  if (!(eta > 0.0)) throw ConstraintError("threshold eta must be positive");
  if (!(sample_rate > 0.0)) throw ConstraintError("sample rate must be positive");
  if (!(init_seconds > 0.0) || !(arm_seconds >= 0.0)) {
    throw ConstraintError("init and arm windows must be positive");
  }
  const QuantileGrid grid(probs);
  if (method != DetectorMethod::Md && init_samples() < grid.size() + 1) {
    throw ConstraintError("init window too short for the quantile grid");
  }
}

std::size_t DetectorConfig::horizon_samples() const {
  return std::max<std::size_t>(1, seconds_to_samples(horizon, sample_rate));
}

std::size_t DetectorConfig::init_samples() const {
  return std::max<std::size_t>(1, seconds_to_samples(init_seconds, sample_rate));
}

std::size_t DetectorConfig::arm_samples() const {
  return seconds_to_samples(arm_seconds, sample_rate);
}

void EwmaMoments::update(double v) noexcept {
  ++count_;
  const double r = std::max(rate_, 1.0 / static_cast<double>(count_));
  mean_ = (1.0 - r) * mean_ + r * v;
  mean_sq_ = (1.0 - r) * mean_sq_ + r * v * v;
}

double EwmaMoments::sd() const noexcept {
  return std::sqrt(std::max(0.0, mean_sq_ - mean_ * mean_));
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ConstraintError("distance between vectors of unequal size");
  double total = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    total += d * d;
  }
  return std::sqrt(total);
}

// ---------------------------------------------------------------------------

ChangeDetector::ChangeDetector(DetectorConfig config)
    : config_(std::move(config)), grid_(config_.probs) {
  config_.validate();
  restart();
}

std::size_t ChangeDetector::width() const noexcept { return is_ed() ? grid_.size() : 1; }

bool ChangeDetector::armed() const noexcept {
  if (!initialised_) return false;
  for (const Axis& a : axes_) {
    if (a.filled < config_.horizon_samples() ||
        a.moments.count() < static_cast<std::int64_t>(config_.arm_samples())) {
      return false;
    }
  }
  return true;
}

std::span<const double> ChangeDetector::estimates(std::size_t axis) const {
  const Axis& a = axes_.at(axis);
  if (!a.tracker) return {};
  return a.tracker->estimates();
}

void ChangeDetector::restart() {
  initialised_ = false;
  for (std::size_t w = 0; w < kAxes; ++w) {
    Axis& a = axes_[w];
    a.tracker.reset();
    a.ring.assign(config_.horizon_samples() * width(), 0.0);
    a.head = 0;
    a.filled = 0;
    a.moments = EwmaMoments(config_.xi);
    window_[w].clear();
  }
}

void ChangeDetector::initialise() {
  TrackerParams params;
  params.lambda = config_.lambda;
  params.gamma = config_.gamma;
  params.rho_ratio = config_.rho_ratio;
  params.offset = config_.offset;
  for (std::size_t w = 0; w < kAxes; ++w) {
    Axis& a = axes_[w];
    const auto& win = window_[w];
    if (is_ed()) {
      const TrackerKind kind =
          config_.method == DetectorMethod::EdCondQ ? TrackerKind::CondQ : TrackerKind::ShiftQ;
      a.tracker = warmup_init(win, grid_, kind, params);
    } else {
      double s = 0.0, s2 = 0.0;
      for (double x : win) {
        s += x;
        s2 += x * x;
      }
      a.mean = s / static_cast<double>(win.size());
      a.mean_sq = s2 / static_cast<double>(win.size());
    }
    window_[w].clear();
  }
  initialised_ = true;
}

std::optional<Detection> ChangeDetector::step(const AxisSample& sample, double time) {
  const std::int64_t index = index_++;
  if (!initialised_) {
    scores_.fill(std::numeric_limits<double>::quiet_NaN());
    for (std::size_t w = 0; w < kAxes; ++w) window_[w].push_back(sample[w]);
    if (window_[0].size() >= config_.init_samples()) initialise();
    return std::nullopt;
  }

  const std::size_t horizon = config_.horizon_samples();
  const std::size_t cols = width();
  const auto arm = static_cast<std::int64_t>(config_.arm_samples());
  std::optional<Detection> best;
  scores_.fill(std::numeric_limits<double>::quiet_NaN());

  for (std::size_t w = 0; w < kAxes; ++w) {
    Axis& a = axes_[w];
    const double x = sample[w];
    current_.resize(cols);
    double spread = 0.0;
    if (is_ed()) {
      const auto est = a.tracker->step(x);
      std::copy(est.begin(), est.end(), current_.begin());
    } else {
      a.mean = (1.0 - config_.nu) * a.mean + config_.nu * x;
      a.mean_sq = (1.0 - config_.nu) * a.mean_sq + config_.nu * x * x;
      current_[0] = a.mean;
      spread = std::sqrt(std::max(0.0, a.mean_sq - a.mean * a.mean));
    }

    std::span<double> slot(a.ring.data() + a.head * cols, cols);
    std::optional<double> statistic;
    if (a.filled == horizon) {
      if (is_ed()) {
        statistic = euclidean_distance(current_, slot);
      } else {
        statistic = spread > 0.0 ? std::abs(current_[0] - slot[0]) / spread : 0.0;
      }
    }
    std::copy(current_.begin(), current_.end(), slot.begin());
    a.head = (a.head + 1) % horizon;
    a.filled = std::min(a.filled + 1, horizon);

    if (!statistic) continue;
    if (a.moments.count() >= arm) {
      const double sd = a.moments.sd();
      if (sd > 0.0) {
        const double z = (*statistic - a.moments.mean()) / sd;
        scores_[w] = z;
        if (z >= config_.eta && (!best || z > best->score)) {
          best = Detection{index, time, w, *statistic, z};
        }
      }
    }
    a.moments.update(*statistic);
  }

  if (best) restart();
  return best;
}

std::vector<Detection> run_detector(const DetectorConfig& config,
                                    std::span<const AxisSample> samples,
                                    std::span<const double> times) {
  if (samples.size() != times.size()) {
    throw ConstraintError("run_detector: samples and times differ in length");
  }
  ChangeDetector detector(config);
  std::vector<Detection> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (auto d = detector.step(samples[i], times[i])) out.push_back(*d);
  }
  return out;
}

// ---------------------------------------------------------------------------

void ScoreTally::add(std::span<const double> detections, std::span<const double> truth,
                     double tolerance) {
  if (!std::is_sorted(detections.begin(), detections.end()) ||
      !std::is_sorted(truth.begin(), truth.end())) {
    throw ConstraintError("score: detections and true changes must be sorted");
  }
  detections_ += detections.size();
  changes_ += truth.size();
  std::size_t credited_segment = truth.size();  // none yet
  for (double d : detections) {
    // Segment i spans [truth[i], truth[i + 1]).
    const auto it = std::upper_bound(truth.begin(), truth.end(), d);
    if (it == truth.begin()) continue;
    const auto segment = static_cast<std::size_t>(it - truth.begin() - 1);
    if (segment == credited_segment) continue;
    const double delay = d - truth[segment];
    if (delay > tolerance) continue;
    credited_segment = segment;
    ++correct_;
    delay_sum_ += delay;
  }
}

ScoreReport ScoreTally::report() const {
  ScoreReport r;
  r.detections = detections_;
  r.correct = correct_;
  r.true_changes = changes_;
  r.precision = detections_ > 0 ? static_cast<double>(correct_) / detections_ : 0.0;
  r.recall = changes_ > 0 ? static_cast<double>(correct_) / changes_ : 0.0;
  r.f1 = (r.precision + r.recall) > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  r.mean_delay = correct_ > 0 ? delay_sum_ / static_cast<double>(correct_) : 0.0;
  return r;
}

ScoreReport score(std::span<const double> detections, std::span<const double> truth,
                  double tolerance) {
  ScoreTally tally;
  tally.add(detections, truth, tolerance);
  return tally.report();
}

}  // namespace quantrack
