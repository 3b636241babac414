#include "quantrack/joint.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "quantrack/error.hpp"

namespace quantrack {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_size(const QuantileGrid& grid, std::size_t n, std::string_view what) {
  if (n != grid.size()) {
    std::ostringstream msg;
    msg << what << ": expected " << grid.size() << " initial values, got " << n;
    throw ConstraintError(msg.str());
  }
}

void require_increasing(std::span<const double> values, std::string_view what) {
  if (!strictly_increasing(values)) {
    throw ConstraintError(std::string(what) + ": initial estimates must be strictly increasing");
  }
}

std::vector<Dumiqe> independent_units(const QuantileGrid& grid, const TrackerParams& params,
                                      std::span<const double> initial) {
  std::vector<Dumiqe> units;
  units.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    units.emplace_back(grid.prob(k), params.lambda, initial[k] + params.offset);
  }
  return units;
}

// Linear interpolation between order statistics (R type 7).
double sorted_quantile(std::span<const double> sorted, double q) {
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct SideMeans {
  double below = 0.0;
  double above = 0.0;
  std::size_t n_below = 0;
  std::size_t n_above = 0;
};

// Means of shifted samples y = x - origin restricted to (lo, hi), split at `cut`.
SideMeans side_means(std::span<const double> samples, double origin, double lo, double hi,
                     double cut) {
  SideMeans m;
  for (double x : samples) {
    const double y = x - origin;
    if (!(y > lo && y < hi)) continue;
    if (y < cut) {
      m.below += y;
      ++m.n_below;
    } else if (y > cut) {
      m.above += y;
      ++m.n_above;
    }
  }
  if (m.n_below > 0) m.below /= static_cast<double>(m.n_below);
  if (m.n_above > 0) m.above /= static_cast<double>(m.n_above);
  return m;
}

// Reconstruction from a neighbour and a gap of the right sign is strict in
// exact arithmetic; a gap below one ulp of the neighbour would round it away.
double below(double neighbour, double value) noexcept {
  return value < neighbour ? value : std::nextafter(neighbour, -kInf);
}

double above(double neighbour, double value) noexcept {
  return value > neighbour ? value : std::nextafter(neighbour, kInf);
}

}  // namespace

std::string_view to_string(TrackerKind kind) noexcept {
  switch (kind) {
    case TrackerKind::ShiftQ:
      return "shiftq";
    case TrackerKind::CondQ:
      return "condq";
    case TrackerKind::Mdumiqe:
      return "mdumiqe";
    case TrackerKind::ParallelDumiqe:
      return "parallel-dumiqe";
  }
  return "unknown";
}

TrackerKind parse_tracker_kind(std::string_view name) {
  for (auto kind : {TrackerKind::ShiftQ, TrackerKind::CondQ, TrackerKind::Mdumiqe,
                    TrackerKind::ParallelDumiqe}) {
    if (name == to_string(kind)) return kind;
  }
  throw ConstraintError("unknown tracker '" + std::string(name) +
                        "' (expected shiftq, condq, mdumiqe or parallel-dumiqe)");
}

bool strictly_increasing(std::span<const double> estimates) noexcept {
  for (std::size_t k = 1; k < estimates.size(); ++k) {
    if (!(estimates[k - 1] < estimates[k])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// ShiftQ

ShiftQ::ShiftQ(QuantileGrid grid, const TrackerParams& params, std::span<const double> initial)
    : grid_(std::move(grid)), offset_(params.offset), estimates_(initial.begin(), initial.end()) {
  require_size(grid_, initial.size(), "ShiftQ");
  require_increasing(initial, "ShiftQ");
  if (!(params.gamma > 0.0 && params.gamma < 1.0)) {
    throw ConstraintError("ShiftQ gamma must lie in (0, 1)");
  }
  const std::size_t c = grid_.center();
  units_.reserve(grid_.size());
  for (std::size_t k = 0; k < grid_.size(); ++k) {
    if (k == c) {
      units_.emplace_back(grid_.prob(k), params.lambda, initial[k] + offset_);
    } else if (k < c) {
      // Y = Q(q_{k+1}) - X; the gap Q(q_{k+1}) - Q(q_k) is its (1 - q_k) quantile.
      units_.emplace_back(1.0 - grid_.prob(k), params.gamma, initial[k + 1] - initial[k]);
    } else {
      // Y = X - Q(q_{k-1}); the gap Q(q_k) - Q(q_{k-1}) is its q_k quantile.
      units_.emplace_back(grid_.prob(k), params.gamma, initial[k] - initial[k - 1]);
    }
  }
}

std::span<const double> ShiftQ::step(double x) {
  const std::size_t c = grid_.center();
  const std::size_t K = grid_.size();
  units_[c].update(x + offset_);
  estimates_[c] = units_[c].estimate() - offset_;
  for (std::size_t k = c; k-- > 0;) {
    units_[k].update(estimates_[k + 1] - x);
    estimates_[k] = below(estimates_[k + 1], estimates_[k + 1] - units_[k].estimate());
  }
  for (std::size_t k = c + 1; k < K; ++k) {
    units_[k].update(x - estimates_[k - 1]);
    estimates_[k] = above(estimates_[k - 1], estimates_[k - 1] + units_[k].estimate());
  }
  return estimates_;
}

// ---------------------------------------------------------------------------
// CondQ

double CondQ::conditional_prob(const QuantileGrid& grid, std::size_t k) {
  const std::size_t c = grid.center();
  if (k == c) return grid.prob(k);
  if (k < c) return grid.prob(k) / grid.prob(k + 1);
  return (grid.prob(k) - grid.prob(k - 1)) / (1.0 - grid.prob(k - 1));
}

CondQ::CondQ(QuantileGrid grid, const TrackerParams& params, std::span<const QewaSeed> seeds)
    : grid_(std::move(grid)) {
  require_size(grid_, seeds.size(), "CondQ");
  if (!(params.gamma > 0.0 && params.gamma <= 1.0)) {
    throw ConstraintError("CondQ gamma must lie in (0, 1]");
  }
  const double rho = params.rho_ratio * params.lambda;
  const std::size_t c = grid_.center();
  units_.reserve(grid_.size());
  for (std::size_t k = 0; k < grid_.size(); ++k) {
    const QewaSeed& s = seeds[k];
    const double p = conditional_prob(grid_, k);
    if (k == c) {
      units_.emplace_back(p, params.lambda, rho, s.estimate, s.mu_minus, s.mu_plus);
    } else if (k < c) {
      if (!(s.mu_plus < 0.0)) {
        throw ConstraintError("CondQ: lower conditional states require mu_plus < 0");
      }
      units_.emplace_back(p, params.gamma, rho, s.estimate, s.mu_minus, s.mu_plus, -kInf, 0.0);
    } else {
      if (!(s.mu_minus > 0.0)) {
        throw ConstraintError("CondQ: upper conditional states require mu_minus > 0");
      }
      units_.emplace_back(p, params.gamma, rho, s.estimate, s.mu_minus, s.mu_plus, 0.0, kInf);
    }
  }
  estimates_.assign(grid_.size(), 0.0);
  estimates_[c] = units_[c].estimate();
  for (std::size_t k = c; k-- > 0;) estimates_[k] = estimates_[k + 1] + units_[k].estimate();
  for (std::size_t k = c + 1; k < grid_.size(); ++k) {
    estimates_[k] = estimates_[k - 1] + units_[k].estimate();
  }
}

std::span<const double> CondQ::step(double x) {
  const std::size_t c = grid_.center();
  const std::size_t K = grid_.size();
  units_[c].update(x);
  estimates_[c] = units_[c].estimate();
  for (std::size_t k = c; k-- > 0;) {
    if (x < estimates_[k + 1]) units_[k].update(x - estimates_[k + 1]);
    estimates_[k] = below(estimates_[k + 1], units_[k].estimate() + estimates_[k + 1]);
  }
  for (std::size_t k = c + 1; k < K; ++k) {
    if (x > estimates_[k - 1]) units_[k].update(x - estimates_[k - 1]);
    estimates_[k] = above(estimates_[k - 1], units_[k].estimate() + estimates_[k - 1]);
  }
  return estimates_;
}

// ---------------------------------------------------------------------------
// Baselines

Mdumiqe::Mdumiqe(QuantileGrid grid, const TrackerParams& params, std::span<const double> initial)
    : grid_(std::move(grid)), offset_(params.offset), estimates_(initial.begin(), initial.end()) {
  require_size(grid_, initial.size(), "MDUMIQE");
  require_increasing(initial, "MDUMIQE");
  units_ = independent_units(grid_, params, initial);
}

std::span<const double> Mdumiqe::step(double x) {
  const std::size_t K = grid_.size();
  for (std::size_t k = 0; k < K; ++k) {
    const double lo = k > 0 ? units_[k - 1].estimate() : -kInf;
    const double hi = k + 1 < K ? units_[k + 1].estimate() : kInf;
    units_[k].update_within(x + offset_, lo, hi);
    estimates_[k] = units_[k].estimate() - offset_;
  }
  return estimates_;
}

ParallelDumiqe::ParallelDumiqe(QuantileGrid grid, const TrackerParams& params,
                               std::span<const double> initial)
    : grid_(std::move(grid)), offset_(params.offset), estimates_(initial.begin(), initial.end()) {
  require_size(grid_, initial.size(), "parallel DUMIQE");
  units_ = independent_units(grid_, params, initial);
}

std::span<const double> ParallelDumiqe::step(double x) {
  for (std::size_t k = 0; k < units_.size(); ++k) {
    units_[k].update(x + offset_);
    estimates_[k] = units_[k].estimate() - offset_;
  }
  return estimates_;
}

// ---------------------------------------------------------------------------
// Warmup initialisation

std::vector<double> warmup_quantiles(std::span<const double> samples, const QuantileGrid& grid) {
  const std::size_t K = grid.size();
  if (samples.size() < K + 1) {
    std::ostringstream msg;
    msg << "warmup needs at least " << K + 1 << " samples for " << K << " quantiles, got "
        << samples.size();
    throw ConstraintError(msg.str());
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  if (!std::isfinite(sorted.front()) || !std::isfinite(sorted.back())) {
    throw ConstraintError("warmup samples must be finite");
  }
  const double eps = std::max(1e-6, 1e-6 * (sorted.back() - sorted.front()));

  std::vector<double> q(K);
  for (std::size_t k = 0; k < K; ++k) q[k] = sorted_quantile(sorted, grid.prob(k));
  const std::size_t c = grid.center();
  for (std::size_t k = c + 1; k < K; ++k) q[k] = std::max(q[k], q[k - 1] + eps);
  for (std::size_t k = c; k-- > 0;) q[k] = std::min(q[k], q[k + 1] - eps);
  return q;
}

std::vector<QewaSeed> warmup_condq_seeds(std::span<const double> samples,
                                         const QuantileGrid& grid) {
  const std::vector<double> q = warmup_quantiles(samples, grid);
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double spread = std::max(1e-6, *hi_it - *lo_it);
  const std::size_t c = grid.center();
  const std::size_t K = grid.size();

  std::vector<QewaSeed> seeds(K);
  {
    const SideMeans m = side_means(samples, 0.0, -kInf, kInf, q[c]);
    QewaSeed& s = seeds[c];
    s.estimate = q[c];
    s.mu_minus = m.n_below > 0 ? m.below : q[c] - spread;
    s.mu_plus = m.n_above > 0 ? m.above : q[c] + spread;
  }
  for (std::size_t k = 0; k < c; ++k) {
    const double est = q[k] - q[k + 1];
    const SideMeans m = side_means(samples, q[k + 1], -kInf, 0.0, est);
    QewaSeed& s = seeds[k];
    s.estimate = est;
    s.mu_minus = m.n_below > 0 ? m.below : est - spread;
    s.mu_plus = m.n_above > 0 ? m.above : 0.5 * est;
  }
  for (std::size_t k = c + 1; k < K; ++k) {
    const double est = q[k] - q[k - 1];
    const SideMeans m = side_means(samples, q[k - 1], 0.0, kInf, est);
    QewaSeed& s = seeds[k];
    s.estimate = est;
    s.mu_minus = m.n_below > 0 ? m.below : 0.5 * est;
    s.mu_plus = m.n_above > 0 ? m.above : est + spread;
  }
  // Keep every bracket strictly open.
  for (std::size_t k = 0; k < K; ++k) {
    QewaSeed& s = seeds[k];
    const double eps = 1e-9 * std::max(1.0, std::abs(s.estimate));
    if (!(s.mu_minus < s.estimate - eps)) s.mu_minus = s.estimate - std::max(eps, 1e-3 * spread);
    if (!(s.mu_plus > s.estimate + eps)) s.mu_plus = s.estimate + std::max(eps, 1e-3 * spread);
    if (k < c && !(s.mu_plus < 0.0)) s.mu_plus = 0.5 * s.estimate;
    if (k > c && !(s.mu_minus > 0.0)) s.mu_minus = 0.5 * s.estimate;
  }
  return seeds;
}

std::unique_ptr<JointTracker> warmup_init(std::span<const double> samples,
                                          const QuantileGrid& grid, TrackerKind kind,
                                          const TrackerParams& params) {
  switch (kind) {
    case TrackerKind::ShiftQ:
      return std::make_unique<ShiftQ>(grid, params, warmup_quantiles(samples, grid));
    case TrackerKind::CondQ:
      return std::make_unique<CondQ>(grid, params, warmup_condq_seeds(samples, grid));
    case TrackerKind::Mdumiqe:
      return std::make_unique<Mdumiqe>(grid, params, warmup_quantiles(samples, grid));
    case TrackerKind::ParallelDumiqe:
      return std::make_unique<ParallelDumiqe>(grid, params, warmup_quantiles(samples, grid));
  }
  throw ConstraintError("unknown tracker kind");
}

}  // namespace quantrack
