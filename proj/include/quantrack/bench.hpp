#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "quantrack/grid.hpp"
#include "quantrack/joint.hpp"
#include "quantrack/streams.hpp"

namespace quantrack {

/// One tracker x stream experiment. Trackers are initialised from the first
/// `init_samples` observations, then run over all `samples` observations;
/// the first `warmup` steps are not scored.
struct ExperimentSpec {
  StreamConfig stream;
  TrackerKind tracker = TrackerKind::CondQ;
  QuantileGrid grid = QuantileGrid({0.2, 0.5, 0.8});
  std::vector<double> lambdas;
  double gamma = 0.01;
  double rho_ratio = 0.01;
  /// DUMIQE offset; defaults per family via default_offset() when unset.
  std::optional<double> offset;
  std::int64_t samples = 1'000'000;
  std::int64_t warmup = 10'000;
  std::int64_t init_samples = 100;
  /// Worker threads for lambda sweeps; 0 selects hardware concurrency.
  unsigned threads = 0;

  void validate() const;
};

/// Offset used for DUMIQE based trackers when none is given: 10 for normal
/// streams (location within +-a), 0 for chi-square streams (positive support).
double default_offset(const StreamConfig& stream) noexcept;

/// Logarithmic grid: 10^(log10(lo) + i / per_decade) up to hi, with hi appended.
std::vector<double> log_lambda_grid(double lo = 1e-3, double hi = 0.5, int per_decade = 20);

/// Running per-quantile squared-error sums for the averaged RMSE metric.
class RmseAccumulator {
 public:
  explicit RmseAccumulator(std::size_t quantiles);

  void add(std::span<const double> truth, std::span<const double> estimates);
  std::int64_t count() const noexcept { return count_; }
  std::vector<double> per_quantile() const;
  /// (1/K) sum_k sqrt(mean squared error of quantile k); 0 when empty.
  double value() const;

 private:
  std::vector<double> sums_;
  std::int64_t count_ = 0;
};

struct RmseEntry {
  double lambda = 0.0;
  double rmse = 0.0;
  std::vector<double> per_quantile;
  std::int64_t violations = 0;
};

struct RmseReport {
  std::vector<RmseEntry> entries;
  std::size_t best = 0;

  const RmseEntry& optimal() const { return entries.at(best); }
  std::int64_t violations() const noexcept;
};

/// Stream samples and true quantiles materialised once and shared by every
/// lambda of a sweep.
class PreparedStream {
 public:
  PreparedStream(const StreamConfig& stream, const QuantileGrid& grid, std::int64_t samples);

  std::span<const double> samples() const noexcept { return samples_; }
  /// True quantiles at step n (1-based).
  std::span<const double> truth(std::int64_t n) const;

 private:
  std::size_t quantiles_;
  std::int64_t period_;
  bool static_ = false;
  std::vector<double> samples_;
  std::vector<double> truth_;  // one K-row per phase n mod T
};

RmseEntry run_rmse(const ExperimentSpec& spec, double lambda);
RmseEntry run_rmse(const ExperimentSpec& spec, const PreparedStream& stream, double lambda);

/// One run_rmse per lambda of spec.lambdas, best entry marked.
RmseReport sweep(const ExperimentSpec& spec);

struct TableCell {
  Family family;
  Variant variant;
  std::size_t quantiles;
  std::int64_t period;
  TrackerKind tracker;
  double gamma;
  double lambda_opt;
  double rmse;
  std::int64_t violations;
};

struct TableRequest {
  std::vector<Family> families{Family::Normal, Family::ChiSquare};
  std::vector<Variant> variants{Variant::Periodic, Variant::Switch};
  std::vector<std::size_t> quantile_counts{3, 19};
  std::vector<std::int64_t> periods{100, 1000};
  std::vector<TrackerKind> trackers{TrackerKind::ShiftQ, TrackerKind::CondQ};
  std::vector<double> gammas{0.1, 0.01, 0.001, 0.0001};
  std::vector<double> lambdas = log_lambda_grid();
  std::int64_t samples = 1'000'000;
  std::int64_t warmup = 10'000;
  std::uint64_t seed = 1;
  std::optional<double> offset;
  unsigned threads = 0;
};

/// The grid used for K quantiles in the tables: (0.2, 0.5, 0.8) for K = 3,
/// otherwise K evenly spaced probabilities.
QuantileGrid table_grid(std::size_t quantiles);

/// Minimum-over-lambda RMSE for every requested cell. MDUMIQE and parallel
/// DUMIQE rows ignore gamma and are emitted once per stream cell.
std::vector<TableCell> reproduce_tables(const TableRequest& request);

void write_table_csv(std::ostream& out, std::span<const TableCell> cells);
void write_table_text(std::ostream& out, std::span<const TableCell> cells);
void write_curve_csv(std::ostream& out, const RmseReport& report);

}  // namespace quantrack
