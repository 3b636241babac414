#include "quantrack/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

#include "quantrack/error.hpp"
#include "quantrack/format.hpp"

namespace quantrack {

void ExperimentSpec::validate() const {
  stream.validate();
  if (samples < 1) throw ConstraintError("sample count N must be at least 1");
  if (warmup < 0 || warmup >= samples) {
    throw ConstraintError("warmup must be non-negative and smaller than N");
  }
  if (init_samples < static_cast<std::int64_t>(grid.size()) + 1 || init_samples > samples) {
    throw ConstraintError("init_samples must be in [K + 1, N]");
  }
  if (lambdas.empty()) throw ConstraintError("lambda grid must not be empty");
  for (double l : lambdas) {
    if (!(l > 0.0 && l < 1.0)) throw ConstraintError("lambda values must lie in (0, 1)");
  }
}

double default_offset(const StreamConfig& stream) noexcept {
  return stream.family == Family::Normal ? 10.0 : 0.0;
}

std::vector<double> log_lambda_grid(double lo, double hi, int per_decade) {
  if (!(lo > 0.0 && hi > lo) || per_decade < 1) {
    throw ConstraintError("lambda grid requires 0 < lo < hi and per_decade >= 1");
  }
  std::vector<double> grid;
  const double start = std::log10(lo);
  for (int i = 0;; ++i) {
    const double v = std::pow(10.0, start + static_cast<double>(i) / per_decade);
    if (v > hi * (1.0 - 1e-12)) break;
    grid.push_back(v);
  }
  grid.push_back(hi);
  return grid;
}

RmseAccumulator::RmseAccumulator(std::size_t quantiles) : sums_(quantiles, 0.0) {}

void RmseAccumulator::add(std::span<const double> truth, std::span<const double> estimates) {
  for (std::size_t k = 0; k < sums_.size(); ++k) {
    const double e = truth[k] - estimates[k];
    sums_[k] += e * e;
  }
  ++count_;
}

std::vector<double> RmseAccumulator::per_quantile() const {
  std::vector<double> out(sums_.size(), 0.0);
  if (count_ == 0) return out;
  for (std::size_t k = 0; k < sums_.size(); ++k) {
    out[k] = std::sqrt(sums_[k] / static_cast<double>(count_));
  }
  return out;
}

double RmseAccumulator::value() const {
  const auto per = per_quantile();
  if (per.empty()) return 0.0;
  double total = 0.0;
  for (double v : per) total += v;
  return total / static_cast<double>(per.size());
}

std::int64_t RmseReport::violations() const noexcept {
  std::int64_t total = 0;
  for (const auto& e : entries) total += e.violations;
  return total;
}

PreparedStream::PreparedStream(const StreamConfig& stream, const QuantileGrid& grid,
                               std::int64_t samples)
    : quantiles_(grid.size()),
      period_(stream.period),
      static_(stream.variant == Variant::Static) {
  StreamGenerator gen(stream);
  samples_.resize(static_cast<std::size_t>(samples));
  for (auto& x : samples_) x = gen.next();

  const TrueQuantileOracle oracle(stream);
  const std::int64_t phases = static_ ? 1 : period_;
  truth_.resize(static_cast<std::size_t>(phases) * quantiles_);
  for (std::int64_t phase = 0; phase < phases; ++phase) {
    // Phase 0 corresponds to n = T (n mod T == 0).
    const std::int64_t n = phase == 0 ? period_ : phase;
    for (std::size_t k = 0; k < quantiles_; ++k) {
      truth_[static_cast<std::size_t>(phase) * quantiles_ + k] = oracle.quantile(n, grid.prob(k));
    }
  }
}

std::span<const double> PreparedStream::truth(std::int64_t n) const {
  const std::int64_t phase = static_ ? 0 : n % period_;
  return std::span<const double>(truth_).subspan(static_cast<std::size_t>(phase) * quantiles_,
                                                 quantiles_);
}

RmseEntry run_rmse(const ExperimentSpec& spec, const PreparedStream& stream, double lambda) {
  TrackerParams params;
  params.lambda = lambda;
  params.gamma = spec.gamma;
  params.rho_ratio = spec.rho_ratio;
  params.offset = spec.offset.value_or(default_offset(spec.stream));

  const auto samples = stream.samples();
  auto tracker = warmup_init(samples.first(static_cast<std::size_t>(spec.init_samples)),
                             spec.grid, spec.tracker, params);

  RmseAccumulator acc(spec.grid.size());
  RmseEntry entry;
  entry.lambda = lambda;
  for (std::int64_t n = 1; n <= spec.samples; ++n) {
    const auto est = tracker->step(samples[static_cast<std::size_t>(n - 1)]);
    if (!strictly_increasing(est)) ++entry.violations;
    if (n > spec.warmup) acc.add(stream.truth(n), est);
  }
  entry.rmse = acc.value();
  entry.per_quantile = acc.per_quantile();
  return entry;
}

RmseEntry run_rmse(const ExperimentSpec& spec, double lambda) {
  spec.validate();
  const PreparedStream stream(spec.stream, spec.grid, spec.samples);
  return run_rmse(spec, stream, lambda);
}

namespace {

std::vector<RmseEntry> run_lambdas(const ExperimentSpec& spec, const PreparedStream& stream,
                                   unsigned threads) {
  std::vector<RmseEntry> entries(spec.lambdas.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(entries.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      entries[i] = run_rmse(spec, stream, spec.lambdas[i]);
    }
    return entries;
  }
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < entries.size(); i = next++) {
          entries[i] = run_rmse(spec, stream, spec.lambdas[i]);
        }
      });
    }
  }
  return entries;
}

RmseReport make_report(std::vector<RmseEntry> entries) {
  RmseReport report;
  report.entries = std::move(entries);
  for (std::size_t i = 1; i < report.entries.size(); ++i) {
    if (report.entries[i].rmse < report.entries[report.best].rmse) report.best = i;
  }
  return report;
}

}  // namespace

RmseReport sweep(const ExperimentSpec& spec) {
  spec.validate();
  const PreparedStream stream(spec.stream, spec.grid, spec.samples);
  return make_report(run_lambdas(spec, stream, spec.threads));
}

QuantileGrid table_grid(std::size_t quantiles) {
  if (quantiles == 3) return QuantileGrid({0.2, 0.5, 0.8});
  return QuantileGrid::evenly_spaced(quantiles);
}

std::vector<TableCell> reproduce_tables(const TableRequest& request) {
  std::vector<TableCell> cells;
  for (Family family : request.families) {
    for (Variant variant : request.variants) {
      for (std::size_t K : request.quantile_counts) {
        for (std::int64_t T : request.periods) {
          ExperimentSpec spec;
          spec.stream.family = family;
          spec.stream.variant = variant;
          spec.stream.period = T;
          spec.stream.seed = request.seed;
          spec.grid = table_grid(K);
          spec.lambdas = request.lambdas;
          spec.samples = request.samples;
          spec.warmup = request.warmup;
          spec.offset = request.offset;
          spec.threads = request.threads;
          spec.validate();
          const PreparedStream stream(spec.stream, spec.grid, spec.samples);
          for (TrackerKind tracker : request.trackers) {
            const bool uses_gamma =
                tracker == TrackerKind::ShiftQ || tracker == TrackerKind::CondQ;
            const std::vector<double> gammas =
                uses_gamma ? request.gammas : std::vector<double>{request.gammas.front()};
            for (double gamma : gammas) {
              spec.tracker = tracker;
              spec.gamma = gamma;
              const RmseReport report = make_report(run_lambdas(spec, stream, spec.threads));
              cells.push_back(TableCell{family, variant, K, T, tracker,
                                        uses_gamma ? gamma : std::nan(""),
                                        report.optimal().lambda, report.optimal().rmse,
                                        report.violations()});
            }
          }
        }
      }
    }
  }
  return cells;
}

void write_table_csv(std::ostream& out, std::span<const TableCell> cells) {
  out << "family,variant,K,T,tracker,gamma,lambda_opt,rmse\n";
  for (const auto& c : cells) {
    out << to_string(c.family) << ',' << to_string(c.variant) << ',' << c.quantiles << ','
        << c.period << ',' << to_string(c.tracker) << ','
        << (std::isnan(c.gamma) ? std::string() : format_double(c.gamma)) << ','
        << format_double(c.lambda_opt) << ',' << format_double(c.rmse) << '\n';
  }
}

void write_table_text(std::ostream& out, std::span<const TableCell> cells) {
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %-9s %3s %6s %-16s %8s %10s %8s %6s\n", "family",
                "variant", "K", "T", "tracker", "gamma", "lambda*", "rmse", "viol");
  out << line;
  for (const auto& c : cells) {
    const std::string gamma = std::isnan(c.gamma) ? "-" : format_double(c.gamma);
    std::snprintf(line, sizeof line, "%-10s %-9s %3zu %6lld %-16s %8s %10.5f %8.3f %6lld\n",
                  std::string(to_string(c.family)).c_str(),
                  std::string(to_string(c.variant)).c_str(), c.quantiles,
                  static_cast<long long>(c.period), std::string(to_string(c.tracker)).c_str(),
                  gamma.c_str(), c.lambda_opt, c.rmse, static_cast<long long>(c.violations));
    out << line;
  }
}

void write_curve_csv(std::ostream& out, const RmseReport& report) {
  out << "lambda,rmse\n";
  for (const auto& e : report.entries) {
    out << format_double(e.lambda) << ',' << format_double(e.rmse) << '\n';
  }
}

}  // namespace quantrack
