#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "quantrack/detect.hpp"
#include "quantrack/streams.hpp"

namespace quantrack {

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// Writes `# key=value` lines.
void write_metadata(std::ostream& out, const Metadata& metadata);

/// Synthetic stream as CSV: metadata comments, then `n,x` plus one true
/// quantile column `q<p>` per requested probability.
void write_stream_csv(std::ostream& out, const StreamConfig& config, std::int64_t count,
                      std::span<const double> truth_probs = {});

/// A numeric column stream read back from CSV.
struct StreamTable {
  Metadata metadata;
  std::vector<std::int64_t> index;
  std::vector<double> values;
};

/// Reads the `x` column (and `n` when present) of a stream CSV. Lines starting
/// with '#' carry metadata; blank lines are ignored. A file without a header
/// must have exactly one numeric column.
StreamTable read_stream_csv(std::istream& in);

/// Column label used for quantile estimates, e.g. "q0.2".
std::string quantile_label(double prob);

enum class TimeUnit { Nanoseconds, Milliseconds, Seconds };

std::string_view to_string(TimeUnit unit) noexcept;
TimeUnit parse_time_unit(std::string_view name);
double seconds_per_unit(TimeUnit unit) noexcept;

enum class ErrorPolicy { Fail, Skip };

struct AccelerometerRecord {
  std::string user;
  std::string activity;
  std::int64_t timestamp = 0;
  AxisSample accel{};
  std::size_t line = 0;
};

/// All records of one user in time order, with a ground-truth change at
/// every activity label transition.
struct UserSeries {
  std::string user;
  std::vector<AccelerometerRecord> records;

  std::vector<AxisSample> samples() const;
  std::vector<double> times(TimeUnit unit) const;
  std::vector<double> changes(TimeUnit unit) const;
};

struct ParseIssue {
  std::size_t line = 0;
  std::string message;
};

struct AccelerometerData {
  /// Users in order of first appearance.
  std::vector<UserSeries> users;
  /// Rows dropped under ErrorPolicy::Skip.
  std::vector<ParseIssue> skipped;
};

/// Parses rows `user,activity,timestamp,x,y,z`. Trailing semicolons,
/// surrounding whitespace and blank lines are tolerated. With
/// ErrorPolicy::Fail the first malformed row throws FormatError naming its
/// line number.
AccelerometerData parse_accelerometer_csv(std::istream& in,
                                          ErrorPolicy policy = ErrorPolicy::Fail);

/// A detection tagged with the user whose series produced it.
struct DetectionEvent {
  std::string user;
  Detection detection;
};

void write_event_json(std::ostream& out, const DetectionEvent& event);
/// Reads JSON lines written by write_event_json; `{"config": ...}` lines are skipped.
std::vector<DetectionEvent> read_events_json(std::istream& in);

/// Ground truth as CSV `user,time`.
void write_truth_csv(std::ostream& out, std::span<const UserSeries> users, TimeUnit unit);

struct TruthEntry {
  std::string user;
  double time = 0.0;
};

std::vector<TruthEntry> read_truth_csv(std::istream& in);

void write_score_json(std::ostream& out, const ScoreReport& report);
void write_score_csv(std::ostream& out, const ScoreReport& report);

}  // namespace quantrack
