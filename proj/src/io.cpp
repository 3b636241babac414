#include "quantrack/io.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>

#include "json.hpp"

#include "quantrack/error.hpp"
#include "quantrack/format.hpp"

namespace quantrack {
namespace {

constexpr std::string_view kAxisNames[kAxes] = {"x", "y", "z"};

bool is_comment(std::string_view line) { return !line.empty() && line.front() == '#'; }

void read_metadata_line(std::string_view line, Metadata& metadata) {
  line = trim(line.substr(1));
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) return;
  metadata.emplace_back(std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))));
}

bool looks_numeric(std::string_view field) {
  field = trim(field);
  if (field.empty()) return false;
  const char c = field.front();
  return (c >= '0' && c <= '9') || c == '-' || c == '+' || c == '.';
}

std::size_t axis_index(std::string_view name, std::size_t line) {
  for (std::size_t w = 0; w < kAxes; ++w) {
    if (name == kAxisNames[w]) return w;
  }
  throw FormatError("unknown dimension '" + std::string(name) + "'", line);
}

}  // namespace

void write_metadata(std::ostream& out, const Metadata& metadata) {
  for (const auto& [key, value] : metadata) out << "# " << key << '=' << value << '\n';
}

std::string quantile_label(double prob) { return "q" + format_double(prob); }

void write_stream_csv(std::ostream& out, const StreamConfig& config, std::int64_t count,
                      std::span<const double> truth_probs) {
  config.validate();
  if (count < 0) throw ConstraintError("sample count must be non-negative");
  for (double p : truth_probs) {
    if (!(p > 0.0 && p < 1.0)) throw ConstraintError("quantile probabilities must lie in (0, 1)");
  }
  write_metadata(out, {{"family", std::string(to_string(config.family))},
                       {"variant", std::string(to_string(config.variant))},
                       {"a", format_double(config.a)},
                       {"b", format_double(config.b)},
                       {"T", std::to_string(config.period)},
                       {"seed", std::to_string(config.seed)},
                       {"count", std::to_string(count)}});
  out << "n,x";
  for (double p : truth_probs) out << ',' << quantile_label(p);
  out << '\n';

  StreamGenerator gen(config);
  const TrueQuantileOracle oracle(config);
  for (std::int64_t n = 1; n <= count; ++n) {
    out << n << ',' << format_double(gen.next());
    for (double p : truth_probs) out << ',' << format_double(oracle.quantile(n, p));
    out << '\n';
  }
}

StreamTable read_stream_csv(std::istream& in) {
  StreamTable table;
  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::optional<std::size_t> n_col;
  std::size_t x_col = 0;
  std::size_t columns = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (is_comment(line)) {
      if (!header_seen) read_metadata_line(line, table.metadata);
      continue;
    }
    const auto fields = split(line, ',');
    if (!header_seen) {
      header_seen = true;
      columns = fields.size();
      if (!looks_numeric(fields.front())) {
        std::optional<std::size_t> x;
        for (std::size_t i = 0; i < fields.size(); ++i) {
          const auto name = trim(fields[i]);
          if (name == "x") x = i;
          if (name == "n") n_col = i;
        }
        if (!x) {
          if (fields.size() != 1) throw FormatError("header has no 'x' column", line_no);
          x = 0;
        }
        x_col = *x;
        continue;
      }
      if (columns != 1) {
        throw FormatError("headerless input must have exactly one column", line_no);
      }
    }
    if (fields.size() != columns) {
      throw FormatError("expected " + std::to_string(columns) + " fields, found " +
                            std::to_string(fields.size()),
                        line_no);
    }
    table.values.push_back(parse_double(fields[x_col], "value", line_no));
    table.index.push_back(n_col ? parse_int(fields[*n_col], "index", line_no)
                                : static_cast<std::int64_t>(table.values.size()));
  }
  return table;
}

std::string_view to_string(TimeUnit unit) noexcept {
  switch (unit) {
    case TimeUnit::Nanoseconds:
      return "ns";
    case TimeUnit::Milliseconds:
      return "ms";
    case TimeUnit::Seconds:
      return "s";
  }
  return "unknown";
}

TimeUnit parse_time_unit(std::string_view name) {
  if (name == "ns") return TimeUnit::Nanoseconds;
  if (name == "ms") return TimeUnit::Milliseconds;
  if (name == "s") return TimeUnit::Seconds;
  throw ConstraintError("unknown time unit '" + std::string(name) + "' (expected ns, ms or s)");
}

double seconds_per_unit(TimeUnit unit) noexcept {
  switch (unit) {
    case TimeUnit::Nanoseconds:
      return 1e-9;
    case TimeUnit::Milliseconds:
      return 1e-3;
    case TimeUnit::Seconds:
      return 1.0;
  }
  return 1.0;
}

std::vector<AxisSample> UserSeries::samples() const {
  std::vector<AxisSample> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.accel);
  return out;
}

std::vector<double> UserSeries::times(TimeUnit unit) const {
  const double scale = seconds_per_unit(unit);
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(static_cast<double>(r.timestamp) * scale);
  return out;
}

std::vector<double> UserSeries::changes(TimeUnit unit) const {
  const double scale = seconds_per_unit(unit);
  std::vector<double> out;
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].activity != records[i - 1].activity) {
      out.push_back(static_cast<double>(records[i].timestamp) * scale);
    }
  }
  return out;
}

AccelerometerData parse_accelerometer_csv(std::istream& in, ErrorPolicy policy) {
  AccelerometerData data;
  std::map<std::string, std::size_t> slots;
  std::string raw;
  std::size_t line_no = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    while (!line.empty() && line.back() == ';') line = trim(line.substr(0, line.size() - 1));
    if (line.empty()) continue;

    AccelerometerRecord rec;
    try {
      const auto fields = split(line, ',');
      if (fields.size() != 6) {
        throw FormatError("expected 6 fields (user,activity,timestamp,x,y,z), found " +
                              std::to_string(fields.size()),
                          line_no);
      }
      rec.user = std::string(trim(fields[0]));
      rec.activity = std::string(trim(fields[1]));
      if (rec.user.empty()) throw FormatError("empty user field", line_no);
      if (rec.activity.empty()) throw FormatError("empty activity field", line_no);
      rec.timestamp = parse_int(fields[2], "timestamp", line_no);
      for (std::size_t w = 0; w < kAxes; ++w) {
        rec.accel[w] = parse_double(fields[3 + w], "acceleration", line_no);
      }
      rec.line = line_no;
    } catch (const FormatError& e) {
      if (policy == ErrorPolicy::Fail) throw;
      data.skipped.push_back({line_no, e.what()});
      continue;
    }

    auto [it, inserted] = slots.try_emplace(rec.user, data.users.size());
    if (inserted) data.users.push_back(UserSeries{rec.user, {}});
    data.users[it->second].records.push_back(std::move(rec));
  }

  for (auto& series : data.users) {
    std::stable_sort(series.records.begin(), series.records.end(),
                     [](const AccelerometerRecord& a, const AccelerometerRecord& b) {
                       return a.timestamp < b.timestamp;
                     });
  }
  return data;
}

void write_event_json(std::ostream& out, const DetectionEvent& event) {
  const Detection& d = event.detection;
  nlohmann::ordered_json j;
  j["user"] = event.user;
  j["index"] = d.index;
  j["time"] = d.time;
  j["dimension"] = kAxisNames[d.dimension];
  j["statistic"] = d.statistic;
  j["score"] = d.score;
  out << j.dump() << '\n';
}

std::vector<DetectionEvent> read_events_json(std::istream& in) {
  std::vector<DetectionEvent> events;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (trim(raw).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(raw);
      if (j.is_object() && j.contains("config")) continue;
      DetectionEvent e;
      e.user = j.value("user", std::string());
      e.detection.index = j.value("index", std::int64_t{0});
      e.detection.time = j.at("time").get<double>();
      e.detection.dimension = axis_index(j.value("dimension", std::string("x")), line_no);
      e.detection.statistic = j.value("statistic", 0.0);
      e.detection.score = j.value("score", 0.0);
      events.push_back(std::move(e));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("invalid event: ") + e.what(), line_no);
    }
  }
  return events;
}

void write_truth_csv(std::ostream& out, std::span<const UserSeries> users, TimeUnit unit) {
  out << "user,time\n";
  for (const auto& series : users) {
    for (double t : series.changes(unit)) out << series.user << ',' << format_double(t) << '\n';
  }
}

std::vector<TruthEntry> read_truth_csv(std::istream& in) {
  std::vector<TruthEntry> truth;
  std::string raw;
  std::size_t line_no = 0;
  bool header_checked = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || is_comment(line)) continue;
    const auto fields = split(line, ',');
    if (!header_checked) {
      header_checked = true;
      if (!looks_numeric(fields.back())) continue;
    }
    if (fields.size() == 1) {
      truth.push_back({"", parse_double(fields[0], "time", line_no)});
    } else if (fields.size() == 2) {
      truth.push_back({std::string(trim(fields[0])), parse_double(fields[1], "time", line_no)});
    } else {
      throw FormatError("expected 'user,time' or 'time'", line_no);
    }
  }
  return truth;
}

void write_score_json(std::ostream& out, const ScoreReport& report) {
  nlohmann::ordered_json j;
  j["precision"] = report.precision;
  j["recall"] = report.recall;
  j["f1"] = report.f1;
  j["mean_delay"] = report.mean_delay;
  j["detections"] = report.detections;
  j["correct"] = report.correct;
  j["true_changes"] = report.true_changes;
  out << j.dump() << '\n';
}

void write_score_csv(std::ostream& out, const ScoreReport& report) {
  out << "precision,recall,f1,mean_delay,detections,correct,true_changes\n"
      << format_double(report.precision) << ',' << format_double(report.recall) << ','
      << format_double(report.f1) << ',' << format_double(report.mean_delay) << ','
      << report.detections << ',' << report.correct << ',' << report.true_changes << '\n';
}

}  // namespace quantrack
