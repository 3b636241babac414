#include "quantrack/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "quantrack/bench.hpp"
#include "quantrack/detect.hpp"
#include "quantrack/error.hpp"
#include "quantrack/format.hpp"
#include "quantrack/io.hpp"
#include "quantrack/joint.hpp"
#include "quantrack/streams.hpp"

namespace quantrack {
namespace {

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw IoError("cannot open '" + path + "' for writing");
      stream_ = &file_;
    }
  }

  std::ostream& get() { return *stream_; }

  void finish() {
    stream_->flush();
    if (!*stream_) throw IoError("write failed");
  }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

class Input {
 public:
  Input(const std::string& path, std::istream& fallback) : stream_(&fallback) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw IoError("cannot open '" + path + "'");
      stream_ = &file_;
    }
  }

  std::istream& get() { return *stream_; }

 private:
  std::ifstream file_;
  std::istream* stream_;
};

void write_config_json(std::ostream& out, const Metadata& metadata) {
  nlohmann::ordered_json config;
  for (const auto& [key, value] : metadata) config[key] = value;
  nlohmann::ordered_json line;
  line["config"] = config;
  out << line.dump() << '\n';
}

std::string join(const std::vector<double>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ',';
    s += format_double(values[i]);
  }
  return s;
}

const std::vector<std::string> kTrackers{"shiftq", "condq", "mdumiqe", "parallel-dumiqe"};

// ----------------------------------------------------------------------------
// Option groups shared by several subcommands.

struct StreamOptions {
  std::string family = "normal";
  std::string variant = "periodic";
  double a = 2.0;
  double b = 6.0;
  std::int64_t period = 100;
  std::uint64_t seed = 1;

  void add(CLI::App* cmd) {
    cmd->add_option("--family", family, "Stream family")
        ->check(CLI::IsMember({"normal", "chisquare", "chi2"}))
        ->capture_default_str();
    cmd->add_option("--variant", variant, "Stream variant")
        ->check(CLI::IsMember({"periodic", "switch", "static"}))
        ->capture_default_str();
    cmd->add_option("--a", a, "Amplitude")->capture_default_str();
    cmd->add_option("--b", b, "Chi-square degrees-of-freedom offset")->capture_default_str();
    cmd->add_option("--T", period, "Period in samples")->capture_default_str();
    cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
  }

  StreamConfig config() const {
    StreamConfig c;
    c.family = parse_family(family);
    c.variant = parse_variant(variant);
    c.a = a;
    c.b = b;
    c.period = period;
    c.seed = seed;
    c.validate();
    return c;
  }

  void echo(Metadata& m) const {
    m.emplace_back("family", family);
    m.emplace_back("variant", variant);
    m.emplace_back("a", format_double(a));
    m.emplace_back("b", format_double(b));
    m.emplace_back("T", std::to_string(period));
    m.emplace_back("seed", std::to_string(seed));
  }
};

// ----------------------------------------------------------------------------

struct GenCommand {
  StreamOptions stream;
  std::int64_t count = 1000;
  std::vector<double> truth;
  std::string out = "-";

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("gen", "Write a synthetic stream as CSV");
    stream.add(cmd);
    cmd->add_option("--n", count, "Number of samples")->capture_default_str();
    cmd->add_option("--truth", truth, "Also write true quantiles for these probabilities")
        ->delimiter(',');
    cmd->add_option("--out,-o", out, "Output path ('-' for standard output)");
  }

  void run(std::ostream& stdout_) const {
    Output o(out, stdout_);
    write_stream_csv(o.get(), stream.config(), count, truth);
    o.finish();
  }
};

struct TrackCommand {
  std::string input = "-";
  std::string out = "-";
  std::string tracker = "condq";
  std::vector<double> probs{0.2, 0.5, 0.8};
  TrackerParams params;
  std::int64_t init = 100;
  std::string format = "csv";

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("track", "Track quantiles of a stream CSV");
    cmd->add_option("--input,-i", input, "Stream CSV ('-' for standard input)");
    cmd->add_option("--out,-o", out, "Output path ('-' for standard output)");
    cmd->add_option("--tracker", tracker)->check(CLI::IsMember(kTrackers))->capture_default_str();
    cmd->add_option("--probs", probs, "Quantile probabilities")->delimiter(',');
    cmd->add_option("--lambda", params.lambda)->capture_default_str();
    cmd->add_option("--gamma", params.gamma)->capture_default_str();
    cmd->add_option("--rho-ratio", params.rho_ratio)->capture_default_str();
    cmd->add_option("--offset", params.offset, "Offset added before DUMIQE updates")
        ->capture_default_str();
    cmd->add_option("--init", init, "Samples used to initialise the tracker")
        ->capture_default_str();
    cmd->add_option("--format", format)
        ->check(CLI::IsMember({"csv", "json-lines"}))
        ->capture_default_str();
  }

  void run(std::istream& stdin_, std::ostream& stdout_) const {
    const QuantileGrid grid(probs);
    const TrackerKind kind = parse_tracker_kind(tracker);
    Input in(input, stdin_);
    const StreamTable table = read_stream_csv(in.get());
    if (init < 1) throw ConstraintError("--init must be positive");
    const auto warm = static_cast<std::size_t>(init);
    if (table.values.size() < warm) {
      throw ConstraintError("stream has " + std::to_string(table.values.size()) +
                            " samples, fewer than --init " + std::to_string(init));
    }
    auto joint = warmup_init(std::span<const double>(table.values).first(warm), grid, kind, params);

    Metadata meta{{"tracker", tracker},
                  {"probs", join(probs)},
                  {"lambda", format_double(params.lambda)},
                  {"gamma", format_double(params.gamma)},
                  {"rho_ratio", format_double(params.rho_ratio)},
                  {"offset", format_double(params.offset)},
                  {"init", std::to_string(init)}};
    for (const auto& kv : table.metadata) meta.emplace_back("input." + kv.first, kv.second);

    Output o(out, stdout_);
    std::ostream& os = o.get();
    const bool csv = format == "csv";
    if (csv) {
      write_metadata(os, meta);
      os << 'n';
      for (double p : probs) os << ',' << quantile_label(p);
      os << '\n';
    } else {
      write_config_json(os, meta);
    }
    for (std::size_t i = 0; i < table.values.size(); ++i) {
      const auto est = joint->step(table.values[i]);
      if (csv) {
        os << table.index[i];
        for (double e : est) os << ',' << format_double(e);
        os << '\n';
      } else {
        nlohmann::ordered_json j;
        j["n"] = table.index[i];
        j["estimates"] = std::vector<double>(est.begin(), est.end());
        os << j.dump() << '\n';
      }
    }
    o.finish();
  }
};

struct LambdaOptions {
  std::vector<double> explicit_values;
  double lo = 1e-3;
  double hi = 0.5;
  int per_decade = 20;

  void add(CLI::App* cmd) {
    cmd->add_option("--lambda", explicit_values, "Explicit step sizes (overrides the grid)")
        ->delimiter(',');
    cmd->add_option("--lambda-lo", lo)->capture_default_str();
    cmd->add_option("--lambda-hi", hi)->capture_default_str();
    cmd->add_option("--per-decade", per_decade)->capture_default_str();
  }

  std::vector<double> values() const {
    return explicit_values.empty() ? log_lambda_grid(lo, hi, per_decade) : explicit_values;
  }
};

struct BenchCommand {
  StreamOptions stream;
  LambdaOptions lambdas;
  std::string tracker = "condq";
  std::vector<double> probs{0.2, 0.5, 0.8};
  double gamma = 0.01;
  double rho_ratio = 0.01;
  std::optional<double> offset;
  std::int64_t samples = 1'000'000;
  std::int64_t warmup = 10'000;
  std::int64_t init = 100;
  unsigned threads = 0;
  std::string format = "csv";
  std::string out = "-";

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("bench", "RMSE of one tracker over a step-size grid");
    stream.add(cmd);
    lambdas.add(cmd);
    cmd->add_option("--tracker", tracker)->check(CLI::IsMember(kTrackers))->capture_default_str();
    cmd->add_option("--probs", probs)->delimiter(',');
    cmd->add_option("--gamma", gamma)->capture_default_str();
    cmd->add_option("--rho-ratio", rho_ratio)->capture_default_str();
    cmd->add_option("--offset", offset, "DUMIQE offset (default 10 normal, 0 chi-square)");
    cmd->add_option("--samples", samples)->capture_default_str();
    cmd->add_option("--warmup", warmup, "Initial steps excluded from scoring")
        ->capture_default_str();
    cmd->add_option("--init", init)->capture_default_str();
    cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
    cmd->add_option("--format", format)
        ->check(CLI::IsMember({"csv", "json-lines", "table"}))
        ->capture_default_str();
    cmd->add_option("--out,-o", out);
  }

  void run(std::ostream& stdout_) const {
    ExperimentSpec spec;
    spec.stream = stream.config();
    spec.tracker = parse_tracker_kind(tracker);
    spec.grid = QuantileGrid(probs);
    spec.lambdas = lambdas.values();
    spec.gamma = gamma;
    spec.rho_ratio = rho_ratio;
    spec.offset = offset;
    spec.samples = samples;
    spec.warmup = warmup;
    spec.init_samples = init;
    spec.threads = threads;
    const RmseReport report = sweep(spec);

    Metadata meta;
    stream.echo(meta);
    meta.emplace_back("tracker", tracker);
    meta.emplace_back("probs", join(probs));
    meta.emplace_back("gamma", format_double(gamma));
    meta.emplace_back("rho_ratio", format_double(rho_ratio));
    meta.emplace_back("offset", format_double(spec.offset.value_or(default_offset(spec.stream))));
    meta.emplace_back("samples", std::to_string(samples));
    meta.emplace_back("warmup", std::to_string(warmup));
    meta.emplace_back("lambda_opt", format_double(report.optimal().lambda));
    meta.emplace_back("rmse_opt", format_double(report.optimal().rmse));
    meta.emplace_back("violations", std::to_string(report.violations()));

    Output o(out, stdout_);
    std::ostream& os = o.get();
    if (format == "csv") {
      write_metadata(os, meta);
      write_curve_csv(os, report);
    } else if (format == "json-lines") {
      write_config_json(os, meta);
      for (const RmseEntry& e : report.entries) {
        nlohmann::ordered_json j;
        j["lambda"] = e.lambda;
        j["rmse"] = e.rmse;
        j["per_quantile"] = e.per_quantile;
        j["violations"] = e.violations;
        os << j.dump() << '\n';
      }
    } else {
      char row[96];
      std::snprintf(row, sizeof row, "%12s %12s %10s\n", "lambda", "rmse", "violations");
      os << row;
      for (std::size_t i = 0; i < report.entries.size(); ++i) {
        const RmseEntry& e = report.entries[i];
        std::snprintf(row, sizeof row, "%12.6g %12.6f %10lld%s\n", e.lambda, e.rmse,
                      static_cast<long long>(e.violations), i == report.best ? "  *" : "");
        os << row;
      }
    }
    o.finish();
  }
};

struct SweepCommand {
  std::vector<std::string> families{"normal", "chisquare"};
  std::vector<std::string> variants{"periodic", "switch"};
  std::vector<std::size_t> quantiles{3, 19};
  std::vector<std::int64_t> periods{100, 1000};
  std::vector<std::string> trackers{"shiftq", "condq"};
  std::vector<double> gammas{0.1, 0.01, 0.001, 0.0001};
  LambdaOptions lambdas;
  std::int64_t samples = 1'000'000;
  std::int64_t warmup = 10'000;
  std::uint64_t seed = 1;
  std::optional<double> offset;
  unsigned threads = 0;
  std::string format = "csv";
  std::string out = "-";

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("sweep", "Optimal-step RMSE tables across stream cells");
    cmd->add_option("--families", families)
        ->delimiter(',')
        ->check(CLI::IsMember({"normal", "chisquare", "chi2"}));
    cmd->add_option("--variants", variants)
        ->delimiter(',')
        ->check(CLI::IsMember({"periodic", "switch", "static"}));
    cmd->add_option("--K", quantiles, "Quantile counts")->delimiter(',');
    cmd->add_option("--T", periods, "Periods")->delimiter(',');
    cmd->add_option("--trackers", trackers)->delimiter(',')->check(CLI::IsMember(kTrackers));
    cmd->add_option("--gammas", gammas)->delimiter(',');
    lambdas.add(cmd);
    cmd->add_option("--samples", samples)->capture_default_str();
    cmd->add_option("--warmup", warmup)->capture_default_str();
    cmd->add_option("--seed", seed)->capture_default_str();
    cmd->add_option("--offset", offset);
    cmd->add_option("--threads", threads);
    cmd->add_option("--format", format)->check(CLI::IsMember({"csv", "table"}))->capture_default_str();
    cmd->add_option("--out,-o", out);
  }

  void run(std::ostream& stdout_) const {
    TableRequest req;
    req.families.clear();
    for (const auto& f : families) req.families.push_back(parse_family(f));
    req.variants.clear();
    for (const auto& v : variants) req.variants.push_back(parse_variant(v));
    req.quantile_counts = quantiles;
    req.periods = periods;
    req.trackers.clear();
    for (const auto& t : trackers) req.trackers.push_back(parse_tracker_kind(t));
    req.gammas = gammas;
    req.lambdas = lambdas.values();
    req.samples = samples;
    req.warmup = warmup;
    req.seed = seed;
    req.offset = offset;
    req.threads = threads;
    const auto cells = reproduce_tables(req);

    Output o(out, stdout_);
    if (format == "csv") {
      write_metadata(o.get(), {{"samples", std::to_string(samples)},
                               {"warmup", std::to_string(warmup)},
                               {"seed", std::to_string(seed)},
                               {"lambda_points", std::to_string(req.lambdas.size())}});
      write_table_csv(o.get(), cells);
    } else {
      write_table_text(o.get(), cells);
    }
    o.finish();
  }
};

struct DetectCommand {
  std::string input = "-";
  std::string out = "-";
  std::string method = "ed-condq";
  DetectorConfig config;
  std::string time_unit = "ns";
  std::string on_error = "fail";
  std::string truth_out;
  std::string score_out;

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("detect", "Run a change detector over accelerometer CSV");
    cmd->add_option("--input,-i", input, "Rows user,activity,timestamp,x,y,z");
    cmd->add_option("--out,-o", out, "Detection events as JSON lines");
    cmd->add_option("--method", method)
        ->check(CLI::IsMember({"ed-shiftq", "ed-condq", "md"}))
        ->capture_default_str();
    cmd->add_option("--lambda", config.lambda)->capture_default_str();
    cmd->add_option("--gamma", config.gamma)->capture_default_str();
    cmd->add_option("--rho-ratio", config.rho_ratio)->capture_default_str();
    cmd->add_option("--offset", config.offset)->capture_default_str();
    cmd->add_option("--nu", config.nu, "EWMA rate of the MD moments")->capture_default_str();
    cmd->add_option("--xi", config.xi, "EWMA rate of the distance moments")
        ->capture_default_str();
    cmd->add_option("--horizon", config.horizon, "Look-back horizon in seconds")
        ->capture_default_str();
    cmd->add_option("--eta", config.eta, "Threshold in standard deviations")
        ->capture_default_str();
    cmd->add_option("--rate", config.sample_rate, "Samples per second")->capture_default_str();
    cmd->add_option("--probs", config.probs)->delimiter(',');
    cmd->add_option("--init-seconds", config.init_seconds)->capture_default_str();
    cmd->add_option("--arm-seconds", config.arm_seconds)->capture_default_str();
    cmd->add_option("--time-unit", time_unit)
        ->check(CLI::IsMember({"ns", "ms", "s"}))
        ->capture_default_str();
    cmd->add_option("--on-error", on_error, "Malformed rows: fail or skip")
        ->check(CLI::IsMember({"fail", "skip"}))
        ->capture_default_str();
    cmd->add_option("--truth-out", truth_out, "Write label-transition changes as CSV");
    cmd->add_option("--score-out", score_out, "Score detections against label transitions");
  }

  void run(std::istream& stdin_, std::ostream& stdout_, std::ostream& err) {
    config.method = parse_detector_method(method);
    config.validate();
    const TimeUnit unit = parse_time_unit(time_unit);
    Input in(input, stdin_);
    const AccelerometerData data =
        parse_accelerometer_csv(in.get(), on_error == "skip" ? ErrorPolicy::Skip : ErrorPolicy::Fail);
    if (!data.skipped.empty()) {
      err << "warning: skipped " << data.skipped.size() << " malformed rows (first: "
          << data.skipped.front().message << ")\n";
    }

    Metadata meta{{"method", method},
                  {"lambda", format_double(config.lambda)},
                  {"gamma", format_double(config.gamma)},
                  {"rho_ratio", format_double(config.rho_ratio)},
                  {"offset", format_double(config.offset)},
                  {"nu", format_double(config.nu)},
                  {"xi", format_double(config.xi)},
                  {"horizon", format_double(config.horizon)},
                  {"eta", format_double(config.eta)},
                  {"rate", format_double(config.sample_rate)},
                  {"probs", join(config.probs)},
                  {"time_unit", time_unit}};

    Output o(out, stdout_);
    write_config_json(o.get(), meta);
    ScoreTally tally;
    for (const UserSeries& series : data.users) {
      const auto samples = series.samples();
      const auto times = series.times(unit);
      const auto detections = run_detector(config, samples, times);
      std::vector<double> detected;
      for (const Detection& d : detections) {
        write_event_json(o.get(), {series.user, d});
        detected.push_back(d.time);
      }
      tally.add(detected, series.changes(unit));
    }
    o.finish();

    if (!truth_out.empty()) {
      Output t(truth_out, stdout_);
      write_truth_csv(t.get(), data.users, unit);
      t.finish();
    }
    if (!score_out.empty()) {
      Output s(score_out, stdout_);
      write_score_json(s.get(), tally.report());
      s.finish();
    }
  }
};

struct ScoreCommand {
  std::string events;
  std::string truth;
  double tolerance = std::numeric_limits<double>::infinity();
  std::string format = "json";
  std::string out = "-";

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("score", "Precision, recall, F1 and delay of detections");
    cmd->add_option("--events", events, "Detection events (JSON lines)")->required();
    cmd->add_option("--truth", truth, "True change times (CSV user,time)")->required();
    cmd->add_option("--tolerance", tolerance, "Maximum credited delay in seconds");
    cmd->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    cmd->add_option("--out,-o", out);
  }

  void run(std::istream& stdin_, std::ostream& stdout_) const {
    if (events == "-" && truth == "-") {
      throw ConstraintError("--events and --truth cannot both read standard input");
    }
    Input ev(events, stdin_);
    const auto detections = read_events_json(ev.get());
    Input tr(truth, stdin_);
    const auto changes = read_truth_csv(tr.get());

    const bool pooled = std::all_of(changes.begin(), changes.end(),
                                    [](const TruthEntry& t) { return t.user.empty(); });
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> groups;
    for (const auto& e : detections) {
      groups[pooled ? std::string() : e.user].first.push_back(e.detection.time);
    }
    for (const auto& t : changes) groups[t.user].second.push_back(t.time);

    ScoreTally tally;
    for (auto& [user, lists] : groups) {
      std::sort(lists.first.begin(), lists.first.end());
      std::sort(lists.second.begin(), lists.second.end());
      tally.add(lists.first, lists.second, tolerance);
    }
    Output o(out, stdout_);
    if (format == "json") {
      write_score_json(o.get(), tally.report());
    } else {
      write_score_csv(o.get(), tally.report());
    }
    o.finish();
  }
};

}  // namespace

int cli_main(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Streaming multi-quantile tracking, benchmarks and change detection",
               "quantrack"};
  app.set_config("--config", "", "TOML or INI file with option values");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  GenCommand gen;
  TrackCommand track;
  BenchCommand bench;
  SweepCommand sweep_cmd;
  DetectCommand detect;
  ScoreCommand score_cmd;
  gen.add(app);
  track.add(app);
  bench.add(app);
  sweep_cmd.add(app);
  detect.add(app);
  score_cmd.add(app);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto selected = app.get_subcommands();
    out << (selected.empty() ? app.help() : selected.front()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "gen") gen.run(out);
    if (name == "track") track.run(in, out);
    if (name == "bench") bench.run(out);
    if (name == "sweep") sweep_cmd.run(out);
    if (name == "detect") detect.run(in, out, err);
    if (name == "score") score_cmd.run(in, out);
    return kExitOk;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << '\n';
    return kExitFormat;
  } catch (const ConstraintError& e) {
    err << "constraint violation: " << e.what() << '\n';
    return kExitConstraint;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace quantrack
