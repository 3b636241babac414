#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "doctest.h"
#include "quantrack/error.hpp"
#include "quantrack/format.hpp"
#include "quantrack/io.hpp"

using namespace quantrack;

TEST_CASE("number formatting round-trips") {
  for (double v : {0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300,
                   std::numeric_limits<double>::denorm_min()}) {
    CHECK(parse_double(format_double(v), "v") == v);
  }
  CHECK(format_double(0.25) == "0.25");
  CHECK(parse_double("  7.5\r", "v") == 7.5);
  CHECK_THROWS_AS(parse_double("7.5x", "v"), FormatError);
  CHECK_THROWS_AS(parse_double("", "v"), FormatError);
  CHECK(parse_int("+42", "n") == 42);
  CHECK_THROWS_AS(parse_int("4.2", "n"), FormatError);
  CHECK(parse_double_list("0.2, 0.5,0.8", "probs") == std::vector<double>{0.2, 0.5, 0.8});
  CHECK(trim(" \tab \r\n") == "ab");
}

TEST_CASE("accelerometer rows: labels, sorting and tolerance") {
  std::istringstream in(
      "7,Walking,300,0.1,0.2,0.3;\n"
      "7,Walking,100,1,2,3;\n"
      "\n"
      "7,Jogging,400,4,5,6\n"
      "  7 , Walking , 200 , 1.5 , 2.5 , 3.5 ;\r\n"
      "9,Sitting,50,0,0,9.8\n");
  const auto data = parse_accelerometer_csv(in);
  REQUIRE(data.users.size() == 2);
  const auto& u = data.users[0];
  CHECK(u.user == "7");
  REQUIRE(u.records.size() == 4);
  CHECK(u.records[0].timestamp == 100);
  CHECK(u.records[1].timestamp == 200);
  CHECK(u.records[1].activity == "Walking");
  CHECK(u.records[3].activity == "Jogging");
  CHECK(u.records[0].accel == AxisSample{1.0, 2.0, 3.0});
  // walk, walk, walk, jog: one change, at the first jogging record.
  const auto changes = u.changes(TimeUnit::Milliseconds);
  REQUIRE(changes.size() == 1);
  CHECK(changes[0] == doctest::Approx(0.4));
  CHECK(u.times(TimeUnit::Seconds)[2] == 300.0);
  CHECK(u.times(TimeUnit::Nanoseconds)[0] == doctest::Approx(1e-7));
  CHECK(data.users[1].changes(TimeUnit::Seconds).empty());
  CHECK(data.users[1].samples().size() == 1);
}

TEST_CASE("malformed rows name their line") {
  std::istringstream in("1,Walking,1,0,0,0\n1,Walking,2,0,0\n");
  try {
    parse_accelerometer_csv(in);
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  std::istringstream bad_number("1,Walking,1,0,0,0\n1,Walking,2,0,zero,0\n1,Jogging,3,0,0,0\n");
  const auto data = parse_accelerometer_csv(bad_number, ErrorPolicy::Skip);
  REQUIRE(data.skipped.size() == 1);
  CHECK(data.skipped[0].line == 2);
  CHECK(data.users[0].records.size() == 2);

  std::istringstream no_user(",Walking,1,0,0,0\n");
  CHECK_THROWS_AS(parse_accelerometer_csv(no_user), FormatError);
  CHECK(parse_time_unit("ms") == TimeUnit::Milliseconds);
  CHECK_THROWS_AS(parse_time_unit("minutes"), ConstraintError);
}

TEST_CASE("stream csv round-trips bit for bit") {
  StreamConfig c;
  c.family = Family::ChiSquare;
  c.period = 37;
  c.seed = 99;
  const std::vector<double> probs{0.2, 0.8};
  std::ostringstream out;
  write_stream_csv(out, c, 500, probs);
  const std::string text = out.str();
  CHECK(text.find("n,x,q0.2,q0.8\n") != std::string::npos);
  CHECK(text.find("# family=chisquare\n") != std::string::npos);

  std::istringstream in(text);
  const auto table = read_stream_csv(in);
  REQUIRE(table.values.size() == 500);
  StreamGenerator g(c);
  for (std::size_t i = 0; i < 500; ++i) {
    REQUIRE(table.values[i] == g.next());
    REQUIRE(table.index[i] == static_cast<std::int64_t>(i + 1));
  }
  bool seen_seed = false;
  for (const auto& [k, v] : table.metadata) seen_seed |= (k == "seed" && v == "99");
  CHECK(seen_seed);

  std::istringstream bare("1.5\n2.5\n\n-3\n");
  CHECK(read_stream_csv(bare).values == std::vector<double>{1.5, 2.5, -3.0});
  std::istringstream ragged("n,x\n1,2\n2\n");
  CHECK_THROWS_AS(read_stream_csv(ragged), FormatError);
  std::istringstream two_bare("1,2\n");
  CHECK_THROWS_AS(read_stream_csv(two_bare), FormatError);
}

TEST_CASE("events, truth and scores round-trip") {
  DetectionEvent e{"u1", Detection{12, 0.6, 2, 3.25, 31.5}};
  std::ostringstream out;
  out << "{\"config\":{\"method\":\"md\"}}\n";
  write_event_json(out, e);
  write_event_json(out, DetectionEvent{"u2", Detection{3, 0.15, 0, 1.0, 12.0}});
  CHECK(out.str().find("\"dimension\":\"z\"") != std::string::npos);
  std::istringstream in(out.str());
  const auto events = read_events_json(in);
  REQUIRE(events.size() == 2);
  CHECK(events[0].user == "u1");
  CHECK(events[0].detection.index == 12);
  CHECK(events[0].detection.time == 0.6);
  CHECK(events[0].detection.dimension == 2);
  CHECK(events[0].detection.score == 31.5);
  CHECK(events[1].detection.dimension == 0);

  std::istringstream broken("{\"user\":\"a\",\"time\":1}\n{oops\n");
  try {
    read_events_json(broken);
    FAIL("expected a format error");
  } catch (const FormatError& err) {
    CHECK(std::string(err.what()).find("line 2") != std::string::npos);
  }

  std::istringstream rows("1,Walking,1000,0,0,0\n1,Jogging,2000,0,0,0\n2,Sitting,5,0,0,0\n"
                          "2,Standing,7,0,0,0\n");
  const auto data = parse_accelerometer_csv(rows);
  std::ostringstream truth_out;
  write_truth_csv(truth_out, data.users, TimeUnit::Milliseconds);
  CHECK(truth_out.str() == "user,time\n1,2\n2,0.007\n");
  std::istringstream truth_in(truth_out.str());
  const auto truth = read_truth_csv(truth_in);
  REQUIRE(truth.size() == 2);
  CHECK(truth[1].user == "2");
  CHECK(truth[1].time == 0.007);
  std::istringstream times_only("time\n1.5\n3\n");
  const auto pooled = read_truth_csv(times_only);
  REQUIRE(pooled.size() == 2);
  CHECK(pooled[0].user.empty());

  ScoreReport r;
  r.precision = 0.5;
  r.recall = 1.0;
  r.f1 = 2.0 / 3.0;
  std::ostringstream json;
  write_score_json(json, r);
  CHECK(json.str().find("\"precision\":0.5") != std::string::npos);
  std::ostringstream csv;
  write_score_csv(csv, r);
  CHECK(csv.str().rfind("precision,recall,f1,mean_delay,detections,correct,true_changes\n", 0) ==
        0);
}
