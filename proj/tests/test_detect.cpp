#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "quantrack/detect.hpp"
#include "quantrack/error.hpp"

using namespace quantrack;

namespace {

struct Recording {
  std::vector<AxisSample> samples;
  std::vector<double> times;
};

// Unit-variance noise on every axis; axis x gets `shift` added and its noise
// multiplied by `scale` from sample `change` on.
Recording recording(std::size_t count, std::size_t change, double shift, double scale,
                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Recording r;
  for (std::size_t i = 0; i < count; ++i) {
    AxisSample s{noise(rng), noise(rng), noise(rng)};
    if (i >= change) s[0] = shift + scale * s[0];
    r.samples.push_back(s);
    r.times.push_back(static_cast<double>(i) / 20.0);
  }
  return r;
}

DetectorConfig fast_config(DetectorMethod method) {
  DetectorConfig c;
  c.method = method;
  c.lambda = method == DetectorMethod::EdShiftQ ? 0.01 : 0.2;
  c.gamma = 0.01;
  c.nu = 0.2;
  c.xi = 1e-5;
  c.horizon = 5.0;
  c.eta = 10.0;
  return c;
}

}  // namespace

TEST_CASE("euclidean distance") {
  const std::vector<double> a{0.0, 0.0};
  const std::vector<double> b{3.0, 4.0};
  CHECK(euclidean_distance(a, b) == 5.0);
  CHECK(euclidean_distance(b, b) == 0.0);
  const std::vector<double> u{1.0, -2.0, 7.5};
  const std::vector<double> v{0.5, 3.0, -1.0};
  const std::vector<double> up{7.5, 1.0, -2.0};
  const std::vector<double> vp{-1.0, 0.5, 3.0};
  CHECK(euclidean_distance(u, v) == doctest::Approx(euclidean_distance(up, vp)));
  CHECK(euclidean_distance(u, v) == doctest::Approx(euclidean_distance(v, u)));
}

TEST_CASE("ewma moments start as running averages") {
  EwmaMoments m(0.01);
  m.update(1.0);
  CHECK(m.mean() == 1.0);
  CHECK(m.sd() == 0.0);
  m.update(2.0);
  m.update(3.0);
  CHECK(m.mean() == doctest::Approx(2.0));
  CHECK(m.sd() == doctest::Approx(std::sqrt(2.0 / 3.0)));
  CHECK(m.count() == 3);

  EwmaMoments fast(0.5);
  fast.update(4.0);
  fast.update(0.0);
  fast.update(0.0);
  CHECK(fast.mean() == doctest::Approx(1.0));

  m.reset();
  m.update(5.0);
  CHECK(m.mean() == 5.0);
  CHECK(m.sd() == 0.0);
}

TEST_CASE("scoring arithmetic") {
  const std::vector<double> truth{10.0, 20.0};
  const std::vector<double> dets{13.0, 15.0, 27.0};
  const ScoreReport r = score(dets, truth);
  CHECK(r.detections == 3);
  CHECK(r.correct == 2);
  CHECK(r.true_changes == 2);
  CHECK(r.precision == doctest::Approx(2.0 / 3.0));
  CHECK(r.recall == 1.0);
  CHECK(r.f1 == doctest::Approx(0.8));
  CHECK(r.mean_delay == doctest::Approx(5.0));

  const ScoreReport tight = score(dets, truth, 5.0);
  CHECK(tight.correct == 1);
  CHECK(tight.mean_delay == doctest::Approx(3.0));

  const std::vector<double> early{5.0};
  const ScoreReport before = score(early, truth);
  CHECK(before.correct == 0);
  CHECK(before.f1 == 0.0);

  const ScoreReport none = score({}, truth);
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);
  CHECK(none.mean_delay == 0.0);

  const ScoreReport perfect = score(truth, truth);
  CHECK(perfect.f1 == 1.0);
  CHECK(perfect.mean_delay == 0.0);

  ScoreTally tally;
  tally.add(dets, truth);
  tally.add(std::vector<double>{1.0}, std::vector<double>{0.5});
  CHECK(tally.report().correct == 3);
  CHECK(tally.report().detections == 4);

  const std::vector<double> unsorted{3.0, 1.0};
  CHECK_THROWS_AS(score(unsorted, truth), ConstraintError);
}

TEST_CASE("detector configuration validation") {
  DetectorConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.horizon_samples() == 200);
  CHECK(c.init_samples() == 20);
  CHECK(c.arm_samples() == 100);
  c.eta = 0.0;
  CHECK_THROWS_AS(c.validate(), ConstraintError);
  c = DetectorConfig{};
  c.xi = 1.5;
  CHECK_THROWS_AS(c.validate(), ConstraintError);
  c = DetectorConfig{};
  c.init_seconds = 0.2;
  CHECK_THROWS_AS(c.validate(), ConstraintError);
  c = DetectorConfig{};
  c.probs = {0.5, 0.3};
  CHECK_THROWS_AS(c.validate(), ConstraintError);
  CHECK(parse_detector_method("md") == DetectorMethod::Md);
  CHECK(to_string(DetectorMethod::EdShiftQ) == "ed-shiftq");
  CHECK_THROWS_AS(parse_detector_method("cusum"), ConstraintError);
}

TEST_CASE("stationary noise raises no alarm") {
  const auto rec = recording(20000, 20000, 0.0, 1.0, 4);
  for (DetectorMethod m : {DetectorMethod::Md, DetectorMethod::EdCondQ}) {
    DetectorConfig c;
    c.method = m;
    CHECK(run_detector(c, rec.samples, rec.times).empty());
  }
}

TEST_CASE("mean and spread steps are detected within two horizons") {
  for (DetectorMethod m : {DetectorMethod::Md, DetectorMethod::EdCondQ, DetectorMethod::EdShiftQ}) {
    CAPTURE(to_string(m));
    const auto config = fast_config(m);
    const auto shifted = recording(4000, 2000, 10.0, 1.0, 9);
    const auto dets = run_detector(config, shifted.samples, shifted.times);
    REQUIRE(!dets.empty());
    CHECK(dets.front().index >= 2000);
    CHECK(dets.front().time - 100.0 <= 2.0 * config.horizon);
    CHECK(dets.front().dimension == 0);
    CHECK(dets.front().score > config.eta);
  }

  const auto config = fast_config(DetectorMethod::EdCondQ);
  const auto spread = recording(4000, 2000, 0.0, 10.0, 10);
  const auto dets = run_detector(config, spread.samples, spread.times);
  REQUIRE(!dets.empty());
  CHECK(dets.front().index >= 2000);
  CHECK(dets.front().time - 100.0 <= 2.0 * config.horizon);
}

TEST_CASE("restart blocks detections during re-initialisation") {
  const auto config = fast_config(DetectorMethod::EdCondQ);
  const auto rec = recording(4000, 2000, 10.0, 1.0, 9);
  ChangeDetector det(config);
  std::optional<Detection> first;
  std::size_t i = 0;
  for (; i < rec.samples.size() && !first; ++i) {
    first = det.step(rec.samples[i], rec.times[i]);
  }
  REQUIRE(first);
  CHECK(!det.armed());
  const std::size_t quiet =
      config.init_samples() + config.horizon_samples() + config.arm_samples();
  for (std::size_t k = 0; k < quiet && i < rec.samples.size(); ++k, ++i) {
    CHECK(!det.step(rec.samples[i], rec.times[i]));
  }
}

TEST_CASE("detection is deterministic and finite on constant input") {
  const auto config = fast_config(DetectorMethod::EdShiftQ);
  const auto rec = recording(3000, 1500, 6.0, 2.0, 12);
  const auto a = run_detector(config, rec.samples, rec.times);
  const auto b = run_detector(config, rec.samples, rec.times);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].index == b[i].index);
    CHECK(a[i].score == b[i].score);
  }

  for (DetectorMethod m : {DetectorMethod::Md, DetectorMethod::EdCondQ, DetectorMethod::EdShiftQ}) {
    ChangeDetector det(fast_config(m));
    for (int k = 0; k < 2000; ++k) {
      const auto d = det.step(AxisSample{1.0, 1.0, 1.0}, k / 20.0);
      if (d) CHECK(std::isfinite(d->score));
      for (double s : det.last_scores()) {
        if (!std::isnan(s)) CHECK(std::isfinite(s));
      }
    }
  }

  CHECK_THROWS_AS(run_detector(config, rec.samples, std::span(rec.times).first(10)),
                  ConstraintError);
}
