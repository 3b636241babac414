#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "quantrack/error.hpp"
#include "quantrack/streams.hpp"

using namespace quantrack;

namespace {

StreamConfig make(Family f, Variant v, double a = 2.0, double b = 6.0, std::int64_t T = 100,
                  std::uint64_t seed = 1) {
  StreamConfig c;
  c.family = f;
  c.variant = v;
  c.a = a;
  c.b = b;
  c.period = T;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("stream parameters") {
  const auto pn = make(Family::Normal, Variant::Periodic);
  CHECK(param_at(pn, 25) == doctest::Approx(2.0));
  CHECK(std::abs(param_at(pn, 100)) < 1e-12);
  CHECK(param_at(pn, 75) == doctest::Approx(-2.0));

  const auto sn = make(Family::Normal, Variant::Switch);
  CHECK(param_at(sn, 50) == 2.0);
  CHECK(param_at(sn, 51) == -2.0);
  CHECK(param_at(sn, 100) == 2.0);
  CHECK(param_at(sn, 1) == 2.0);

  const auto pc = make(Family::ChiSquare, Variant::Periodic);
  CHECK(param_at(pc, 25) == doctest::Approx(8.0));
  CHECK(param_at(pc, 75) == doctest::Approx(4.0));

  const auto sc = make(Family::ChiSquare, Variant::Switch);
  CHECK(param_at(sc, 10) == 8.0);
  CHECK(param_at(sc, 60) == 4.0);

  const auto odd = make(Family::Normal, Variant::Switch, 2.0, 6.0, 7);
  CHECK(param_at(odd, 3) == 2.0);   // 2 * 3 <= 7
  CHECK(param_at(odd, 4) == -2.0);  // 2 * 4 > 7

  CHECK(param_at(make(Family::Normal, Variant::Static, 10.0), 37) == 10.0);
  CHECK(param_at(make(Family::ChiSquare, Variant::Static, 2.0, 8.0), 37) == 8.0);
}

TEST_CASE("stream validation") {
  CHECK_THROWS_AS(make(Family::Normal, Variant::Periodic, 2, 6, 1).validate(), ConstraintError);
  CHECK_THROWS_AS(make(Family::ChiSquare, Variant::Periodic, 6, 6).validate(), ConstraintError);
  CHECK_THROWS_AS(make(Family::ChiSquare, Variant::Switch, 0, 6).validate(), ConstraintError);
  CHECK_NOTHROW(make(Family::ChiSquare, Variant::Periodic).validate());
  CHECK_THROWS_AS(parse_family("gamma"), ConstraintError);
  CHECK_THROWS_AS(parse_variant("sawtooth"), ConstraintError);
  CHECK(parse_family("chi2") == Family::ChiSquare);
}

TEST_CASE("generators are deterministic per seed") {
  for (Family f : {Family::Normal, Family::ChiSquare}) {
    StreamGenerator a(make(f, Variant::Periodic, 2, 6, 100, 42));
    StreamGenerator b(make(f, Variant::Periodic, 2, 6, 100, 42));
    StreamGenerator c(make(f, Variant::Periodic, 2, 6, 100, 43));
    int differ = 0;
    for (int i = 0; i < 10000; ++i) {
      const double x = a.next();
      REQUIRE(x == b.next());
      if (x != c.next()) ++differ;
    }
    CHECK(differ > 9900);
    CHECK(a.index() == 10000);
  }
}

TEST_CASE("switch normal high phase has mean a") {
  StreamGenerator g(make(Family::Normal, Variant::Switch, 2, 6, 100, 5));
  const int n = 1000000;
  double sum = 0.0;
  int count = 0;
  for (int i = 1; i <= n; ++i) {
    const double x = g.next();
    if (2 * (i % 100) <= 100) {
      sum += x;
      ++count;
    }
  }
  CHECK(std::abs(sum / count - 2.0) < 3.0 / std::sqrt(n / 2.0));
}

TEST_CASE("static chi-square moments") {
  StreamGenerator g(make(Family::ChiSquare, Variant::Static, 2, 8, 100, 6));
  const int n = 1000000;
  double s = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = g.next();
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  // Standard errors: sqrt(16 / n) for the mean, sqrt((mu4 - 16^2) / n) with
  // mu4 = 1152 for the variance.
  CHECK(std::abs(mean - 8.0) < 4 * std::sqrt(16.0 / n));
  CHECK(std::abs(var - 16.0) < 4 * std::sqrt((1152.0 - 256.0) / n));
}

TEST_CASE("true quantiles agree with independent inversions") {
  for (double q : {1e-6, 0.01, 0.2, 0.5, 0.8, 0.975, 0.999999}) {
    CHECK(std::abs(normal_quantile(q) - oracle::normal_quantile(q)) < 1e-9);
  }
  CHECK(std::abs(normal_quantile(0.8) - 0.8416) < 1e-4);

  const TrueQuantileOracle normal(make(Family::Normal, Variant::Static, 3.0));
  CHECK(normal.quantile(5, 0.5) == doctest::Approx(3.0));

  for (double nu : {0.7, 2.0, 4.0, 5.3, 8.0, 30.0}) {
    for (double q : {0.001, 0.05, 0.2, 0.5, 0.8, 0.95, 0.999}) {
      const double x = chi_square_quantile(nu, q);
      REQUIRE(std::abs(oracle::chi_square_cdf(nu, x) - q) < 1e-10);
      REQUIRE(std::abs(chi_square_cdf(nu, x) - q) < 1e-10);
    }
  }

  const auto chi_cfg = make(Family::ChiSquare, Variant::Periodic);
  const TrueQuantileOracle chi(chi_cfg);
  for (std::int64_t n : {1, 25, 50, 75, 99}) {
    double prev = -1.0;
    for (int k = 1; k < 100; ++k) {
      const double v = chi.quantile(n, k / 100.0);
      REQUIRE(v > prev);
      prev = v;
    }
    const double nu = param_at(chi_cfg, n);
    CHECK(std::abs(oracle::chi_square_cdf(nu, chi.quantile(n, 0.3)) - 0.3) < 1e-10);
  }
  CHECK_THROWS_AS(chi.quantile(1, 0.0), ConstraintError);
  CHECK_THROWS_AS(normal.quantile(1, 1.0), ConstraintError);
}

TEST_CASE("empirical quantiles of frozen streams match the oracle") {
  const std::size_t n = 1000000;
  {
    StreamGenerator g(make(Family::Normal, Variant::Static, 10.0, 6, 100, 8));
    std::vector<double> xs(n);
    for (auto& x : xs) x = g.next();
    std::sort(xs.begin(), xs.end());
    for (double q : {0.05, 0.3, 0.5, 0.9}) {
      const double truth = 10.0 + oracle::normal_quantile(q);
      const double se = std::sqrt(q * (1 - q) / n) / oracle::normal_pdf(truth - 10.0);
      CHECK(std::abs(oracle::order_statistic(xs, q) - truth) < 4 * se);
    }
  }
  {
    StreamGenerator g(make(Family::ChiSquare, Variant::Static, 2.0, 8.0, 100, 8));
    std::vector<double> xs(n);
    for (auto& x : xs) x = g.next();
    std::sort(xs.begin(), xs.end());
    for (double q : {0.05, 0.3, 0.5, 0.9}) {
      const double truth = oracle::chi_square_quantile(8.0, q);
      const double se = std::sqrt(q * (1 - q) / n) / oracle::chi_square_pdf(8.0, truth);
      CHECK(std::abs(oracle::order_statistic(xs, q) - truth) < 4 * se);
    }
  }
}
