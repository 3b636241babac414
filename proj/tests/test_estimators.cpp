#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "quantrack/error.hpp"
#include "quantrack/estimators.hpp"

using quantrack::ConstraintError;
using quantrack::Dumiqe;
using quantrack::Qewa;

TEST_CASE("dumiqe increase and decrease branches") {
  Dumiqe up(0.5, 0.1, 1.0);
  up.update(2.0);
  CHECK(up.estimate() == doctest::Approx(1.05).epsilon(1e-15));

  Dumiqe down(0.5, 0.1, 1.0);
  down.update(0.5);
  CHECK(down.estimate() == doctest::Approx(0.95).epsilon(1e-15));

  Dumiqe tie(0.5, 0.1, 1.0);
  tie.update(1.0);
  CHECK(tie.estimate() == doctest::Approx(0.95).epsilon(1e-15));
}

TEST_CASE("dumiqe rejects invalid parameters") {
  CHECK_NOTHROW(Dumiqe(0.5, 0.05, 1.0));
  CHECK_THROWS_AS(Dumiqe(0.0, 0.05, 1.0), ConstraintError);
  CHECK_THROWS_AS(Dumiqe(1.0, 0.05, 1.0), ConstraintError);
  CHECK_THROWS_AS(Dumiqe(0.5, 0.0, 1.0), ConstraintError);
  CHECK_THROWS_AS(Dumiqe(0.5, 1.0, 1.0), ConstraintError);
  CHECK_THROWS_AS(Dumiqe(0.5, 0.05, 0.0), ConstraintError);
  CHECK_THROWS_AS(Dumiqe(0.5, 0.05, -2.0), ConstraintError);
  CHECK_THROWS_AS(Dumiqe(0.5, 0.05, NAN), ConstraintError);
}

TEST_CASE("dumiqe estimate stays strictly positive") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  Dumiqe d(0.3, 0.05, 1e-3);
  for (int i = 0; i < 100000; ++i) {
    d.update(i % 1000 < 100 ? -1e9 : u(rng));
    REQUIRE(d.estimate() > 0.0);
  }
}

TEST_CASE("dumiqe update_within respects the interval") {
  Dumiqe d(0.9, 0.5, 10.0);
  d.update_within(100.0, 5.0, 10.5);
  CHECK(d.estimate() < 10.5);
  CHECK(d.estimate() > 10.0);

  Dumiqe e(0.1, 0.5, 10.0);
  e.update_within(0.0, 9.9, 20.0);
  CHECK(e.estimate() > 9.9);
  CHECK(e.estimate() < 10.0);

  Dumiqe free(0.5, 0.1, 2.0);
  free.update_within(5.0, 0.0, 1e9);
  CHECK(free.estimate() == doctest::Approx(2.1));
}

TEST_CASE("qewa hand-evaluated step") {
  // estimate 0, bracket (-1, 1), q = 0.5, lambda = 0.1, rho = 0.001, x = 1.
  // Weight lambda/2 = 0.05: estimate 0.05; the upper mean absorbs the shift
  // and a rho share of x: 0.05 + 0.999 * 1 + 0.001 * 1 = 1.05; the lower mean
  // only shifts: -1 + 0.05 = -0.95. The symmetric bracket keeps the weight.
  Qewa q(0.5, 0.1, 0.001, 0.0, -1.0, 1.0);
  CHECK(q.weight() == doctest::Approx(0.05).epsilon(1e-15));
  q.update(1.0);
  CHECK(q.estimate() == doctest::Approx(0.05).epsilon(1e-14));
  CHECK(q.mu_plus() == doctest::Approx(1.05).epsilon(1e-14));
  CHECK(q.mu_minus() == doctest::Approx(-0.95).epsilon(1e-14));
  CHECK(q.weight() == doctest::Approx(0.05).epsilon(1e-14));
}

TEST_CASE("qewa initial state and ordering errors") {
  const Qewa ok(0.5, 0.05, 0.0005, 0.0, -1.0, 1.0);
  CHECK(ok.weight() == doctest::Approx(0.025));
  CHECK_THROWS_AS(Qewa(0.5, 0.05, 0.0005, 0.0, 1.0, -1.0), ConstraintError);
  CHECK_THROWS_AS(Qewa(0.5, 0.05, 0.0005, 0.0, 0.0, 1.0), ConstraintError);
  CHECK_THROWS_AS(Qewa(0.5, 0.0, 0.0005, 0.0, -1.0, 1.0), ConstraintError);
  CHECK_THROWS_AS(Qewa(0.5, 0.05, 0.0, 0.0, -1.0, 1.0), ConstraintError);
  CHECK_THROWS_AS(Qewa(0.5, 0.05, 0.0005, -2.0, -3.0, -1.0, 0.0, Qewa::kInf), ConstraintError);
  CHECK_NOTHROW(Qewa(0.5, 1.0, 0.5, 0.0, -1.0, 1.0));
}

TEST_CASE("qewa symmetric state gives half weight") {
  Qewa q(0.5, 0.2, 0.002, 0.0, -3.0, 3.0);
  q.update(0.0);
  CHECK(q.weight() == doctest::Approx(0.1));
}

TEST_CASE("qewa invariants over random updates") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.01, 0.99);
  std::cauchy_distribution<double> heavy(0.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double lambda = unit(rng);
    Qewa q(unit(rng), lambda, 0.01 * lambda, 0.0, -1.0, 2.0);
    for (int i = 0; i < 500; ++i) {
      q.update(heavy(rng));
      REQUIRE(q.mu_minus() < q.estimate());
      REQUIRE(q.estimate() < q.mu_plus());
      REQUIRE(q.weight() > 0.0);
      REQUIRE(q.weight() < lambda);
    }
  }
}

TEST_CASE("qewa with a one-sided support keeps its means inside") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(-2.0, 1.0);
  Qewa q(0.4, 0.05, 0.0005, -2.0, -3.0, -1.0, -Qewa::kInf, 0.0);
  for (int i = 0; i < 20000; ++i) {
    q.update(std::min(n(rng), -1e-9));
    REQUIRE(q.mu_plus() <= 0.0);
    REQUIRE(q.mu_minus() < q.estimate());
    REQUIRE(q.estimate() < q.mu_plus());
  }
}

TEST_CASE("qewa with constant weight tracks the mean") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(10.0, 1.0);
  Qewa q(0.7, 0.01, 0.0001, 10.0, 9.0, 11.0);
  double sum = 0.0;
  const int steps = 200000;
  for (int i = 0; i < steps; ++i) {
    q.update_fixed_weight(n(rng), 0.01);
    if (i >= steps / 2) sum += q.estimate();
  }
  CHECK(std::abs(sum / (steps / 2) - 10.0) < 0.02);
}

TEST_CASE("static convergence of the single-quantile estimators") {
  const double truth = 10.0 + oracle::normal_quantile(0.7);
  const int steps = 500000;
  const int tail = 100000;

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(10.0, 1.0);
  Dumiqe d(0.7, 0.005, 10.0);
  Qewa q(0.7, 0.005, 0.01 * 0.005, 10.0, 9.0, 11.0);
  double sum_d = 0.0;
  double sum_q = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double x = n(rng);
    d.update(x);
    q.update(x);
    if (i >= steps - tail) {
      sum_d += d.estimate();
      sum_q += q.estimate();
    }
  }
  CHECK(std::abs(sum_d / tail - truth) < 0.05);
  CHECK(std::abs(sum_q / tail - truth) < 0.05);
}
