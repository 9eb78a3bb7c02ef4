#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cbsim/core.hpp"

using namespace cbsim;

TEST_CASE("time_weight hand values") {
  CHECK(time_weight(4, 0.0, 0.2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(time_weight(4, 0.5, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(time_weight(4, 0.5, 0.2) - 1.4 / 3.0) < 1e-12);
}

TEST_CASE("time_weight monotone non-increasing in h for tau<1") {
  double prev = time_weight(1, 0.3, 0.2);
  for (std::size_t h = 2; h <= 64; ++h) {
    double w = time_weight(h, 0.3, 0.2);
    CHECK(w <= prev + 1e-15);
    prev = w;
  }
}

TEST_CASE("time_weight edge identities over random domain") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uk(0.0, 3.0), ut(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    std::size_t h = 1 + static_cast<std::size_t>(rng() % 50);
    CHECK(std::abs(time_weight(h, 0.0, ut(rng)) - 1.0) < 1e-15);
    CHECK(std::abs(time_weight(h, uk(rng), 1.0) - 1.0) < 1e-15);
  }
}

TEST_CASE("discomfort hand values") {
  CHECK(discomfort(1.0, 1.0, -0.5, 0.10) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::abs(discomfort(1.2, 1.0, -0.5, 0.10) - (-0.016)) < 1e-12);
  CHECK(std::abs(discomfort(0.8, 1.0, -0.5, 0.10) - 0.024) < 1e-12);
}

TEST_CASE("discomfort rejects bad domain") {
  CHECK_THROWS_AS(discomfort(1.0, 0.0, -0.5, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(discomfort(1.0, -1.0, -0.5, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(discomfort(1.0, 1.0, 0.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(discomfort(1.0, 1.0, 0.5, 0.1), std::invalid_argument);
}

TEST_CASE("discomfort loss-aversion asymmetry identity") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ud(0.01, 0.5), ub(-2.0, -0.05),
      ul(0.001, 2.0), ux(0.1, 5.0);
  for (int i = 0; i < 1000; ++i) {
    double x_hat = ux(rng), d = ud(rng) * x_hat, beta = ub(rng), lm = ul(rng);
    double s = discomfort(x_hat + d, x_hat, beta, lm) +
               discomfort(x_hat - d, x_hat, beta, lm);
    double expect = -lm * d * d / (beta * x_hat);
    CHECK(std::abs(s - expect) < 1e-12 * std::max(1.0, std::abs(expect)));
    CHECK(s > 0.0);
  }
}

TEST_CASE("discomfort slope at x_hat is -lambda_max") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> ub(-1.5, -0.1), ul(0.01, 1.0), ux(0.2, 4.0);
  for (int i = 0; i < 100; ++i) {
    double x_hat = ux(rng), beta = ub(rng), lm = ul(rng);
    double step = 1e-5 * x_hat;
    double slope = (discomfort(x_hat + step, x_hat, beta, lm) -
                    discomfort(x_hat - step, x_hat, beta, lm)) /
                   (2 * step);
    CHECK(std::abs(slope + lm) <= 1e-6 * std::max(1.0, lm));
  }
}

TEST_CASE("horizon_price_reference") {
  std::vector<double> a{0.05, 0.30, 0.10};
  CHECK(horizon_price_reference(a, 0.01) == doctest::Approx(0.30));
  std::vector<double> b{-0.10, -0.02};
  CHECK(horizon_price_reference(b, 0.01) == doctest::Approx(0.01));
  std::vector<double> c{0.30};
  CHECK(horizon_price_reference(c, 0.01) == doctest::Approx(0.30));
}

TEST_CASE("horizon_price_reference permutation invariant") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> up(-0.4, 1.2);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> row(8);
    for (auto& v : row) v = up(rng);
    double ref = horizon_price_reference(row, 0.001);
    std::shuffle(row.begin(), row.end(), rng);
    CHECK(horizon_price_reference(row, 0.001) == doctest::Approx(ref).epsilon(1e-15));
  }
}

TEST_CASE("TimeGrid invariants and indexing") {
  TimeGrid g{0.5, 336, 8, 4};
  g.validate();
  CHECK(g.series_len() == 343);
  CHECK(g.intervals_per_day() == 48);
  CHECK(g.hour_of_day(0) == doctest::Approx(0.0));
  CHECK(g.hour_of_day(48) == doctest::Approx(0.0));
  CHECK(g.hour_of_day(49) == doctest::Approx(0.5));
  CHECK(g.days() == doctest::Approx(7.0));

  TimeGrid bad = g;
  bad.rebound_len = 9;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = g;
  bad.delta_h = -1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("TodSchedule bands with wrap") {
  // Tariff layout: evening peak with export reward, wrap band over midnight.
  TodSchedule imp({{1, 5, 0.033095},
                   {5, 10, 0.033095},
                   {10, 14, 0.033095},
                   {14, 20, 0.277957},
                   {20, 1, 0.033095}});
  CHECK(imp.at(0.0) == doctest::Approx(0.033095));
  CHECK(imp.at(14.0) == doctest::Approx(0.277957));
  CHECK(imp.at(19.99) == doctest::Approx(0.277957));
  CHECK(imp.at(20.0) == doctest::Approx(0.033095));
  CHECK(imp.at(23.5) == doctest::Approx(0.033095));

  CHECK_THROWS_AS(TodSchedule({{0, 12, 1.0}}), ConfigError);              // gap
  CHECK_THROWS_AS(TodSchedule({{0, 14, 1.0}, {12, 24, 2.0}}), ConfigError);  // overlap
}

TEST_CASE("CostBreakdown total identity") {
  auto b = CostBreakdown::make(37800, 900, 1200, 13800, 23500);
  CHECK(std::abs(b.total - (b.energy + b.grid_charge + b.throughput -
                            b.peak_revenue + b.capital)) <
        1e-9 * std::abs(b.total));
}
