// Tests for series preparation: differencing round-trips, window-local
// standardization (including the no-leakage guarantee), single-gap repair,
// the unit-root screen's behaviour on known processes, and seasonal
// adjustment.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "forumcast/tsprep.hpp"

using namespace forumcast;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

MonthlySeries make_series(std::vector<double> values,
                          YearMonth start = {2007, 1},
                          std::string name = "x") {
  MonthlySeries s;
  s.name = std::move(name);
  s.start = start;
  s.values = std::move(values);
  return s;
}

std::vector<double> gaussian(std::size_t n, std::uint64_t seed,
                             double mean = 0.0, double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> draw(mean, sd);
  std::vector<double> v(n);
  for (auto& x : v) x = draw(rng);
  return v;
}

}  // namespace

TEST_CASE("differencing: hand cases, shape and missing propagation") {
  const auto con = tsprep::difference(make_series({5, 5, 5, 5}));
  REQUIRE(con.values == std::vector<double>{0, 0, 0});
  CHECK(con.start == YearMonth{2007, 2});
  CHECK(con.name == "x");

  const auto ramp = tsprep::difference(make_series({1, 4, 7, 10}));
  REQUIRE(ramp.values == std::vector<double>{3, 3, 3});

  const auto gap = tsprep::difference(
      make_series({1.0, missing_value(), 3.0}));
  REQUIRE(gap.values.size() == 2);
  CHECK(is_missing(gap.values[0]));
  CHECK(is_missing(gap.values[1]));

  REQUIRE_THROWS_AS(tsprep::difference(make_series({1.0})), ValidationError);
  REQUIRE_THROWS_AS(tsprep::difference(make_series({})), ValidationError);
}

TEST_CASE("undifferencing inverts differencing") {
  const auto hand = tsprep::undifference(
      make_series({1, -2, 5}, {2007, 2}), 10.0);
  REQUIRE(hand.values == std::vector<double>{10, 11, 9, 14});
  CHECK(hand.start == YearMonth{2007, 1});

  std::mt19937_64 rng(99);
  std::normal_distribution<double> draw(0.0, 10.0);
  std::vector<double> v(60);
  for (auto& x : v) x = draw(rng);
  const auto s = make_series(v);
  const auto back = tsprep::undifference(tsprep::difference(s), v[0]);
  REQUIRE(back.values.size() == v.size());
  CHECK(back.start == s.start);
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK_THAT(back.values[i], WithinAbs(v[i], 1e-10));
  }
}

TEST_CASE("window statistics use the sample standard deviation") {
  const std::vector<double> v = {9, 1, 2, 3, 9};
  const auto st = tsprep::window_stats(v, 1, 4);
  REQUIRE(st.has_value());
  CHECK_THAT(st->mean, WithinAbs(2.0, 1e-12));
  CHECK_THAT(st->sd, WithinAbs(1.0, 1e-12));  // n-1 in the denominator

  CHECK_FALSE(tsprep::window_stats(v, 2, 3).has_value());  // one point
  CHECK_FALSE(tsprep::window_stats(v, 1, 7).has_value());  // past the end
  const std::vector<double> flat = {4, 4, 4};
  CHECK_FALSE(tsprep::window_stats(flat, 0, 3).has_value());  // zero variance
  const std::vector<double> holed = {1, missing_value(), 3};
  CHECK_FALSE(tsprep::window_stats(holed, 0, 3).has_value());
}

TEST_CASE("standardization centers on the window and only on the window") {
  const auto z = tsprep::standardize(make_series({1, 2, 3}), 0, 3);
  REQUIRE(z.values.size() == 3);
  CHECK_THAT(z.values[0], WithinAbs(-1.0, 1e-12));
  CHECK_THAT(z.values[1], WithinAbs(0.0, 1e-12));
  CHECK_THAT(z.values[2], WithinAbs(1.0, 1e-12));

  SECTION("observations after the window cannot influence windowed values") {
    auto base = gaussian(40, 7);
    auto poked = base;
    for (std::size_t i = 30; i < 40; ++i) poked[i] *= 10.0;
    const auto a = tsprep::standardize(make_series(base), 0, 30);
    const auto b = tsprep::standardize(make_series(poked), 0, 30);
    for (std::size_t i = 0; i < 30; ++i) {
      CHECK(a.values[i] == b.values[i]);  // bitwise: same stats, same input
    }
  }
  SECTION("missing cells stay missing") {
    auto v = gaussian(10, 8);
    v[7] = missing_value();
    const auto z2 = tsprep::standardize(make_series(v), 0, 6);
    CHECK(is_missing(z2.values[7]));
    CHECK_FALSE(is_missing(z2.values[9]));
  }
  SECTION("degenerate windows throw and name the series") {
    REQUIRE_THROWS_WITH(
        tsprep::standardize(make_series({4, 4, 4, 1}, {2007, 1}, "flatvar"),
                            0, 3),
        ContainsSubstring("flatvar"));
  }
}

TEST_CASE("single-month gaps are interpolated; longer and edge gaps are not") {
  std::vector<double> v = {1, missing_value(), 3};
  CHECK(tsprep::fill_single_gaps(v) == 1);
  CHECK_THAT(v[1], WithinAbs(2.0, 1e-12));

  std::vector<double> wide = {1, missing_value(), missing_value(), 4};
  CHECK(tsprep::fill_single_gaps(wide) == 0);
  CHECK(is_missing(wide[1]));
  CHECK(is_missing(wide[2]));

  std::vector<double> lead = {missing_value(), 2, 3};
  CHECK(tsprep::fill_single_gaps(lead) == 0);
  CHECK(is_missing(lead[0]));

  std::vector<double> tail = {1, 2, missing_value()};
  CHECK(tsprep::fill_single_gaps(tail) == 0);
  CHECK(is_missing(tail[2]));

  std::vector<double> two = {1, missing_value(), 3, missing_value(), 5};
  CHECK(tsprep::fill_single_gaps(two) == 2);
  CHECK_THAT(two[1], WithinAbs(2.0, 1e-12));
  CHECK_THAT(two[3], WithinAbs(4.0, 1e-12));
}

TEST_CASE("unit-root screen: stationary processes reject, random walks do not") {
  SECTION("input validation") {
    REQUIRE_THROWS_AS(tsprep::unit_root_check(make_series(gaussian(10, 1))),
                      ValidationError);
    auto v = gaussian(40, 2);
    v[20] = missing_value();
    REQUIRE_THROWS_AS(tsprep::unit_root_check(make_series(v)),
                      ValidationError);
  }

  SECTION("white noise is called stationary almost always") {
    int rejected = 0;
    const int n_seeds = 200;
    for (int seed = 0; seed < n_seeds; ++seed) {
      const auto res = tsprep::unit_root_check(
          make_series(gaussian(200, 1000 + static_cast<std::uint64_t>(seed))));
      if (res.reject) ++rejected;
      CHECK(res.lag <= 12);
      CHECK(res.n_effective == 187);  // 200 obs, 199 diffs, 12 burned lags
      CHECK(res.critical_5pct < -2.8);
    }
    CHECK(rejected >= 180);
  }

  SECTION("random walks are rarely called stationary") {
    int rejected = 0;
    const int n_seeds = 200;
    for (int seed = 0; seed < n_seeds; ++seed) {
      auto steps = gaussian(200, 5000 + static_cast<std::uint64_t>(seed));
      std::vector<double> walk(steps.size());
      double acc = 0.0;
      for (std::size_t i = 0; i < steps.size(); ++i) {
        acc += steps[i];
        walk[i] = acc;
      }
      if (tsprep::unit_root_check(make_series(walk)).reject) ++rejected;
    }
    CHECK(rejected <= 20);  // nominal size 5%
  }

  SECTION("a constant plus tiny noise rejects decisively") {
    const auto res = tsprep::unit_root_check(
        make_series(gaussian(120, 77, 5.0, 0.001)));
    CHECK(res.reject);
    CHECK(res.statistic < res.critical_5pct);
  }
}

TEST_CASE("classical seasonal adjustment removes a pure monthly cycle exactly") {
  const int n = 120;
  const double level = 10.0, amp = 5.0;
  std::vector<double> y(n);
  for (int t = 0; t < n; ++t) {
    y[static_cast<std::size_t>(t)] =
        level + amp * std::sin(2.0 * std::numbers::pi * t / 12.0);
  }
  const auto s = make_series(y, {2007, 1});
  const auto adj = tsprep::deseasonalize(
      s, tsprep::DeseasonMethod::classical_additive);
  REQUIRE(adj.values.size() == y.size());
  CHECK(adj.start == s.start);
  for (int t = 0; t < n; ++t) {
    CHECK_THAT(adj.values[static_cast<std::size_t>(t)],
               WithinAbs(level, 1e-8));
  }

  // The removed component sums to zero over any full year.
  for (int t0 = 0; t0 + 12 <= n; t0 += 12) {
    double sum = 0.0;
    for (int j = 0; j < 12; ++j) {
      const auto i = static_cast<std::size_t>(t0 + j);
      sum += y[i] - adj.values[i];
    }
    CHECK_THAT(sum, WithinAbs(0.0, 1e-9));
  }
}

TEST_CASE("seasonal adjustment leaves non-seasonal structure alone") {
  SECTION("white noise survives nearly unchanged") {
    const auto y = gaussian(240, 31);
    const auto adj = tsprep::deseasonalize(
        make_series(y), tsprep::DeseasonMethod::classical_additive);
    double sy = 0, sa = 0, syy = 0, saa = 0, sya = 0;
    const double n = static_cast<double>(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      sy += y[i];
      sa += adj.values[i];
      syy += y[i] * y[i];
      saa += adj.values[i] * adj.values[i];
      sya += y[i] * adj.values[i];
    }
    const double corr = (sya - sy * sa / n) /
                        std::sqrt((syy - sy * sy / n) * (saa - sa * sa / n));
    CHECK(corr > 0.95);
  }
  SECTION("the zero series stays zero") {
    const auto adj = tsprep::deseasonalize(
        make_series(std::vector<double>(48, 0.0)),
        tsprep::DeseasonMethod::classical_additive);
    for (double v : adj.values) CHECK_THAT(v, WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("loess-based seasonal adjustment strips most of a monthly cycle") {
  const int n = 120;
  std::vector<double> y(n);
  for (int t = 0; t < n; ++t) {
    y[static_cast<std::size_t>(t)] =
        10.0 + 5.0 * std::sin(2.0 * std::numbers::pi * t / 12.0);
  }
  const auto adj = tsprep::deseasonalize(make_series(y),
                                         tsprep::DeseasonMethod::stl_loess);
  double var_y = 0, var_adj = 0, mean_y = 0, mean_adj = 0;
  for (int t = 0; t < n; ++t) {
    mean_y += y[static_cast<std::size_t>(t)];
    mean_adj += adj.values[static_cast<std::size_t>(t)];
  }
  mean_y /= n;
  mean_adj /= n;
  for (int t = 0; t < n; ++t) {
    var_y += std::pow(y[static_cast<std::size_t>(t)] - mean_y, 2);
    var_adj += std::pow(adj.values[static_cast<std::size_t>(t)] - mean_adj, 2);
  }
  // The cycle carries all the variance; adjustment must remove nearly all
  // of it and keep the level.
  CHECK(var_adj < 0.05 * var_y);
  CHECK_THAT(mean_adj, WithinAbs(10.0, 0.25));
}

TEST_CASE("seasonal adjustment validates its input") {
  REQUIRE_THROWS_AS(
      tsprep::deseasonalize(make_series(gaussian(23, 3))),  // < 2 periods
      ValidationError);
  auto v = gaussian(48, 4);
  v[10] = missing_value();
  REQUIRE_THROWS_AS(tsprep::deseasonalize(make_series(v)), ValidationError);
  REQUIRE_THROWS_AS(
      tsprep::deseasonalize(make_series(gaussian(23, 5)),
                            tsprep::DeseasonMethod::stl_loess),
      ValidationError);
}

TEST_CASE("default stationarity transforms exempt exactly two level series") {
  const tsprep::TransformSpec spec;
  CHECK(spec.standardize_predictors);
  CHECK(spec.level_variables ==
        std::set<std::string>{"group_betweenness_centrality",
                              "avg_response_time"});
  CHECK_FALSE(spec.differenced("group_betweenness_centrality"));
  CHECK_FALSE(spec.differenced("avg_response_time"));
  CHECK(spec.differenced("sentiment"));
  CHECK(spec.differenced("target_arrivals"));
  CHECK(spec.differenced("anything_else"));
}
