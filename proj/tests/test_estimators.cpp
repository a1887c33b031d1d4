#include <doctest.h>

#include <cmath>

#include "ctasep/estimators.hpp"
#include "oracles/exp_tv.hpp"

using namespace ctasep;
using namespace ctasep::estimators;

namespace {

ExperimentPlan plan_of(std::string name, std::size_t replicas, std::uint64_t seed, unsigned threads = 1) {
  ExperimentPlan p;
  p.name = std::move(name);
  p.replicas = replicas;
  p.seed = seed;
  p.threads = threads;
  return p;
}

}  // namespace

TEST_CASE("least squares recovers exact lines and power laws") {
  const auto f = linear_fit({1, 2, 3, 4}, {3, 5, 7, 9});
  CHECK(f.slope == doctest::Approx(2));
  CHECK(f.intercept == doctest::Approx(1));
  CHECK(f.r2 == doctest::Approx(1));
  CHECK(f.stderr_slope == doctest::Approx(0).epsilon(1e-9));
  std::vector<double> x{100, 200, 400, 800}, y;
  for (double v : x) y.push_back(3 * std::pow(v, 2.0 / 3));
  const auto g = loglog_fit(x, y);
  CHECK(g.slope == doctest::Approx(2.0 / 3));
  CHECK(std::exp(g.intercept) == doctest::Approx(3));
  CHECK_THROWS_AS(linear_fit({1}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(loglog_fit({1, 0}, {1, 1}), std::invalid_argument);
}

TEST_CASE("summary statistics") {
  CHECK(median({3, 1, 2}) == 2);
  CHECK(median({4, 1, 2, 3}) == 2.5);
  CHECK(mean({1, 2, 3}) == 2);
  CHECK(sample_variance({1, 2, 3}) == 1);
  CHECK(shape_center(100, 1) == 400);
  CHECK(fluctuation_scale(1000, 1) == doctest::Approx(10));
}

TEST_CASE("replica seeds depend only on the name, grid point and replica") {
  const auto a = plan_of("x", 10, 5), b = plan_of("x", 99, 5, 8), c = plan_of("y", 10, 5);
  CHECK(a.replica_seed(2, 3) == b.replica_seed(2, 3));
  CHECK(a.replica_seed(2, 3) != c.replica_seed(2, 3));
  CHECK(a.replica_seed(2, 3) != a.replica_seed(3, 2));
  CHECK_THROWS_AS(plan_of("x", 0, 1).validate(), std::invalid_argument);
}

TEST_CASE("results do not depend on the thread count") {
  const auto one = lpp_moments({20, 40}, Rational(1), plan_of("threads", 64, 3, 1));
  const auto four = lpp_moments({20, 40}, Rational(1), plan_of("threads", 64, 3, 4));
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(one.rows[i].mean == four.rows[i].mean);
    CHECK(one.rows[i].variance == four.rows[i].variance);
  }
  const auto t1 = tf_scaling({20, 40}, Rational(1, 2), plan_of("threads", 32, 3, 1));
  const auto t4 = tf_scaling({20, 40}, Rational(1, 2), plan_of("threads", 32, 3, 4));
  CHECK(t1.rows[1].median_tf == t4.rows[1].median_tf);
}

TEST_CASE("tail probabilities are monotone and match the committed pilot") {
  std::vector<double> grid;
  for (int i = 0; i <= 16; ++i) grid.push_back(0.25 * i);
  // pilot run: lpp-stats, seed 7001, 500 replicas, tail at n = 400
  const auto tp = tail_profile(400, Rational(1), grid, plan_of("lpp-stats", 500, 7001, 4));
  CHECK(tp.center == 1600);
  CHECK(tp.rows.front().upper == doctest::Approx(0.03));
  CHECK(tp.rows.front().lower == doctest::Approx(0.97));
  for (std::size_t i = 1; i < tp.rows.size(); ++i) {
    CHECK(tp.rows[i].upper <= tp.rows[i - 1].upper);
    CHECK(tp.rows[i].lower <= tp.rows[i - 1].lower);
  }
}

TEST_CASE("tail profile from synthetic samples") {
  std::vector<double> s;
  for (int i = 0; i < 100; ++i) s.push_back(400 + ((i - 50) * 0.1 + 0.05) * fluctuation_scale(100, 1));
  const auto tp = tail_profile_from_samples(100, Rational(1), s, {0, 1, 2}, 1, 3);
  CHECK(tp.rows[0].upper == doctest::Approx(0.5));
  CHECK(tp.rows[0].lower == doctest::Approx(0.5));
  CHECK(tp.rows[1].upper == doctest::Approx(0.4));
  CHECK(tp.rows[2].lower == doctest::Approx(0.3));
}

TEST_CASE("transversal fluctuation medians grow with n") {
  const auto r = tf_scaling({2, 25, 100, 400}, Rational(1), plan_of("tf", 60, 5, 4));
  CHECK(r.rows[0].median_tf <= 2);
  int inversions = 0;
  for (std::size_t i = 1; i < r.rows.size(); ++i) inversions += r.rows[i].median_tf < r.rows[i - 1].median_tf;
  CHECK(inversions <= 1);
  CHECK(r.rows.back().median_tf > r.rows[1].median_tf);
}

TEST_CASE("strip coupling") {
  const auto per = lpp::Environment::periodic(10, 4, 1), out = lpp::Environment::iid(2);
  const StripCoupledField f(per, out, Rational(1));
  CHECK(f.in_band(Cell{5, 5}));
  CHECK(f.in_band(Cell{5, 3}));
  CHECK(f.in_band(Cell{5, 6}));
  CHECK_FALSE(f.in_band(Cell{5, 2}));
  CHECK_FALSE(f.in_band(Cell{5, 7}));
  CHECK(f(Cell{5, 5}) == per(Cell{5, 5}));
  CHECK(f(Cell{5, 9}) == out(Cell{5, 9}));
}

TEST_CASE("periodic and i.i.d. geodesics agree once the band is wide") {
  // the band holds the whole box, so the fields coincide there
  const auto wide = periodic_vs_iid_agreement(30, Rational(1), 200, 100, plan_of("agreement", 20, 1));
  CHECK(wide.frequency == 1.0);
  const auto narrow = periodic_vs_iid_agreement(100, Rational(1), 8, 4, plan_of("agreement", 50, 1));
  const auto middle = periodic_vs_iid_agreement(100, Rational(1), 64, 32, plan_of("agreement", 50, 1));
  CHECK(narrow.frequency <= middle.frequency);
  const auto pilot_point = periodic_vs_iid_agreement(400, Rational(1), 434, 217, plan_of("agreement", 200, 11, 4));
  CHECK(pilot_point.frequency >= 0.9);
}

TEST_CASE("pair sampling produces the requested geometry") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    for (auto family : {PairFamily::antipodal, PairFamily::adjacent, PairFamily::random}) {
      const auto [eta, zeta] = sample_pair(12, 5, family, seed);
      CHECK(eta.particles() == 5);
      CHECK(zeta.particles() == 5);
      std::vector<int> diff;
      for (int x = 0; x < 12; ++x)
        if (eta[x] != zeta[x]) diff.push_back(x);
      REQUIRE(diff.size() == 2);
      const int gap = diff[1] - diff[0];
      if (family == PairFamily::antipodal) CHECK(gap == 6);
      if (family == PairFamily::adjacent) CHECK((gap == 1 || gap == 11));
    }
  }
  CHECK(parse_pair_family("adjacent") == PairFamily::adjacent);
  CHECK(to_string(PairFamily::random) == "random");
  CHECK_THROWS_AS(parse_pair_family("diagonal"), std::invalid_argument);
}

TEST_CASE("coalescence scaling reports medians and refuses heavy censoring") {
  const auto half = [](int n) { return n / 2; };
  const auto generous = [](int n, int k) { return 40.0 * n * n / std::sqrt(static_cast<double>(k)); };
  const auto r = coalescence_scaling({8, 16}, half, {PairFamily::antipodal}, generous, plan_of("coalesce", 40, 2));
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].censored == 0);
  CHECK(r.rows[1].median_tau > r.rows[0].median_tau);
  CHECK_THROWS_AS(coalescence_scaling({16}, half, {PairFamily::antipodal}, [](int, int) { return 1e-3; },
                                      plan_of("coalesce", 40, 2)),
                  std::runtime_error);
}

TEST_CASE("gamma total variation") {
  CHECK(gamma_tv(50, 0.0) == 0.0);
  for (double s : {0.5, 0.9, 1.1, 1.7})
    CHECK(gamma_tv(1, s - 1) == doctest::Approx(oracle::exp_tv(s)).epsilon(1e-8));
  double prev = 0;
  for (double d : {0.001, 0.01, 0.05, 0.2}) {
    const double tv = gamma_tv(100, d);
    CHECK(tv > prev);
    CHECK(tv <= 3 * std::pow(100 * d * d, 0.25));
    prev = tv;
  }
  CHECK_THROWS_AS(gamma_tv(0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(gamma_tv(5, 1.0), std::invalid_argument);
}

TEST_CASE("the coalescence criterion becomes rare at large theta and never lies") {
  const auto rows = coalescence_event_frequency(32, 8, {0.25, 1.0, 16.0}, plan_of("geodesic-coalesce", 60, 21, 4));
  for (const auto& r : rows) CHECK(r.violations == 0);
  CHECK(rows[0].frequency >= rows[2].frequency);
  CHECK(rows[1].frequency >= 0.9);
  CHECK(rows[2].frequency <= 0.5);
  CHECK_THROWS_AS(coalescence_event_trial(10, 3, 1.0, plan_of("x", 1, 1)), std::invalid_argument);
}
