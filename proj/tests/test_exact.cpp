#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>

#include "ctasep/exact.hpp"
#include "oracles/folded_poisson.hpp"
#include "oracles/hypergeometric.hpp"

using namespace ctasep::exact;

TEST_CASE("state spaces enumerate every configuration once, in order") {
  for (int n = 2; n <= 12; ++n)
    for (int k = 1; k < n; ++k) {
      const StateSpace sp(n, k);
      CHECK(sp.size() == oracle::choose(n, k));
      CHECK(std::is_sorted(sp.states().begin(), sp.states().end()));
      CHECK(std::adjacent_find(sp.states().begin(), sp.states().end()) == sp.states().end());
      for (std::size_t i = 0; i < sp.size(); i += 7) CHECK(sp.index(sp.state(i)) == i);
    }
  CHECK_THROWS_AS(StateSpace(5, 0), std::invalid_argument);
  CHECK_THROWS_AS(StateSpace(5, 5), std::invalid_argument);
  CHECK_THROWS(StateSpace(4, 2).index(0b0111));
}

TEST_CASE("rotation has order N and particle-hole is an involution") {
  const StateSpace sp(9, 4);
  const StateSpace dual(9, 5);
  for (auto m : sp.states()) {
    CHECK(sp.rotate(m, 9) == m);
    CHECK(sp.rotate(sp.rotate(m, 4), 5) == m);
    CHECK(std::popcount(sp.rotate(m, 3)) == 4);
    const auto h = sp.particle_hole(m);
    CHECK(std::popcount(h) == 5);
    CHECK(dual.particle_hole(h) == m);
  }
  CHECK(sp.to_string(sp.parse("110010100")) == "110010100");
}

TEST_CASE("generator rows sum to zero and the uniform law is stationary") {
  for (int n = 3; n <= 10; ++n)
    for (int k = 1; k < n; ++k) {
      const Chain c = build(n, k);
      const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(c.space.size()));
      CHECK((c.Q * ones).cwiseAbs().maxCoeff() < 1e-12);
      const Eigen::RowVectorXd u = ones.transpose() / static_cast<double>(c.space.size());
      CHECK((u * c.Q).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(c.max_exit_rate <= std::min(k, n - k));
    }
}

TEST_CASE("a single particle mixes like a folded Poisson variable") {
  for (int n : {3, 5, 8}) {
    const Chain c = build(n, 1);
    const WorstCase wc(c);
    CHECK(wc.exhaustive());
    std::vector<double> times{0.0, 0.3, 1.0, 2.5, 6.0};
    const auto curve = wc.curve(times);
    for (std::size_t i = 0; i < times.size(); ++i)
      CHECK(curve.values[i] == doctest::Approx(oracle::folded_poisson_tv(n, times[i])).epsilon(1e-9));
    // bisection on the oracle curve
    double lo = 0, hi = 100;
    for (int it = 0; it < 200; ++it) {
      const double mid = (lo + hi) / 2;
      (oracle::folded_poisson_tv(n, mid) <= 0.25 ? hi : lo) = mid;
    }
    CHECK(wc.mixing_times({0.25}).front().t_mix == doctest::Approx(hi).epsilon(1e-8));
  }
}

TEST_CASE("mixing times are symmetric under particle-hole exchange") {
  for (int k = 1; k < 8; ++k)
    CHECK(mixing_time(8, k, 0.25) == doctest::Approx(mixing_time(8, 8 - k, 0.25)).epsilon(1e-9));
}

TEST_CASE("mixing times decrease in epsilon") {
  const Chain c = build(8, 3);
  const auto r = WorstCase(c).mixing_times({0.1, 0.25, 0.5, 0.9});
  for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i - 1].t_mix > r[i].t_mix);
  CHECK_THROWS_AS(WorstCase(c).mixing_times({1.5}), std::invalid_argument);
  CHECK_THROWS_AS(WorstCase(c).mixing_times({0.0}), std::invalid_argument);
}

TEST_CASE("window counts follow the hypergeometric law") {
  for (int n = 2; n <= 12; ++n)
    for (int k = 1; k < n; ++k)
      for (int L = 1; L <= n; ++L) {
        const auto ours = window_count_law(n, k, L);
        const auto exact = oracle::hypergeometric_pmf(n, k, L);
        REQUIRE(ours.size() == exact.size());
        for (std::size_t z = 0; z < ours.size(); ++z) CHECK(std::abs(ours[z] - exact[z]) <= 1e-12);
      }
  CHECK_THROWS_AS(window_count_law(6, 3, 0), std::invalid_argument);
}

TEST_CASE("the no-cutoff ratio exceeds one") {
  const auto rows = no_cutoff_profile({6, 8}, [](int n) { return n / 2; }, 0.25);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.t_late > r.t_early);
    CHECK(r.ratio == doctest::Approx(r.t_late / r.t_early));
  }
  CHECK_THROWS_AS(no_cutoff_profile({6}, [](int) { return 3; }, 0.5), std::invalid_argument);
}

TEST_CASE("small generators") {
  const Chain three = build(3, 1);
  CHECK(three.space.size() == 3);
  for (int r = 0; r < 3; ++r) CHECK(three.Q.coeff(r, r) == -1.0);
  const Chain four = build(4, 2);
  CHECK(four.space.size() == 6);
  const auto i = static_cast<int>(four.space.index(four.space.parse("1100")));
  CHECK(four.Q.coeff(i, i) == -1.0);
  CHECK_THROWS(build(30, 15));
}

TEST_CASE("transient laws") {
  const Chain c = build(3, 1);
  Eigen::VectorXd p0 = Eigen::VectorXd::Zero(3);
  const auto start = c.space.index(c.space.parse("100"));
  p0(static_cast<Eigen::Index>(start)) = 1;
  CHECK((transient<double>(p0, c.Q, 0.0, 1e-14) - p0).norm() == 0.0);
  const auto p1 = transient<double>(p0, c.Q, 1.0, 1e-14);
  double stay = 0;
  for (int n = 0; n < 60; n += 3) stay += std::exp(-1.0 - std::lgamma(n + 1.0));
  CHECK(p1(static_cast<Eigen::Index>(start)) == doctest::Approx(stay).epsilon(1e-12));
  CHECK(p1.sum() == doctest::Approx(1.0).epsilon(1e-12));
  const Chain big = build(8, 3);
  const Eigen::VectorXd u = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(big.space.size()), 1.0 / big.space.size());
  CHECK((transient<double>(u, big.Q, 3.0, 1e-14) - u).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("particle-hole symmetry holds for the whole curve") {
  const std::vector<double> times{0.1, 0.5, 1.0, 2.0, 4.0, 8.0};
  for (int k = 1; k < 4; ++k) {
    const Chain a = build(9, k), b = build(9, 9 - k);
    const auto ca = WorstCase(a).curve(times), cb = WorstCase(b).curve(times);
    for (std::size_t i = 0; i < times.size(); ++i) CHECK(ca.values[i] == doctest::Approx(cb.values[i]).epsilon(1e-10));
    for (std::size_t i = 1; i < times.size(); ++i) CHECK(ca.values[i] <= ca.values[i - 1] + 1e-14);
  }
}

TEST_CASE("window law moments and the exact example") {
  CHECK(window_count_law(10, 4, 2)[0] == doctest::Approx(1.0 / 3));
  for (int n : {10, 15, 20})
    for (int k = 1; k < n; ++k) {
      const auto p = window_count_law(n, k, n / 5);
      double m = 0, v = 0;
      for (std::size_t z = 0; z < p.size(); ++z) m += z * p[z];
      for (std::size_t z = 0; z < p.size(); ++z) v += (z - m) * (z - m) * p[z];
      CHECK(m == doctest::Approx(k / 5.0));
      CHECK(v <= k / 5.0 + 1e-12);
    }
  for (int n = 13; n <= 20; ++n)
    for (int k = 1; k < n; ++k)
      for (int L = 1; L <= n; L += 3) {
        const auto ours = window_count_law(n, k, L);
        const auto exact = oracle::hypergeometric_pmf(n, k, L);
        for (std::size_t z = 0; z < ours.size(); ++z) CHECK(std::abs(ours[z] - exact[z]) <= 1e-12);
      }
}

TEST_CASE("single particle no-cutoff ratio matches the folded Poisson oracle") {
  auto solve = [](double eps) {
    double lo = 0, hi = 200;
    for (int it = 0; it < 200; ++it) {
      const double mid = (lo + hi) / 2;
      (oracle::folded_poisson_tv(6, mid) <= eps ? hi : lo) = mid;
    }
    return hi;
  };
  const auto rows = no_cutoff_profile({6}, [](int) { return 1; }, 0.25);
  CHECK(rows[0].ratio == doctest::Approx(solve(0.25) / solve(0.75)).epsilon(1e-7));
}
