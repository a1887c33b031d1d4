#include <doctest.h>

#include <cmath>
#include <map>

#include "ctasep/estimators.hpp"
#include "ctasep/random.hpp"
#include "ctasep/ring.hpp"
#include "oracles/pair_chain.hpp"

using namespace ctasep;
using namespace ctasep::ring;

TEST_CASE("ring configurations validate size and particle count") {
  CHECK_THROWS_AS(RingConfig::parse("0000"), std::invalid_argument);
  CHECK_THROWS_AS(RingConfig::parse("1111"), std::invalid_argument);
  CHECK_THROWS_AS(RingConfig::parse("1"), std::invalid_argument);
  CHECK_THROWS_AS(RingConfig::parse("10x0"), std::invalid_argument);
  const auto c = RingConfig::parse("1100");
  CHECK(c.size() == 4);
  CHECK(c.particles() == 2);
  CHECK(c[4] == 1);
  CHECK(c[-1] == 0);
  CHECK(c.to_string() == "1100");
}

TEST_CASE("a ring moves a particle only onto a vacancy") {
  auto c = RingConfig::parse("1100");
  CHECK_FALSE(c.ring(0));
  CHECK(c.to_string() == "1100");
  CHECK(c.ring(1));
  CHECK(c.to_string() == "1010");
  CHECK_FALSE(c.ring(3));
  auto w = RingConfig::parse("0001");
  CHECK(w.ring(3));
  CHECK(w.to_string() == "1000");
}

TEST_CASE("rotation shifts sites") {
  const auto c = RingConfig::parse("11000");
  CHECK(c.rotated(1).to_string() == "01100");
  CHECK(c.rotated(-1).to_string() == "10001");
  CHECK(c.rotated(5) == c);
}

TEST_CASE("clocks are pure functions of seed, site and counter") {
  const ClockSource a(42), b(42), c(43);
  CHECK(a.inter_arrival(3, 7) == b.inter_arrival(3, 7));
  CHECK(a.inter_arrival(3, 7) != c.inter_arrival(3, 7));
  CHECK(a.inter_arrival(3, 7) > 0);
  const auto r = a.rotated(2, 10);
  CHECK(r.inter_arrival(5, 1) == a.inter_arrival(3, 1));
}

TEST_CASE("clock inter-arrival times have unit mean") {
  const ClockSource clocks(9);
  double s = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) s += clocks.inter_arrival(i % 7, static_cast<std::uint64_t>(i));
  CHECK(std::abs(s / n - 1.0) < 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("simulation conserves particles and is rotation equivariant") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto eta = estimators::sample_pair(11, 4, estimators::PairFamily::random, seed).first;
    const ClockSource clocks(seed);
    const auto path = simulate(eta, clocks, 15.0);
    for (double t : {0.0, 1.0, 5.5, 15.0}) CHECK(path.state_at(t).particles() == 4);
    const int shift = static_cast<int>(seed % 11);
    const auto moved = simulate(eta.rotated(shift), clocks.rotated(shift, 11), 15.0);
    for (double t : {0.5, 3.0, 9.0, 15.0}) CHECK(moved.state_at(t) == path.state_at(t).rotated(shift));
  }
}

TEST_CASE("applied events never exceed rings and state_at is right continuous") {
  const auto eta = RingConfig::parse("1110000");
  const auto path = simulate(eta, ClockSource(5), 10.0);
  REQUIRE_FALSE(path.events.empty());
  for (std::size_t i = 1; i < path.events.size(); ++i) CHECK(path.events[i - 1].time <= path.events[i].time);
  const auto& e = path.events.front();
  auto after = eta;
  after.ring(e.site);
  CHECK(path.state_at(e.time) == after);
  CHECK(path.state_at(std::nextafter(e.time, 0.0)) == eta);
  CHECK(path.applied_count(10.0) <= path.events.size());
}

TEST_CASE("simulate rejects a negative horizon") {
  CHECK_THROWS_AS(simulate(RingConfig::parse("10"), ClockSource(1), -1.0), std::invalid_argument);
}

TEST_CASE("the canonical coupling never increases the Hamming distance") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto a = estimators::sample_pair(12, 5, estimators::PairFamily::random, seed).first;
    const auto b = estimators::sample_pair(12, 5, estimators::PairFamily::random, seed + 1000).first;
    const std::vector<RingConfig> init{a, b};
    const auto paths = couple(init, ClockSource(seed), 20.0);
    int last = hamming_distance(a, b);
    for (const auto& e : paths[0].events) {
      const int d = hamming_distance(paths[0].state_at(e.time), paths[1].state_at(e.time));
      CHECK(d <= last);
      last = d;
    }
  }
}

TEST_CASE("disagreement labels follow the priority rule") {
  auto x = DisagreementConfig::parse("12020");
  x.ring(0);
  CHECK(x.to_string() == "21020");
  x.ring(1);
  CHECK(x.to_string() == "20120");
  auto y = DisagreementConfig::parse("20210");
  y.ring(0);
  CHECK(y.to_string() == "02210");
  CHECK_FALSE(y.ring(2));
  CHECK(y.to_string() == "02210");
  auto z = DisagreementConfig::parse("0221");
  CHECK(z.ring(1));
  CHECK(z.to_string() == "0011");
  CHECK_THROWS_AS(DisagreementConfig::parse("2100"), std::invalid_argument);
  CHECK_THROWS_AS(DisagreementConfig::parse("2220"), std::invalid_argument);
  CHECK_THROWS_AS(DisagreementConfig::parse("2130"), std::invalid_argument);
}

TEST_CASE("disagreement process equals the coupled pair until annihilation") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto [eta, zeta] = estimators::sample_pair(10, 4, estimators::PairFamily::random, seed);
    const ClockSource clocks(seed * 7);
    const std::vector<RingConfig> init{eta, zeta};
    const auto paths = couple(init, clocks, 200.0);
    std::size_t mismatches = 0;
    const auto out = evolve_disagreement(disagreement(eta, zeta), clocks, 200.0,
                                         [&](double t, Site, const DisagreementConfig& xi) {
                                           const auto a = paths[0].state_at(t), b = paths[1].state_at(t);
                                           if (a == b) return;
                                           if (!(disagreement(a, b) == xi)) ++mismatches;
                                         });
    CHECK(mismatches == 0);
    REQUIRE(out.tau);
    CHECK(paths[0].state_at(*out.tau) == paths[1].state_at(*out.tau));
    CHECK(paths[0].state_at(std::nextafter(*out.tau, 0.0)) != paths[1].state_at(std::nextafter(*out.tau, 0.0)));
    const auto fast = coalescence_time(eta, zeta, clocks, 200.0);
    REQUIRE(fast);
    CHECK(*fast == *out.tau);
  }
}

TEST_CASE("coalescence_time rejects pairs outside the pair space and reports censoring") {
  const auto a = RingConfig::parse("1100"), b = RingConfig::parse("0011");
  CHECK_THROWS_AS(coalescence_time(a, b, ClockSource(1), 10.0), std::invalid_argument);
  const auto [eta, zeta] = estimators::sample_pair(64, 32, estimators::PairFamily::antipodal, 3);
  CHECK_FALSE(coalescence_time(eta, zeta, ClockSource(1), 1e-3));
}

TEST_CASE("mean coalescence time on four sites matches the exact absorption oracle") {
  // adjacent family: one 1, one 0 and two adjacent 2s
  const auto means = oracle::pair_absorption_means(4, 1);
  std::map<std::vector<int>, int> seen;
  double exact = 0;
  const int runs = 20000;
  std::vector<double> taus;
  for (int r = 0; r < runs; ++r) {
    const auto [eta, zeta] = estimators::sample_pair(4, 2, estimators::PairFamily::adjacent, derive_seed(77, "pair", r));
    const auto xi = disagreement(eta, zeta);
    std::vector<int> key(xi.labels().begin(), xi.labels().end());
    exact += means.at(key);
    const auto t = coalescence_time(eta, zeta, ClockSource(derive_seed(77, "clock", r)), 1e6);
    REQUIRE(t);
    taus.push_back(*t);
  }
  exact /= runs;
  const double m = estimators::mean(taus);
  const double se = std::sqrt(estimators::sample_variance(taus) / runs);
  CHECK(std::abs(m - exact) <= 3 * se);
}

TEST_CASE("the four site example pair matches the absorption oracle") {
  const auto means = oracle::pair_absorption_means(4, 1);
  const auto eta = RingConfig::parse("1100"), zeta = RingConfig::parse("1010");
  const auto xi = disagreement(eta, zeta);
  const double exact = means.at(std::vector<int>(xi.labels().begin(), xi.labels().end()));
  const int runs = 10000;
  std::vector<double> taus;
  for (int r = 0; r < runs; ++r) {
    const auto t = coalescence_time(eta, zeta, ClockSource(derive_seed(78, "clock", r)), 1e6);
    REQUIRE(t);
    taus.push_back(*t);
  }
  const double se = std::sqrt(estimators::sample_variance(taus) / runs);
  CHECK(std::abs(estimators::mean(taus) - exact) <= 3 * se);
  CHECK_THROWS_AS(coalescence_time(eta, eta, ClockSource(1), 10.0), std::invalid_argument);
}
