#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ctasep/lpp.hpp"
#include "ctasep/random.hpp"
#include "oracles/brute_lpp.hpp"

using namespace ctasep;
using namespace ctasep::lpp;

namespace {

Cell random_cell(std::uint64_t seed, std::uint64_t i, std::int64_t lo, std::int64_t span) {
  const auto b = hash_key(seed, Domain::sample, i, 0);
  return {lo + static_cast<std::int64_t>(b % static_cast<std::uint64_t>(span)),
          lo + static_cast<std::int64_t>((b >> 32) % static_cast<std::uint64_t>(span))};
}

}  // namespace

TEST_CASE("rationals normalize and floor_affine is exact") {
  CHECK(Rational(4, -6) == Rational(-2, 3));
  CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
  CHECK(Rational(2, 3) * Rational(3, 4) == Rational(1, 2));
  CHECK_THROWS_AS(Rational(1, 0), std::invalid_argument);
  for (std::int64_t x = -20; x <= 20; ++x)
    for (auto [p, q] : {std::pair{1, 3}, {-5, 7}, {9, 4}}) {
      const Rational m(p, q), l(1, 2);
      const auto expect = static_cast<std::int64_t>(std::floor(static_cast<double>(p * x) / q + 0.5));
      CHECK(floor_affine(m, x, l) == expect);
    }
  CHECK(floor_div(-7, 2) == -4);
  CHECK(ceil_div(-7, 2) == -3);
}

TEST_CASE("the i.i.d. field is deterministic and positive") {
  const auto w = Environment::iid(5);
  CHECK(w(Cell{3, 4}) == Environment::iid(5)(Cell{3, 4}));
  CHECK(w(Cell{3, 4}) != Environment::iid(6)(Cell{3, 4}));
  double s = 0;
  for (int x = 0; x < 300; ++x)
    for (int y = 0; y < 300; ++y) {
      CHECK_UNARY(w(Cell{x, y}) > 0);
      s += w(Cell{x, y});
    }
  CHECK(std::abs(s / 90000 - 1.0) < 0.02);
}

TEST_CASE("the periodic field is invariant under its period") {
  const auto w = Environment::periodic(9, 3, 11);
  CHECK(w.period() == Cell{6, -3});
  for (int i = 0; i < 200; ++i) {
    const Cell v = random_cell(3, static_cast<std::uint64_t>(i), -50, 100);
    CHECK(w(v) == w(v + w.period()));
    CHECK(w(v) == w(v - 4 * w.period()));
    const Cell c = w.canonical(v);
    CHECK(c.y >= 0);
    CHECK(c.y < 3);
  }
  CHECK_THROWS_AS(Environment::periodic(3, 3, 1), std::invalid_argument);
}

TEST_CASE("T_{0,(1,1)} is the 2x2 identity") {
  const auto w = Environment::iid(21);
  const double expect = w(Cell{0, 0}) + std::max(w(Cell{1, 0}), w(Cell{0, 1}));
  CHECK(lpt(w, Cell{0, 0}, Cell{1, 1}) == expect);
  CHECK(lpt(w, Cell{2, 2}, Cell{2, 2}) == 0.0);
}

TEST_CASE("last passage times agree with exhaustive enumeration") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto w = seed % 2 ? Environment::iid(seed) : Environment::periodic(5, 2, seed);
    const Cell u = random_cell(seed, 0, -3, 4);
    const Cell v = u + random_cell(seed, 1, 0, 6);
    const auto brute = oracle::brute_lpt(w, u, v);
    CHECK(lpt(w, u, v) == doctest::Approx(brute.value).epsilon(1e-12));
    const auto g = geodesic(w, u, v);
    CHECK(g.is_up_right());
    CHECK(g.front() == u);
    CHECK(g.back() == v);
    CHECK(g.passage_weight(w) == lpt(w, u, v));
    // periodic weights can tie exactly, then any maximizer will do
    if (brute.argmax.size() == 1) CHECK(g.cells == brute.argmax.front());
    else CHECK(std::find(brute.argmax.begin(), brute.argmax.end(), g.cells) != brute.argmax.end());
  }
}

TEST_CASE("exact ties prefer the e2 predecessor") {
  const auto ones = [](Cell) { return 1.0; };
  const auto g = geodesic(ones, Cell{0, 0}, Cell{2, 2});
  // backtracking takes e2 steps first, so the path runs right along the bottom
  const std::vector<Cell> expect{{0, 0}, {1, 0}, {2, 0}, {2, 1}, {2, 2}};
  CHECK(g.cells == expect);
}

TEST_CASE("unordered endpoints are rejected") {
  const auto w = Environment::iid(1);
  CHECK_THROWS_AS(lpt(w, Cell{2, 0}, Cell{1, 5}), std::invalid_argument);
  CHECK_THROWS_AS(geodesic(w, Cell{0, 3}, Cell{1, 2}), std::invalid_argument);
}

TEST_CASE("set to set passage times maximize over comparable pairs") {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const auto w = Environment::iid(seed + 100);
    std::vector<Cell> A{{0, 3}, {1, 1}, {3, 0}}, B{{4, 6}, {6, 4}, {2, 7}};
    double best = -1;
    for (Cell a : A)
      for (Cell b : B)
        if (precedes(a, b)) best = std::max(best, oracle::brute_lpt(w, a, b).value);
    const auto r = lpt_sets(w, std::span<const Cell>(A), std::span<const Cell>(B));
    CHECK(r.value == doctest::Approx(best).epsilon(1e-12));
    CHECK(lpt(w, r.from, r.to) == doctest::Approx(r.value).epsilon(1e-12));
  }
  const std::vector<Cell> A{{5, 5}}, B{{0, 0}};
  CHECK_THROWS_AS(lpt_sets(Environment::iid(1), std::span<const Cell>(A), std::span<const Cell>(B)),
                  std::invalid_argument);
}

TEST_CASE("lines, segments and parallelograms") {
  const Line L{Rational(1, 2), Rational(1)};
  CHECK(L.y_at(3) == 2);
  CHECK(L.contains(Cell{4, 3}));
  CHECK_FALSE(L.contains(Cell{4, 4}));
  const Segment s{{0, 0}, {3, 2}};
  const auto cells = s.cells();
  CHECK(cells.front() == Cell{0, 0});
  CHECK(cells.back() == Cell{3, 2});
  for (Cell c : cells) CHECK(s.contains(c));
  for (std::size_t i = 1; i < cells.size(); ++i) CHECK(precedes(cells[i - 1], cells[i]));
  CHECK_FALSE(s.contains(Cell{0, 2}));
  const Parallelogram P{10, Rational(1), Rational(4)};
  CHECK(P.contains(Cell{5, 7}));
  CHECK_FALSE(P.contains(Cell{5, 8}));
  CHECK_FALSE(P.contains(Cell{11, 11}));
}

TEST_CASE("slope set and transversal fluctuation") {
  CHECK(in_slope_set(Rational(1), Cell{0, 0}, Cell{10, 10}));
  CHECK_FALSE(in_slope_set(Rational(1), Cell{0, 0}, Cell{10, 0}));
  CHECK_FALSE(in_slope_set(Rational(1), Cell{0, 0}, Cell{1, 10}));
  CHECK(in_slope_set(Rational(1), Cell{0, 0}, Cell{2, 19}));
  LatticePath diag{{{0, 0}, {1, 0}, {1, 1}, {2, 1}, {2, 2}}};
  CHECK(transversal_fluctuation(diag, Rational(1)) == 1.0);
  LatticePath corner{{{0, 0}, {0, 1}, {0, 2}, {1, 2}, {2, 2}}};
  CHECK(transversal_fluctuation(corner, Rational(1)) == 2.0);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    // a path with n+1 columns never deviates by more than n at slope 1
    const auto g = geodesic(Environment::iid(seed), Cell{0, 0}, Cell{2, 2});
    CHECK(transversal_fluctuation(g, Rational(1)) <= 2.0);
  }
}

TEST_CASE("restricted passage times avoid both lines") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto w = Environment::iid(seed);
    const Cell u{0, 0}, v{12, 12};
    const Rational m(1), l(3);
    const auto r = restricted_geodesic(w, u, v, m, l);
    REQUIRE(r);
    for (Cell c : r->second.cells) {
      CHECK_FALSE(Line{m, l}.contains(c));
      CHECK_FALSE(Line{m, Rational(-3)}.contains(c));
    }
    CHECK(r->first <= lpt(w, u, v));
    // far away lines do not bind
    CHECK(*restricted_lpt(w, u, v, m, Rational(40)) == lpt(w, u, v));
  }
  CHECK_FALSE(restricted_lpt(Environment::iid(1), Cell{0, 0}, Cell{5, 5}, Rational(1), Rational(0)));
}

TEST_CASE("admissible translates and periodic best paths") {
  const int n = 7, k = 3;
  for (int i = 0; i < 30; ++i) {
    const Cell u = random_cell(9, static_cast<std::uint64_t>(i), -5, 10);
    const Cell v = random_cell(10, static_cast<std::uint64_t>(i), 0, 20);
    const auto [lo, hi] = admissible_translates(u, v, n, k);
    for (std::int64_t j = -20; j <= 20; ++j) {
      const Cell t = v + j * Cell{n - k, -k};
      CHECK(precedes(u, t) == (j >= lo && j <= hi));
    }
  }
  const auto env = Environment::periodic(n, k, 4);
  const Cell u{0, 0}, v{10, 8};
  const auto [lo, hi] = admissible_translates(u, v, n, k);
  const auto best = periodic_best_path(env, u, v, lo, hi);
  double expect = -1;
  for (Cell t : translates(v, n, k, lo, hi)) expect = std::max(expect, lpt(env, u, t));
  CHECK(best.value == expect);
  CHECK(best.path.back() == best.target);
  CHECK_THROWS_AS(periodic_best_path(env, u, v, lo + 1, hi), std::invalid_argument);
  CHECK_THROWS_AS(periodic_best_path(env, Cell{100, 100}, Cell{0, 0}, 0, 0), std::invalid_argument);
}
