#include "ctasep/lpp.hpp"

#include <cmath>
#include <set>

#include "ctasep/random.hpp"

namespace ctasep::lpp {

namespace {

using i128 = __int128;

std::int64_t floor_div128(i128 a, i128 b) {
  i128 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return static_cast<std::int64_t>(q);
}

std::int64_t checked(i128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
    throw std::overflow_error("rational overflow");
  return static_cast<std::int64_t>(v);
}

Rational make(i128 n, i128 d) {
  // reduce before narrowing
  i128 a = n < 0 ? -n : n, b = d < 0 ? -d : d;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    n /= a;
    d /= a;
  }
  return Rational(checked(n), checked(d));
}

}  // namespace

std::string to_string(Cell c) {
  return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")";
}

Rational operator+(Rational a, Rational b) {
  return make(i128(a.num) * b.den + i128(b.num) * a.den, i128(a.den) * b.den);
}
Rational operator-(Rational a, Rational b) {
  return make(i128(a.num) * b.den - i128(b.num) * a.den, i128(a.den) * b.den);
}
Rational operator*(Rational a, Rational b) {
  return make(i128(a.num) * b.num, i128(a.den) * b.den);
}

std::int64_t floor_affine(Rational m, std::int64_t x, Rational l) {
  const i128 num = i128(m.num) * x * l.den + i128(l.num) * m.den;
  return floor_div128(num, i128(m.den) * l.den);
}

Environment Environment::periodic(int n_sites, int particles, std::uint64_t seed) {
  if (particles < 1 || particles > n_sites - 1)
    throw std::invalid_argument("periodic environment needs 1 <= k <= N-1");
  return Environment(seed, n_sites, particles);
}

double Environment::weight(Cell v) const noexcept {
  const Cell c = canonical(v);
  return unit_exponential(hash_key(seed_, Domain::weight, static_cast<std::uint64_t>(c.x),
                                   static_cast<std::uint64_t>(c.y)));
}

bool LatticePath::contains(Cell c) const {
  return std::find(cells.begin(), cells.end(), c) != cells.end();
}

bool LatticePath::is_up_right() const {
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const Cell d = cells[i] - cells[i - 1];
    if (d != e1 && d != e2) return false;
  }
  return true;
}

bool intersects(const LatticePath& a, const LatticePath& b) {
  std::set<Cell> seen(a.cells.begin(), a.cells.end());
  for (Cell c : b.cells)
    if (seen.count(c)) return true;
  return false;
}

std::vector<Cell> Segment::cells() const {
  const Cell d = v - u;
  if (d.x == 0 && d.y == 0) return {u};
  // breakpoints t = a/b where a coordinate crosses an integer
  std::vector<std::pair<std::int64_t, std::int64_t>> ts;
  for (std::int64_t s : {d.x < 0 ? -d.x : d.x, d.y < 0 ? -d.y : d.y})
    for (std::int64_t j = 0; s > 0 && j <= s; ++j) ts.emplace_back(j, s);
  std::sort(ts.begin(), ts.end(), [](auto a, auto b) {
    return i128(a.first) * b.second < i128(b.first) * a.second;
  });
  auto at = [&](i128 a, i128 b) {
    return Cell{u.x + floor_div128(a * d.x, b), u.y + floor_div128(a * d.y, b)};
  };
  std::vector<Cell> out;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    out.push_back(at(ts[i].first, ts[i].second));
    if (i + 1 < ts.size()) {
      const i128 a = i128(ts[i].first) * ts[i + 1].second + i128(ts[i + 1].first) * ts[i].second;
      const i128 b = 2 * i128(ts[i].second) * ts[i + 1].second;
      out.push_back(at(a, b));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool Segment::contains(Cell c) const {
  const auto cs = cells();
  return std::binary_search(cs.begin(), cs.end(), c);
}

bool Parallelogram::contains(Cell v) const {
  if (v.x < 0 || v.x > n) return false;
  // 2·den·(v2 - m v1) compared with ±l·den'
  const Rational diff = Rational(v.y) - m * Rational(v.x);
  const Rational half{l.num, 2 * l.den};
  const i128 lhs = i128(diff.num) * half.den;
  const i128 rhs = i128(half.num) * diff.den;
  return -rhs <= lhs && lhs <= rhs;
}

bool in_slope_set(Rational m, Cell u, Cell v) {
  const Cell d = v - u;
  if (d.x <= 0 || m.num <= 0) return false;
  // m/10 < d.y/d.x < 10m
  const i128 s = i128(d.y) * m.den;
  return s * 10 > i128(m.num) * d.x && s < i128(10) * m.num * d.x;
}

double transversal_fluctuation(const LatticePath& path, Rational m) {
  if (path.empty()) throw std::invalid_argument("transversal fluctuation of an empty path");
  const Cell v = path.front();
  i128 best = 0;
  for (Cell c : path.cells) {
    const i128 dev = i128(c.y - v.y) * m.den - i128(m.num) * (c.x - v.x);
    best = std::max(best, dev < 0 ? -dev : dev);
  }
  return static_cast<double>(best) / static_cast<double>(m.den);
}

std::vector<Cell> translates(Cell v, int n_sites, int particles, std::int64_t lo, std::int64_t hi) {
  std::vector<Cell> out;
  const Cell p{n_sites - particles, -particles};
  for (std::int64_t i = lo; i <= hi; ++i) out.push_back(v + i * p);
  return out;
}

std::pair<std::int64_t, std::int64_t> admissible_translates(Cell u, Cell v, int n_sites,
                                                            int particles) {
  if (particles < 1 || particles > n_sites - 1)
    throw std::invalid_argument("translates need 1 <= k <= N-1");
  return {ceil_div(u.x - v.x, n_sites - particles), floor_div(v.y - u.y, particles)};
}

PeriodicPath periodic_best_path(const Environment& env, Cell u, Cell v, std::int64_t range_lo,
                                std::int64_t range_hi) {
  if (!env.is_periodic()) throw std::invalid_argument("periodic_best_path needs a periodic environment");
  const auto [lo, hi] = admissible_translates(u, v, env.n_sites(), env.particles());
  if (lo > hi) throw std::invalid_argument("no admissible translate of " + to_string(v));
  if (range_lo > lo || range_hi < hi)
    throw std::invalid_argument("search range [" + std::to_string(range_lo) + "," +
                                std::to_string(range_hi) + "] truncates admissible translates [" +
                                std::to_string(lo) + "," + std::to_string(hi) + "]");
  PeriodicPath best{{}, {}, 0, detail::kUnreached};
  for (std::int64_t i = lo; i <= hi; ++i) {
    const Cell w = v + i * env.period();
    const double t = lpt(env, u, w);
    if (t > best.value) best = {{}, w, i, t};
  }
  best.path = geodesic(env, u, best.target);
  return best;
}

}  // namespace ctasep::lpp
