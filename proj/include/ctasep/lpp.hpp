#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ctasep::lpp {

struct Cell {
  std::int64_t x = 0;
  std::int64_t y = 0;

  friend constexpr Cell operator+(Cell a, Cell b) noexcept { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Cell operator-(Cell a, Cell b) noexcept { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Cell operator*(std::int64_t s, Cell a) noexcept { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Cell, Cell) = default;
  friend constexpr auto operator<=>(Cell, Cell) = default;
};

inline constexpr Cell e1{1, 0};
inline constexpr Cell e2{0, 1};

/// u ⪯ v
constexpr bool precedes(Cell u, Cell v) noexcept { return u.x <= v.x && u.y <= v.y; }
constexpr std::int64_t norm1(Cell v) noexcept { return v.x + v.y; }

std::string to_string(Cell c);

constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) noexcept {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}
constexpr std::int64_t ceil_div(std::int64_t a, std::int64_t b) noexcept { return -floor_div(-a, b); }

/// Exact rational p/q with q > 0 in lowest terms.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num(n), den(1) {}  // NOLINT(google-explicit-constructor)
  constexpr Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (d == 0) throw std::invalid_argument("rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
  friend constexpr bool operator==(Rational, Rational) = default;
};

Rational operator+(Rational a, Rational b);
Rational operator-(Rational a, Rational b);
Rational operator*(Rational a, Rational b);

/// floor(m * x + l), exact.
std::int64_t floor_affine(Rational m, std::int64_t x, Rational l);

/// Exponential(1) weights on Z², either i.i.d. or (N,k)-periodic.
class Environment {
 public:
  static Environment iid(std::uint64_t seed) { return Environment(seed, 0, 0); }
  static Environment periodic(int n_sites, int particles, std::uint64_t seed);

  bool is_periodic() const noexcept { return n_ > 0; }
  int n_sites() const noexcept { return n_; }
  int particles() const noexcept { return k_; }
  std::uint64_t seed() const noexcept { return seed_; }
  /// (N-k, -k)
  Cell period() const noexcept { return {n_ - k_, -k_}; }

  /// Representative with second coordinate in [0, k); identity for iid.
  Cell canonical(Cell v) const noexcept {
    if (n_ == 0) return v;
    return v + floor_div(v.y, k_) * period();
  }

  double weight(Cell v) const noexcept;
  double operator()(Cell v) const noexcept { return weight(v); }

 private:
  Environment(std::uint64_t seed, int n, int k) : seed_(seed), n_(n), k_(k) {}
  std::uint64_t seed_;
  int n_;
  int k_;
};

/// Up-right lattice path.
struct LatticePath {
  std::vector<Cell> cells;

  bool empty() const noexcept { return cells.empty(); }
  std::size_t size() const noexcept { return cells.size(); }
  Cell front() const { return cells.front(); }
  Cell back() const { return cells.back(); }
  bool contains(Cell c) const;
  bool is_up_right() const;

  /// Sum of weights over all cells but the last.
  template <class W>
  double passage_weight(const W& w) const {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < cells.size(); ++i) s += w(cells[i]);
    return s;
  }
};

bool intersects(const LatticePath& a, const LatticePath& b);

// ---------------------------------------------------------------------------
// Dynamic programming core. W is any callable double(Cell) returning positive
// weights. F(w) = max over predecessors p of F(p) + ω(p); exact ties go to the
// e₂ predecessor, then the e₁ predecessor, then a source.

namespace detail {

inline constexpr double kUnreached = -std::numeric_limits<double>::infinity();

enum : std::uint8_t { kNone = 0, kFromE1 = 1, kFromE2 = 2, kSource = 3 };

struct Grid {
  Cell lo;
  std::int64_t width = 0;
  std::int64_t height = 0;
  std::vector<double> value;
  std::vector<std::uint8_t> from;

  std::size_t index(Cell c) const noexcept {
    return static_cast<std::size_t>((c.y - lo.y) * width + (c.x - lo.x));
  }
  bool inside(Cell c) const noexcept {
    return c.x >= lo.x && c.y >= lo.y && c.x < lo.x + width && c.y < lo.y + height;
  }
  double at(Cell c) const noexcept { return value[index(c)]; }

  LatticePath backtrack(Cell end) const {
    LatticePath p;
    Cell c = end;
    for (;;) {
      p.cells.push_back(c);
      const auto f = from[index(c)];
      if (f == kSource || f == kNone) break;
      c = c - (f == kFromE1 ? e1 : e2);
    }
    std::reverse(p.cells.begin(), p.cells.end());
    return p;
  }
};

/// Fills F over the box [lo, hi]. is_source(c) marks cells with F = 0 allowed,
/// allowed(c) false removes the cell entirely.
template <class W, class Source, class Allowed>
Grid fill(const W& w, Cell lo, Cell hi, const Source& is_source, const Allowed& allowed) {
  Grid g;
  g.lo = lo;
  g.width = hi.x - lo.x + 1;
  g.height = hi.y - lo.y + 1;
  const auto total = static_cast<std::size_t>(g.width * g.height);
  g.value.assign(total, kUnreached);
  g.from.assign(total, kNone);
  // passage value F(c) + ω(c) of the previous row and of the left neighbour
  std::vector<double> below(static_cast<std::size_t>(g.width), kUnreached);
  for (std::int64_t j = 0; j < g.height; ++j) {
    double left = kUnreached;
    for (std::int64_t i = 0; i < g.width; ++i) {
      const Cell c{lo.x + i, lo.y + j};
      const std::size_t idx = static_cast<std::size_t>(j * g.width + i);
      double f = kUnreached;
      std::uint8_t src = kNone;
      if (allowed(c)) {
        if (is_source(c)) {
          f = 0.0;
          src = kSource;
        }
        if (left != kUnreached && left >= f) {
          f = left;
          src = kFromE1;
        }
        const double b = below[static_cast<std::size_t>(i)];
        if (b != kUnreached && b >= f) {
          f = b;
          src = kFromE2;
        }
      }
      g.value[idx] = f;
      g.from[idx] = src;
      left = (f == kUnreached) ? kUnreached : f + w(c);
      below[static_cast<std::size_t>(i)] = left;
    }
  }
  return g;
}

inline void require_ordered(Cell u, Cell v) {
  if (!precedes(u, v))
    throw std::invalid_argument("last passage time needs u ⪯ v, got " + to_string(u) + " and " +
                                to_string(v));
}

}  // namespace detail

/// T_{u,v}: max over up-right paths from u to v of the weight sum, excluding v.
template <class W>
double lpt(const W& w, Cell u, Cell v) {
  detail::require_ordered(u, v);
  const auto width = static_cast<std::size_t>(v.x - u.x + 1);
  std::vector<double> below(width, detail::kUnreached);
  double f = 0.0;
  for (std::int64_t y = u.y; y <= v.y; ++y) {
    double left = detail::kUnreached;
    for (std::size_t i = 0; i < width; ++i) {
      const Cell c{u.x + static_cast<std::int64_t>(i), y};
      if (y == u.y && i == 0) {
        f = 0.0;
      } else {
        f = left;
        if (below[i] >= f) f = below[i];
      }
      if (y == v.y && i + 1 == width) return f;
      left = f + w(c);
      below[i] = left;
    }
  }
  return f;
}

/// γ_{u,v}; exact ties prefer the e₂ predecessor.
template <class W>
LatticePath geodesic(const W& w, Cell u, Cell v) {
  detail::require_ordered(u, v);
  auto g = detail::fill(
      w, u, v, [u](Cell c) { return c == u; }, [](Cell) { return true; });
  return g.backtrack(v);
}

struct SetsResult {
  double value;
  Cell from;
  Cell to;
};

/// T_{A,B} = max over comparable pairs, with an attaining pair.
template <class W>
SetsResult lpt_sets(const W& w, std::span<const Cell> A, std::span<const Cell> B) {
  if (A.empty() || B.empty()) throw std::invalid_argument("lpt_sets needs nonempty sets");
  Cell lo = A.front(), hi = B.front();
  for (Cell a : A) lo = {std::min(lo.x, a.x), std::min(lo.y, a.y)};
  for (Cell b : B) hi = {std::max(hi.x, b.x), std::max(hi.y, b.y)};
  bool comparable = false;
  for (Cell a : A)
    for (Cell b : B) comparable = comparable || precedes(a, b);
  if (!comparable) throw std::invalid_argument("lpt_sets: no comparable pair");
  std::vector<Cell> sources(A.begin(), A.end());
  std::sort(sources.begin(), sources.end());
  auto g = detail::fill(
      w, lo, hi, [&](Cell c) { return std::binary_search(sources.begin(), sources.end(), c); },
      [](Cell) { return true; });
  SetsResult best{detail::kUnreached, {}, {}};
  for (Cell b : B) {
    if (!g.inside(b)) continue;
    const double f = g.at(b);
    if (f != detail::kUnreached && f > best.value) best = {f, g.backtrack(b).front(), b};
  }
  return best;
}

/// Discrete line: v ∈ L iff v.y == floor(m·v.x + l).
struct Line {
  Rational m;
  Rational l;

  std::int64_t y_at(std::int64_t x) const { return floor_affine(m, x, l); }
  bool contains(Cell v) const { return v.y == y_at(v.x); }
};

/// S(u,v) = {(⌊u1 + x(v1-u1)⌋, ⌊u2 + x(v2-u2)⌋) : x ∈ [0,1]}.
struct Segment {
  Cell u;
  Cell v;

  std::vector<Cell> cells() const;
  bool contains(Cell c) const;
};

/// U_{n,m,l}: 0 <= v1 <= n and v1·m - l/2 <= v2 <= v1·m + l/2.
struct Parallelogram {
  std::int64_t n;
  Rational m;
  Rational l;

  bool contains(Cell v) const;
};

/// Slope condition D_m: the slope of v - u lies in (m/10, 10m).
bool in_slope_set(Rational m, Cell u, Cell v);

/// Best path avoiding both lines L_{m,-l} and L_{m,l}; empty when infeasible.
template <class W>
std::optional<std::pair<double, LatticePath>> restricted_geodesic(const W& w, Cell u, Cell v,
                                                                  Rational m, Rational l) {
  detail::require_ordered(u, v);
  const Line lower{m, Rational(-l.num, l.den)}, upper{m, l};
  auto allowed = [&](Cell c) { return !lower.contains(c) && !upper.contains(c); };
  if (!allowed(u) || !allowed(v)) return std::nullopt;
  auto g = detail::fill(w, u, v, [u](Cell c) { return c == u; }, allowed);
  const double f = g.at(v);
  if (f == detail::kUnreached) return std::nullopt;
  return std::make_pair(f, g.backtrack(v));
}

template <class W>
std::optional<double> restricted_lpt(const W& w, Cell u, Cell v, Rational m, Rational l) {
  auto r = restricted_geodesic(w, u, v, m, l);
  if (!r) return std::nullopt;
  return r->first;
}

/// max |j - m·i| over path cells start + (i, j).
double transversal_fluctuation(const LatticePath& path, Rational m);

/// {v + i(N-k, -k) : i ∈ [lo, hi]}
std::vector<Cell> translates(Cell v, int n_sites, int particles, std::int64_t lo, std::int64_t hi);

/// Exact interval of i with v + i(N-k, -k) ⪰ u; empty when lo > hi.
std::pair<std::int64_t, std::int64_t> admissible_translates(Cell u, Cell v, int n_sites,
                                                            int particles);

struct PeriodicPath {
  LatticePath path;
  Cell target;
  std::int64_t index;
  double value;
};

/// Γ_{u,v}: geodesic to the translate of v with the largest passage time.
PeriodicPath periodic_best_path(const Environment& env, Cell u, Cell v, std::int64_t range_lo,
                                std::int64_t range_hi);

}  // namespace ctasep::lpp
