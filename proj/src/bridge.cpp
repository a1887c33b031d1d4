#include "ctasep/bridge.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>

namespace ctasep::bridge {

namespace {

using lpp::e1;
using lpp::e2;
using lpp::floor_div;

enum : std::uint8_t { kNone = 0, kFromE1 = 1, kFromE2 = 2, kSource = 3 };

std::int64_t mod(std::int64_t a, std::int64_t n) { return ((a % n) + n) % n; }

}  // namespace

GrowthInterface::GrowthInterface(Cell anchor, std::vector<std::uint8_t> particle_steps)
    : anchor_(anchor), steps_(std::move(particle_steps)) {
  if (steps_.size() < 2) throw std::invalid_argument("growth interface needs period >= 2");
  for (auto s : steps_) {
    if (s > 1) throw std::invalid_argument("interface steps must be 0 (e1) or 1 (-e2)");
    k_ += s;
  }
  if (k_ < 1 || k_ > size() - 1) throw std::invalid_argument("interface needs 1 <= k <= N-1 down steps");
  prefix_.resize(steps_.size());
  prefix_[0] = anchor_;
  for (std::size_t i = 1; i < steps_.size(); ++i)
    prefix_[i] = prefix_[i - 1] + increment(static_cast<std::int64_t>(i - 1));
}

Cell GrowthInterface::point(std::int64_t i) const noexcept {
  const std::int64_t n = size();
  const std::int64_t q = floor_div(i, n);
  return prefix_[static_cast<std::size_t>(i - q * n)] + q * period();
}

GrowthInterface interface_from_config(const RingConfig& eta, Cell anchor) {
  return GrowthInterface(anchor, eta.occupancy());
}

RingConfig config_from_interface(const GrowthInterface& g) { return RingConfig(g.particle_steps()); }

CylinderGrowth::CylinderGrowth(const Environment& env, GrowthInterface g0)
    : env_(env), g0_(std::move(g0)), n_(g0_.size()) {
  if (!env_.is_periodic() || env_.n_sites() != n_ || env_.particles() != g0_.particles())
    throw std::invalid_argument("growth needs an (N,k)-periodic environment matching the interface");
  // same-depth dependencies: j-1 -> j when step j-1 is e1, j+1 -> j when step j is -e2
  std::vector<int> indegree(static_cast<std::size_t>(n_), 0);
  std::vector<std::vector<int>> out(static_cast<std::size_t>(n_));
  for (int j = 0; j < n_; ++j) {
    if (!g0_.particle_step(j - 1)) {
      out[static_cast<std::size_t>(mod(j - 1, n_))].push_back(j);
      ++indegree[static_cast<std::size_t>(j)];
    }
    if (g0_.particle_step(j)) {
      out[static_cast<std::size_t>(mod(j + 1, n_))].push_back(j);
      ++indegree[static_cast<std::size_t>(j)];
    }
  }
  std::vector<int> ready;
  for (int j = 0; j < n_; ++j)
    if (indegree[static_cast<std::size_t>(j)] == 0) ready.push_back(j);
  while (!ready.empty()) {
    const int j = ready.back();
    ready.pop_back();
    order_.push_back(j);
    for (int t : out[static_cast<std::size_t>(j)])
      if (--indegree[static_cast<std::size_t>(t)] == 0) ready.push_back(t);
  }
  if (static_cast<int>(order_.size()) != n_) throw std::logic_error("cyclic growth dependencies");
}

CylinderGrowth::Key CylinderGrowth::e1_pred(Key k) const noexcept {
  return {k.point - 1, k.depth - (g0_.particle_step(k.point - 1) ? 1 : 0)};
}

CylinderGrowth::Key CylinderGrowth::e2_pred(Key k) const noexcept {
  return {k.point + 1, k.depth - (g0_.particle_step(k.point) ? 0 : 1)};
}

void CylinderGrowth::ensure_depth(std::int64_t depth) {
  if (depth <= depth_) return;
  const auto total = static_cast<std::size_t>(depth * n_);
  occ_.resize(total);
  from_.resize(total);
  root_offset_.resize(total);
  for (std::int64_t s = depth_; s < depth; ++s) {
    for (int j : order_) {
      const Key k{j, s};
      double f = lpp::detail::kUnreached;
      std::uint8_t src = kNone;
      std::int32_t off = 0;
      if (s == 0) {
        f = 0.0;
        src = kSource;
      }
      const Key a = e1_pred(k);
      if (a.depth >= 0 && occ_[slot(a.point, a.depth)] >= f) {
        f = occ_[slot(a.point, a.depth)];
        src = kFromE1;
        off = root_offset_[slot(a.point, a.depth)] - 1;
      }
      const Key b = e2_pred(k);
      if (b.depth >= 0 && occ_[slot(b.point, b.depth)] >= f) {
        f = occ_[slot(b.point, b.depth)];
        src = kFromE2;
        off = root_offset_[slot(b.point, b.depth)] + 1;
      }
      const std::size_t i = slot(j, s);
      occ_[i] = f + env_.weight(cell_of(k));
      from_[i] = src;
      root_offset_[i] = off;
    }
  }
  depth_ = depth;
}

void CylinderGrowth::ensure_time(double t) {
  for (;;) {
    if (depth_ > 0) {
      bool done = true;
      for (int j = 0; j < n_ && done; ++j) done = occ_[slot(j, depth_ - 1)] > t;
      if (done) return;
    }
    ensure_depth(depth_ + std::max<std::int64_t>(8, depth_ / 2));
  }
}

std::optional<CylinderGrowth::Key> CylinderGrowth::key_of(Cell c) const {
  const std::int64_t j = g0_.index_on_diagonal(c);
  const Cell g = g0_.point(j);
  const std::int64_t depth = c.x - g.x;
  if (depth < 0) return std::nullopt;
  return Key{j, depth};
}

CylinderGrowth::Key CylinderGrowth::require_key(Cell c) {
  auto k = key_of(c);
  if (!k) throw std::invalid_argument("cell " + lpp::to_string(c) + " lies below the initial interface");
  ensure_depth(k->depth + 1);
  return *k;
}

double CylinderGrowth::occupation(std::int64_t point, std::int64_t depth) {
  if (depth < 0) throw std::invalid_argument("negative depth");
  ensure_depth(depth + 1);
  return occ_[slot(point, depth)];
}

double CylinderGrowth::occupation(Cell c) {
  const Key k = require_key(c);
  return occ_[slot(k.point, k.depth)];
}

double CylinderGrowth::activation(Cell c) {
  const Key k = require_key(c);
  double f = k.depth == 0 ? 0.0 : lpp::detail::kUnreached;
  const Key a = e1_pred(k), b = e2_pred(k);
  if (a.depth >= 0 && occ_[slot(a.point, a.depth)] >= f) f = occ_[slot(a.point, a.depth)];
  if (b.depth >= 0 && occ_[slot(b.point, b.depth)] >= f) f = occ_[slot(b.point, b.depth)];
  return f;
}

std::int64_t CylinderGrowth::root_index(Cell c) {
  const Key k = require_key(c);
  return k.point + root_offset_[slot(k.point, k.depth)];
}

LatticePath CylinderGrowth::geodesic_to(Cell c) {
  Key k = require_key(c);
  LatticePath p;
  for (;;) {
    p.cells.push_back(cell_of(k));
    const auto f = from_[slot(k.point, k.depth)];
    if (f == kSource) break;
    k = f == kFromE1 ? e1_pred(k) : e2_pred(k);
  }
  std::reverse(p.cells.begin(), p.cells.end());
  return p;
}

std::int64_t CylinderGrowth::filled(std::int64_t point, double t) {
  ensure_time(t);
  std::int64_t lo = 0, hi = depth_;  // first depth with occ > t lies in [lo, hi)
  while (lo < hi) {
    const std::int64_t mid = (lo + hi) / 2;
    if (occ_[slot(point, mid)] <= t)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

GrowthInterface CylinderGrowth::interface_at(double t) {
  ensure_time(t);
  std::vector<Cell> pts(static_cast<std::size_t>(n_) + 1);
  for (int j = 0; j < n_; ++j) {
    const std::int64_t s = filled(j, t);
    pts[static_cast<std::size_t>(j)] = g0_.point(j) + Cell{s, s};
  }
  pts[static_cast<std::size_t>(n_)] = pts[0] + g0_.period();
  std::vector<std::uint8_t> steps(static_cast<std::size_t>(n_));
  for (int j = 0; j < n_; ++j) {
    const Cell d = pts[static_cast<std::size_t>(j) + 1] - pts[static_cast<std::size_t>(j)];
    if (d == e1)
      steps[static_cast<std::size_t>(j)] = 0;
    else if (d == Cell{0, -1})
      steps[static_cast<std::size_t>(j)] = 1;
    else
      throw std::logic_error("grown region is not a staircase");
  }
  return GrowthInterface(pts[0], std::move(steps));
}

std::vector<FillEvent> CylinderGrowth::fills_until(double t) {
  ensure_time(t);
  std::vector<FillEvent> out;
  for (int j = 0; j < n_; ++j)
    for (std::int64_t s = 0; s < depth_ && occ_[slot(j, s)] <= t; ++s) out.push_back({occ_[slot(j, s)], j, s});
  std::sort(out.begin(), out.end(), [](const FillEvent& a, const FillEvent& b) {
    return a.time < b.time || (a.time == b.time && a.point < b.point);
  });
  return out;
}

GrowthInterface evolve_interface(const Environment& env, const GrowthInterface& g0, double t) {
  if (!(t >= 0)) throw std::invalid_argument("time must be nonnegative");
  CylinderGrowth growth(env, g0);
  return growth.interface_at(t);
}

std::vector<RingConfig> lpp_driven_tasep(const Environment& env, const RingConfig& eta0, double horizon,
                                         const std::vector<double>& sample_times) {
  CylinderGrowth growth(env, interface_from_config(eta0));
  std::vector<RingConfig> out;
  out.reserve(sample_times.size());
  for (double t : sample_times) {
    if (!(t >= 0 && t <= horizon)) throw std::invalid_argument("sample time outside [0, horizon]");
    out.push_back(config_from_interface(growth.interface_at(t)));
  }
  return out;
}

CompetitionState::CompetitionState(std::shared_ptr<CylinderGrowth> growth, int j, int j_tilde)
    : growth_(std::move(growth)), j_(j), jt_(j_tilde) {
  const auto& g = growth_->initial();
  if (!(0 <= j_ && j_ < jt_ && jt_ < g.size()))
    throw std::invalid_argument("competition indices need 0 <= j < j~ < N");
  if (!g.is_peak(j_) || !g.is_peak(jt_))
    throw std::invalid_argument("competition indices must sit at e1-then-(-e2) corners of G_0");
}

bool CompetitionState::in_plus_side(std::int64_t index) const noexcept {
  const std::int64_t r = mod(index, growth_->size());
  return r >= j_ && r <= jt_;
}

int CompetitionState::color(Cell c) const { return in_plus_side(growth_->root_index(c)) ? 1 : -1; }

CompetitionState competition_labels(const Environment& env, const GrowthInterface& g0, int j, int j_tilde) {
  return CompetitionState(std::make_shared<CylinderGrowth>(env, g0), j, j_tilde);
}

CompetitionInterfaces competition_interfaces(const CompetitionState& state, int steps) {
  if (steps < 0) throw std::invalid_argument("steps must be nonnegative");
  auto walk = [&](Cell start, int up_color) {
    InterfaceWalk w;
    w.points.push_back(start);
    w.times.push_back(0.0);
    Cell p = start;
    for (int n = 0; n < steps; ++n) {
      p = p + (state.color(p) == up_color ? e2 : e1);
      w.points.push_back(p);
      w.times.push_back(state.growth().occupation(p - Cell{1, 1}));
    }
    return w;
  };
  const auto& g = state.growth().initial();
  return {walk(g.point(state.j()), 1), walk(g.point(state.j_tilde()), -1)};
}

ExpandedPair expand_second_class(const DisagreementConfig& xi) {
  if (xi.count(2) != 2) throw std::invalid_argument("expansion needs exactly two second class particles");
  std::vector<std::uint8_t> occ;
  std::vector<int> peaks;
  for (std::uint8_t l : xi.labels()) {
    if (l == 2) {
      occ.push_back(0);
      occ.push_back(1);
      peaks.push_back(static_cast<int>(occ.size()) - 1);
    } else {
      occ.push_back(l);
    }
  }
  return {RingConfig(std::move(occ)), peaks[0], peaks[1]};
}

SecondClassRun coupled_second_class_run(const Environment& env, const DisagreementConfig& xi0, double cap,
                                        bool record_states) {
  SecondClassRun run{expand_second_class(xi0), {}, std::nullopt, {}};
  const int np = run.start.expanded.size();
  const int n = xi0.size();
  CylinderGrowth growth(env, interface_from_config(run.start.expanded));
  std::vector<std::uint8_t> occ = run.start.expanded.occupancy();
  std::array<int, 2> peak{run.start.j, run.start.j_tilde};
  int rotation = 0;
  auto is_dropped = [&](int s) { return s == mod(peak[0] - 1, np) || s == mod(peak[1] - 1, np); };
  // original ring index of expanded site s
  auto original = [&](int s) {
    int dropped = 0;
    for (int q = 0; q < 2; ++q) dropped += mod(peak[q] - 1, np) < s;
    return static_cast<int>(mod(s - dropped + rotation, n));
  };
  auto contract = [&] {
    std::vector<std::uint8_t> lab(static_cast<std::size_t>(n));
    for (int s = 0; s < np; ++s) {
      if (is_dropped(s)) continue;
      const bool second = s == peak[0] || s == peak[1];
      lab[static_cast<std::size_t>(original(s))] = second ? 2 : occ[static_cast<std::size_t>(s)];
    }
    return DisagreementConfig(std::move(lab));
  };
  DisagreementConfig current = xi0;

  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  std::vector<std::int64_t> next(static_cast<std::size_t>(np), 0);
  for (int j = 0; j < np; ++j) queue.push({growth.occupation(j, 0), j});
  while (!queue.empty()) {
    const auto [t, j] = queue.top();
    if (t > cap) break;
    queue.pop();
    const std::int64_t s = ++next[static_cast<std::size_t>(j)];
    queue.push({growth.occupation(j, s), j});

    const int from = static_cast<int>(mod(j - 1, np));
    if (occ[static_cast<std::size_t>(from)] != 1 || occ[static_cast<std::size_t>(j)] != 0)
      throw std::logic_error("fill event is not a particle jump");
    const int ring_site = original(from);
    int moved[2] = {0, 0};
    for (int q = 0; q < 2; ++q) {
      if (j == mod(peak[q] + 1, np)) moved[q] = 1;
      if (j == mod(peak[q] - 1, np)) moved[q] = -1;
    }
    if (moved[0] != 0 && moved[1] != 0) {
      run.tau = t;
      if (record_states) {
        current.ring(ring_site);
        run.states.push_back(current);
      }
      break;
    }
    occ[static_cast<std::size_t>(from)] = 0;
    occ[static_cast<std::size_t>(j)] = 1;
    for (int q = 0; q < 2; ++q) {
      if (moved[q] == 0) continue;
      const int old_hole = static_cast<int>(mod(peak[q] - 1, np));
      peak[q] = static_cast<int>(mod(peak[q] + moved[q], np));
      const int new_hole = static_cast<int>(mod(peak[q] - 1, np));
      if (old_hole == np - 1 && new_hole == 0) ++rotation;
      if (old_hole == 0 && new_hole == np - 1) --rotation;
      run.moves.push_back({t, q, moved[q]});
    }
    if (record_states) {
      current = contract();
      run.states.push_back(current);
    }
  }
  return run;
}

IdentityCheck check_interface_identity(const Environment& env, const DisagreementConfig& xi0, double cap) {
  const SecondClassRun run = coupled_second_class_run(env, xi0, cap);
  const double until = run.tau.value_or(cap);
  auto growth = std::make_shared<CylinderGrowth>(env, interface_from_config(run.start.expanded));
  const CompetitionState state(growth, run.start.j, run.start.j_tilde);
  int steps = 16;
  CompetitionInterfaces ci = competition_interfaces(state, steps);
  while (ci.phi.times.back() < until || ci.phi_tilde.times.back() < until) {
    steps *= 2;
    ci = competition_interfaces(state, steps);
  }
  IdentityCheck out{run.moves.size(), 0, run.tau};
  for (int p = 0; p < 2; ++p) {
    const InterfaceWalk& w = p == 0 ? ci.phi : ci.phi_tilde;
    std::vector<SecondClassMove> expected;
    for (std::size_t n = 1; n < w.points.size() && w.times[n] < until; ++n) {
      const Cell d = w.points[n] - w.points[n - 1];
      expected.push_back({w.times[n], p, d == e1 ? 1 : -1});
    }
    std::vector<SecondClassMove> actual;
    for (const auto& m : run.moves)
      if (m.particle == p) actual.push_back(m);
    const std::size_t common = std::min(expected.size(), actual.size());
    for (std::size_t i = 0; i < common; ++i)
      if (expected[i].time != actual[i].time || expected[i].delta != actual[i].delta) ++out.mismatches;
    out.mismatches += std::max(expected.size(), actual.size()) - common;
  }
  return out;
}

CriterionResult coalescence_criterion(CylinderGrowth& growth, Cell v) {
  if (v.x < 0 || v.y < 0) throw std::invalid_argument("criterion needs v in N^2");
  const auto& g = growth.initial();
  const int np = g.size();
  std::set<Cell> ends;
  for (Cell c : growth.geodesic_to(g.point(0) + v).cells) {
    ends.insert(c);
    ends.insert(c + g.period());
  }
  CriterionResult r{true, lpp::detail::kUnreached};
  for (int i = 0; i < np; ++i) r.bound = std::max(r.bound, growth.activation(g.point(i) + v));
  for (int i = 1; i < np && r.holds; ++i) {
    const auto path = growth.geodesic_to(g.point(i) + v);
    r.holds = std::any_of(path.cells.begin(), path.cells.end(), [&](Cell c) { return ends.count(c) > 0; });
  }
  return r;
}

CriterionResult coalescence_criterion(const Environment& env, const GrowthInterface& g0, Cell v) {
  CylinderGrowth growth(env, g0);
  return coalescence_criterion(growth, v);
}

bool geodesic_above(const LatticePath& upper, const LatticePath& lower) {
  std::map<std::int64_t, std::pair<std::int64_t, std::int64_t>> cols;
  for (Cell c : upper.cells) {
    auto [it, fresh] = cols.try_emplace(c.x, c.y, c.y);
    if (!fresh) {
      it->second.first = std::min(it->second.first, c.y);
      it->second.second = std::max(it->second.second, c.y);
    }
  }
  std::map<std::int64_t, std::pair<std::int64_t, std::int64_t>> low;
  for (Cell c : lower.cells) {
    auto [it, fresh] = low.try_emplace(c.x, c.y, c.y);
    if (!fresh) {
      it->second.first = std::min(it->second.first, c.y);
      it->second.second = std::max(it->second.second, c.y);
    }
  }
  for (const auto& [x, r] : low) {
    auto it = cols.find(x);
    if (it == cols.end()) continue;
    if (it->second.first < r.first || it->second.second < r.second) return false;
  }
  return true;
}

}  // namespace ctasep::bridge
