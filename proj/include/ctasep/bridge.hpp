#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "ctasep/lpp.hpp"
#include "ctasep/ring.hpp"

namespace ctasep::bridge {

using lpp::Cell;
using lpp::Environment;
using lpp::LatticePath;
using ring::DisagreementConfig;
using ring::RingConfig;

/// Bi-infinite down-right staircase g^i with g^0 = anchor. Site x of the ring
/// is the step g^{x+1} - g^x: e1 for a vacancy, -e2 for a particle.
class GrowthInterface {
 public:
  GrowthInterface(Cell anchor, std::vector<std::uint8_t> particle_steps);

  Cell anchor() const noexcept { return anchor_; }
  int size() const noexcept { return static_cast<int>(steps_.size()); }
  int particles() const noexcept { return k_; }
  const std::vector<std::uint8_t>& particle_steps() const noexcept { return steps_; }
  /// (N-k, -k)
  Cell period() const noexcept { return {size() - k_, -k_}; }

  bool particle_step(std::int64_t i) const noexcept { return steps_[wrap(i)] != 0; }
  /// g^{i+1} - g^i
  Cell increment(std::int64_t i) const noexcept { return particle_step(i) ? Cell{0, -1} : lpp::e1; }
  /// g^i for any integer i
  Cell point(std::int64_t i) const noexcept;

  /// Index of the staircase point on the diagonal x - y = d.
  std::int64_t index_on_diagonal(Cell c) const noexcept {
    return (c.x - c.y) - (anchor_.x - anchor_.y);
  }

  /// g^i - g^{i-1} = e1 and g^i - g^{i+1} = e2
  bool is_peak(std::int64_t i) const noexcept { return !particle_step(i - 1) && particle_step(i); }
  /// g^i - g^{i-1} = -e2 and g^{i+1} - g^i = e1
  bool is_valley(std::int64_t i) const noexcept { return particle_step(i - 1) && !particle_step(i); }

  friend bool operator==(const GrowthInterface&, const GrowthInterface&) = default;

 private:
  std::size_t wrap(std::int64_t i) const noexcept {
    const std::int64_t n = size();
    return static_cast<std::size_t>(((i % n) + n) % n);
  }

  Cell anchor_;
  std::vector<std::uint8_t> steps_;
  std::vector<Cell> prefix_;  // g^0 .. g^{N-1}
  int k_ = 0;
};

GrowthInterface interface_from_config(const RingConfig& eta, Cell anchor = {0, 0});
RingConfig config_from_interface(const GrowthInterface& g);

struct FillEvent {
  double time;
  std::int64_t point;  // staircase index in [0, N)
  std::int64_t depth;
};

/// Occupation times of the cells above an (N,k)-periodic initial staircase.
///
/// The cell with lower-left corner g_0^j + (s,s) is indexed (j mod N, s). It
/// fills at Occ = ω + max(0, Occ of its predecessors inside the ungrown
/// region), which equals T_{G_0, cell} + ω(cell). Periodicity of the
/// environment and of G_0 makes Occ periodic, so N diagonals suffice.
class CylinderGrowth {
 public:
  CylinderGrowth(const Environment& env, GrowthInterface g0);

  const GrowthInterface& initial() const noexcept { return g0_; }
  const Environment& environment() const noexcept { return env_; }
  int size() const noexcept { return n_; }
  std::int64_t computed_depth() const noexcept { return depth_; }

  void ensure_depth(std::int64_t depth);
  /// Extends until every diagonal has an unfilled cell at time t.
  void ensure_time(double t);

  struct Key {
    std::int64_t point;  // unreduced staircase index
    std::int64_t depth;
  };
  /// Empty when the cell lies below G_0.
  std::optional<Key> key_of(Cell c) const;
  Cell cell_of(Key k) const { return g0_.point(k.point) + Cell{k.depth, k.depth}; }

  double occupation(std::int64_t point, std::int64_t depth);
  double occupation(Cell c);
  /// T_{G_0, c}: the largest predecessor occupation time, 0 on a valley.
  double activation(Cell c);

  /// Unreduced staircase index of the root of the geodesic from G_0 to c.
  std::int64_t root_index(Cell c);
  /// γ_{G_0, c} in Z² coordinates, from its root on G_0 to c.
  LatticePath geodesic_to(Cell c);

  /// Filled cells on diagonal j at time t.
  std::int64_t filled(std::int64_t point, double t);
  GrowthInterface interface_at(double t);
  /// All fills with time <= t, ordered by time.
  std::vector<FillEvent> fills_until(double t);

 private:
  std::size_t slot(std::int64_t point, std::int64_t depth) const noexcept {
    const std::int64_t j = ((point % n_) + n_) % n_;
    return static_cast<std::size_t>(depth * n_ + j);
  }
  Key e1_pred(Key k) const noexcept;
  Key e2_pred(Key k) const noexcept;
  Key require_key(Cell c);

  Environment env_;
  GrowthInterface g0_;
  int n_;
  std::vector<int> order_;  // topological order of the same-depth dependencies
  std::int64_t depth_ = 0;  // computed depths are [0, depth_)
  std::vector<double> occ_;
  std::vector<std::uint8_t> from_;
  std::vector<std::int32_t> root_offset_;
};

/// G_t computed exactly on the cylinder.
GrowthInterface evolve_interface(const Environment& env, const GrowthInterface& g0, double t);

/// Ring configurations read off the growth interface at the sample times.
std::vector<RingConfig> lpp_driven_tasep(const Environment& env, const RingConfig& eta0, double horizon,
                                         const std::vector<double>& sample_times);

/// H_+/H_- coloring relative to G_+ = {g^i : i mod N in [j, j~]}.
class CompetitionState {
 public:
  CompetitionState(std::shared_ptr<CylinderGrowth> growth, int j, int j_tilde);

  int j() const noexcept { return j_; }
  int j_tilde() const noexcept { return jt_; }
  CylinderGrowth& growth() const noexcept { return *growth_; }

  bool in_plus_side(std::int64_t index) const noexcept;
  /// +1 for H_+, -1 for H_-; the cell must lie in the ungrown region.
  int color(Cell c) const;

 private:
  std::shared_ptr<CylinderGrowth> growth_;
  int j_;
  int jt_;
};

CompetitionState competition_labels(const Environment& env, const GrowthInterface& g0, int j, int j_tilde);

struct InterfaceWalk {
  std::vector<Cell> points;   // φ_1, φ_2, ... (stalls omitted)
  std::vector<double> times;  // times[n] = Occ(points[n] - (1,1)); times[0] = 0
};

struct CompetitionInterfaces {
  InterfaceWalk phi;
  InterfaceWalk phi_tilde;
};

CompetitionInterfaces competition_interfaces(const CompetitionState& state, int steps);

/// Ring of size N+2 with each second class particle replaced by a (0,1) pair.
struct ExpandedPair {
  RingConfig expanded;
  int j;        // staircase index of the first pair's peak
  int j_tilde;  // staircase index of the second pair's peak
};
ExpandedPair expand_second_class(const DisagreementConfig& xi);

struct SecondClassMove {
  double time;
  int particle;  // 0: pair at j, 1: pair at j~
  int delta;     // +1 clockwise, -1 counter-clockwise
};

struct SecondClassRun {
  ExpandedPair start;
  std::vector<SecondClassMove> moves;  // before annihilation
  std::optional<double> tau;
  std::vector<DisagreementConfig> states;  // contracted ξ after each event, when recorded
};

/// Disagreement process read from the fill events of an (N+2,k+1)-periodic
/// environment: fills are particle jumps of the expanded ring, the pairs are
/// the second class particles.
SecondClassRun coupled_second_class_run(const Environment& env, const DisagreementConfig& xi0,
                                        double cap, bool record_states = false);

struct IdentityCheck {
  std::size_t moves;       // second class moves before τ (or the cap)
  std::size_t mismatches;  // positions where (time, ±1) differs from the interface steps
  std::optional<double> tau;
};

/// Compares each second class trajectory with the displacement
/// (φ¹_n - φ¹_1) - (φ²_n - φ²_1) of its competition interface, step by step.
IdentityCheck check_interface_identity(const Environment& env, const DisagreementConfig& xi0, double cap);

struct CriterionResult {
  bool holds;
  double bound;  // T_{G_0, G_0 + v}
};

/// Event C: every γ_{G_0, g^i + v}, 1 <= i <= N'-1, meets γ_{G_0, g^0 + v} or
/// γ_{G_0, g^{N'} + v}, where N' is the period of G_0.
CriterionResult coalescence_criterion(CylinderGrowth& growth, Cell v);
CriterionResult coalescence_criterion(const Environment& env, const GrowthInterface& g0, Cell v);

/// γ_1 ⪰_g γ_2: in every shared column, γ_1 lies weakly above γ_2.
bool geodesic_above(const LatticePath& upper, const LatticePath& lower);

}  // namespace ctasep::bridge
