#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ctasep::ring {

using Site = int;

/// Occupancy of the discrete circle Z_N with k particles, 1 <= k <= N-1.
/// Sites are 0-based and cyclic: site N is site 0.
class RingConfig {
 public:
  explicit RingConfig(std::vector<std::uint8_t> occupancy);

  /// "1100" -> sites 0,1 occupied.
  static RingConfig parse(std::string_view bits);

  int size() const noexcept { return static_cast<int>(occ_.size()); }
  int particles() const noexcept { return k_; }
  const std::vector<std::uint8_t>& occupancy() const noexcept { return occ_; }

  std::uint8_t operator[](Site x) const noexcept { return occ_[wrap(x)]; }

  /// Particle at x and vacancy at x+1.
  bool jump_enabled(Site x) const noexcept {
    return occ_[wrap(x)] == 1 && occ_[wrap(x + 1)] == 0;
  }

  /// Applies a clock ring at site x; returns whether a particle moved.
  bool ring(Site x) noexcept;

  /// result[x + shift] == (*this)[x]
  RingConfig rotated(int shift) const;

  std::string to_string() const;

  friend bool operator==(const RingConfig&, const RingConfig&) = default;

 private:
  std::size_t wrap(Site x) const noexcept {
    const int n = size();
    return static_cast<std::size_t>(((x % n) + n) % n);
  }

  std::vector<std::uint8_t> occ_;
  int k_ = 0;
};

int hamming_distance(const RingConfig& a, const RingConfig& b);

/// Membership in the pair space: same N, same k, differing in exactly two sites.
bool in_pair_space(const RingConfig& a, const RingConfig& b);

/// Per-site unit-rate Poisson clocks. The j-th inter-arrival time of site x is
/// a pure function of (seed, x, j), so any number of coupled copies can share
/// the same clocks without sharing state.
class ClockSource {
 public:
  explicit ClockSource(std::uint64_t seed) noexcept : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  double inter_arrival(Site site, std::uint64_t counter) const noexcept;

  /// Clocks in which site x rings with the stream of site x - shift (mod n).
  ClockSource rotated(int shift, int n_sites) const;

 private:
  std::uint64_t seed_;
  int shift_ = 0;
  int n_sites_ = 0;
};

/// Global time order of rings over all sites. Equal times resolve to the
/// smaller site index.
class RingSchedule {
 public:
  RingSchedule(const ClockSource& clocks, int n_sites);

  double next_time() const noexcept { return heap_time_[0]; }
  Site next_site() const noexcept { return heap_site_[0]; }

  /// Consumes the earliest ring and schedules that site's following ring.
  void advance() noexcept;

 private:
  bool before(std::size_t a, std::size_t b) const noexcept {
    return heap_time_[a] < heap_time_[b] ||
           (heap_time_[a] == heap_time_[b] && heap_site_[a] < heap_site_[b]);
  }
  void sift_down(std::size_t slot) noexcept;

  ClockSource clocks_;
  std::vector<std::uint64_t> counter_;
  std::vector<double> heap_time_;
  std::vector<Site> heap_site_;
};

struct RingEvent {
  double time;
  Site site;
  bool applied;
};

/// Every clock ring up to the horizon, including suppressed ones.
struct Trajectory {
  RingConfig initial;
  std::vector<RingEvent> events;

  RingConfig state_at(double t) const;
  RingConfig final_state() const { return state_at(events.empty() ? 0.0 : events.back().time); }
  std::size_t applied_count(double t) const;
};

Trajectory simulate(const RingConfig& initial, const ClockSource& clocks, double horizon);

/// Canonical coupling: all copies see the identical ring sequence.
std::vector<Trajectory> couple(std::span<const RingConfig> initials, const ClockSource& clocks,
                               double horizon);

/// Labels 0 (vacant), 1 (first class), 2 (second class).
class DisagreementConfig {
 public:
  explicit DisagreementConfig(std::vector<std::uint8_t> labels);
  static DisagreementConfig parse(std::string_view labels);

  int size() const noexcept { return static_cast<int>(labels_.size()); }
  const std::vector<std::uint8_t>& labels() const noexcept { return labels_; }
  std::uint8_t operator[](Site x) const noexcept { return labels_[wrap(x)]; }

  int count(std::uint8_t label) const noexcept;
  /// Sites carrying label 2, in increasing order.
  std::vector<Site> second_class_sites() const;

  /// Applies the priority rule (1 > 2 > 0) for a ring at x. Two adjacent
  /// second class particles annihilate into (0, 1). Returns true on annihilation.
  bool ring(Site x) noexcept;

  std::string to_string() const;
  friend bool operator==(const DisagreementConfig&, const DisagreementConfig&) = default;

 private:
  std::size_t wrap(Site x) const noexcept {
    const int n = size();
    return static_cast<std::size_t>(((x % n) + n) % n);
  }

  std::vector<std::uint8_t> labels_;
};

DisagreementConfig disagreement(const RingConfig& a, const RingConfig& b);

struct DisagreementOutcome {
  DisagreementConfig final_state;
  std::optional<double> tau;  // empty: no annihilation up to the horizon
};

using DisagreementObserver = std::function<void(double time, Site site, const DisagreementConfig&)>;

DisagreementOutcome evolve_disagreement(const DisagreementConfig& initial, const ClockSource& clocks,
                                        double horizon, const DisagreementObserver& observer = {});

/// Coalescence time of the two second class particles of the pair, or empty
/// when it exceeds the cap (censored).
std::optional<double> coalescence_time(const RingConfig& eta, const RingConfig& zeta,
                                       const ClockSource& clocks, double cap);

}  // namespace ctasep::ring
