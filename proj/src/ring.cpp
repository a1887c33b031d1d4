#include "ctasep/ring.hpp"

#include <algorithm>
#include <stdexcept>

#include "ctasep/random.hpp"

namespace ctasep::ring {

namespace {

int priority(std::uint8_t label) noexcept {
  // 1 > 2 > 0
  return label == 1 ? 2 : (label == 2 ? 1 : 0);
}

}  // namespace

RingConfig::RingConfig(std::vector<std::uint8_t> occupancy) : occ_(std::move(occupancy)) {
  if (occ_.size() < 2) throw std::invalid_argument("ring needs at least 2 sites");
  for (auto v : occ_) {
    if (v > 1) throw std::invalid_argument("occupancy values must be 0 or 1");
    k_ += v;
  }
  if (k_ < 1 || k_ > size() - 1)
    throw std::invalid_argument("particle count k must satisfy 1 <= k <= N-1");
}

RingConfig RingConfig::parse(std::string_view bits) {
  std::vector<std::uint8_t> occ;
  occ.reserve(bits.size());
  for (char c : bits) {
    if (c != '0' && c != '1') throw std::invalid_argument("configuration string must be over {0,1}");
    occ.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return RingConfig(std::move(occ));
}

bool RingConfig::ring(Site x) noexcept {
  const auto a = wrap(x), b = wrap(x + 1);
  if (occ_[a] == 1 && occ_[b] == 0) {
    occ_[a] = 0;
    occ_[b] = 1;
    return true;
  }
  return false;
}

RingConfig RingConfig::rotated(int shift) const {
  std::vector<std::uint8_t> out(occ_.size());
  for (int x = 0; x < size(); ++x) out[wrap(x + shift)] = occ_[static_cast<std::size_t>(x)];
  return RingConfig(std::move(out));
}

std::string RingConfig::to_string() const {
  std::string s;
  s.reserve(occ_.size());
  for (auto v : occ_) s.push_back(static_cast<char>('0' + v));
  return s;
}

int hamming_distance(const RingConfig& a, const RingConfig& b) {
  if (a.size() != b.size()) throw std::invalid_argument("configurations have different N");
  int d = 0;
  for (int x = 0; x < a.size(); ++x) d += a[x] != b[x];
  return d;
}

bool in_pair_space(const RingConfig& a, const RingConfig& b) {
  return a.size() == b.size() && a.particles() == b.particles() && hamming_distance(a, b) == 2;
}

double ClockSource::inter_arrival(Site site, std::uint64_t counter) const noexcept {
  Site s = site;
  if (n_sites_ > 0) s = ((site - shift_) % n_sites_ + n_sites_) % n_sites_;
  return unit_exponential(hash_key(seed_, Domain::clock, static_cast<std::uint64_t>(s), counter));
}

ClockSource ClockSource::rotated(int shift, int n_sites) const {
  if (n_sites <= 0) throw std::invalid_argument("rotation needs a positive ring size");
  if (n_sites_ != 0 && n_sites_ != n_sites) throw std::invalid_argument("rotation ring size mismatch");
  ClockSource out = *this;
  out.n_sites_ = n_sites;
  out.shift_ = ((shift_ + shift) % n_sites + n_sites) % n_sites;
  return out;
}

RingSchedule::RingSchedule(const ClockSource& clocks, int n_sites)
    : clocks_(clocks),
      counter_(static_cast<std::size_t>(n_sites), 0),
      heap_time_(static_cast<std::size_t>(n_sites)),
      heap_site_(static_cast<std::size_t>(n_sites)) {
  if (n_sites < 1) throw std::invalid_argument("schedule needs at least one site");
  for (Site x = 0; x < n_sites; ++x) {
    heap_time_[static_cast<std::size_t>(x)] = clocks_.inter_arrival(x, 0);
    heap_site_[static_cast<std::size_t>(x)] = x;
  }
  for (std::size_t i = heap_time_.size() / 2; i-- > 0;) sift_down(i);
}

void RingSchedule::advance() noexcept {
  const Site x = heap_site_[0];
  auto& c = counter_[static_cast<std::size_t>(x)];
  ++c;
  heap_time_[0] += clocks_.inter_arrival(x, c);
  sift_down(0);
}

void RingSchedule::sift_down(std::size_t slot) noexcept {
  const std::size_t n = heap_time_.size();
  for (;;) {
    std::size_t best = slot;
    const std::size_t l = 2 * slot + 1, r = l + 1;
    if (l < n && before(l, best)) best = l;
    if (r < n && before(r, best)) best = r;
    if (best == slot) return;
    std::swap(heap_time_[slot], heap_time_[best]);
    std::swap(heap_site_[slot], heap_site_[best]);
    slot = best;
  }
}

RingConfig Trajectory::state_at(double t) const {
  RingConfig s = initial;
  for (const auto& e : events) {
    if (e.time > t) break;
    s.ring(e.site);
  }
  return s;
}

std::size_t Trajectory::applied_count(double t) const {
  std::size_t c = 0;
  for (const auto& e : events) {
    if (e.time > t) break;
    c += e.applied;
  }
  return c;
}

Trajectory simulate(const RingConfig& initial, const ClockSource& clocks, double horizon) {
  const RingConfig copies[] = {initial};
  return std::move(couple(copies, clocks, horizon).front());
}

std::vector<Trajectory> couple(std::span<const RingConfig> initials, const ClockSource& clocks,
                               double horizon) {
  if (!(horizon >= 0)) throw std::invalid_argument("horizon must be nonnegative");
  if (initials.empty()) return {};
  const int n = initials.front().size();
  for (const auto& c : initials)
    if (c.size() != n) throw std::invalid_argument("coupled copies must share N");

  std::vector<Trajectory> out;
  std::vector<RingConfig> state(initials.begin(), initials.end());
  for (const auto& c : initials) out.push_back(Trajectory{c, {}});

  RingSchedule schedule(clocks, n);
  while (schedule.next_time() <= horizon) {
    const double t = schedule.next_time();
    const Site x = schedule.next_site();
    for (std::size_t i = 0; i < state.size(); ++i)
      out[i].events.push_back(RingEvent{t, x, state[i].ring(x)});
    schedule.advance();
  }
  return out;
}

DisagreementConfig::DisagreementConfig(std::vector<std::uint8_t> labels) : labels_(std::move(labels)) {
  if (labels_.size() < 2) throw std::invalid_argument("ring needs at least 2 sites");
  for (auto v : labels_)
    if (v > 2) throw std::invalid_argument("labels must be 0, 1 or 2");
  const int twos = count(2);
  if (twos != 0 && twos != 2) throw std::invalid_argument("label 2 must appear 0 or 2 times");
}

DisagreementConfig DisagreementConfig::parse(std::string_view labels) {
  std::vector<std::uint8_t> out;
  for (char c : labels) {
    if (c < '0' || c > '2') throw std::invalid_argument("labels string must be over {0,1,2}");
    out.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return DisagreementConfig(std::move(out));
}

int DisagreementConfig::count(std::uint8_t label) const noexcept {
  return static_cast<int>(std::count(labels_.begin(), labels_.end(), label));
}

std::vector<Site> DisagreementConfig::second_class_sites() const {
  std::vector<Site> out;
  for (int x = 0; x < size(); ++x)
    if (labels_[static_cast<std::size_t>(x)] == 2) out.push_back(x);
  return out;
}

bool DisagreementConfig::ring(Site x) noexcept {
  auto& a = labels_[wrap(x)];
  auto& b = labels_[wrap(x + 1)];
  if (a == 2 && b == 2) {
    a = 0;
    b = 1;
    return true;
  }
  if (priority(a) > priority(b)) std::swap(a, b);
  return false;
}

std::string DisagreementConfig::to_string() const {
  std::string s;
  for (auto v : labels_) s.push_back(static_cast<char>('0' + v));
  return s;
}

DisagreementConfig disagreement(const RingConfig& a, const RingConfig& b) {
  if (a.size() != b.size()) throw std::invalid_argument("disagreement: mismatched N");
  if (a.particles() != b.particles()) throw std::invalid_argument("disagreement: mismatched k");
  std::vector<std::uint8_t> labels(static_cast<std::size_t>(a.size()));
  for (int x = 0; x < a.size(); ++x)
    labels[static_cast<std::size_t>(x)] =
        static_cast<std::uint8_t>((a[x] == 1 && b[x] == 1) + 2 * (a[x] != b[x]));
  return DisagreementConfig(std::move(labels));
}

DisagreementOutcome evolve_disagreement(const DisagreementConfig& initial, const ClockSource& clocks,
                                        double horizon, const DisagreementObserver& observer) {
  if (initial.count(2) != 2)
    throw std::invalid_argument("evolve_disagreement needs exactly two second class particles");
  if (!(horizon >= 0)) throw std::invalid_argument("horizon must be nonnegative");
  DisagreementOutcome out{initial, std::nullopt};
  RingSchedule schedule(clocks, initial.size());
  while (schedule.next_time() <= horizon) {
    const double t = schedule.next_time();
    const Site x = schedule.next_site();
    if (out.final_state.ring(x)) out.tau = t;
    if (observer) observer(t, x, out.final_state);
    schedule.advance();
  }
  return out;
}

std::optional<double> coalescence_time(const RingConfig& eta, const RingConfig& zeta,
                                       const ClockSource& clocks, double cap) {
  if (!in_pair_space(eta, zeta)) throw std::invalid_argument("pair is not in the pair space");
  std::vector<std::uint8_t> lab = disagreement(eta, zeta).labels();
  const int n = eta.size();
  RingSchedule schedule(clocks, n);
  while (schedule.next_time() <= cap) {
    const Site x = schedule.next_site();
    auto& a = lab[static_cast<std::size_t>(x)];
    auto& b = lab[static_cast<std::size_t>(x + 1 == n ? 0 : x + 1)];
    if (a == 2 && b == 2) return schedule.next_time();
    if (priority(a) > priority(b)) std::swap(a, b);
    schedule.advance();
  }
  return std::nullopt;
}

}  // namespace ctasep::ring
