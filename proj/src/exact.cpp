#include "ctasep/exact.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <set>

#include "ctasep/random.hpp"

namespace ctasep::exact {

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

}  // namespace

StateSpace::StateSpace(int n_sites, int particles, std::size_t cap) : n_(n_sites), k_(particles) {
  if (n_ < 2 || n_ > 62) throw std::invalid_argument("state space needs 2 <= N <= 62");
  if (k_ < 1 || k_ > n_ - 1) throw std::invalid_argument("state space needs 1 <= k <= N-1");
  if (binomial(n_, k_) > static_cast<double>(cap))
    throw std::invalid_argument("state space size C(" + std::to_string(n_) + "," + std::to_string(k_) +
                                ") exceeds cap " + std::to_string(cap));
  // Gosper's hack: next mask with the same popcount
  std::uint64_t m = (std::uint64_t{1} << k_) - 1;
  const std::uint64_t limit = std::uint64_t{1} << n_;
  while (m < limit) {
    states_.push_back(m);
    const std::uint64_t c = m & (~m + 1);
    const std::uint64_t r = m + c;
    m = (((r ^ m) >> 2) / c) | r;
  }
}

std::size_t StateSpace::index(std::uint64_t mask) const {
  auto it = std::lower_bound(states_.begin(), states_.end(), mask);
  if (it == states_.end() || *it != mask) throw std::invalid_argument("mask is not a state");
  return static_cast<std::size_t>(it - states_.begin());
}

std::string StateSpace::to_string(std::uint64_t mask) const {
  std::string s(static_cast<std::size_t>(n_), '0');
  for (int x = 0; x < n_; ++x)
    if ((mask >> x) & 1u) s[static_cast<std::size_t>(x)] = '1';
  return s;
}

std::uint64_t StateSpace::parse(const std::string& bits) const {
  if (static_cast<int>(bits.size()) != n_) throw std::invalid_argument("state string has wrong length");
  std::uint64_t m = 0;
  for (int x = 0; x < n_; ++x)
    if (bits[static_cast<std::size_t>(x)] == '1') m |= std::uint64_t{1} << x;
  index(m);
  return m;
}

std::uint64_t StateSpace::rotate(std::uint64_t mask, int shift) const noexcept {
  const int s = ((shift % n_) + n_) % n_;
  if (s == 0) return mask;
  const std::uint64_t full = (std::uint64_t{1} << n_) - 1;
  return ((mask << s) | (mask >> (n_ - s))) & full;
}

std::uint64_t StateSpace::particle_hole(std::uint64_t mask) const noexcept {
  std::uint64_t out = 0;
  for (int x = 0; x < n_; ++x) {
    const int src = (n_ - x) % n_;
    if (!((mask >> src) & 1u)) out |= std::uint64_t{1} << x;
  }
  return out;
}

Chain build(int n_sites, int particles, std::size_t cap) {
  StateSpace space(n_sites, particles, cap);
  const auto n = static_cast<Eigen::Index>(space.size());
  std::vector<Eigen::Triplet<double>> trips;
  double max_exit = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::uint64_t m = space.state(static_cast<std::size_t>(i));
    int exits = 0;
    for (int x = 0; x < n_sites; ++x) {
      const int y = (x + 1) % n_sites;
      if (((m >> x) & 1u) && !((m >> y) & 1u)) {
        const std::uint64_t to = (m & ~(std::uint64_t{1} << x)) | (std::uint64_t{1} << y);
        trips.emplace_back(i, static_cast<Eigen::Index>(space.index(to)), 1.0);
        ++exits;
      }
    }
    trips.emplace_back(i, i, -static_cast<double>(exits));
    max_exit = std::max(max_exit, static_cast<double>(exits));
  }
  Generator<double> Q(n, n);
  Q.setFromTriplets(trips.begin(), trips.end());
  Q.makeCompressed();
  return Chain{std::move(space), std::move(Q), max_exit};
}

WorstCase::WorstCase(const Chain& chain, double tol, std::uint64_t seed)
    : chain_(chain), qt_(chain.Q.transpose()), tol_(tol) {
  const auto& sp = chain.space;
  exhaustive_ = sp.n_sites() <= 14;
  if (exhaustive_) {
    std::set<std::uint64_t> reps;
    for (std::uint64_t m : sp.states()) {
      std::uint64_t best = m;
      for (int s = 1; s < sp.n_sites(); ++s) best = std::min(best, sp.rotate(m, s));
      reps.insert(best);
    }
    starts_.assign(reps.begin(), reps.end());
  } else {
    std::set<std::uint64_t> picks;
    const int n = sp.n_sites(), k = sp.particles();
    // one block of k particles, then splits into two blocks
    for (int split = 0; split <= k / 2; ++split) {
      std::uint64_t m = 0;
      for (int x = 0; x < k - split; ++x) m |= std::uint64_t{1} << x;
      const int gap = (n - k) / 2;
      for (int x = 0; x < split; ++x) m |= std::uint64_t{1} << (k - split + gap + x);
      picks.insert(m);
    }
    for (std::uint64_t r = 0; r < 64; ++r) {
      const auto bits = hash_key(seed, Domain::sample, r, 0);
      picks.insert(sp.state(static_cast<std::size_t>(bits % sp.size())));
    }
    starts_.assign(picks.begin(), picks.end());
  }
}

WorstCase::Block WorstCase::evolve(const Block& m, double t) const {
  return transient_block<double>(m, qt_, chain_.max_exit_rate, t, tol_);
}

std::pair<double, std::size_t> WorstCase::worst(const Block& m) const {
  double best = -1.0;
  std::size_t arg = 0;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double d = tv_to_uniform(m.col(c));
    if (d > best) {
      best = d;
      arg = static_cast<std::size_t>(c);
    }
  }
  return {best, arg};
}

TVCurve WorstCase::curve(const std::vector<double>& times) const {
  if (!std::is_sorted(times.begin(), times.end())) throw std::invalid_argument("curve times must be sorted");
  Block m = Block::Zero(static_cast<Eigen::Index>(chain_.space.size()), static_cast<Eigen::Index>(starts_.size()));
  for (std::size_t c = 0; c < starts_.size(); ++c)
    m(static_cast<Eigen::Index>(chain_.space.index(starts_[c])), static_cast<Eigen::Index>(c)) = 1.0;
  TVCurve out;
  double now = 0.0;
  for (double t : times) {
    if (t < 0) throw std::invalid_argument("curve times must be nonnegative");
    m = evolve(m, t - now);
    now = t;
    out.times.push_back(t);
    out.values.push_back(worst(m).first);
  }
  return out;
}

std::vector<MixingReport> WorstCase::mixing_times(std::vector<double> epsilons, double time_tol) const {
  for (double e : epsilons)
    if (!(e > 0 && e < 1)) throw std::invalid_argument("epsilon must lie in (0,1)");
  std::vector<MixingReport> out(epsilons.size());
  std::vector<bool> done(epsilons.size(), false);
  Block m = Block::Zero(static_cast<Eigen::Index>(chain_.space.size()), static_cast<Eigen::Index>(starts_.size()));
  for (std::size_t c = 0; c < starts_.size(); ++c)
    m(static_cast<Eigen::Index>(chain_.space.index(starts_[c])), static_cast<Eigen::Index>(c)) = 1.0;
  auto report = [&](std::size_t e, double t, const Block& at) {
    out[e] = {epsilons[e], t, chain_.space.to_string(starts_[worst(at).second])};
    done[e] = true;
  };
  {
    const double d0 = worst(m).first;
    for (std::size_t e = 0; e < epsilons.size(); ++e)
      if (d0 <= epsilons[e]) report(e, 0.0, m);
  }
  const double h = 2.0 / chain_.max_exit_rate;
  const double t_cap = 1000.0 * chain_.space.n_sites() * chain_.space.n_sites();
  double t = 0.0;
  while (!std::all_of(done.begin(), done.end(), [](bool b) { return b; })) {
    if (t > t_cap) throw std::runtime_error("mixing time search exceeded its time cap");
    Block next = evolve(m, h);
    const double d = worst(next).first;
    for (std::size_t e = 0; e < epsilons.size(); ++e) {
      if (done[e] || d > epsilons[e]) continue;
      double lo = 0.0, hi = h;  // offsets from t: d(t+lo) > ε >= d(t+hi)
      Block at_hi = next;
      while (hi - lo > time_tol) {
        const double mid = 0.5 * (lo + hi);
        Block bm = evolve(m, mid);
        if (worst(bm).first <= epsilons[e]) {
          hi = mid;
          at_hi = std::move(bm);
        } else {
          lo = mid;
        }
      }
      report(e, t + hi, at_hi);
    }
    m = std::move(next);
    t += h;
  }
  return out;
}

double mixing_time(int n_sites, int particles, double epsilon, double time_tol) {
  const Chain chain = build(n_sites, particles);
  return WorstCase(chain).mixing_times({epsilon}, time_tol).front().t_mix;
}

std::vector<double> window_count_law(int n_sites, int particles, int window_len) {
  if (window_len < 1 || window_len > n_sites) throw std::invalid_argument("window length must lie in [1, N]");
  const StateSpace sp(n_sites, particles);
  const std::uint64_t window = (window_len == 64) ? ~std::uint64_t{0} : ((std::uint64_t{1} << window_len) - 1);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(window_len) + 1, 0);
  for (std::uint64_t m : sp.states()) ++counts[static_cast<std::size_t>(std::popcount(m & window))];
  std::vector<double> pmf(counts.size());
  const double total = static_cast<double>(sp.size());
  for (std::size_t z = 0; z < counts.size(); ++z) pmf[z] = static_cast<double>(counts[z]) / total;
  return pmf;
}

std::vector<CutoffRow> no_cutoff_profile(const std::vector<int>& n_list, const std::function<int(int)>& k_rule,
                                         double epsilon, double time_tol) {
  if (!(epsilon > 0 && epsilon < 0.5)) throw std::invalid_argument("no-cutoff profile needs ε in (0, 1/2)");
  std::vector<CutoffRow> rows;
  for (int n : n_list) {
    const int k = k_rule(n);
    const Chain chain = build(n, k);
    const auto r = WorstCase(chain).mixing_times({1.0 - epsilon, epsilon}, time_tol);
    const double early = r[0].t_mix, late = r[1].t_mix;
    rows.push_back({n, k, early, late, early > 0 ? late / early : std::numeric_limits<double>::infinity()});
  }
  return rows;
}

}  // namespace ctasep::exact
