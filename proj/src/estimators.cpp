#include "ctasep/estimators.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ctasep/bridge.hpp"
#include "ctasep/parallel.hpp"
#include "ctasep/random.hpp"

namespace ctasep::estimators {

namespace {

std::size_t uniform_index(std::uint64_t bits, std::size_t n) {
  return static_cast<std::size_t>((static_cast<unsigned __int128>(bits) * n) >> 64);
}

Cell endpoint(std::int64_t n, Rational m) { return {n, lpp::floor_affine(m, n, 0)}; }

void require_slope(Rational m) {
  if (m.num <= 0 || m.num > m.den) throw std::invalid_argument("slope m must lie in (0, 1]");
}

}  // namespace

void ExperimentPlan::validate() const {
  if (replicas < 1) throw std::invalid_argument("replicas must be at least 1");
}

std::uint64_t ExperimentPlan::replica_seed(std::uint64_t grid_point, std::uint64_t replica) const {
  return derive_seed(derive_seed(seed, name, grid_point), "replica", replica);
}

FitResult linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit needs equally many x and y values");
  if (x.size() < 2) throw std::invalid_argument("fit needs at least two points");
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = x[static_cast<std::size_t>(i)];
    b(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector2d beta = A.colPivHouseholderQr().solve(b);
  const Eigen::VectorXd resid = b - A * beta;
  FitResult f;
  f.intercept = beta(0);
  f.slope = beta(1);
  const double ybar = b.mean();
  const double sst = (b.array() - ybar).square().sum();
  const double sse = resid.squaredNorm();
  f.r2 = sst > 0 ? 1.0 - sse / sst : 1.0;
  if (n > 2) {
    const double xbar = A.col(1).mean();
    const double sxx = (A.col(1).array() - xbar).square().sum();
    f.stderr_slope = sxx > 0 ? std::sqrt(sse / static_cast<double>(n - 2) / sxx) : 0.0;
  }
  f.x = x;
  f.y = y;
  return f;
}

FitResult loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw std::invalid_argument("log-log fit needs positive values");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return linear_fit(lx, ly);
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("mean of an empty sample");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) throw std::invalid_argument("variance needs two samples");
  const double mu = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return s / static_cast<double>(v.size() - 1);
}

double shape_center(double n, double m) {
  const double r = 1.0 + std::sqrt(m);
  return r * r * n;
}

double fluctuation_scale(double n, double m) { return std::cbrt(n) * std::pow(m, -1.0 / 6.0); }

std::vector<double> point_to_point_samples(std::int64_t n, Rational m, const ExperimentPlan& plan,
                                           std::uint64_t grid_point) {
  plan.validate();
  require_slope(m);
  if (n < 1) throw std::invalid_argument("n must be positive");
  const Cell v = endpoint(n, m);
  std::vector<double> out(plan.replicas);
  parallel_for(plan.replicas, plan.threads, [&](std::size_t r) {
    out[r] = lpp::lpt(lpp::Environment::iid(plan.replica_seed(grid_point, r)), Cell{0, 0}, v);
  });
  return out;
}

MomentsResult lpp_moments(const std::vector<std::int64_t>& n_list, Rational m, const ExperimentPlan& plan) {
  MomentsResult res;
  std::vector<double> xs, vs;
  for (std::size_t g = 0; g < n_list.size(); ++g) {
    const auto s = point_to_point_samples(n_list[g], m, plan, g);
    const double var = plan.replicas > 1 ? sample_variance(s) : 0.0;
    res.rows.push_back({n_list[g], mean(s), var});
    xs.push_back(static_cast<double>(n_list[g]));
    vs.push_back(var);
  }
  if (n_list.size() >= 2 && plan.replicas > 1) res.variance_fit = loglog_fit(xs, vs);
  return res;
}

TailProfile tail_profile_from_samples(std::int64_t n, Rational m, const std::vector<double>& samples,
                                      const std::vector<double>& x_grid, double fit_lo, double fit_hi) {
  if (samples.empty()) throw std::invalid_argument("tail profile needs samples");
  TailProfile p{n, shape_center(static_cast<double>(n), m.value()), fluctuation_scale(static_cast<double>(n), m.value()),
                {}, std::nullopt, std::nullopt};
  const double total = static_cast<double>(samples.size());
  std::vector<double> ux, uy, lx, ly;
  for (double x : x_grid) {
    const double up = p.center + x * p.scale, down = p.center - x * p.scale;
    const auto nu = std::count_if(samples.begin(), samples.end(), [&](double t) { return t >= up; });
    const auto nl = std::count_if(samples.begin(), samples.end(), [&](double t) { return t <= down; });
    TailRow row{x, static_cast<double>(nu) / total, static_cast<double>(nl) / total};
    p.rows.push_back(row);
    if (x >= fit_lo && x <= fit_hi) {
      if (row.upper > 0) {
        ux.push_back(x);
        uy.push_back(std::log(row.upper));
      }
      if (row.lower > 0) {
        lx.push_back(x * x);
        ly.push_back(std::log(row.lower));
      }
    }
  }
  if (ux.size() >= 3) p.upper_fit = linear_fit(ux, uy);
  if (lx.size() >= 3) p.lower_fit = linear_fit(lx, ly);
  return p;
}

TailProfile tail_profile(std::int64_t n, Rational m, const std::vector<double>& x_grid, const ExperimentPlan& plan,
                         double fit_lo, double fit_hi) {
  return tail_profile_from_samples(n, m, point_to_point_samples(n, m, plan), x_grid, fit_lo, fit_hi);
}

TFResult tf_scaling(const std::vector<std::int64_t>& n_list, Rational m, const ExperimentPlan& plan) {
  plan.validate();
  require_slope(m);
  TFResult res;
  std::vector<double> xs, ys;
  for (std::size_t g = 0; g < n_list.size(); ++g) {
    const Cell v = endpoint(n_list[g], m);
    std::vector<double> tf(plan.replicas);
    parallel_for(plan.replicas, plan.threads, [&](std::size_t r) {
      const auto path = lpp::geodesic(lpp::Environment::iid(plan.replica_seed(g, r)), Cell{0, 0}, v);
      tf[r] = lpp::transversal_fluctuation(path, m);
    });
    const double med = median(tf);
    res.rows.push_back({n_list[g], med});
    xs.push_back(static_cast<double>(n_list[g]));
    ys.push_back(med);
  }
  if (n_list.size() >= 2) res.fit = loglog_fit(xs, ys);
  return res;
}

StripCoupledField::StripCoupledField(const lpp::Environment& periodic, const lpp::Environment& outside, Rational m)
    : periodic_(periodic), outside_(outside), m_(m) {
  if (!periodic.is_periodic()) throw std::invalid_argument("strip coupling needs a periodic environment");
  const int k = periodic.particles();
  lo_ = -(k / 2);
  hi_ = (k + 1) / 2 - 1;
}

bool StripCoupledField::in_band(Cell v) const {
  const std::int64_t d = v.y - lpp::floor_affine(m_, v.x, 0);
  return d >= lo_ && d <= hi_;
}

AgreementResult periodic_vs_iid_agreement(std::int64_t n, Rational m, int n_sites, int particles,
                                          const ExperimentPlan& plan, std::uint64_t grid_point) {
  plan.validate();
  require_slope(m);
  if (particles < 1 || particles >= n_sites) throw std::invalid_argument("agreement needs 1 <= k < N");
  const Cell v = endpoint(n, m);
  std::vector<std::uint8_t> same(plan.replicas, 0);
  parallel_for(plan.replicas, plan.threads, [&](std::size_t r) {
    const std::uint64_t s = plan.replica_seed(grid_point, r);
    const auto periodic = lpp::Environment::periodic(n_sites, particles, derive_seed(s, "periodic", 0));
    const StripCoupledField iid(periodic, lpp::Environment::iid(derive_seed(s, "outside", 0)), m);
    same[r] = lpp::geodesic(periodic, Cell{0, 0}, v).cells == lpp::geodesic(iid, Cell{0, 0}, v).cells;
  });
  const auto agree = static_cast<std::size_t>(std::count(same.begin(), same.end(), std::uint8_t{1}));
  return {agree, plan.replicas, static_cast<double>(agree) / static_cast<double>(plan.replicas)};
}

PairFamily parse_pair_family(const std::string& name) {
  if (name == "antipodal") return PairFamily::antipodal;
  if (name == "adjacent") return PairFamily::adjacent;
  if (name == "random") return PairFamily::random;
  throw std::invalid_argument("unknown pair family '" + name + "'");
}

std::string to_string(PairFamily f) {
  switch (f) {
    case PairFamily::antipodal:
      return "antipodal";
    case PairFamily::adjacent:
      return "adjacent";
    case PairFamily::random:
      return "random";
  }
  return "?";
}

std::pair<ring::RingConfig, ring::RingConfig> sample_pair(int n_sites, int particles, PairFamily family,
                                                          std::uint64_t seed) {
  if (n_sites < 3 || particles < 1 || particles > n_sites - 1)
    throw std::invalid_argument("pair sampling needs N >= 3 and 1 <= k <= N-1");
  std::uint64_t counter = 0;
  auto draw = [&](std::size_t bound) { return uniform_index(hash_key(seed, Domain::sample, counter++, 0), bound); };
  const auto n = static_cast<std::size_t>(n_sites);
  const std::size_t a = draw(n);
  std::size_t b = 0;
  switch (family) {
    case PairFamily::antipodal:
      b = (a + n / 2) % n;
      break;
    case PairFamily::adjacent:
      b = (a + 1) % n;
      break;
    case PairFamily::random:
      b = (a + 1 + draw(n - 1)) % n;
      break;
  }
  std::vector<std::uint8_t> occ(n, 0);
  const bool particle_at_a = draw(2) == 0;
  occ[particle_at_a ? a : b] = 1;
  std::vector<std::size_t> rest;
  for (std::size_t x = 0; x < n; ++x)
    if (x != a && x != b) rest.push_back(x);
  // partial Fisher-Yates for the remaining k-1 particles
  for (int i = 0; i < particles - 1; ++i) {
    const std::size_t j = static_cast<std::size_t>(i) + draw(rest.size() - static_cast<std::size_t>(i));
    std::swap(rest[static_cast<std::size_t>(i)], rest[j]);
    occ[rest[static_cast<std::size_t>(i)]] = 1;
  }
  std::vector<std::uint8_t> other = occ;
  std::swap(other[a], other[b]);
  return {ring::RingConfig(std::move(occ)), ring::RingConfig(std::move(other))};
}

CoalescenceResult coalescence_scaling(const std::vector<int>& n_list, const std::function<int(int)>& k_of_n,
                                      const std::vector<PairFamily>& families,
                                      const std::function<double(int, int)>& cap_rule,
                                      const ExperimentPlan& plan) {
  plan.validate();
  if (families.empty()) throw std::invalid_argument("coalescence scaling needs a pair family");
  CoalescenceResult res;
  std::vector<double> xs, ys;
  for (std::size_t g = 0; g < n_list.size(); ++g) {
    const int n = n_list[g], k = k_of_n(n);
    if (k < 1 || 2 * k > n) throw std::invalid_argument("coalescence scaling needs 1 <= k <= N/2");
    const double cap = cap_rule(n, k);
    std::vector<double> tau(plan.replicas, -1.0);
    parallel_for(plan.replicas, plan.threads, [&](std::size_t r) {
      const std::uint64_t s = plan.replica_seed(g, r);
      const auto [eta, zeta] = sample_pair(n, k, families[r % families.size()], derive_seed(s, "pair", 0));
      const auto t = ring::coalescence_time(eta, zeta, ring::ClockSource(derive_seed(s, "clock", 0)), cap);
      if (t) tau[r] = *t;
    });
    std::vector<double> done;
    for (double t : tau)
      if (t >= 0) done.push_back(t);
    const std::size_t censored = tau.size() - done.size();
    if (20 * censored >= tau.size())
      throw std::runtime_error("coalescence scaling: " + std::to_string(censored) + " of " +
                               std::to_string(tau.size()) + " runs censored at N=" + std::to_string(n) +
                               " (cap " + std::to_string(cap) + ")");
    const double med = median(done);
    res.rows.push_back({n, k, cap, tau.size(), censored, med});
    xs.push_back(n);
    ys.push_back(med);
  }
  if (n_list.size() >= 2) res.fit = loglog_fit(xs, ys);
  return res;
}

namespace {

constexpr int kNodes = 16;

/// Gauss-Legendre nodes and weights on [-1,1] by Newton iteration.
struct GaussLegendre {
  std::array<double, kNodes> x{};
  std::array<double, kNodes> w{};

  GaussLegendre() {
    for (int i = 0; i < kNodes; ++i) {
      double z = std::cos(M_PI * (i + 0.75) / (kNodes + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int j = 2; j <= kNodes; ++j) {
          const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
          p0 = p1;
          p1 = p2;
        }
        dp = kNodes * (z * p1 - p0) / (z * z - 1.0);
        const double step = p1 / dp;
        z -= step;
        if (std::abs(step) < 1e-16) break;
      }
      x[static_cast<std::size_t>(i)] = z;
      w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

template <class F>
double integrate(const F& f, double a, double b, int panels) {
  static const GaussLegendre gl;
  if (!(b > a)) return 0.0;
  const double h = (b - a) / panels;
  double s = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (int i = 0; i < kNodes; ++i)
      s += gl.w[static_cast<std::size_t>(i)] * f(mid + 0.5 * h * gl.x[static_cast<std::size_t>(i)]);
  }
  return 0.5 * h * s;
}

}  // namespace

double gamma_tv(int shape, double delta) {
  if (shape < 1) throw std::invalid_argument("gamma_tv needs a positive integer shape");
  if (!(std::abs(delta) < 1)) throw std::invalid_argument("gamma_tv needs |delta| < 1");
  if (delta == 0) return 0.0;
  const double M = shape, s = 1.0 + delta;
  const double lg = std::lgamma(M), ls = std::log(s);
  auto gap = [&](double x) {
    if (x <= 0) return 0.0;
    const double base = (M - 1.0) * std::log(x) - lg;
    return std::abs(std::exp(base - x) - std::exp(base - x / s - M * ls));
  };
  const double spread = 40.0 * std::sqrt(M) + 60.0;
  const double a = std::max(0.0, std::min(1.0, s) * M - std::max(1.0, s) * spread);
  const double b = std::max(1.0, s) * (M + spread);
  // the two densities cross exactly once
  const double cross = std::clamp(M * ls * s / delta, a, b);
  return 0.5 * (integrate(gap, a, cross, 2000) + integrate(gap, cross, b, 2000));
}

EventFrequencyRow coalescence_event_trial(int n_sites, int particles, double theta, const ExperimentPlan& plan,
                                          std::uint64_t grid_point) {
  plan.validate();
  if (particles < 4 || n_sites < 2 * particles) throw std::invalid_argument("event frequency needs N >= 2k and k >= 4");
  if (!(theta > 0)) throw std::invalid_argument("theta must be positive");
  const double n = n_sites;
  const Cell v{static_cast<std::int64_t>(std::floor(n * n / std::sqrt(static_cast<double>(particles)) / theta)), 1};
  std::vector<std::uint8_t> holds(plan.replicas, 0), violated(plan.replicas, 0);
  parallel_for(plan.replicas, plan.threads, [&](std::size_t r) {
    const std::uint64_t s = plan.replica_seed(grid_point, r);
    const auto [eta, zeta] = sample_pair(n_sites, particles, PairFamily::random, derive_seed(s, "pair", 0));
    const auto xi = ring::disagreement(eta, zeta);
    const auto env = lpp::Environment::periodic(n_sites + 2, particles + 1, derive_seed(s, "environment", 0));
    const auto expanded = bridge::expand_second_class(xi);
    bridge::CylinderGrowth growth(env, bridge::interface_from_config(expanded.expanded));
    const auto c = bridge::coalescence_criterion(growth, v);
    if (!c.holds) return;
    holds[r] = 1;
    const auto run = bridge::coupled_second_class_run(env, xi, c.bound);
    violated[r] = !(run.tau && *run.tau <= c.bound);
  });
  EventFrequencyRow row{theta, v, plan.replicas, 0, 0, 0.0};
  row.holds = static_cast<std::size_t>(std::count(holds.begin(), holds.end(), std::uint8_t{1}));
  row.violations = static_cast<std::size_t>(std::count(violated.begin(), violated.end(), std::uint8_t{1}));
  row.frequency = static_cast<double>(row.holds) / static_cast<double>(plan.replicas);
  return row;
}

std::vector<EventFrequencyRow> coalescence_event_frequency(int n_sites, int particles,
                                                           const std::vector<double>& theta_list,
                                                           const ExperimentPlan& plan) {
  // the same pairs and environments at every θ
  std::vector<EventFrequencyRow> rows;
  for (double theta : theta_list) rows.push_back(coalescence_event_trial(n_sites, particles, theta, plan, 0));
  return rows;
}

}  // namespace ctasep::estimators
