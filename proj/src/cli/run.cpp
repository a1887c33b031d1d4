#include "ctasep/cli/run.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>

#include "ctasep/bridge.hpp"
#include "ctasep/cli/output.hpp"
#include "ctasep/estimators.hpp"
#include "ctasep/exact.hpp"
#include "ctasep/parallel.hpp"
#include "ctasep/random.hpp"

namespace ctasep::cli {

namespace {

struct Artifact {
  std::string name;
  CsvTable table;
  std::optional<PlotSpec> plot;
};

using Runner = std::function<std::vector<Artifact>(const RunConfig&, std::ostream&)>;

template <class T>
T param(const RunConfig& c, const std::string& key) {
  return c.params.at(key).get<T>();
}

lpp::Rational rational_param(const RunConfig& c, const std::string& key) {
  const auto s = param<std::string>(c, key);
  const auto slash = s.find('/');
  if (slash == std::string::npos) return {std::stoll(s)};
  return {std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1))};
}

estimators::ExperimentPlan plan_of(const RunConfig& c) {
  estimators::ExperimentPlan p;
  p.name = c.subcommand;
  p.replicas = c.replicas;
  p.seed = c.seed;
  p.threads = c.threads;
  return p;
}

CsvTable fit_table(const std::vector<std::pair<std::string, estimators::FitResult>>& fits) {
  CsvTable t("ctasep.fit.v1", {"quantity", "slope", "intercept", "stderr", "r2", "points"});
  for (const auto& [name, f] : fits)
    t.add({name, f.slope, f.intercept, f.stderr_slope, f.r2, static_cast<std::int64_t>(f.x.size())});
  return t;
}

std::vector<Artifact> run_simulate(const RunConfig& c, std::ostream&) {
  const auto eta0 = ring::RingConfig::parse(param<std::string>(c, "initial"));
  const double horizon = param<double>(c, "horizon");
  const auto samples = param<std::int64_t>(c, "samples");
  std::vector<double> times;
  for (std::int64_t i = 0; i < samples; ++i)
    times.push_back(samples == 1 ? horizon : horizon * static_cast<double>(i) / static_cast<double>(samples - 1));
  std::vector<ring::Trajectory> paths(c.replicas, ring::Trajectory{eta0, {}});
  parallel_for(c.replicas, c.threads, [&](std::size_t r) {
    paths[r] = ring::simulate(eta0, ring::ClockSource(derive_seed(c.seed, "simulate", r)), horizon);
  });
  CsvTable t("ctasep.simulate.v1", {"replica", "time", "state", "jumps"});
  for (std::size_t r = 0; r < paths.size(); ++r)
    for (double s : times)
      t.add({static_cast<std::int64_t>(r), s, paths[r].state_at(s).to_string(),
             static_cast<std::int64_t>(paths[r].applied_count(s))});
  return {{"trajectory.csv", t, PlotSpec{"time", {"jumps"}, false, false, true}}};
}

std::vector<Artifact> run_mix_exact(const RunConfig& c, std::ostream&) {
  const int n = static_cast<int>(param<std::int64_t>(c, "N")), k = static_cast<int>(param<std::int64_t>(c, "k"));
  const double tol = c.tolerance.value_or(1e-10);
  const auto chain = exact::build(n, k);
  const exact::WorstCase wc(chain, 1e-13, c.seed);
  const auto eps = param<std::vector<double>>(c, "epsilon");
  const auto reports = wc.mixing_times(eps, tol);
  std::vector<Artifact> out;
  CsvTable t("ctasep.mix-exact.v1", {"epsilon", "t_mix"});
  double t_max = 0.0;
  for (const auto& r : reports) {
    t.add({r.epsilon, r.t_mix});
    t_max = std::max(t_max, r.t_mix);
  }
  out.push_back({"mixing.csv", t, std::nullopt});
  if (const auto points = param<std::int64_t>(c, "curve_points"); points > 0) {
    const double end = t_max > 0 ? 2.0 * t_max : 1.0;
    std::vector<double> times;
    for (std::int64_t i = 0; i < points; ++i)
      times.push_back(points == 1 ? end : end * static_cast<double>(i) / static_cast<double>(points - 1));
    const auto curve = wc.curve(times);
    CsvTable ct("ctasep.tv-curve.v1", {"time", "tv"});
    for (std::size_t i = 0; i < curve.times.size(); ++i) ct.add({curve.times[i], curve.values[i]});
    out.push_back({"curve.csv", ct, PlotSpec{"time", {"tv"}}});
  }
  if (const double ce = param<double>(c, "cutoff_epsilon"); ce > 0) {
    const auto rows = exact::no_cutoff_profile({n}, [k](int) { return k; }, ce, tol);
    CsvTable ct("ctasep.cutoff.v1", {"N", "k", "epsilon", "t_early", "t_late", "ratio"});
    for (const auto& r : rows)
      ct.add({std::int64_t{r.n_sites}, std::int64_t{r.particles}, ce, r.t_early, r.t_late, r.ratio});
    out.push_back({"cutoff.csv", ct, std::nullopt});
  }
  return out;
}

std::vector<Artifact> run_coalesce(const RunConfig& c, std::ostream& log) {
  std::vector<int> ns;
  for (auto n : param<std::vector<std::int64_t>>(c, "N")) ns.push_back(static_cast<int>(n));
  const bool half = param<std::string>(c, "k_rule") == "half";
  const int kf = static_cast<int>(param<std::int64_t>(c, "k_fixed"));
  std::vector<estimators::PairFamily> fams;
  for (const auto& f : param<std::vector<std::string>>(c, "families")) fams.push_back(estimators::parse_pair_family(f));
  const double factor = param<double>(c, "cap_factor");
  const auto res = estimators::coalescence_scaling(
      ns, [&](int n) { return half ? n / 2 : kf; }, fams,
      [&](int n, int k) { return factor * n * n / std::sqrt(static_cast<double>(k)); }, plan_of(c));
  CsvTable t("ctasep.coalesce.v1", {"N", "k", "cap", "runs", "censored", "median_tau"});
  for (const auto& r : res.rows) {
    t.add({std::int64_t{r.n_sites}, std::int64_t{r.particles}, r.cap, static_cast<std::int64_t>(r.runs),
           static_cast<std::int64_t>(r.censored), r.median_tau});
    log << "N=" << r.n_sites << " median tau " << format_number(r.median_tau) << "\n";
  }
  std::vector<Artifact> out{{"coalescence.csv", t, PlotSpec{"N", {"median_tau"}, true, true, false}}};
  if (res.rows.size() >= 2) out.push_back({"fit.csv", fit_table({{"median_tau", res.fit}}), std::nullopt});
  return out;
}

std::vector<Artifact> run_lpp_stats(const RunConfig& c, std::ostream&) {
  const auto ns = param<std::vector<std::int64_t>>(c, "n");
  const auto m = rational_param(c, "m");
  const auto plan = plan_of(c);
  const auto mom = estimators::lpp_moments(ns, m, plan);
  CsvTable t("ctasep.lpp-moments.v1", {"n", "mean", "variance", "shape"});
  for (const auto& r : mom.rows) t.add({r.n, r.mean, r.variance, estimators::shape_center(static_cast<double>(r.n), m.value())});
  std::int64_t tail_n = param<std::int64_t>(c, "tail_n");
  if (tail_n == 0) tail_n = *std::max_element(ns.begin(), ns.end());
  const auto tp = estimators::tail_profile(tail_n, m, param<std::vector<double>>(c, "x_grid"), plan,
                                           param<double>(c, "fit_lo"), param<double>(c, "fit_hi"));
  CsvTable tt("ctasep.lpp-tail.v1", {"x", "upper", "lower"});
  for (const auto& r : tp.rows) tt.add({r.x, r.upper, r.lower});
  std::vector<std::pair<std::string, estimators::FitResult>> fits;
  if (ns.size() >= 2 && c.replicas > 1) fits.push_back({"variance", mom.variance_fit});
  if (tp.upper_fit) fits.push_back({"tail_upper_vs_x", *tp.upper_fit});
  if (tp.lower_fit) fits.push_back({"tail_lower_vs_x2", *tp.lower_fit});
  std::vector<Artifact> out{{"moments.csv", t, PlotSpec{"n", {"variance"}, true, true, false}},
                            {"tail.csv", tt, PlotSpec{"x", {"upper", "lower"}, false, true, false}}};
  if (!fits.empty()) out.push_back({"fit.csv", fit_table(fits), std::nullopt});
  return out;
}

std::vector<Artifact> run_tf_scaling(const RunConfig& c, std::ostream&) {
  const auto ns = param<std::vector<std::int64_t>>(c, "n");
  const auto res = estimators::tf_scaling(ns, rational_param(c, "m"), plan_of(c));
  CsvTable t("ctasep.tf-scaling.v1", {"n", "median_tf"});
  for (const auto& r : res.rows) t.add({r.n, r.median_tf});
  std::vector<Artifact> out{{"tf.csv", t, PlotSpec{"n", {"median_tf"}, true, true, false}}};
  if (ns.size() >= 2) out.push_back({"fit.csv", fit_table({{"median_tf", res.fit}}), std::nullopt});
  return out;
}

std::vector<Artifact> run_agreement(const RunConfig& c, std::ostream&) {
  const auto n = param<std::int64_t>(c, "n");
  const auto m = rational_param(c, "m");
  const auto ks = param<std::vector<std::int64_t>>(c, "k");
  const auto nsites = param<std::vector<std::int64_t>>(c, "N");
  CsvTable t("ctasep.agreement.v1", {"N", "k", "n", "agreements", "replicas", "frequency"});
  for (std::size_t g = 0; g < ks.size(); ++g) {
    const int k = static_cast<int>(ks[g]);
    const int big_n = nsites.empty() ? 2 * k : static_cast<int>(nsites[g]);
    const auto r = estimators::periodic_vs_iid_agreement(n, m, big_n, k, plan_of(c), g);
    t.add({std::int64_t{big_n}, std::int64_t{k}, n, static_cast<std::int64_t>(r.agreements),
           static_cast<std::int64_t>(r.replicas), r.frequency});
  }
  return {{"agreement.csv", t, PlotSpec{"k", {"frequency"}}}};
}

std::vector<Artifact> run_gamma_tv(const RunConfig& c, std::ostream&) {
  CsvTable t("ctasep.gamma-tv.v1", {"M", "delta", "tv", "bound"});
  for (auto m : param<std::vector<std::int64_t>>(c, "M"))
    for (double d : param<std::vector<double>>(c, "delta"))
      t.add({m, d, estimators::gamma_tv(static_cast<int>(m), d), 3.0 * std::pow(static_cast<double>(m) * d * d, 0.25)});
  return {{"gamma_tv.csv", t, PlotSpec{"delta", {"tv", "bound"}, false, false, true}}};
}

std::vector<Artifact> run_geodesic_coalesce(const RunConfig& c, std::ostream&) {
  const int n = static_cast<int>(param<std::int64_t>(c, "N")), k = static_cast<int>(param<std::int64_t>(c, "k"));
  const auto rows = estimators::coalescence_event_frequency(n, k, param<std::vector<double>>(c, "theta"), plan_of(c));
  CsvTable t("ctasep.geodesic-coalesce.v1", {"theta", "v1", "v2", "runs", "holds", "violations", "frequency"});
  for (const auto& r : rows)
    t.add({r.theta, r.v.x, r.v.y, static_cast<std::int64_t>(r.runs), static_cast<std::int64_t>(r.holds),
           static_cast<std::int64_t>(r.violations), r.frequency});
  return {{"event.csv", t, PlotSpec{"theta", {"frequency"}, true, false, false}}};
}

std::vector<Artifact> run_bridge_check(const RunConfig& c, std::ostream& log) {
  const int n = static_cast<int>(param<std::int64_t>(c, "N")), k = static_cast<int>(param<std::int64_t>(c, "k"));
  const double t = param<double>(c, "t");
  std::vector<std::uint8_t> packed(static_cast<std::size_t>(n), 0);
  std::fill(packed.begin(), packed.begin() + k, 1);
  const ring::RingConfig eta0(packed);
  // occupancy of each site and of each adjacent pair, from both constructions
  const auto un = static_cast<std::size_t>(n);
  std::vector<std::vector<std::uint8_t>> lpp_stats(c.replicas), ring_stats(c.replicas);
  auto stats = [&](const ring::RingConfig& eta) {
    std::vector<std::uint8_t> s(2 * un);
    for (int x = 0; x < n; ++x) {
      s[static_cast<std::size_t>(x)] = eta[x];
      s[un + static_cast<std::size_t>(x)] = eta[x] && eta[x + 1];
    }
    return s;
  };
  parallel_for(c.replicas, c.threads, [&](std::size_t r) {
    const std::uint64_t s = derive_seed(c.seed, "bridge-check", r);
    const auto env = lpp::Environment::periodic(n, k, derive_seed(s, "environment", 0));
    lpp_stats[r] = stats(bridge::lpp_driven_tasep(env, eta0, t, {t}).front());
    ring_stats[r] = stats(ring::simulate(eta0, ring::ClockSource(derive_seed(s, "clock", 0)), t).state_at(t));
  });
  CsvTable occ("ctasep.bridge-occupancy.v1", {"statistic", "site", "p_lpp", "p_ring", "z"});
  double worst_z = 0.0;
  const double reps = static_cast<double>(c.replicas);
  for (std::size_t i = 0; i < 2 * un; ++i) {
    double a = 0, b = 0;
    for (std::size_t r = 0; r < c.replicas; ++r) {
      a += lpp_stats[r][i];
      b += ring_stats[r][i];
    }
    const double p1 = a / reps, p2 = b / reps, pool = (a + b) / (2 * reps);
    const double se = std::sqrt(pool * (1 - pool) * 2 / reps);
    const double z = se > 0 ? (p1 - p2) / se : 0.0;
    worst_z = std::max(worst_z, std::abs(z));
    occ.add({std::string(i < un ? "site" : "pair"), static_cast<std::int64_t>(i % un), p1, p2, z});
  }
  log << "largest |z| " << format_number(worst_z) << "\n";

  const auto runs = static_cast<std::size_t>(param<std::int64_t>(c, "identity_runs"));
  const double cap = param<double>(c, "identity_cap");
  std::vector<bridge::IdentityCheck> checks(runs, bridge::IdentityCheck{0, 0, std::nullopt});
  parallel_for(runs, c.threads, [&](std::size_t r) {
    const std::uint64_t s = derive_seed(c.seed, "bridge-identity", r);
    const auto [eta, zeta] = estimators::sample_pair(n, k, estimators::PairFamily::random, derive_seed(s, "pair", 0));
    const auto env = lpp::Environment::periodic(n + 2, k + 1, derive_seed(s, "environment", 0));
    checks[r] = bridge::check_interface_identity(env, ring::disagreement(eta, zeta), cap);
  });
  CsvTable id("ctasep.bridge-identity.v1", {"run", "moves", "mismatches", "tau"});
  std::size_t bad = 0;
  for (std::size_t r = 0; r < runs; ++r) {
    bad += checks[r].mismatches;
    id.add({static_cast<std::int64_t>(r), static_cast<std::int64_t>(checks[r].moves),
            static_cast<std::int64_t>(checks[r].mismatches),
            checks[r].tau ? *checks[r].tau : std::numeric_limits<double>::infinity()});
  }
  log << "interface identity mismatches " << bad << "\n";
  return {{"occupancy.csv", occ, PlotSpec{"site", {"p_lpp", "p_ring"}, false, false, true}},
          {"identity.csv", id, std::nullopt}};
}

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> r = {
      {"simulate", run_simulate},         {"mix-exact", run_mix_exact},
      {"coalesce", run_coalesce},         {"lpp-stats", run_lpp_stats},
      {"tf-scaling", run_tf_scaling},     {"agreement", run_agreement},
      {"gamma-tv", run_gamma_tv},         {"geodesic-coalesce", run_geodesic_coalesce},
      {"bridge-check", run_bridge_check},
  };
  return r;
}

void write_error_record(const std::filesystem::path& dir, int code, const std::string& kind, const std::string& key,
                        const std::string& message) {
  json e{{"status", "error"}, {"exit_code", code}, {"kind", kind}, {"message", message}};
  if (!key.empty()) e["key"] = key;
  std::cerr << e.dump() << "\n";
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) return;
  std::ofstream out(dir / "error.json", std::ios::binary);
  if (out) out << e.dump(2) << "\n";
}

}  // namespace

RunOutcome run(const RunConfig& config, std::ostream& log) {
  RunOutcome outcome;
  outcome.directory = output_directory(config);
  RunManifest manifest;
  manifest.config = config.to_json();
  manifest.seed = config.seed;
  manifest.version = CTASEP_VERSION;
  manifest.started = utc_timestamp();
  const auto manifest_path = outcome.directory / "manifest.json";
  try {
    std::filesystem::create_directories(outcome.directory);
    std::filesystem::remove(outcome.directory / "error.json");
    manifest.write(manifest_path);
    const auto artifacts = runners().at(config.subcommand)(config, log);
    for (const auto& a : artifacts) {
      const std::string text = a.table.str();
      {
        std::ofstream out(outcome.directory / a.name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + a.name);
        out << text;
      }
      manifest.files.emplace_back(a.name, sha256_hex(text));
      outcome.files.push_back(a.name);
      if (a.plot) {
        const std::string svg_name = a.name.substr(0, a.name.size() - 4) + ".svg";
        const std::string svg = render_svg(text, *a.plot);
        std::ofstream out(outcome.directory / svg_name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + svg_name);
        out << svg;
        manifest.files.emplace_back(svg_name, sha256_hex(svg));
        outcome.files.push_back(svg_name);
      }
    }
    manifest.status = "ok";
  } catch (const ConfigError& e) {
    outcome.exit_code = kConfigError;
    outcome.error = e.what();
    write_error_record(outcome.directory, kConfigError, "config", e.key(), e.what());
  } catch (const std::exception& e) {
    outcome.exit_code = kRuntimeFailure;
    outcome.error = e.what();
    write_error_record(outcome.directory, kRuntimeFailure, "runtime", "", e.what());
  }
  if (outcome.exit_code != kOk) {
    manifest.status = "invalid";
    manifest.error = outcome.error;
  }
  manifest.finished = utc_timestamp();
  try {
    manifest.write(manifest_path);
  } catch (const std::exception& e) {
    log << "manifest: " << e.what() << "\n";
    if (outcome.exit_code == kOk) outcome.exit_code = kRuntimeFailure;
  }
  return outcome;
}

int self_test(std::ostream& log) {
  bool ok = true;
  auto check = [&](const std::string& name, bool pass, const std::string& detail) {
    log << (pass ? "PASS " : "FAIL ") << name << " " << detail << "\n";
    ok = ok && pass;
  };
  {
    const auto chain = exact::build(8, 3);
    const Eigen::RowVectorXd u = Eigen::RowVectorXd::Constant(chain.Q.rows(), 1.0 / chain.Q.rows());
    const double r = (u * chain.Q).cwiseAbs().maxCoeff();
    check("stationarity", r <= 1e-12, format_number(r));
  }
  {
    const auto pmf = exact::window_count_law(10, 4, 5);
    // C(5,z)C(5,4-z)/C(10,4)
    const double expect[] = {5.0 / 210, 50.0 / 210, 100.0 / 210, 50.0 / 210, 5.0 / 210, 0.0};
    double err = 0;
    for (std::size_t z = 0; z < pmf.size(); ++z) err = std::max(err, std::abs(pmf[z] - expect[z]));
    check("window-law", err <= 1e-12, format_number(err));
  }
  {
    const double s = 1.5, x = std::log(s) * s / 0.5;
    const double err = std::abs(estimators::gamma_tv(1, 0.5) - (std::exp(-x / s) - std::exp(-x)));
    check("gamma-tv", err <= 1e-8, format_number(err));
  }
  {
    const double a = exact::mixing_time(8, 3, 0.25), b = exact::mixing_time(8, 5, 0.25);
    check("particle-hole", std::abs(a - b) <= 1e-6, format_number(std::abs(a - b)));
  }
  {
    std::size_t bad = 0;
    for (std::uint64_t r = 0; r < 5; ++r) {
      const auto [eta, zeta] = estimators::sample_pair(10, 4, estimators::PairFamily::random, r);
      bad += bridge::check_interface_identity(lpp::Environment::periodic(12, 5, r), ring::disagreement(eta, zeta), 1e6)
                 .mismatches;
    }
    check("interface-identity", bad == 0, std::to_string(bad));
  }
  return ok ? kOk : kCheckFailure;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Exact and Monte Carlo experiments for TASEP on the ring and periodic last passage percolation"};
  app.set_version_flag("--version", std::string(CTASEP_VERSION));
  std::optional<std::string> subcommand;
  std::optional<std::string> config_path;
  Overrides flags;
  std::vector<std::string> params;
  bool run_self_test = false;
  bool list = false;
  app.add_option("subcommand", subcommand, "one of: simulate, mix-exact, coalesce, lpp-stats, tf-scaling, "
                                           "agreement, gamma-tv, geodesic-coalesce, bridge-check");
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--seed", flags.seed, "root seed");
  app.add_option("--out", flags.out, "output directory");
  app.add_option("--replicas", flags.replicas, "replica count");
  app.add_option("--threads", flags.threads, "worker threads (0: all cores)");
  app.add_option("--tolerance", flags.tolerance, "numerical tolerance override");
  app.add_option("-p,--param", params, "subcommand parameter key=value (value parsed as JSON when possible)");
  app.add_flag("--self-test", run_self_test, "run the built-in checks");
  app.add_flag("--list", list, "print the parameters of the subcommand");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  if (run_self_test) return self_test(std::cout);
  try {
    if (list) {
      if (!subcommand) {
        for (const auto& s : subcommands()) std::cout << s << "\n";
        return kOk;
      }
      for (const auto& p : parameters(*subcommand))
        std::cout << p.key << (p.fallback ? " = " + p.fallback->dump() : " (required)") << "  " << p.help << "\n";
      return kOk;
    }
    flags.subcommand = subcommand;
    for (const auto& kv : params) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError(kv, "expected key=value");
      flags.params.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    const RunConfig config = parse_config(config_path ? std::optional<std::filesystem::path>(*config_path) : std::nullopt,
                                          flags);
    const RunOutcome outcome = run(config, std::cerr);
    if (outcome.exit_code == kOk)
      for (const auto& f : outcome.files) std::cout << (outcome.directory / f).string() << "\n";
    return outcome.exit_code;
  } catch (const ConfigError& e) {
    json rec{{"status", "error"}, {"exit_code", kConfigError}, {"kind", "config"}, {"message", e.what()}};
    if (!e.key().empty()) rec["key"] = e.key();
    std::cerr << rec.dump() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << json{{"status", "error"}, {"exit_code", kRuntimeFailure}, {"kind", "runtime"}, {"message", e.what()}}.dump()
              << "\n";
    return kRuntimeFailure;
  }
}

}  // namespace ctasep::cli
