#include "ctasep/cli/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "ctasep/estimators.hpp"
#include "ctasep/lpp.hpp"
#include "ctasep/ring.hpp"

namespace ctasep::cli {

namespace {

using PT = ParamType;

const std::map<std::string, std::vector<ParamSpec>>& table() {
  static const std::map<std::string, std::vector<ParamSpec>> t = {
      {"simulate",
       {{"initial", PT::text, std::nullopt, "initial configuration as a 0/1 string"},
        {"horizon", PT::number, json(10.0), "final time"},
        {"samples", PT::integer, json(11), "evenly spaced sample times in [0, horizon]"}}},
      {"mix-exact",
       {{"N", PT::integer, std::nullopt, "ring size"},
        {"k", PT::integer, std::nullopt, "particles"},
        {"epsilon", PT::number_list, json::array({0.25}), "mixing thresholds"},
        {"curve_points", PT::integer, json(0), "points of the worst-case TV curve (0: none)"},
        {"cutoff_epsilon", PT::number, json(0.0), "ε of the t_mix(ε)/t_mix(1-ε) ratio (0: none)"}}},
      {"coalesce",
       {{"N", PT::integer_list, std::nullopt, "ring sizes"},
        {"k_rule", PT::text, json("half"), "half: k = N/2; fixed: k = k_fixed"},
        {"k_fixed", PT::integer, json(2), "particles when k_rule is fixed"},
        {"families", PT::text_list, json::array({"antipodal"}), "pair families"},
        {"cap_factor", PT::number, json(40.0), "run cap = cap_factor·N²/√k"}}},
      {"lpp-stats",
       {{"n", PT::integer_list, json::array({100, 200, 400, 800}), "endpoint first coordinates"},
        {"m", PT::rational, json("1"), "slope in (0,1]"},
        {"x_grid", PT::number_list,
         json::array({0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0, 3.5, 4.0}),
         "tail abscissae in fluctuation units"},
        {"tail_n", PT::integer, json(0), "n of the tail table (0: largest n)"},
        {"fit_lo", PT::number, json(1.0), "lower end of the tail fit range"},
        {"fit_hi", PT::number, json(3.0), "upper end of the tail fit range"}}},
      {"tf-scaling",
       {{"n", PT::integer_list, json::array({100, 200, 400, 800, 1600}), "endpoint first coordinates"},
        {"m", PT::rational, json("1"), "slope in (0,1]"}}},
      {"agreement",
       {{"n", PT::integer, std::nullopt, "endpoint first coordinate"},
        {"m", PT::rational, json("1"), "slope in (0,1]"},
        {"k", PT::integer_list, std::nullopt, "particles of the periodic environment"},
        {"N", PT::integer_list, json::array(), "ring sizes, one per k (empty: N = 2k, needs m = 1)"}}},
      {"gamma-tv",
       {{"M", PT::integer_list, std::nullopt, "Gamma shapes"},
        {"delta", PT::number_list, std::nullopt, "scale perturbations, |δ| < 1"}}},
      {"geodesic-coalesce",
       {{"N", PT::integer, std::nullopt, "ring size"},
        {"k", PT::integer, std::nullopt, "particles"},
        {"theta", PT::number_list, json::array({0.25, 0.5, 1.0, 2.0, 4.0}), "v = (⌊N²/(θ√k)⌋, 1)"}}},
      {"bridge-check",
       {{"N", PT::integer, std::nullopt, "ring size"},
        {"k", PT::integer, std::nullopt, "particles"},
        {"t", PT::number, json(5.0), "time of the distributional comparison"},
        {"identity_runs", PT::integer, json(100), "coupled runs of the interface identity"},
        {"identity_cap", PT::number, json(1e6), "time cap of each coupled run"}}},
  };
  return t;
}

const std::map<std::string, std::size_t>& default_replicas() {
  static const std::map<std::string, std::size_t> d = {
      {"simulate", 1},  {"mix-exact", 1},   {"coalesce", 200},          {"lpp-stats", 500},
      {"tf-scaling", 300}, {"agreement", 200}, {"gamma-tv", 1}, {"geodesic-coalesce", 200},
      {"bridge-check", 10000}};
  return d;
}

const std::set<std::string> kGeneralKeys = {"subcommand", "seed", "out", "replicas", "threads", "tolerance"};

const char* type_name(PT t) {
  switch (t) {
    case PT::integer:
      return "an integer";
    case PT::number:
      return "a number";
    case PT::text:
      return "a string";
    case PT::rational:
      return "a rational (integer, decimal or \"p/q\")";
    case PT::integer_list:
      return "a list of integers";
    case PT::number_list:
      return "a list of numbers";
    case PT::text_list:
      return "a list of strings";
  }
  return "?";
}

lpp::Rational parse_rational(const std::string& s) {
  const auto slash = s.find('/');
  std::size_t used = 0;
  if (slash != std::string::npos) {
    const long long p = std::stoll(s.substr(0, slash), &used);
    if (used != slash) throw std::invalid_argument("bad numerator");
    const std::string q = s.substr(slash + 1);
    const long long d = std::stoll(q, &used);
    if (used != q.size() || d == 0) throw std::invalid_argument("bad denominator");
    return {p, d};
  }
  const auto dot = s.find('.');
  if (dot == std::string::npos) {
    const long long p = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument("bad integer");
    return {p};
  }
  const std::string digits = s.substr(0, dot) + s.substr(dot + 1);
  const auto scale = s.size() - dot - 1;
  if (scale > 15) throw std::invalid_argument("too many decimals");
  const long long p = std::stoll(digits, &used);
  if (used != digits.size()) throw std::invalid_argument("bad decimal");
  long long d = 1;
  for (std::size_t i = 0; i < scale; ++i) d *= 10;
  return {p, d};
}

std::string rational_text(lpp::Rational r) {
  return r.den == 1 ? std::to_string(r.num) : std::to_string(r.num) + "/" + std::to_string(r.den);
}

json coerce(const std::string& key, PT type, const json& v) {
  auto fail = [&]() -> json { throw ConfigError(key, std::string("expected ") + type_name(type)); };
  auto is_int = [](const json& x) { return x.is_number_integer(); };
  switch (type) {
    case PT::integer:
      return is_int(v) ? v : fail();
    case PT::number:
      return v.is_number() ? json(v.get<double>()) : fail();
    case PT::text:
      return v.is_string() ? v : fail();
    case PT::rational: {
      std::string s;
      if (v.is_number_integer()) s = std::to_string(v.get<std::int64_t>());
      else if (v.is_string()) s = v.get<std::string>();
      else if (v.is_number()) s = v.dump();
      else return fail();
      try {
        return json(rational_text(parse_rational(s)));
      } catch (const std::exception&) {
        return fail();
      }
    }
    case PT::integer_list:
    case PT::number_list:
    case PT::text_list: {
      const json arr = v.is_array() ? v : json::array({v});
      json out = json::array();
      const PT item = type == PT::integer_list ? PT::integer : type == PT::number_list ? PT::number : PT::text;
      for (const auto& x : arr) {
        try {
          out.push_back(coerce(key, item, x));
        } catch (const ConfigError&) {
          return fail();
        }
      }
      return out;
    }
  }
  return fail();
}

template <class T>
T get(const json& params, const std::string& key) {
  return params.at(key).get<T>();
}

void require(bool ok, const std::string& key, const std::string& message) {
  if (!ok) throw ConfigError(key, message);
}

void check_ring(const json& p, const std::string& nk, const std::string& kk, int min_n = 2) {
  const auto n = get<std::int64_t>(p, nk), k = get<std::int64_t>(p, kk);
  require(n >= min_n && n <= 4096, nk, "ring size must satisfy " + std::to_string(min_n) + " <= N <= 4096");
  require(k >= 1 && k <= n - 1, kk,
          "particles must satisfy 1 <= k <= N-1 (got k=" + std::to_string(k) + ", N=" + std::to_string(n) + ")");
}

void check_slope(const json& p) {
  const auto m = parse_rational(get<std::string>(p, "m"));
  require(m.num > 0 && m.num <= m.den, "m", "slope must satisfy 0 < m <= 1");
}

void validate(const RunConfig& c) {
  const json& p = c.params;
  const std::string& s = c.subcommand;
  if (s == "simulate") {
    try {
      ring::RingConfig::parse(get<std::string>(p, "initial"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("initial", e.what());
    }
    require(get<double>(p, "horizon") >= 0, "horizon", "must be nonnegative");
    require(get<std::int64_t>(p, "samples") >= 1, "samples", "must be at least 1");
  } else if (s == "mix-exact") {
    check_ring(p, "N", "k");
    require(get<std::int64_t>(p, "N") <= 24, "N", "exact mixing needs N <= 24");
    for (double e : get<std::vector<double>>(p, "epsilon"))
      require(e > 0 && e < 1, "epsilon", "every ε must lie in (0,1)");
    require(get<std::int64_t>(p, "curve_points") >= 0, "curve_points", "must be nonnegative");
    const double ce = get<double>(p, "cutoff_epsilon");
    require(ce == 0 || (ce > 0 && ce < 0.5), "cutoff_epsilon", "must be 0 or lie in (0, 1/2)");
  } else if (s == "coalesce") {
    const auto rule = get<std::string>(p, "k_rule");
    require(rule == "half" || rule == "fixed", "k_rule", "must be \"half\" or \"fixed\"");
    const auto kf = get<std::int64_t>(p, "k_fixed");
    const auto ns = get<std::vector<std::int64_t>>(p, "N");
    require(!ns.empty(), "N", "needs at least one ring size");
    for (auto n : ns) {
      require(n >= 4 && n <= 1 << 20, "N", "ring sizes must satisfy 4 <= N <= 2^20");
      if (rule == "fixed") require(kf >= 1 && 2 * kf <= n, "k_fixed", "must satisfy 1 <= k <= N/2 for every N");
    }
    const auto fams = get<std::vector<std::string>>(p, "families");
    require(!fams.empty(), "families", "needs at least one family");
    for (const auto& f : fams) {
      try {
        estimators::parse_pair_family(f);
      } catch (const std::invalid_argument& e) {
        throw ConfigError("families", e.what());
      }
    }
    require(get<double>(p, "cap_factor") > 0, "cap_factor", "must be positive");
  } else if (s == "lpp-stats" || s == "tf-scaling") {
    const auto ns = get<std::vector<std::int64_t>>(p, "n");
    require(!ns.empty(), "n", "needs at least one value");
    for (auto n : ns) require(n >= 1 && n <= 20000, "n", "values must satisfy 1 <= n <= 20000");
    check_slope(p);
    if (s == "lpp-stats") {
      const auto tn = get<std::int64_t>(p, "tail_n");
      require(tn >= 0 && tn <= 20000, "tail_n", "must satisfy 0 <= tail_n <= 20000");
      require(get<double>(p, "fit_lo") < get<double>(p, "fit_hi"), "fit_hi", "must exceed fit_lo");
    }
  } else if (s == "agreement") {
    const auto n = get<std::int64_t>(p, "n");
    require(n >= 1 && n <= 20000, "n", "must satisfy 1 <= n <= 20000");
    check_slope(p);
    const auto ks = get<std::vector<std::int64_t>>(p, "k");
    const auto ns = get<std::vector<std::int64_t>>(p, "N");
    require(!ks.empty(), "k", "needs at least one value");
    if (ns.empty())
      require(get<std::string>(p, "m") == "1", "N", "must be given unless m = 1");
    else
      require(ns.size() == ks.size(), "N", "needs one ring size per k");
    for (std::size_t i = 0; i < ks.size(); ++i) {
      const auto nn = ns.empty() ? 2 * ks[i] : ns[i];
      require(ks[i] >= 1 && ks[i] < nn, "k", "particles must satisfy 1 <= k <= N-1");
    }
  } else if (s == "gamma-tv") {
    for (auto m : get<std::vector<std::int64_t>>(p, "M"))
      require(m >= 1 && m <= 100000000, "M", "shapes must satisfy 1 <= M <= 1e8");
    for (double d : get<std::vector<double>>(p, "delta")) require(std::abs(d) < 1, "delta", "must satisfy |δ| < 1");
  } else if (s == "geodesic-coalesce") {
    check_ring(p, "N", "k");
    const auto n = get<std::int64_t>(p, "N"), k = get<std::int64_t>(p, "k");
    require(k >= 4 && n >= 2 * k, "k", "needs k >= 4 and N >= 2k");
    for (double th : get<std::vector<double>>(p, "theta")) require(th > 0, "theta", "values must be positive");
  } else if (s == "bridge-check") {
    check_ring(p, "N", "k", 3);
    require(get<double>(p, "t") >= 0, "t", "must be nonnegative");
    require(get<std::int64_t>(p, "identity_runs") >= 0, "identity_runs", "must be nonnegative");
    require(get<double>(p, "identity_cap") > 0, "identity_cap", "must be positive");
  }
  require(c.replicas >= 1, "replicas", "must be at least 1");
  if (c.tolerance) require(*c.tolerance > 0, "tolerance", "must be positive");
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : table()) v.push_back(k);
    return v;
  }();
  return names;
}

const std::vector<ParamSpec>& parameters(const std::string& subcommand) {
  const auto it = table().find(subcommand);
  if (it == table().end()) throw ConfigError("subcommand", "unknown subcommand \"" + subcommand + "\"");
  return it->second;
}

json RunConfig::to_json() const {
  json j;
  j["subcommand"] = subcommand;
  j["seed"] = seed;
  j["out"] = out;
  j["replicas"] = replicas;
  j["threads"] = threads;
  if (tolerance) j["tolerance"] = *tolerance;
  for (const auto& [k, v] : params.items()) j[k] = v;
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("", "configuration must be a JSON object");
  if (!j.contains("subcommand")) throw ConfigError("subcommand", "missing required key");
  if (!j["subcommand"].is_string()) throw ConfigError("subcommand", "expected a string");
  RunConfig c;
  c.subcommand = j["subcommand"].get<std::string>();
  const auto& specs = parameters(c.subcommand);
  for (const auto& [k, v] : j.items()) {
    if (kGeneralKeys.count(k)) continue;
    const bool known = std::any_of(specs.begin(), specs.end(), [&](const ParamSpec& s) { return s.key == k; });
    if (!known) throw ConfigError(k, "unknown key for subcommand \"" + c.subcommand + "\"");
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<std::int64_t>() >= 0))
      throw ConfigError("seed", "expected a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("out")) {
    if (!j["out"].is_string() || j["out"].get<std::string>().empty())
      throw ConfigError("out", "expected a nonempty string");
    c.out = j["out"].get<std::string>();
  }
  c.replicas = default_replicas().at(c.subcommand);
  if (j.contains("replicas")) {
    if (!j["replicas"].is_number_integer() || j["replicas"].get<std::int64_t>() < 1)
      throw ConfigError("replicas", "expected a positive integer");
    c.replicas = j["replicas"].get<std::size_t>();
  }
  if (j.contains("threads")) {
    if (!j["threads"].is_number_integer() || j["threads"].get<std::int64_t>() < 0 ||
        j["threads"].get<std::int64_t>() > 1024)
      throw ConfigError("threads", "expected an integer in [0, 1024]");
    c.threads = j["threads"].get<unsigned>();
  }
  if (j.contains("tolerance")) {
    if (!j["tolerance"].is_number()) throw ConfigError("tolerance", "expected a number");
    c.tolerance = j["tolerance"].get<double>();
  }
  for (const auto& s : specs) {
    if (j.contains(s.key))
      c.params[s.key] = coerce(s.key, s.type, j[s.key]);
    else if (s.fallback)
      c.params[s.key] = coerce(s.key, s.type, *s.fallback);
    else
      throw ConfigError(s.key, "missing required key for subcommand \"" + c.subcommand + "\"");
  }
  validate(c);
  return c;
}

json read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("malformed JSON: ") + e.what());
  }
}

RunConfig parse_config(const std::optional<std::filesystem::path>& path, const Overrides& flags) {
  json j = path ? read_config_file(*path) : json::object();
  if (!j.is_object()) throw ConfigError("config", "configuration must be a JSON object");
  if (flags.subcommand) j["subcommand"] = *flags.subcommand;
  if (flags.seed) j["seed"] = *flags.seed;
  if (flags.out) j["out"] = *flags.out;
  if (flags.replicas) j["replicas"] = *flags.replicas;
  if (flags.threads) j["threads"] = *flags.threads;
  if (flags.tolerance) j["tolerance"] = *flags.tolerance;
  for (const auto& [k, v] : flags.params) {
    if (kGeneralKeys.count(k)) throw ConfigError(k, "use the dedicated flag instead of -p");
    try {
      j[k] = json::parse(v);
    } catch (const json::parse_error&) {
      j[k] = v;
    }
  }
  return RunConfig::from_json(j);
}

std::filesystem::path output_directory(const RunConfig& config) {
  const std::filesystem::path out(config.out);
  if (out.is_absolute()) return out;
  if (const char* root = std::getenv("CTASEP_OUT_ROOT"); root && *root) return std::filesystem::path(root) / out;
  return std::filesystem::current_path() / out;
}

}  // namespace ctasep::cli
