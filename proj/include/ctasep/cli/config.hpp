#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace ctasep::cli {

using json = nlohmann::ordered_json;

/// Invalid configuration; key() names the offending key when there is one.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : "'" + key + "': " + message), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

enum class ParamType { integer, number, text, rational, integer_list, number_list, text_list };

struct ParamSpec {
  std::string key;
  ParamType type;
  std::optional<json> fallback;  // empty: required
  std::string help;
};

const std::vector<std::string>& subcommands();
/// Throws ConfigError for an unknown subcommand.
const std::vector<ParamSpec>& parameters(const std::string& subcommand);

struct RunConfig {
  std::string subcommand;
  json params = json::object();  // every declared key, in declaration order
  std::uint64_t seed = 1;
  std::string out = "out";
  std::size_t replicas = 1;
  unsigned threads = 1;
  std::optional<double> tolerance;

  json to_json() const;
  /// Strict: unknown keys, wrong types and missing required keys are errors.
  static RunConfig from_json(const json& j);
};

/// Command-line values; each present one replaces the file value.
struct Overrides {
  std::optional<std::string> subcommand;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> replicas;
  std::optional<unsigned> threads;
  std::optional<double> tolerance;
  std::vector<std::pair<std::string, std::string>> params;  // -p key=value
};

json read_config_file(const std::filesystem::path& path);
RunConfig parse_config(const std::optional<std::filesystem::path>& path, const Overrides& flags);

/// Output directory: an absolute `out` is used as is; a relative one is
/// resolved against $CTASEP_OUT_ROOT, or the working directory when unset.
std::filesystem::path output_directory(const RunConfig& config);

}  // namespace ctasep::cli
