#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "ctasep/cli/config.hpp"

namespace ctasep::cli {

/// Shortest decimal that round-trips the double.
std::string format_number(double x);

using CsvValue = std::variant<std::int64_t, double, std::string>;

/// CSV table with a "# schema: <id>" first line and a header row.
class CsvTable {
 public:
  CsvTable(std::string schema, std::vector<std::string> columns);

  void add(std::vector<CsvValue> row);
  const std::string& schema() const noexcept { return schema_; }
  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::string schema_;
  std::vector<std::string> columns_;
  std::vector<std::vector<CsvValue>> rows_;
};

struct CsvData {
  std::string schema;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  /// Numeric column; throws when the column is missing.
  std::vector<double> column(const std::string& name) const;
};

CsvData parse_csv(const std::string& text);

struct PlotSpec {
  std::string x;
  std::vector<std::string> y;
  bool log_x = false;
  bool log_y = false;
  bool scatter = false;
};

/// Line or scatter plot of CSV columns; a pure function of the CSV text.
std::string render_svg(const std::string& csv_text, const PlotSpec& spec);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Snapshot of a run; written with status "running" before the run starts and
/// rewritten with "ok" or "invalid" afterwards.
struct RunManifest {
  json config;
  std::uint64_t seed = 0;
  std::string version;
  std::string started;
  std::string finished;
  std::string status = "running";
  std::string error;
  std::vector<std::pair<std::string, std::string>> files;  // name, sha256

  json to_json() const;
  void write(const std::filesystem::path& path) const;
};

std::string utc_timestamp();

}  // namespace ctasep::cli
