#include "ctasep/cli/output.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ctasep::cli {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

CsvTable::CsvTable(std::string schema, std::vector<std::string> columns)
    : schema_(std::move(schema)), columns_(std::move(columns)) {}

void CsvTable::add(std::vector<CsvValue> row) {
  if (row.size() != columns_.size()) throw std::logic_error("CSV row width does not match the header");
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string s = "# schema: " + schema_ + "\n";
  for (std::size_t i = 0; i < columns_.size(); ++i) s += (i ? "," : "") + columns_[i];
  s += "\n";
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) s += ",";
      if (const auto* n = std::get_if<std::int64_t>(&row[i])) s += std::to_string(*n);
      else if (const auto* d = std::get_if<double>(&row[i])) s += format_number(*d);
      else s += std::get<std::string>(row[i]);
    }
    s += "\n";
  }
  return s;
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << str();
}

std::vector<double> CsvData::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::invalid_argument("CSV has no column '" + name + "'");
  const auto c = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  for (const auto& r : rows) {
    const std::string& cell = r.at(c);
    if (cell == "inf") out.push_back(std::numeric_limits<double>::infinity());
    else if (cell == "-inf") out.push_back(-std::numeric_limits<double>::infinity());
    else if (cell == "nan") out.push_back(std::numeric_limits<double>::quiet_NaN());
    else {
      double v = 0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw std::invalid_argument("non-numeric CSV cell '" + cell + "' in column " + name);
      out.push_back(v);
    }
  }
  return out;
}

CsvData parse_csv(const std::string& text) {
  CsvData d;
  std::istringstream in(text);
  std::string line;
  bool header = false;
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : l) {
      if (ch == ',') {
        cells.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    cells.push_back(cur);
    return cells;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string tag = "# schema: ";
      if (line.rfind(tag, 0) == 0) d.schema = line.substr(tag.size());
      continue;
    }
    if (!header) {
      d.columns = split(line);
      header = true;
    } else {
      d.rows.push_back(split(line));
    }
  }
  return d;
}

namespace {

std::string fixed(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick_label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

}  // namespace

std::string render_svg(const std::string& csv_text, const PlotSpec& spec) {
  const CsvData d = parse_csv(csv_text);
  constexpr double W = 640, H = 420, L = 70, R = 20, T = 30, B = 50;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  auto tx = [&](double x) { return spec.log_x ? std::log10(x) : x; };
  auto ty = [&](double y) { return spec.log_y ? std::log10(y) : y; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!spec.log_x || x > 0) && (!spec.log_y || y > 0);
  };
  const std::vector<double> xs = d.column(spec.x);
  std::vector<std::vector<double>> ys;
  for (const auto& name : spec.y) ys.push_back(d.column(name));
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& col : ys)
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (usable(xs[i], col[i])) {
        x0 = std::min(x0, tx(xs[i]));
        x1 = std::max(x1, tx(xs[i]));
        y0 = std::min(y0, ty(col[i]));
        y1 = std::max(y1, ty(col[i]));
      }
  if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  auto px = [&](double x) { return L + (tx(x) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (ty(y) - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << L << "\" y=\"18\" font-size=\"13\">" << d.schema << "</text>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4, fy = y0 + (y1 - y0) * i / 4;
    const double vx = spec.log_x ? std::pow(10.0, fx) : fx, vy = spec.log_y ? std::pow(10.0, fy) : fy;
    s << "<text x=\"" << fixed(px(vx)) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << tick_label(vx)
      << "</text>\n";
    s << "<text x=\"" << L - 6 << "\" y=\"" << fixed(py(vy) + 4) << "\" text-anchor=\"end\">" << tick_label(vy)
      << "</text>\n";
  }
  s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << spec.x
    << (spec.log_x ? " (log)" : "") << "</text>\n";
  for (std::size_t c = 0; c < ys.size(); ++c) {
    const char* color = colors[c % 6];
    std::string pts;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!usable(xs[i], ys[c][i])) continue;
      const std::string p = fixed(px(xs[i])) + "," + fixed(py(ys[c][i]));
      if (spec.scatter)
        s << "<circle cx=\"" << fixed(px(xs[i])) << "\" cy=\"" << fixed(py(ys[c][i])) << "\" r=\"2.5\" fill=\"" << color
          << "\"/>\n";
      pts += (pts.empty() ? "" : " ") + p;
    }
    if (!spec.scatter && !pts.empty())
      s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts << "\"/>\n";
    s << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 14 * (c + 1) << "\" text-anchor=\"end\" fill=\"" << color
      << "\">" << spec.y[c] << (spec.log_y ? " (log)" : "") << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

json RunManifest::to_json() const {
  json j;
  j["status"] = status;
  j["version"] = version;
  j["seed"] = seed;
  j["started"] = started;
  j["finished"] = finished;
  j["config"] = config;
  json f = json::array();
  for (const auto& [name, digest] : files) f.push_back({{"name", name}, {"sha256", digest}});
  j["files"] = f;
  if (!error.empty()) j["error"] = error;
  return j;
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json().dump(2) << "\n";
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace ctasep::cli
