#pragma once

// Result emission: CSV tables, self-contained SVG line plots, SHA-256
// content hashes, and run manifests. Files are written atomically through a
// temporary sibling and a rename.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <json.hpp>

#include "hyperflow/errors.hpp"
#include "hyperflow/integrator.hpp"
#include "hyperflow/multiagent.hpp"

namespace hyperflow {

inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::string sha256_hex(const std::string& content) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(content.data(), content.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

// ---------------------------------------------------------------------------
// CSV

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::string str() const {
    if (header.empty()) throw ValidationError("csv: empty header");
    std::string out;
    for (std::size_t j = 0; j < header.size(); ++j) out += (j ? "," : "") + header[j];
    out += '\n';
    for (const auto& row : rows) {
      if (row.size() != header.size()) throw ValidationError("csv: row width does not match header");
      for (std::size_t j = 0; j < row.size(); ++j) out += (j ? "," : "") + format_number(row[j]);
      out += '\n';
    }
    return out;
  }
};

/// Columns t, x1..xn, mass, V, dVdt.
inline CsvTable trajectory_table(const Trajectory& traj) {
  if (traj.empty()) throw ValidationError("csv: empty trajectory");
  const int n = traj.states.front().size();
  CsvTable t;
  t.header.push_back("t");
  for (int i = 0; i < n; ++i) t.header.push_back("x" + std::to_string(i + 1));
  t.header.insert(t.header.end(), {"mass", "V", "dVdt"});
  for (std::size_t s = 0; s < traj.size(); ++s) {
    std::vector<double> row{traj.times[s]};
    const Vector& x = traj.states[s].values();
    row.insert(row.end(), x.data(), x.data() + x.size());
    row.push_back(x.sum());
    row.push_back(traj.diagnostics[s].entropy);
    row.push_back(traj.diagnostics[s].entropy_rate);
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// Columns t, then p_x, p_y, v_x, v_y per agent, then momentum and mean distance.
inline CsvTable swarm_table(const SwarmTrajectory& traj) {
  if (traj.size() == 0) throw ValidationError("csv: empty swarm trajectory");
  const int m = traj.states.front().agents();
  CsvTable t;
  t.header.push_back("t");
  for (int i = 1; i <= m; ++i) {
    const std::string s = std::to_string(i);
    t.header.insert(t.header.end(), {"p" + s + "_x", "p" + s + "_y", "v" + s + "_x", "v" + s + "_y"});
  }
  t.header.insert(t.header.end(), {"momentum_x", "momentum_y", "mean_dist"});
  for (std::size_t s = 0; s < traj.size(); ++s) {
    std::vector<double> row{traj.times[s]};
    const auto& x = traj.states[s];
    for (int i = 0; i < m; ++i) row.insert(row.end(), {x.p(i, 0), x.p(i, 1), x.v(i, 0), x.v(i, 1)});
    row.insert(row.end(), {traj.momentum[s].x(), traj.momentum[s].y(), traj.mean_distance[s]});
    t.rows.push_back(std::move(row));
  }
  return t;
}

// ---------------------------------------------------------------------------
// SVG

struct Series {
  std::string name;
  std::vector<double> xs;
  std::vector<double> ys;
};

struct PlotOptions {
  PlotOptions(std::string title_ = {}, std::string x_label_ = "t", std::string y_label_ = {})
      : title(std::move(title_)), x_label(std::move(x_label_)), y_label(std::move(y_label_)) {}

  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  int width = 720;
  int height = 440;
  bool markers = false;
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string fmt(double v, int prec = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

}  // namespace detail

/// A single-file line plot: frame, ticks, axis labels, one polyline per
/// series and a legend. Points that cannot be shown on a log axis are dropped.
inline std::string emit_svg(const std::vector<Series>& series, const PlotOptions& opt) {
  if (series.empty()) throw ValidationError("svg: no series");
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  auto tx = [&](double v) { return opt.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return opt.log_y ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!opt.log_x || x > 0) && (!opt.log_y || y > 0);
  };

  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  std::size_t points = 0;
  for (const auto& s : series) {
    if (s.xs.size() != s.ys.size()) throw ValidationError("svg: series '" + s.name + "' has mismatched lengths");
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      if (!usable(s.xs[i], s.ys[i])) continue;
      x0 = std::min(x0, tx(s.xs[i]));
      x1 = std::max(x1, tx(s.xs[i]));
      y0 = std::min(y0, ty(s.ys[i]));
      y1 = std::max(y1, ty(s.ys[i]));
      ++points;
    }
  }
  if (points == 0) throw ValidationError("svg: no drawable points");
  if (x1 == x0) { x0 -= 0.5; x1 += 0.5; }
  if (y1 == y0) { y0 -= 0.5; y1 += 0.5; }
  const double pad = 0.04 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  const double left = 80, right = 150, top = 40, bottom = 55;
  const double pw = opt.width - left - right, ph = opt.height - top - bottom;
  auto px = [&](double v) { return left + (v - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return top + (1.0 - (v - y0) / (y1 - y0)) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\"" << opt.height
     << "\" viewBox=\"0 0 " << opt.width << ' ' << opt.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << opt.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
     << detail::xml_escape(opt.title) << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5.0, yv = y0 + (y1 - y0) * i / 5.0;
    const std::string xl = opt.log_x ? "1e" + detail::fmt(xv, 3) : detail::fmt(xv);
    const std::string yl = opt.log_y ? "1e" + detail::fmt(yv, 3) : detail::fmt(yv);
    os << "<line x1=\"" << px(xv) << "\" y1=\"" << top + ph << "\" x2=\"" << px(xv) << "\" y2=\"" << top + ph + 5
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 19 << "\" text-anchor=\"middle\">" << xl << "</text>\n";
    os << "<line x1=\"" << left - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << left << "\" y2=\"" << py(yv)
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << left - 8 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << yl << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << opt.height - 12 << "\" text-anchor=\"middle\">"
     << detail::xml_escape(opt.x_label) << "</text>\n";
  os << "<text transform=\"translate(18," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << detail::xml_escape(opt.y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = palette[k % 10];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.xs.size(); ++i)
      if (usable(s.xs[i], s.ys[i]))
        os << detail::fmt(px(tx(s.xs[i])), 6) << ',' << detail::fmt(py(ty(s.ys[i])), 6) << ' ';
    os << "\"/>\n";
    if (opt.markers)
      for (std::size_t i = 0; i < s.xs.size(); ++i)
        if (usable(s.xs[i], s.ys[i]))
          os << "<circle cx=\"" << detail::fmt(px(tx(s.xs[i])), 6) << "\" cy=\"" << detail::fmt(py(ty(s.ys[i])), 6)
             << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    const double ly = top + 14 + 16.0 * k;
    os << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 32 << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << left + pw + 36 << "\" y=\"" << ly + 4 << "\">" << detail::xml_escape(s.name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Manifest

class RunManifest {
 public:
  explicit RunManifest(std::filesystem::path dir) : dir_(std::move(dir)) {}

  /// Writes `content` to dir/name atomically and records its hash.
  void emit(const std::string& name, const std::string& content) {
    write_file_atomic(dir_ / name, content);
    files_.push_back({{"name", name}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
  }

  nlohmann::json& info() { return info_; }

  /// Writes manifest.json listing every emitted file.
  void finish() {
    nlohmann::json doc = info_;
    doc["files"] = files_;
    write_file_atomic(dir_ / "manifest.json", doc.dump(2) + "\n");
  }

 private:
  std::filesystem::path dir_;
  nlohmann::json info_ = nlohmann::json::object();
  nlohmann::json files_ = nlohmann::json::array();
};

/// True when every file listed in dir/manifest.json exists with the recorded hash.
inline bool verify_manifest(const std::filesystem::path& dir) {
  const auto doc = nlohmann::json::parse(read_file(dir / "manifest.json"));
  for (const auto& f : doc.at("files")) {
    const auto path = dir / f.at("name").get<std::string>();
    if (!std::filesystem::exists(path)) return false;
    if (sha256_hex(read_file(path)) != f.at("sha256").get<std::string>()) return false;
  }
  return true;
}

}  // namespace hyperflow
