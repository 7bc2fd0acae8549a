#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hyperend/core/format.hpp"
#include "hyperend/io/run_config.hpp"

namespace hyperend::io {

// Writes artifacts into the output directory, each stamped with the tool
// version and the config hash.
class ArtifactWriter {
 public:
  ArtifactWriter(std::string dir, std::string hash) : dir_(std::move(dir)), hash_(std::move(hash)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::io_error, "cli_io", "cannot create '" + dir_ + "': " + ec.message());
  }

  const std::string& hash() const noexcept { return hash_; }
  const std::vector<std::string>& written() const noexcept { return written_; }

  json header() const { return {{"tool", "hyperend"}, {"version", tool_version}, {"config_hash", hash_}}; }

  void csv(const std::string& name, const std::string& body) {
    write(name, "# tool=hyperend version=" + std::string(tool_version) + " config_hash=" + hash_ + "\n" + body);
  }

  void json_doc(const std::string& name, json body) {
    json doc = {{"header", header()}};
    for (auto& [k, v] : body.items()) doc[k] = v;
    write(name, doc.dump(2) + "\n");
  }

  void svg(const std::string& name, const std::string& body) {
    write(name, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!-- tool=hyperend version=" + std::string(tool_version) +
                    " config_hash=" + hash_ + " -->\n" + body);
  }

 private:
  void write(const std::string& name, const std::string& text) {
    const std::string path = (std::filesystem::path(dir_) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::io_error, "cli_io", "cannot write '" + path + "'");
    out << text;
    if (!out) throw Error(ErrorKind::io_error, "cli_io", "write to '" + path + "' failed");
    written_.push_back(path);
  }

  std::string dir_;
  std::string hash_;
  std::vector<std::string> written_;
};

// Comma-separated rows; doubles use round-trip precision.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  CsvTable& row() {
    rows_.emplace_back();
    return *this;
  }
  CsvTable& cell(double v) { return text(num(v)); }
  CsvTable& cell(long v) { return text(std::to_string(v)); }
  CsvTable& cell(int v) { return text(std::to_string(v)); }
  CsvTable& cell(bool v) { return text(v ? "true" : "false"); }
  CsvTable& text(const std::string& s) {
    rows_.back().push_back(s);
    return *this;
  }

  std::string str() const {
    std::ostringstream out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t k = 0; k < cells.size(); ++k) out << (k ? "," : "") << cells[k];
      out << '\n';
    };
    line(columns_);
    for (const auto& r : rows_) line(r);
    return out.str();
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Hand-written line plot with axes, five ticks per axis and point markers.
inline std::string line_plot_svg(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                                 const std::vector<double>& xs, const std::vector<double>& ys) {
  const double W = 640, H = 420, L = 70, R = 20, T = 40, B = 60;
  double x0 = xs.empty() ? 0.0 : *std::min_element(xs.begin(), xs.end());
  double x1 = xs.empty() ? 1.0 : *std::max_element(xs.begin(), xs.end());
  double y0 = ys.empty() ? 0.0 : *std::min_element(ys.begin(), ys.end());
  double y1 = ys.empty() ? 1.0 : *std::max_element(ys.begin(), ys.end());
  if (x1 - x0 < 1e-12) { x0 -= 0.5; x1 += 0.5; }
  if (y1 - y0 < 1e-12) { y0 -= 0.5; y1 += 0.5; }
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
    << title << "</text>\n";
  s << "<path d=\"M" << L << ' ' << T << " V" << H - B << " H" << W - R << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    s << "<path d=\"M" << svg_num(px(xv)) << ' ' << H - B << " v5\" stroke=\"black\"/>"
      << "<text x=\"" << svg_num(px(xv)) << "\" y=\"" << H - B + 18
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << svg_num(xv) << "</text>\n";
    s << "<path d=\"M" << L << ' ' << svg_num(py(yv)) << " h-5\" stroke=\"black\"/>"
      << "<text x=\"" << L - 8 << "\" y=\"" << svg_num(py(yv) + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << svg_num(yv) << "</text>\n";
  }
  s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 16
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << xlabel << "</text>\n";
  s << "<text x=\"18\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\""
    << " transform=\"rotate(-90 18 " << (T + H - B) / 2 << ")\">" << ylabel << "</text>\n";
  if (!xs.empty()) {
    s << "<path d=\"";
    for (std::size_t k = 0; k < xs.size(); ++k) s << (k ? " L" : "M") << svg_num(px(xs[k])) << ' ' << svg_num(py(ys[k]));
    s << "\" fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\"/>\n";
    for (std::size_t k = 0; k < xs.size(); ++k) {
      s << "<circle cx=\"" << svg_num(px(xs[k])) << "\" cy=\"" << svg_num(py(ys[k])) << "\" r=\"3\" fill=\"#1f5fa8\"/>\n";
    }
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace hyperend::io
