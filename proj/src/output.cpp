#include "qsel/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "qsel/error.hpp"

namespace qsel {

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size())
    throw Error(ErrorKind::InvalidInput, "row width does not match the header of " + name);
  rows.push_back(std::move(row));
}

std::string format_cell(const Cell& c) {
  if (const long* i = std::get_if<long>(&c)) return std::to_string(*i);
  if (const double* d = std::get_if<double>(&c)) {
    if (std::isnan(*d)) return "nan";
    if (std::isinf(*d)) return *d > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12e", *d);
    return buf;
  }
  return std::get<std::string>(c);
}

std::string to_csv(const Table& t) {
  std::string out;
  for (size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out += ',';
    out += t.columns[i];
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_cell(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (line.back() == ',') fields.emplace_back();
    rows.push_back(std::move(fields));
  }
  return rows;
}

namespace {

std::string escape_xml(const std::string& s) {
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

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string to_svg(const Plot& p) {
  const double W = 640, H = 420, left = 70, right = 20, top = 40, bottom = 55;
  auto tx = [&](double v) { return p.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return p.log_y ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(tx(x)) && std::isfinite(ty(y));
  };

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : p.series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  for (const auto& r : p.rects) {
    x0 = std::min(x0, r.x0);
    x1 = std::max(x1, r.x1);
    y0 = std::min(y0, r.y0);
    y1 = std::max(y1, r.y1);
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1;
  if (!(y0 <= y1)) y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-300) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-14 * std::max(1.0, std::abs(y0))) {
    const double pad = std::max(1e-12, 1e-6 * std::abs(y0));
    y0 -= pad, y1 += pad;
  }
  const double pw = W - left - right, ph = H - top - bottom;
  auto px = [&](double v) { return left + (v - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return top + (1.0 - (v - y0) / (y1 - y0)) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << escape_xml(p.title) << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    o << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(top + ph + 16)
      << "\" text-anchor=\"middle\">" << tick(p.log_x ? std::pow(10.0, xv) : xv) << "</text>\n";
    o << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(yv) + 4)
      << "\" text-anchor=\"end\">" << tick(p.log_y ? std::pow(10.0, yv) : yv) << "</text>\n";
  }
  o << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(H - 12)
    << "\" text-anchor=\"middle\">" << escape_xml(p.xlabel) << (p.log_x ? " (log)" : "")
    << "</text>\n";
  o << "<text transform=\"translate(16," << num(top + ph / 2)
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape_xml(p.ylabel)
    << (p.log_y ? " (log)" : "") << "</text>\n";

  for (const auto& r : p.rects)
    o << "<rect x=\"" << num(px(r.x0)) << "\" y=\"" << num(py(r.y1)) << "\" width=\""
      << num(px(r.x1) - px(r.x0)) << "\" height=\"" << num(py(r.y0) - py(r.y1))
      << "\" fill=\"#1f77b4\" fill-opacity=\"0.08\" stroke=\"#1f77b4\" stroke-width=\"0.6\"/>\n";

  for (size_t s = 0; s < p.series.size(); ++s) {
    const auto& ser = p.series[s];
    const char* color = kPalette[s % 6];
    if (ser.style == Series::Style::Line) {
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (size_t i = 0; i < ser.x.size(); ++i)
        if (usable(ser.x[i], ser.y[i]))
          o << num(px(tx(ser.x[i]))) << ',' << num(py(ty(ser.y[i]))) << ' ';
      o << "\"/>\n";
    } else {
      for (size_t i = 0; i < ser.x.size(); ++i)
        if (usable(ser.x[i], ser.y[i]))
          o << "<circle cx=\"" << num(px(tx(ser.x[i]))) << "\" cy=\"" << num(py(ty(ser.y[i])))
            << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    }
    o << "<text x=\"" << num(left + 10) << "\" y=\"" << num(top + 16 + 14 * s) << "\" fill=\""
      << color << "\">" << escape_xml(ser.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::InvalidInput, "cannot write " + path.string());
  f << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::InvalidInput, "cannot read " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

int log_level() {
  const char* env = std::getenv("TOOL_LOG");
  if (!env || !*env) return 1;
  const std::string v(env);
  if (v == "quiet" || v == "off") return 0;
  if (v == "info") return 1;
  if (v == "debug") return 2;
  return std::clamp(std::atoi(env), 0, 2);
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[qsel] " << msg << '\n';
}

void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[qsel:debug] " << msg << '\n';
}

}  // namespace qsel
