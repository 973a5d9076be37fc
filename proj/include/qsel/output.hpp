#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace qsel {

using Cell = std::variant<long, double, std::string>;

/// Column-oriented result table; doubles are written as %.12e so reruns are byte-identical.
struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

std::string format_cell(const Cell& c);
std::string to_csv(const Table& t);
/// Splits CSV text into rows of fields; no quoting support beyond plain fields.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

struct Series {
  enum class Style { Line, Points };
  std::string label;
  std::vector<double> x, y;
  Style style = Style::Line;
};

struct Rect {
  double x0, y0, x1, y1;
};

struct Plot {
  std::string name;  // file stem
  std::string title, xlabel, ylabel;
  bool log_x = false, log_y = false;
  std::vector<Series> series;
  std::vector<Rect> rects;  // drawn as translucent outlines
};

/// Minimal standalone SVG with axes, polylines, markers and rectangles.
std::string to_svg(const Plot& p);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t v);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Verbosity from TOOL_LOG: 0 quiet, 1 info (default), 2 debug. Words quiet/info/debug work too.
int log_level();
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace qsel
