#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "relucirc/nsb.hpp"

namespace relucirc {

struct Style {
  std::string stroke = "#000000";
  double stroke_width = 1.0;
  std::string dash;           // SVG stroke-dasharray, empty for solid
  std::string fill = "none";
  double opacity = 1.0;
};

struct LineLayer {
  std::string name;           // legend entry, empty for none
  std::vector<Polyline> lines;
  Style style;
};

struct PointLayer {
  std::string name;
  std::vector<Point2> points;
  double radius = 2.0;
  Style style;
};

/// Axis-aligned rectangle in data coordinates with an optional centred label.
struct Cell {
  double x = 0, y = 0, width = 1, height = 1;
  std::string fill = "#ffffff";
  std::string text;
  std::string stroke = "#888888";
};

struct TextItem {
  Point2 at{};
  std::string text;
  double size = 10.0;
  std::string anchor = "middle";
};

/// A single-panel plot. Layers are drawn in order: cells, lines, points,
/// texts. When the bounds are left empty they are fitted to the content.
struct Figure {
  std::string title;
  std::string x_label;
  std::string y_label;
  double width_px = 480;
  double height_px = 420;
  bool log_y = false;
  bool axes = true;
  bool equal_aspect = false;
  std::vector<double> bounds;  // xmin, xmax, ymin, ymax
  std::vector<Cell> cells;
  std::vector<LineLayer> lines;
  std::vector<PointLayer> points;
  std::vector<TextItem> texts;
};

/// Deterministic SVG text: identical figures give identical bytes.
std::string render_svg(const Figure& figure);
void write_svg(const Figure& figure, const std::filesystem::path& path);

/// Up to ~`target` round tick values covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int target = 5);

}  // namespace relucirc
