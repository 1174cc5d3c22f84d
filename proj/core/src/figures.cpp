#include "relucirc/figures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "relucirc/circuit_eval.hpp"
#include "relucirc/error.hpp"

namespace relucirc {

namespace {

const char* const kPalette[] = {"#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#e377c2",
                                "#17becf", "#bcbd22", "#7f7f7f", "#ff7f0e"};
const char* const kDashes[] = {"", "6,3", "6,3,1.5,3"};

std::string grey(double v) {
  const int c = static_cast<int>(std::lround(255.0 * (1.0 - 0.75 * std::clamp(v, 0.0, 1.0))));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c, c, 255);
  return buf;
}

}  // namespace

Style layer_style(std::size_t layer, std::size_t depth) {
  Style s;
  const std::size_t k = layer == 0 ? 0 : layer - 1;
  s.stroke = kPalette[k % 9];
  // earlier layers solid, later layers increasingly dashed
  const std::size_t band = depth <= 1 ? 0 : (k * 3) / depth;
  s.dash = kDashes[std::min<std::size_t>(band, 2)];
  s.stroke_width = 1.0;
  return s;
}

Style decision_boundary_style() {
  Style s;
  s.stroke = "#000000";
  s.stroke_width = 2.2;
  s.dash = "1.5,3";
  return s;
}

Figure nsb_figure(const ArchSpec& arch, const std::vector<NsbPolyline>& nsbs, const GridSpec& grid,
                  const Dataset* data, const std::string& title) {
  Figure f;
  f.title = title;
  f.x_label = "x0";
  f.y_label = "x1";
  f.equal_aspect = true;
  f.bounds = {grid.lower(0), grid.upper(0), grid.lower(1), grid.upper(1)};
  std::vector<LineLayer> per_layer(arch.depth());
  for (std::size_t l = 1; l <= arch.depth(); ++l) {
    per_layer[l - 1].name = "layer " + std::to_string(l);
    per_layer[l - 1].style = layer_style(l, arch.depth());
  }
  LineLayer db;
  db.name = "decision boundary";
  db.style = decision_boundary_style();
  for (const auto& n : nsbs) {
    auto& dst = n.target.is_decision_boundary(arch) ? db.lines : per_layer[n.target.layer - 1].lines;
    dst.insert(dst.end(), n.lines.begin(), n.lines.end());
  }
  for (auto& l : per_layer) {
    if (l.lines.empty()) l.name.clear();
    f.lines.push_back(std::move(l));
  }
  f.lines.push_back(std::move(db));
  if (data && data->dim() == 2) {
    PointLayer pos, neg;
    pos.style.stroke = "none";
    pos.style.fill = "#3060d0";
    pos.style.opacity = 0.6;
    neg.style = pos.style;
    neg.style.fill = "#d04030";
    for (std::size_t i = 0; i < data->size(); ++i) {
      const Point2 p{data->points(0, static_cast<Eigen::Index>(i)), data->points(1, static_cast<Eigen::Index>(i))};
      (data->labels[i] ? pos : neg).points.push_back(p);
    }
    f.points.push_back(std::move(neg));
    f.points.push_back(std::move(pos));
  }
  return f;
}

Figure nsb_figure(const MlpParams& params, const GridSpec& grid, const Dataset* data, const std::string& title) {
  return nsb_figure(params.arch, extract_all_nsbs(params, grid), grid, data, title);
}

Figure bound_series_figure(const std::vector<BoundRow>& rows, const std::string& title) {
  Figure f;
  f.title = title;
  f.x_label = "training step";
  f.y_label = "bound";
  f.log_y = true;
  struct Col {
    const char* name;
    double (*get)(const BoundRow&);
    const char* colour;
  };
  const Col cols[] = {
      {"VC Bool", [](const BoundRow& r) { return r.vc_bool; }, "#000000"},
      {"Gamma Bool", [](const BoundRow& r) { return r.gamma_bool; }, "#7f7f7f"},
      {"frobenius", [](const BoundRow& r) { return r.norms.frobenius; }, "#1f77b4"},
      {"spec-l12", [](const BoundRow& r) { return r.norms.spec_l12; }, "#2ca02c"},
      {"spec-fro", [](const BoundRow& r) { return r.norms.spec_fro; }, "#d62728"},
  };
  for (const auto& c : cols) {
    LineLayer l;
    l.name = c.name;
    l.style.stroke = c.colour;
    l.style.stroke_width = 1.5;
    Polyline line;
    for (const auto& r : rows) line.push_back({static_cast<double>(r.step), c.get(r)});
    l.lines.push_back(std::move(line));
    f.lines.push_back(std::move(l));
  }
  return f;
}

Figure by_architecture_figure(const std::vector<std::string>& arch_names, const std::vector<NamedSeries>& series,
                              const std::string& y_label, const std::string& title) {
  Figure f;
  f.title = title;
  f.y_label = y_label;
  f.log_y = true;
  f.x_label = "architecture:";
  for (std::size_t i = 0; i < arch_names.size(); ++i) f.x_label += " " + std::to_string(i + 1) + "=" + arch_names[i];
  for (std::size_t k = 0; k < series.size(); ++k) {
    LineLayer l;
    l.name = series[k].name;
    l.style.stroke = kPalette[k % 9];
    l.style.stroke_width = 1.5;
    l.style.dash = kDashes[k % 3];
    Polyline line;
    for (std::size_t i = 0; i < series[k].values.size(); ++i) {
      line.push_back({static_cast<double>(i + 1), series[k].values[i]});
    }
    PointLayer pts;
    pts.points = line;
    pts.radius = 2.5;
    pts.style.stroke = "none";
    pts.style.fill = l.style.stroke;
    l.lines.push_back(std::move(line));
    f.lines.push_back(std::move(l));
    f.points.push_back(std::move(pts));
  }
  return f;
}

Figure region_figure(const CircuitTree& tree, const NodePath& path, const GridSpec& grid, std::size_t raster,
                     const std::string& title) {
  if (grid.dim() != 2) throw InputError("region plots need a 2D input space");
  const GridSpec g = GridSpec::uniform(grid.lower, grid.upper, std::max<std::size_t>(raster, 2));
  const std::size_t n = g.resolution[0];
  Matrix pts(2, static_cast<Eigen::Index>(g.total_points()));
  for (std::uint64_t k = 0; k < g.total_points(); ++k) pts.col(static_cast<Eigen::Index>(k)) = g.point(k);
  TreeEvaluator eval(tree);
  const std::vector<std::uint8_t> in = eval.logical_batch(node_at(tree, path), pts);
  Figure f;
  f.title = title;
  f.x_label = "x0";
  f.y_label = "x1";
  f.equal_aspect = true;
  f.bounds = {grid.lower(0), grid.upper(0), grid.lower(1), grid.upper(1)};
  const double cx = g.cell_size(0), cy = g.cell_size(1);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t i = 0;
    while (i < n) {
      if (!in[j * n + i]) {
        ++i;
        continue;
      }
      std::size_t e = i;
      while (e < n && in[j * n + e]) ++e;
      Cell c;
      c.x = grid.lower(0) + (static_cast<double>(i) - 0.5) * cx;
      c.y = grid.lower(1) + (static_cast<double>(j) - 0.5) * cy;
      c.width = static_cast<double>(e - i) * cx;
      c.height = cy;
      c.fill = "#9ecae1";
      c.stroke = "none";
      f.cells.push_back(c);
      i = e;
    }
  }
  return f;
}

Figure probe_figure(const std::vector<ProbeArray>& probes, const std::string& title) {
  Figure f;
  f.title = title;
  f.axes = false;
  const double rows = static_cast<double>(probes.size());
  f.width_px = 520;
  f.height_px = 90 + 70 * rows;
  f.bounds = {-2.2, 10.2, -0.5, 3.0 * rows};
  for (std::size_t k = 0; k < probes.size(); ++k) {
    const ProbeArray& p = probes[k];
    const double base = 3.0 * (rows - 1.0 - static_cast<double>(k));
    f.texts.push_back({{-0.2, base + 2.3}, "node " + p.node + " (" + p.split + ")", 10.0, "start"});
    f.texts.push_back({{-0.3, base + 1.35}, "True", 9.0, "end"});
    f.texts.push_back({{-0.3, base + 0.35}, "False", 9.0, "end"});
    for (std::size_t d = 0; d < 10; ++d) {
      const double t = p.true_fraction(d), fl = p.false_fraction(d);
      char a[16], b[16];
      std::snprintf(a, sizeof a, "%.0f%%", 100.0 * t);
      std::snprintf(b, sizeof b, "%.0f%%", 100.0 * fl);
      const double x = static_cast<double>(d);
      f.cells.push_back({x, base + 1.0, 1.0, 1.0, grey(p.count[d] ? t : 0.0), p.count[d] ? a : "-"});
      f.cells.push_back({x, base, 1.0, 1.0, grey(p.count[d] ? fl : 0.0), p.count[d] ? b : "-"});
      if (k + 1 == probes.size()) f.texts.push_back({{x + 0.5, -0.45}, std::to_string(d), 9.0, "middle"});
    }
  }
  return f;
}

}  // namespace relucirc
