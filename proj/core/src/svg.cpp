#include "relucirc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "relucirc/error.hpp"

namespace relucirc {

namespace {

constexpr double kLeft = 64, kRight = 16, kTop = 30, kBottom = 46;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s = buf;
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string tick_label(double v) {
  char buf[32];
  if (v != 0.0 && (std::abs(v) >= 1e5 || std::abs(v) < 1e-3)) std::snprintf(buf, sizeof buf, "%.0e", v);
  else std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string style_attrs(const Style& s) {
  std::string a = " stroke=\"" + escape(s.stroke) + "\" stroke-width=\"" + num(s.stroke_width) + "\" fill=\"" +
                  escape(s.fill) + "\"";
  if (!s.dash.empty()) a += " stroke-dasharray=\"" + escape(s.dash) + "\"";
  if (s.opacity < 1.0) a += " opacity=\"" + num(s.opacity) + "\"";
  return a;
}

struct Frame {
  double x0, x1, y0, y1;  // data range (y already log10 when log_y)
  double px0, px1, py0, py1;
  bool log_y;

  bool ok(const Point2& p) const {
    return std::isfinite(p[0]) && std::isfinite(p[1]) && (!log_y || p[1] > 0);
  }
  double yv(double y) const { return log_y ? std::log10(y) : y; }
  double sx(double x) const { return px0 + (x - x0) / (x1 - x0) * (px1 - px0); }
  double sy(double y) const { return py0 - (yv(y) - y0) / (y1 - y0) * (py0 - py1); }
};

Frame make_frame(const Figure& f) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  auto take = [&](double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y) || (f.log_y && y <= 0)) return;
    const double yy = f.log_y ? std::log10(y) : y;
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, yy);
    y1 = std::max(y1, yy);
  };
  if (f.bounds.size() == 4) {
    take(f.bounds[0], f.bounds[2]);
    take(f.bounds[1], f.bounds[3]);
  } else {
    for (const auto& c : f.cells) {
      take(c.x, c.y);
      take(c.x + c.width, c.y + c.height);
    }
    for (const auto& l : f.lines) {
      for (const auto& line : l.lines) {
        for (const auto& p : line) take(p[0], p[1]);
      }
    }
    for (const auto& l : f.points) {
      for (const auto& p : l.points) take(p[0], p[1]);
    }
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1;
  if (!(y0 <= y1)) y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  Frame fr{x0, x1, y0, y1, kLeft, f.width_px - kRight, f.height_px - kBottom, kTop, f.log_y};
  if (f.equal_aspect && !f.log_y) {
    const double sxs = (fr.px1 - fr.px0) / (x1 - x0), sys = (fr.py0 - fr.py1) / (y1 - y0);
    if (sxs > sys) {
      const double half = 0.5 * (fr.px1 - fr.px0) / sys, c = 0.5 * (x0 + x1);
      fr.x0 = c - half;
      fr.x1 = c + half;
    } else {
      const double half = 0.5 * (fr.py0 - fr.py1) / sxs, c = 0.5 * (y0 + y1);
      fr.y0 = c - half;
      fr.y1 = c + half;
    }
  }
  return fr;
}

void polyline(std::ostringstream& o, const Frame& fr, const Polyline& line, const std::string& attrs) {
  std::string pts;
  auto flush = [&] {
    if (!pts.empty() && pts.find(' ') != std::string::npos) o << "<polyline points=\"" << pts << "\"" << attrs << "/>\n";
    pts.clear();
  };
  for (const auto& p : line) {
    if (!fr.ok(p)) {
      flush();
      continue;
    }
    if (!pts.empty()) pts += ' ';
    pts += num(fr.sx(p[0])) + "," + num(fr.sy(p[1]));
  }
  flush();
}

}  // namespace

std::vector<double> nice_ticks(double lo, double hi, int target) {
  if (!(hi > lo) || target < 1) return {lo};
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step - 1e-9) * step; t <= hi + step * 1e-9; t += step) {
    out.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  }
  return out;
}

std::string render_svg(const Figure& f) {
  const Frame fr = make_frame(f);
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(f.width_px) << "\" height=\"" << num(f.height_px)
    << "\" viewBox=\"0 0 " << num(f.width_px) << " " << num(f.height_px) << "\" font-family=\"sans-serif\">\n";
  o << "<rect x=\"0\" y=\"0\" width=\"" << num(f.width_px) << "\" height=\"" << num(f.height_px)
    << "\" fill=\"#ffffff\"/>\n";
  if (!f.title.empty()) {
    o << "<text x=\"" << num(f.width_px / 2) << "\" y=\"18\" font-size=\"13\" text-anchor=\"middle\">"
      << escape(f.title) << "</text>\n";
  }
  o << "<defs><clipPath id=\"plot\"><rect x=\"" << num(fr.px0) << "\" y=\"" << num(fr.py1) << "\" width=\""
    << num(fr.px1 - fr.px0) << "\" height=\"" << num(fr.py0 - fr.py1) << "\"/></clipPath></defs>\n";

  if (f.axes) {
    o << "<g stroke=\"#444444\" stroke-width=\"1\" fill=\"none\">\n";
    o << "<rect x=\"" << num(fr.px0) << "\" y=\"" << num(fr.py1) << "\" width=\"" << num(fr.px1 - fr.px0)
      << "\" height=\"" << num(fr.py0 - fr.py1) << "\"/>\n";
    o << "</g>\n<g font-size=\"10\" fill=\"#222222\">\n";
    for (double t : nice_ticks(fr.x0, fr.x1)) {
      const double x = fr.sx(t);
      o << "<line x1=\"" << num(x) << "\" y1=\"" << num(fr.py0) << "\" x2=\"" << num(x) << "\" y2=\""
        << num(fr.py0 + 4) << "\" stroke=\"#444444\"/>\n";
      o << "<text x=\"" << num(x) << "\" y=\"" << num(fr.py0 + 15) << "\" text-anchor=\"middle\">"
        << tick_label(t) << "</text>\n";
    }
    std::vector<double> yt;
    if (f.log_y) {
      for (double e = std::ceil(fr.y0 - 1e-9); e <= fr.y1 + 1e-9; e += 1.0) yt.push_back(e);
      if (yt.size() > 8) {
        const double stride = std::ceil(static_cast<double>(yt.size()) / 6.0);
        std::vector<double> thin;
        for (std::size_t i = 0; i < yt.size(); i += static_cast<std::size_t>(stride)) thin.push_back(yt[i]);
        yt = thin;
      }
    } else {
      yt = nice_ticks(fr.y0, fr.y1);
    }
    for (double t : yt) {
      const double y = fr.py0 - (t - fr.y0) / (fr.y1 - fr.y0) * (fr.py0 - fr.py1);
      o << "<line x1=\"" << num(fr.px0 - 4) << "\" y1=\"" << num(y) << "\" x2=\"" << num(fr.px0) << "\" y2=\""
        << num(y) << "\" stroke=\"#444444\"/>\n";
      o << "<text x=\"" << num(fr.px0 - 6) << "\" y=\"" << num(y + 3) << "\" text-anchor=\"end\">"
        << (f.log_y ? "1e" + tick_label(t) : tick_label(t)) << "</text>\n";
    }
    if (!f.x_label.empty()) {
      o << "<text x=\"" << num(0.5 * (fr.px0 + fr.px1)) << "\" y=\"" << num(f.height_px - 8)
        << "\" text-anchor=\"middle\" font-size=\"11\">" << escape(f.x_label) << "</text>\n";
    }
    if (!f.y_label.empty()) {
      const double cy = 0.5 * (fr.py0 + fr.py1);
      o << "<text x=\"14\" y=\"" << num(cy) << "\" text-anchor=\"middle\" font-size=\"11\" transform=\"rotate(-90 14 "
        << num(cy) << ")\">" << escape(f.y_label) << "</text>\n";
    }
    o << "</g>\n";
  }

  o << "<g clip-path=\"url(#plot)\">\n";
  for (const auto& c : f.cells) {
    const double x = fr.sx(c.x), y = fr.sy(c.y + c.height);
    o << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(fr.sx(c.x + c.width) - x)
      << "\" height=\"" << num(fr.sy(c.y) - y) << "\" fill=\"" << escape(c.fill) << "\" stroke=\"" << escape(c.stroke) << "\"/>\n";
    if (!c.text.empty()) {
      o << "<text x=\"" << num(fr.sx(c.x + c.width / 2)) << "\" y=\"" << num(fr.sy(c.y + c.height / 2) + 3)
        << "\" font-size=\"9\" text-anchor=\"middle\">" << escape(c.text) << "</text>\n";
    }
  }
  for (const auto& l : f.lines) {
    o << "<g>\n";
    const std::string attrs = style_attrs(l.style) + " stroke-linejoin=\"round\"";
    for (const auto& line : l.lines) polyline(o, fr, line, attrs);
    o << "</g>\n";
  }
  for (const auto& l : f.points) {
    o << "<g" << style_attrs(l.style) << ">\n";
    for (const auto& p : l.points) {
      if (!fr.ok(p)) continue;
      o << "<circle cx=\"" << num(fr.sx(p[0])) << "\" cy=\"" << num(fr.sy(p[1])) << "\" r=\"" << num(l.radius)
        << "\"/>\n";
    }
    o << "</g>\n";
  }
  o << "</g>\n";
  for (const auto& t : f.texts) {
    o << "<text x=\"" << num(fr.sx(t.at[0])) << "\" y=\"" << num(fr.sy(t.at[1])) << "\" font-size=\"" << num(t.size)
      << "\" text-anchor=\"" << escape(t.anchor) << "\">" << escape(t.text) << "</text>\n";
  }

  double ly = fr.py1 + 12;
  std::vector<std::pair<std::string, Style>> legend;
  for (const auto& l : f.lines) {
    if (!l.name.empty()) legend.emplace_back(l.name, l.style);
  }
  for (const auto& l : f.points) {
    if (!l.name.empty()) legend.emplace_back(l.name, l.style);
  }
  if (!legend.empty()) {
    o << "<g font-size=\"10\">\n";
    for (const auto& [name, st] : legend) {
      const double x = fr.px1 - 120;
      Style s = st;
      s.fill = "none";
      o << "<line x1=\"" << num(x) << "\" y1=\"" << num(ly - 3) << "\" x2=\"" << num(x + 22) << "\" y2=\""
        << num(ly - 3) << "\"" << style_attrs(s) << "/>\n";
      o << "<text x=\"" << num(x + 27) << "\" y=\"" << num(ly) << "\">" << escape(name) << "</text>\n";
      ly += 13;
    }
    o << "</g>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_svg(const Figure& figure, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path.string());
  f << render_svg(figure);
}

}  // namespace relucirc
