#include "relucirc/nsb.hpp"

#include <cmath>
#include <cstdint>

#include "relucirc/error.hpp"

namespace relucirc {

namespace {

constexpr std::int64_t kNone = -1;

struct Crossing {
  Point2 p;
  std::array<std::int64_t, 2> adj{kNone, kNone};
};

double eval_target(const MlpParams& params, const NsbTarget& t, const Eigen::Ref<const Vector>& x) {
  const ForwardTrace tr = forward(params, x);
  if (t.layer == params.arch.depth() + 1) return tr.output;
  return tr.preactivations[t.layer - 1](static_cast<Eigen::Index>(t.index));
}

void check_target(const ArchSpec& arch, const NsbTarget& t) {
  if (t.layer == arch.depth() + 1) {
    if (t.index != 0) throw InputError("output neuron index must be 0");
    return;
  }
  if (t.layer == 0 || t.layer > arch.depth()) throw InputError("neuron layer out of range");
  if (t.index >= arch.width(t.layer)) throw InputError("neuron index out of range");
}

// Illinois variant of regula falsi on the segment a -> b, whose end values
// have different signs.
Point2 refine_crossing(const MlpParams& params, const NsbTarget& t, const Point2& a, const Point2& b, double fa,
                       double fb, double tol) {
  Vector x(2);
  auto at = [&](double s) {
    x(0) = a[0] + s * (b[0] - a[0]);
    x(1) = a[1] + s * (b[1] - a[1]);
    return eval_target(params, t, x);
  };
  double lo = 0.0, hi = 1.0, flo = fa, fhi = fb;
  double s = flo / (flo - fhi);
  double best_s = std::abs(fa) <= std::abs(fb) ? 0.0 : 1.0;
  double best_f = std::min(std::abs(fa), std::abs(fb));
  int side = 0;
  for (int it = 0; it < 200 && best_f > tol && hi - lo > 1e-16; ++it) {
    const double fs = at(s);
    if (std::abs(fs) < best_f) {
      best_f = std::abs(fs);
      best_s = s;
    }
    if ((fs >= 0.0) == (flo >= 0.0)) {
      lo = s;
      flo = fs;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = s;
      fhi = fs;
      if (side == 1) flo *= 0.5;
      side = 1;
    }
    s = flo == fhi ? 0.5 * (lo + hi) : lo + (hi - lo) * flo / (flo - fhi);
    if (!(s > lo && s < hi)) s = 0.5 * (lo + hi);
  }
  return {a[0] + best_s * (b[0] - a[0]), a[1] + best_s * (b[1] - a[1])};
}

NsbPolyline contour(const MlpParams& params, const GridSpec& grid, const NsbTarget& t, const std::vector<double>& f,
                    double tol) {
  const std::size_t nx = grid.resolution[0], ny = grid.resolution[1];
  NsbPolyline out;
  out.target = t;
  out.decision_boundary = t.is_decision_boundary(params.arch);

  std::vector<std::int64_t> edge_crossing(2 * nx * ny, kNone);
  std::vector<Crossing> crossings;
  auto corner = [&](std::size_t i, std::size_t j) {
    const Vector p = grid.point(j * nx + i);
    return Point2{p(0), p(1)};
  };
  // dir 0: (i,j)-(i+1,j); dir 1: (i,j)-(i,j+1)
  auto crossing_on = [&](std::size_t i, std::size_t j, int dir) -> std::int64_t {
    const std::size_t e = 2 * (j * nx + i) + static_cast<std::size_t>(dir);
    if (edge_crossing[e] != kNone) return edge_crossing[e];
    const std::size_t i2 = dir == 0 ? i + 1 : i, j2 = dir == 0 ? j : j + 1;
    const double fa = f[j * nx + i], fb = f[j2 * nx + i2];
    Crossing c;
    c.p = refine_crossing(params, t, corner(i, j), corner(i2, j2), fa, fb, tol);
    edge_crossing[e] = static_cast<std::int64_t>(crossings.size());
    crossings.push_back(c);
    return edge_crossing[e];
  };
  auto link = [&](std::int64_t u, std::int64_t v) {
    auto put = [&](std::int64_t a, std::int64_t b) {
      auto& adj = crossings[static_cast<std::size_t>(a)].adj;
      if (adj[0] == kNone) adj[0] = b;
      else adj[1] = b;
    };
    put(u, v);
    put(v, u);
  };

  for (std::size_t j = 0; j + 1 < ny; ++j) {
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      const double v0 = f[j * nx + i], v1 = f[j * nx + i + 1];
      const double v2 = f[(j + 1) * nx + i + 1], v3 = f[(j + 1) * nx + i];
      const bool s0 = v0 >= 0, s1 = v1 >= 0, s2 = v2 >= 0, s3 = v3 >= 0;
      std::int64_t e[4] = {kNone, kNone, kNone, kNone};
      if (s0 != s1) e[0] = crossing_on(i, j, 0);
      if (s1 != s2) e[1] = crossing_on(i + 1, j, 1);
      if (s3 != s2) e[2] = crossing_on(i, j + 1, 0);
      if (s0 != s3) e[3] = crossing_on(i, j, 1);
      const int n = (e[0] != kNone) + (e[1] != kNone) + (e[2] != kNone) + (e[3] != kNone);
      if (n == 2) {
        std::int64_t u = kNone, v = kNone;
        for (auto c : e) {
          if (c == kNone) continue;
          if (u == kNone) u = c;
          else v = c;
        }
        link(u, v);
      } else if (n == 4) {
        const bool centre = 0.25 * (v0 + v1 + v2 + v3) >= 0;
        if (centre == s0) {
          link(e[0], e[1]);
          link(e[2], e[3]);
        } else {
          link(e[0], e[3]);
          link(e[1], e[2]);
        }
      }
    }
  }

  std::vector<char> used(crossings.size(), 0);
  auto walk = [&](std::size_t start) {
    Polyline line;
    std::int64_t prev = kNone, cur = static_cast<std::int64_t>(start);
    while (cur != kNone && !used[static_cast<std::size_t>(cur)]) {
      used[static_cast<std::size_t>(cur)] = 1;
      const Crossing& c = crossings[static_cast<std::size_t>(cur)];
      line.push_back(c.p);
      const std::int64_t next = c.adj[0] != prev ? c.adj[0] : c.adj[1];
      prev = cur;
      cur = next;
    }
    if (cur == static_cast<std::int64_t>(start)) line.push_back(line.front());
    if (line.size() >= 2) out.lines.push_back(std::move(line));
  };
  for (std::size_t k = 0; k < crossings.size(); ++k) {
    const auto& adj = crossings[k].adj;
    if (!used[k] && (adj[0] == kNone || adj[1] == kNone)) walk(k);
  }
  for (std::size_t k = 0; k < crossings.size(); ++k) {
    if (!used[k]) walk(k);
  }
  return out;
}

void check_grid(const GridSpec& grid) {
  grid.validate();
  if (grid.dim() != 2) throw InputError("neuron state boundaries can only be traced in a 2D input space");
}

}  // namespace

std::size_t NsbPolyline::vertex_count() const {
  std::size_t n = 0;
  for (const auto& l : lines) n += l.size();
  return n;
}

double preactivation(const MlpParams& params, const NsbTarget& target, const Eigen::Ref<const Vector>& x) {
  check_target(params.arch, target);
  return eval_target(params, target, x);
}

NsbPolyline extract_nsb(const MlpParams& params, const GridSpec& grid, const NsbTarget& target, double tolerance) {
  check_grid(grid);
  if (params.arch.input_dim != 2) throw InputError("neuron state boundaries need a 2D network input");
  check_target(params.arch, target);
  const std::uint64_t n = grid.total_points();
  std::vector<double> f(n);
  Vector x(2);
  for (std::uint64_t k = 0; k < n; ++k) {
    grid.point(k, x);
    f[k] = eval_target(params, target, x);
  }
  return contour(params, grid, target, f, tolerance);
}

std::vector<NsbPolyline> extract_all_nsbs(const MlpParams& params, const GridSpec& grid, double tolerance) {
  check_grid(grid);
  if (params.arch.input_dim != 2) throw InputError("neuron state boundaries need a 2D network input");
  const ArchSpec& arch = params.arch;
  std::vector<NsbTarget> targets;
  for (std::size_t l = 1; l <= arch.depth(); ++l) {
    for (std::size_t i = 0; i < arch.width(l); ++i) targets.push_back({l, i});
  }
  targets.push_back(NsbTarget::decision_boundary(arch));

  const std::uint64_t n = grid.total_points();
  std::vector<std::vector<double>> f(targets.size(), std::vector<double>(n));
  Vector x(2);
  for (std::uint64_t k = 0; k < n; ++k) {
    grid.point(k, x);
    const ForwardTrace tr = forward(params, x);
    std::size_t r = 0;
    for (std::size_t l = 1; l <= arch.depth(); ++l) {
      for (std::size_t i = 0; i < arch.width(l); ++i) f[r++][k] = tr.preactivations[l - 1](static_cast<Eigen::Index>(i));
    }
    f[r][k] = tr.output;
  }
  std::vector<NsbPolyline> out;
  out.reserve(targets.size());
  for (std::size_t r = 0; r < targets.size(); ++r) out.push_back(contour(params, grid, targets[r], f[r], tolerance));
  return out;
}

}  // namespace relucirc
