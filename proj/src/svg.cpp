#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "lgp/pipeline.hpp"

namespace lgp {

namespace {

struct View {
  double x0, y0, scale;
  double px(double x) const { return (x - x0) * scale; }
  double py(double y) const { return (y0 - y) * scale; }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Blue -> white -> red over t in [0, 1].
std::string ramp(double t) {
  t = std::clamp(t, 0.0, 1.0);
  int r, g, b;
  if (t < 0.5) {
    const double a = t / 0.5;
    r = static_cast<int>(40 + a * 215);
    g = static_cast<int>(80 + a * 175);
    b = 255;
  } else {
    const double a = (t - 0.5) / 0.5;
    r = 255;
    g = static_cast<int>(255 - a * 200);
    b = static_cast<int>(255 - a * 215);
  }
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

const char* kind_color(ArcKind k) {
  switch (k) {
    case ArcKind::increasing:
      return "#d62728";
    case ArcKind::decreasing:
      return "#1f77b4";
    case ArcKind::flat:
      return "#7f7f7f";
  }
  return "#000";
}

void polyline(std::ostringstream& os, const View& v, const std::vector<Vec2>& pts, const std::string& style,
              bool closed = false) {
  if (pts.size() < 2) return;
  os << "<" << (closed ? "polygon" : "polyline") << " points=\"";
  for (Vec2 p : pts) os << fmt(v.px(p.x)) << "," << fmt(v.py(p.y)) << " ";
  os << "\" " << style << "/>\n";
}

std::vector<Vec2> curve_points(const ConvexBoundary& c, std::size_t max_points = 720) {
  const std::size_t step = std::max<std::size_t>(1, c.size() / max_points);
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < c.size(); i += step) out.push_back(c.vertex(i));
  return out;
}

void draw_decomposition(std::ostringstream& os, const View& v, const ConvexBoundary& c, const ArcDecomposition& d) {
  for (const auto& a : d.arcs) {
    if (a.empty) continue;
    auto pts = arc_sample_points(c, a.arc);
    if (pts.size() > 400) {
      std::vector<Vec2> thin;
      const std::size_t step = pts.size() / 400 + 1;
      for (std::size_t i = 0; i < pts.size(); i += step) thin.push_back(pts[i]);
      thin.push_back(pts.back());
      pts = std::move(thin);
    }
    polyline(os, v, pts, std::string("fill=\"none\" stroke=\"") + kind_color(a.kind) + "\" stroke-width=\"4\"");
  }
  for (double s : d.junctions) {
    const Vec2 p = c.point_at(s);
    os << "<circle cx=\"" << fmt(v.px(p.x)) << "\" cy=\"" << fmt(v.py(p.y)) << "\" r=\"5\" fill=\"black\"/>\n";
  }
}

// Marching squares on cell centers; segments of the level set {u = level}.
void contour(std::ostringstream& os, const View& v, const Grid& g, const std::vector<double>& u, double level) {
  const std::size_t n = g.nx();
  os << "<path d=\"";
  for (std::size_t j = 0; j + 1 < n; ++j) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const std::size_t c[4] = {g.index(i, j), g.index(i + 1, j), g.index(i + 1, j + 1), g.index(i, j + 1)};
      double val[4];
      bool ok = true;
      for (int k = 0; k < 4; ++k) {
        val[k] = u[c[k]];
        ok = ok && std::isfinite(val[k]);
      }
      if (!ok) continue;
      Vec2 pts[4];
      int m = 0;
      for (int k = 0; k < 4; ++k) {
        const double a = val[k] - level, b = val[(k + 1) % 4] - level;
        if ((a < 0.0) != (b < 0.0)) {
          const double t = a / (a - b);
          pts[m++] = lerp(g.center(c[k]), g.center(c[(k + 1) % 4]), t);
        }
      }
      for (int k = 0; k + 1 < m; k += 2) {
        os << "M" << fmt(v.px(pts[k].x)) << " " << fmt(v.py(pts[k].y)) << "L" << fmt(v.px(pts[k + 1].x)) << " "
           << fmt(v.py(pts[k + 1].y));
      }
    }
  }
  os << "\" fill=\"none\" stroke=\"black\" stroke-width=\"0.8\" opacity=\"0.7\"/>\n";
}

}  // namespace

std::string render_svg(const PipelineResult& r) {
  const Annulus& an = *r.annulus;
  const double size = 800.0;
  double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
  for (Vec2 p : an.outer().vertices()) {
    lo_x = std::min(lo_x, p.x);
    hi_x = std::max(hi_x, p.x);
    lo_y = std::min(lo_y, p.y);
    hi_y = std::max(hi_y, p.y);
  }
  const double span = std::max(hi_x - lo_x, hi_y - lo_y) * 1.08;
  const double cx = 0.5 * (lo_x + hi_x), cy = 0.5 * (lo_y + hi_y);
  const View v{cx - 0.5 * span, cy + 0.5 * span, size / span};

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\" viewBox=\"0 0 "
     << size << " " << size << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Transport density, downsampled to at most ~160 blocks per axis.
  if (r.raster && r.grid) {
    const Grid& g = *r.grid;
    const auto sigma = r.raster->sigma.density(g.h());
    const std::size_t block = std::max<std::size_t>(1, g.nx() / 160);
    std::vector<double> agg;
    const std::size_t nb = (g.nx() + block - 1) / block;
    agg.assign(nb * nb, 0.0);
    double top = 0.0;
    for (std::size_t j = 0; j < g.ny(); ++j) {
      for (std::size_t i = 0; i < g.nx(); ++i) {
        double& a = agg[(j / block) * nb + i / block];
        a += sigma[g.index(i, j)] / static_cast<double>(block * block);
        top = std::max(top, a);
      }
    }
    if (top > 0.0) {
      os << "<g opacity=\"0.85\">\n";
      const double w = g.h() * static_cast<double>(block);
      for (std::size_t bj = 0; bj < nb; ++bj) {
        for (std::size_t bi = 0; bi < nb; ++bi) {
          const double a = agg[bj * nb + bi];
          if (a <= 0.0) continue;
          const double x = g.line(static_cast<std::ptrdiff_t>(bi * block));
          const double y = g.line(static_cast<std::ptrdiff_t>(bj * block)) + w;
          // sqrt scaling keeps thin transport bands visible
          const double t = std::sqrt(a / top);
          os << "<rect x=\"" << fmt(v.px(x)) << "\" y=\"" << fmt(v.py(y)) << "\" width=\"" << fmt(w * v.scale + 0.5)
             << "\" height=\"" << fmt(w * v.scale + 0.5) << "\" fill=\"" << ramp(0.5 + 0.5 * t) << "\"/>\n";
        }
      }
      os << "</g>\n";
    }
  }

  if (r.solution && r.grid) {
    const auto& u = r.solution->u.values;
    double lo = 1e300, hi = -1e300;
    for (double x : u) {
      if (std::isfinite(x)) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
    }
    if (hi > lo) {
      for (int k = 1; k < 10; ++k) contour(os, v, *r.grid, u, lo + (hi - lo) * k / 10.0);
    }
  }

  if (r.plan && !r.plan->pairs.empty()) {
    const auto& plan = *r.plan;
    const std::size_t step = std::max<std::size_t>(1, plan.pairs.size() / 300);
    double lo = 0.0, hi = 0.0;
    if (r.solution) {
      const auto [a, b] = std::minmax_element(r.solution->levels.begin(), r.solution->levels.end());
      lo = *a;
      hi = *b;
    }
    os << "<g stroke-width=\"1\" opacity=\"0.8\">\n";
    for (std::size_t k = 0; k < plan.pairs.size(); k += step) {
      const auto& p = plan.pairs[k];
      const Vec2 a = plan.from(p), b = plan.to(p);
      const std::string color = (r.solution && hi > lo) ? ramp((r.solution->levels[k] - lo) / (hi - lo)) : "#2ca02c";
      os << "<line x1=\"" << fmt(v.px(a.x)) << "\" y1=\"" << fmt(v.py(a.y)) << "\" x2=\"" << fmt(v.px(b.x))
         << "\" y2=\"" << fmt(v.py(b.y)) << "\" stroke=\"" << color << "\"/>\n";
    }
    os << "</g>\n";
  }

  const std::string thin = "fill=\"none\" stroke=\"black\" stroke-width=\"1\"";
  polyline(os, v, curve_points(an.outer()), thin, true);
  polyline(os, v, curve_points(an.inner()), thin, true);
  draw_decomposition(os, v, an.outer(), r.admissibility.outer_decomposition);
  draw_decomposition(os, v, an.inner(), r.admissibility.inner_decomposition);
  os << "<text x=\"10\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << r.config.name
     << "  (red: increasing, blue: decreasing, grey: flat)</text>\n</svg>\n";
  return os.str();
}

}  // namespace lgp
