#include "capcover/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <fmt/format.h>

namespace capcover {

namespace {

constexpr int kCircleSteps = 360;
constexpr std::array<const char*, 8> kPalette = {
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759",
    "#76b7b2", "#edc948", "#b07aa1", "#9c755f"};

struct View {
  Vector axis, u, w;
  double cx, cy, scale;
};

View make_view(const Vector& axis, double cx, double cy, double scale) {
  // First tangent basis vector from the coordinate axis least aligned with
  // the view axis, so the basis is a fixed function of the axis.
  Eigen::Index k = 0;
  for (Eigen::Index i = 1; i < 3; ++i) {
    if (std::abs(axis[i]) < std::abs(axis[k])) k = i;
  }
  Vector u = Vector::Unit(3, k) - axis[k] * axis;
  u.normalize();
  const Eigen::Vector3d a3 = axis, u3 = u;
  const Vector w = a3.cross(u3);
  return View{axis, u, w, cx, cy, scale};
}

struct Projected {
  double x, y;
  bool visible;
};

Projected project(const View& v, const Vector& p) {
  double x = p.dot(v.u), y = p.dot(v.w);
  const bool visible = p.dot(v.axis) >= 0.0;
  if (!visible) {
    // Hidden points are pushed radially onto the horizon.
    const double r = std::hypot(x, y);
    if (r > 0.0) {
      x /= r;
      y /= r;
    }
  }
  return {v.cx + v.scale * x, v.cy - v.scale * y, visible};
}

// Boundary of the cap (center c, radius a) as kCircleSteps points.
std::vector<Vector> circle_points(const Vector& c, double a) {
  Eigen::Index k = 0;
  for (Eigen::Index i = 1; i < 3; ++i) {
    if (std::abs(c[i]) < std::abs(c[k])) k = i;
  }
  Vector e1 = Vector::Unit(3, k) - c[k] * c;
  e1.normalize();
  const Eigen::Vector3d c3 = c, e13 = e1;
  const Vector e2 = c3.cross(e13);
  std::vector<Vector> pts;
  for (int i = 0; i < kCircleSteps; ++i) {
    const double t = 2.0 * kPi * i / kCircleSteps;
    pts.push_back(std::cos(a) * c +
                  std::sin(a) * (std::cos(t) * e1 + std::sin(t) * e2));
  }
  return pts;
}

std::string point(const Projected& p) {
  return fmt::format("{:.3f},{:.3f}", p.x, p.y);
}

void filled_cap(std::string& out, const View& v, const Cap& cap,
                const char* color) {
  const auto pts = circle_points(cap.center, cap.radius);
  std::vector<Projected> proj;
  bool any_visible = false;
  for (const Vector& p : pts) {
    proj.push_back(project(v, p));
    any_visible = any_visible || proj.back().visible;
  }
  if (!any_visible) return;
  out += "    <polygon points=\"";
  for (std::size_t i = 0; i < proj.size(); ++i) {
    if (i) out += ' ';
    out += point(proj[i]);
  }
  out += fmt::format(
      "\" fill=\"{}\" fill-opacity=\"0.45\" stroke=\"{}\" "
      "stroke-width=\"1\"/>\n",
      color, color);
}

// Visible part of a circle as polylines.
void circle_arcs(std::string& out, const View& v, const Vector& c, double a,
                 const std::string& style) {
  const auto pts = circle_points(c, a);
  std::vector<Projected> proj;
  for (const Vector& p : pts) proj.push_back(project(v, p));
  const std::size_t n = proj.size();
  // Start just after a hidden point so every run is contiguous.
  std::size_t start = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!proj[i].visible) {
      start = (i + 1) % n;
      break;
    }
  }
  std::vector<Projected> run;
  auto flush = [&] {
    if (run.size() >= 2) {
      out += "    <polyline points=\"";
      for (std::size_t i = 0; i < run.size(); ++i) {
        if (i) out += ' ';
        out += point(run[i]);
      }
      out += "\" fill=\"none\" " + style + "/>\n";
    }
    run.clear();
  };
  const bool all_visible = std::all_of(
      proj.begin(), proj.end(), [](const Projected& p) { return p.visible; });
  for (std::size_t k = 0; k < n; ++k) {
    const Projected& p = proj[(start + k) % n];
    if (p.visible) {
      run.push_back(p);
    } else {
      flush();
    }
  }
  if (all_visible && !run.empty()) run.push_back(run.front());
  flush();
}

}  // namespace

std::string render_svg(const PlotInput& input, int panel_size) {
  const Instance& inst = input.instance;
  validate_instance(inst);
  if (inst.dim != 2) throw ValidationError("plots are available for dim 2 only");
  if (panel_size < 50) throw ValidationError("panel size too small");

  const Vector axis =
      input.cover ? Vector(input.cover->center.normalized()) : Vector::Unit(3, 2);
  const double margin = 20.0;
  const double r = panel_size / 2.0 - margin;
  const int width = 2 * panel_size, height = panel_size + 30;

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
      "width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
      width, height, width, height);
  out += "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (int panel = 0; panel < 2; ++panel) {
    const double cx = panel_size * panel + panel_size / 2.0;
    const double cy = panel_size / 2.0;
    const Vector view_axis = panel == 0 ? axis : Vector(-axis);
    const View v = make_view(view_axis, cx, cy, r);

    out += fmt::format("  <g id=\"panel-{}\">\n", panel == 0 ? "front" : "back");
    out += fmt::format(
        "    <circle cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"{:.3f}\" fill=\"#f4f4f4\" "
        "stroke=\"#333333\" stroke-width=\"1\"/>\n",
        cx, cy, r);
    for (std::size_t i = 0; i < inst.caps.size(); ++i) {
      filled_cap(out, v, inst.caps[i], kPalette[i % kPalette.size()]);
    }
    if (input.cover) {
      circle_arcs(out, v, input.cover->center, input.cover->radius,
                  "stroke=\"#000000\" stroke-width=\"1.5\" "
                  "stroke-dasharray=\"6,4\"");
    }
    if (input.witness_normal) {
      circle_arcs(out, v, input.witness_normal->normalized(), kHalfPi,
                  "stroke=\"#d62728\" stroke-width=\"1.5\"");
    }
    out += fmt::format(
        "    <text x=\"{:.3f}\" y=\"{}\" font-family=\"sans-serif\" "
        "font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        cx, panel_size + 15, panel == 0 ? "view from +v" : "view from -v");
    out += "  </g>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace capcover
