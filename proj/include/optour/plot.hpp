#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "optour/errors.hpp"
#include "optour/planner.hpp"
#include "optour/types.hpp"

// Plot writer: a three-panel SVG (top-down trajectory, altitude profile,
// convergence curve) plus a CSV twin of the iteration trace.

namespace optour {

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string fmt_sig(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Maps data coordinates into one SVG panel, y flipped.
struct PanelMap {
  double x0, y0, w, h;            // panel rectangle in SVG units
  double dx0, dx1, dy0, dy1;      // data ranges

  double x(double v) const { return x0 + (v - dx0) / std::max(dx1 - dx0, 1e-12) * w; }
  double y(double v) const { return y0 + h - (v - dy0) / std::max(dy1 - dy0, 1e-12) * h; }
};

inline void panel_frame(std::string& svg, const PanelMap& m, const std::string& title,
                        const std::string& x_label, const std::string& y_label) {
  svg += "<rect x='" + fmt(m.x0) + "' y='" + fmt(m.y0) + "' width='" + fmt(m.w) + "' height='" +
         fmt(m.h) + "' fill='white' stroke='#444'/>\n";
  svg += "<text x='" + fmt(m.x0) + "' y='" + fmt(m.y0 - 8) + "' font-size='14' fill='#222'>" +
         title + "</text>\n";
  svg += "<text x='" + fmt(m.x0 + m.w / 2) + "' y='" + fmt(m.y0 + m.h + 28) +
         "' font-size='11' fill='#444' text-anchor='middle'>" + x_label + "</text>\n";
  svg += "<text x='" + fmt(m.x0 - 48) + "' y='" + fmt(m.y0 + m.h / 2) +
         "' font-size='11' fill='#444' text-anchor='middle' transform='rotate(-90 " +
         fmt(m.x0 - 48) + " " + fmt(m.y0 + m.h / 2) + ")'>" + y_label + "</text>\n";
  // Range ticks at the corners keep the panel self-describing.
  svg += "<text x='" + fmt(m.x0) + "' y='" + fmt(m.y0 + m.h + 14) +
         "' font-size='10' fill='#666'>" + fmt_sig(m.dx0) + "</text>\n";
  svg += "<text x='" + fmt(m.x0 + m.w) + "' y='" + fmt(m.y0 + m.h + 14) +
         "' font-size='10' fill='#666' text-anchor='end'>" + fmt_sig(m.dx1) + "</text>\n";
  svg += "<text x='" + fmt(m.x0 - 6) + "' y='" + fmt(m.y0 + m.h) +
         "' font-size='10' fill='#666' text-anchor='end'>" + fmt_sig(m.dy0) + "</text>\n";
  svg += "<text x='" + fmt(m.x0 - 6) + "' y='" + fmt(m.y0 + 10) +
         "' font-size='10' fill='#666' text-anchor='end'>" + fmt_sig(m.dy1) + "</text>\n";
}

inline void require_consistent(const Scenario& scn, const PlanResult& res) {
  if (res.waypoints.size() != scn.targets.size()) {
    throw InconsistencyError("plot: waypoint count does not match the scenario");
  }
  require_valid_order(scn, res.tour.order);
  const double recomputed = ordered_chain_length(scn, res.waypoints, res.tour.order);
  if (std::abs(recomputed - res.distance_m) > 1e-6 * std::max(1.0, res.distance_m)) {
    throw InconsistencyError("plot: stored distance disagrees with the stored waypoints");
  }
}

}  // namespace detail

/// Writes the trace as CSV: one row per optimization step.
inline void write_trace_csv(const PlanResult& res, const std::string& csv_path) {
  std::ofstream out(csv_path);
  if (!out) throw IoError("cannot write '" + csv_path + "'");
  out << "iter,block,objective_m,max_violation\n";
  char buf[96];
  for (const auto& e : res.trace) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%.12g,%.12g\n", e.iter, trace_block_name(e.block),
                  e.objective_m, e.max_violation);
    out << buf;
  }
}

/// Writes the three-panel SVG and the CSV twin of the trace next to it
/// (same path with the extension swapped to .csv).
inline void write_plot_svg(const Scenario& scn, const PlanResult& res,
                           const std::string& svg_path) {
  detail::require_consistent(scn, res);

  const double width = 860, panel_h = 250, margin_l = 90, margin_r = 30;
  const double panel_w = width - margin_l - margin_r;
  const double height = 3 * (panel_h + 70) + 30;

  std::string svg;
  svg += "<svg xmlns='http://www.w3.org/2000/svg' width='" + detail::fmt(width) + "' height='" +
         detail::fmt(height) + "' viewBox='0 0 " + detail::fmt(width) + " " +
         detail::fmt(height) + "'>\n";
  svg += "<rect width='100%' height='100%' fill='#fafafa'/>\n";

  // Panel 1: top-down view.
  {
    double lo_x = scn.start.xy.x(), hi_x = lo_x, lo_y = scn.start.xy.y(), hi_y = lo_y;
    auto grow = [&](double x, double y, double pad) {
      lo_x = std::min(lo_x, x - pad);
      hi_x = std::max(hi_x, x + pad);
      lo_y = std::min(lo_y, y - pad);
      hi_y = std::max(hi_y, y + pad);
    };
    grow(scn.end.xy.x(), scn.end.xy.y(), 0.0);
    for (const auto& gt : scn.targets) grow(gt.xy.x(), gt.xy.y(), gt.radius_m);
    for (const auto& w : res.waypoints) grow(w.xy.x(), w.xy.y(), 0.0);
    const double pad = 0.06 * std::max({hi_x - lo_x, hi_y - lo_y, 1.0});
    detail::PanelMap m{margin_l, 40, panel_w, panel_h, lo_x - pad, hi_x + pad, lo_y - pad,
                       hi_y + pad};
    detail::panel_frame(svg, m, "Trajectory (top-down)", "x [m]", "y [m]");

    for (const auto& gt : scn.targets) {
      const double rx = gt.radius_m / (m.dx1 - m.dx0) * m.w;
      const double ry = gt.radius_m / (m.dy1 - m.dy0) * m.h;
      svg += "<ellipse cx='" + detail::fmt(m.x(gt.xy.x())) + "' cy='" +
             detail::fmt(m.y(gt.xy.y())) + "' rx='" + detail::fmt(rx) + "' ry='" +
             detail::fmt(ry) + "' fill='#e6e0f8' stroke='#7a5fb5'/>\n";
    }
    std::string path = detail::fmt(m.x(scn.start.xy.x())) + "," + detail::fmt(m.y(scn.start.xy.y()));
    for (int k : res.tour.order) {
      path += " " + detail::fmt(m.x(res.waypoints[k].xy.x())) + "," +
              detail::fmt(m.y(res.waypoints[k].xy.y()));
    }
    path += " " + detail::fmt(m.x(scn.end.xy.x())) + "," + detail::fmt(m.y(scn.end.xy.y()));
    svg += "<polyline points='" + path + "' fill='none' stroke='#2a6fb0' stroke-width='1.6'/>\n";
    for (const auto& w : res.waypoints) {
      svg += "<circle cx='" + detail::fmt(m.x(w.xy.x())) + "' cy='" + detail::fmt(m.y(w.xy.y())) +
             "' r='3' fill='#c23b22'/>\n";
    }
    svg += "<rect x='" + detail::fmt(m.x(scn.start.xy.x()) - 4) + "' y='" +
           detail::fmt(m.y(scn.start.xy.y()) - 4) + "' width='8' height='8' fill='#2e8b57'/>\n";
    svg += "<rect x='" + detail::fmt(m.x(scn.end.xy.x()) - 4) + "' y='" +
           detail::fmt(m.y(scn.end.xy.y()) - 4) +
           "' width='8' height='8' fill='none' stroke='#2e8b57'/>\n";
  }

  // Panel 2: altitude along the path.
  {
    std::vector<double> arc{0.0}, alt{scn.start.z};
    Eigen::Vector3d prev = scn.start.position();
    for (int k : res.tour.order) {
      const Eigen::Vector3d p = res.waypoints[k].position();
      arc.push_back(arc.back() + (p - prev).norm());
      alt.push_back(p.z());
      prev = p;
    }
    arc.push_back(arc.back() + (scn.end.position() - prev).norm());
    alt.push_back(scn.end.z);
    const double max_alt = *std::max_element(alt.begin(), alt.end());
    detail::PanelMap m{margin_l, 40 + panel_h + 70, panel_w, panel_h, 0.0,
                       std::max(arc.back(), 1.0), 0.0, std::max(max_alt * 1.1, 1.0)};
    detail::panel_frame(svg, m, "Altitude profile", "path progress [m]", "altitude [m]");
    std::string path;
    for (std::size_t i = 0; i < arc.size(); ++i) {
      path += (i ? " " : "") + detail::fmt(m.x(arc[i])) + "," + detail::fmt(m.y(alt[i]));
    }
    svg += "<polyline points='" + path + "' fill='none' stroke='#2a6fb0' stroke-width='1.6'/>\n";
    for (std::size_t i = 0; i < arc.size(); ++i) {
      svg += "<circle cx='" + detail::fmt(m.x(arc[i])) + "' cy='" + detail::fmt(m.y(alt[i])) +
             "' r='2.5' fill='#c23b22'/>\n";
    }
  }

  // Panel 3: convergence, order steps circled.
  {
    double lo = res.distance_m, hi = res.distance_m;
    for (const auto& e : res.trace) {
      lo = std::min(lo, e.objective_m);
      hi = std::max(hi, e.objective_m);
    }
    const double pad = 0.05 * std::max(hi - lo, 1.0);
    const double max_iter = res.trace.empty() ? 1.0 : std::max<double>(res.trace.size() - 1, 1);
    detail::PanelMap m{margin_l, 40 + 2 * (panel_h + 70), panel_w, panel_h, 0.0, max_iter,
                       lo - pad, hi + pad};
    detail::panel_frame(svg, m, "Convergence", "iteration", "traveling distance [m]");
    if (!res.trace.empty()) {
      std::string path;
      for (std::size_t i = 0; i < res.trace.size(); ++i) {
        path += (i ? " " : "") + detail::fmt(m.x(static_cast<double>(i))) + "," +
                detail::fmt(m.y(res.trace[i].objective_m));
      }
      svg += "<polyline points='" + path + "' fill='none' stroke='#555' stroke-width='1.2'/>\n";
      for (std::size_t i = 0; i < res.trace.size(); ++i) {
        const auto& e = res.trace[i];
        const std::string cx = detail::fmt(m.x(static_cast<double>(i)));
        const std::string cy = detail::fmt(m.y(e.objective_m));
        svg += "<circle cx='" + cx + "' cy='" + cy + "' r='2.5' fill='" +
               (e.block == TraceBlock::kAltitude ? "#2a6fb0"
                : e.block == TraceBlock::kHorizontal ? "#c23b22" : "#222") +
               "'/>\n";
        if (e.block == TraceBlock::kOrder) {
          svg += "<circle cx='" + cx + "' cy='" + cy + "' r='5.5' fill='none' stroke='#222'/>\n";
        }
      }
    }
  }

  svg += "</svg>\n";

  std::ofstream out(svg_path);
  if (!out) throw IoError("cannot write '" + svg_path + "'");
  out << svg;
  if (!out) throw IoError("write to '" + svg_path + "' failed");

  std::string csv_path = svg_path;
  const auto dot = csv_path.rfind('.');
  if (dot != std::string::npos && csv_path.substr(dot) == ".svg") {
    csv_path = csv_path.substr(0, dot);
  }
  write_trace_csv(res, csv_path + ".csv");
}

}  // namespace optour
