#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "optour/config.hpp"
#include "optour/errors.hpp"
#include "optour/geometry.hpp"
#include "optour/route.hpp"
#include "optour/types.hpp"
#include "optour/waypoint_opt.hpp"

// The full tour planner: alternate waypoint optimization with visiting-order
// optimization until neither improves. Three schemes are provided: the full
// 3D optimizer, a fixed-altitude variant that only moves waypoints
// horizontally, and the fixed-altitude nadir baseline that flies straight
// over every target.

namespace optour {

enum class Scheme { kOp3d, kOp2d, kVp2d };

inline const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::kOp3d: return "op3d";
    case Scheme::kOp2d: return "op2d";
    default: return "vp2d";
  }
}

struct TargetMargins {
  double resolution = 0.0;  // achieved resolution minus the requirement
  double projection = 0.0;  // min inner distance minus the radius, meters
  double focal = 0.0;       // admissible-cone slack, meters
  // Same margins rebuilt from the exact trapezoid geometry; absent when the
  // pose leaves the exact model's domain.
  std::optional<double> resolution_exact;
  std::optional<double> projection_exact;
};

struct FeasibilityReport {
  std::vector<TargetMargins> per_target;
  double max_violation = 0.0;  // largest positive violation of the planning model
  double distance_m = 0.0;     // independently recomputed chain length
};

struct PlanResult {
  Scheme scheme = Scheme::kOp3d;
  Tour tour;
  std::vector<Waypoint3D> waypoints;  // indexed by target
  double distance_m = 0.0;
  IterationTrace trace;
  FeasibilityReport feasibility;
};

/// A (tour, waypoints) pair usable as a warm start for any optimizing scheme.
struct InitialPlan {
  Tour tour;
  std::vector<Waypoint3D> waypoints;
};

namespace detail {

inline std::vector<Eigen::Vector3d> lifted(const std::vector<Waypoint3D>& wps) {
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(wps.size());
  for (const auto& w : wps) pts.push_back(w.position());
  return pts;
}

inline Tour solve_order(const Eigen::Vector3d& start, const Eigen::Vector3d& end,
                        const std::vector<Eigen::Vector3d>& pts, const SolverConfig& cfg) {
  const bool exact =
      cfg.order_solver == OrderSolverChoice::kExact ||
      (cfg.order_solver == OrderSolverChoice::kAuto &&
       static_cast<int>(pts.size()) <= cfg.exact_order_cap);
  return exact ? solve_order_exact(start, end, pts, cfg.exact_order_cap)
               : solve_order_heuristic(start, end, pts, cfg.rng_seed);
}

inline void require_targets(const Scenario& scn) {
  if (scn.targets.empty()) throw InfeasibleScenarioError("scenario has no targets");
}

}  // namespace detail

/// Recomputes every constraint margin and the chain length of a result,
/// independent of how it was produced.
inline FeasibilityReport evaluate(const Scenario& scn, const PlanResult& result) {
  if (result.waypoints.size() != scn.targets.size()) {
    throw InconsistencyError("evaluate: result waypoint count does not match the scenario");
  }
  FeasibilityReport rep;
  rep.per_target.reserve(scn.targets.size());
  for (std::size_t k = 0; k < scn.targets.size(); ++k) {
    const auto& gt = scn.targets[k];
    const auto& wp = result.waypoints[k];
    const auto check = neighbourhood_contains(scn.camera, wp, gt, 0.0);
    TargetMargins m;
    m.resolution = check.resolution_margin;
    m.projection = check.projection_margin;
    m.focal = check.focal_margin;
    try {
      const double area = coverage_area_exact(scn.camera, wp, gt);
      m.resolution_exact = M_PI * gt.radius_m * gt.radius_m / area - gt.min_resolution;
      const auto inner = inner_distances_exact(scn.camera, wp, gt);
      m.projection_exact = std::min(inner.near_side_m, inner.slant_side_m) - gt.radius_m;
    } catch (const DomainError&) {
      // Pose outside the exact model's domain; approximate margins stand alone.
    }
    rep.max_violation = std::max({rep.max_violation, -m.resolution, -m.projection, -m.focal});
    rep.per_target.push_back(m);
  }
  rep.max_violation = std::max(0.0, rep.max_violation);
  rep.distance_m = ordered_chain_length(scn, result.waypoints, result.tour.order);
  return rep;
}

/// Initial visiting order and waypoints: the order comes from a tour over the
/// ground positions, the waypoints sit at the middle of each target's nadir
/// altitude interval.
inline InitialPlan initialize(const Scenario& scn, const SolverConfig& cfg) {
  detail::require_targets(scn);
  InitialPlan ip;
  std::vector<Eigen::Vector3d> ground;
  for (std::size_t k = 0; k < scn.targets.size(); ++k) {
    const auto& gt = scn.targets[k];
    const auto iv = nadir_altitude_interval(scn.camera, gt);
    if (iv.empty()) {
      throw InfeasibleScenarioError(
          "target " + std::to_string(k + 1) +
          " admits no feasible nadir altitude (radius and resolution requirement conflict); "
          "only nadir feasibility is checked at initialization, oblique-only regions are not "
          "searched");
    }
    ip.waypoints.push_back(Waypoint3D{gt.xy, 0.5 * (iv.lo_m + iv.hi_m)});
    ground.push_back({gt.xy.x(), gt.xy.y(), 0.0});
  }
  ip.tour = detail::solve_order(scn.start.position(), scn.end.position(), ground, cfg);
  return ip;
}

namespace detail {

// Shared outer loop: alternate a waypoint pass with an order re-solve.
template <class WaypointPass>
PlanResult alternate(const Scenario& scn, const SolverConfig& cfg, Scheme scheme,
                     InitialPlan init, WaypointPass&& waypoint_pass) {
  PlanResult res;
  res.scheme = scheme;
  res.waypoints = std::move(init.waypoints);
  std::vector<int> order = std::move(init.tour.order);
  require_valid_order(scn, order);

  double obj = ordered_chain_length(scn, res.waypoints, order);
  res.trace.push_back({0, TraceBlock::kOrder, obj, scenario_max_violation(scn, res.waypoints)});
  int iter = 1;

  for (int outer = 0; outer < cfg.max_outer_iters; ++outer) {
    OptimizeResult sub = waypoint_pass(order, res.waypoints);
    res.waypoints = std::move(sub.waypoints);
    for (auto& e : sub.trace) {
      e.iter = iter++;
      res.trace.push_back(e);
    }
    double new_obj = ordered_chain_length(scn, res.waypoints, order);

    const Tour candidate =
        solve_order(scn.start.position(), scn.end.position(), lifted(res.waypoints), cfg);
    if (candidate.length_m < new_obj) {
      order = candidate.order;
      new_obj = candidate.length_m;
    }
    res.trace.push_back(
        {iter++, TraceBlock::kOrder, new_obj, scenario_max_violation(scn, res.waypoints)});

    const bool converged = obj - new_obj < cfg.obj_tol * std::max(1.0, std::abs(obj));
    obj = new_obj;
    if (converged) break;
  }

  res.distance_m = ordered_chain_length(scn, res.waypoints, order);
  res.tour = Tour{std::move(order), res.distance_m};
  res.feasibility = evaluate(scn, res);
  return res;
}

}  // namespace detail

/// Full 3D planning: joint altitude/horizontal optimization alternated with
/// order optimization. Starts from initialize() unless a warm start is given.
inline PlanResult plan(const Scenario& scn, const SolverConfig& cfg = {},
                       const std::optional<InitialPlan>& warm = std::nullopt) {
  detail::require_targets(scn);
  InitialPlan init = warm ? *warm : initialize(scn, cfg);
  detail::require_feasible_waypoints(scn, init.waypoints, cfg.feas_tol, "plan");
  return detail::alternate(scn, cfg, Scheme::kOp3d, std::move(init),
                           [&](const std::vector<int>& order, std::vector<Waypoint3D>& wps) {
                             return optimize_waypoints(scn, order, wps, cfg);
                           });
}

namespace detail {

inline InitialPlan fixed_altitude_init(const Scenario& scn, double altitude_m,
                                       const SolverConfig& cfg) {
  require_targets(scn);
  InitialPlan ip;
  for (std::size_t k = 0; k < scn.targets.size(); ++k) {
    const Waypoint3D wp{scn.targets[k].xy, altitude_m};
    const auto check = neighbourhood_contains(scn.camera, wp, scn.targets[k], cfg.feas_tol);
    if (!check.inside) {
      throw InfeasibleScenarioError("target " + std::to_string(k + 1) +
                                    " is infeasible from the fixed altitude of " +
                                    std::to_string(altitude_m) + " m");
    }
    ip.waypoints.push_back(wp);
  }
  ip.tour = solve_order(scn.start.position(), scn.end.position(), lifted(ip.waypoints), cfg);
  return ip;
}

}  // namespace detail

/// Nadir baseline: one waypoint straight above each target at the fixed
/// altitude, order optimized, nothing else moved.
inline PlanResult plan_vp_2d(const Scenario& scn, double altitude_m = 100.0,
                             const SolverConfig& cfg = {}) {
  InitialPlan init = detail::fixed_altitude_init(scn, altitude_m, cfg);
  PlanResult res;
  res.scheme = Scheme::kVp2d;
  res.waypoints = std::move(init.waypoints);
  res.distance_m = init.tour.length_m;
  res.tour = std::move(init.tour);
  res.trace.push_back(
      {0, TraceBlock::kOrder, res.distance_m, scenario_max_violation(scn, res.waypoints)});
  res.feasibility = evaluate(scn, res);
  return res;
}

/// Fixed-altitude planning: horizontal waypoint optimization alternated with
/// order optimization. Defaults to the nadir configuration as the start.
inline PlanResult plan_op_2d(const Scenario& scn, double altitude_m = 100.0,
                             const SolverConfig& cfg = {},
                             const std::optional<InitialPlan>& warm = std::nullopt) {
  InitialPlan init = warm ? *warm : detail::fixed_altitude_init(scn, altitude_m, cfg);
  detail::require_feasible_waypoints(scn, init.waypoints, cfg.feas_tol, "plan_op_2d");
  return detail::alternate(scn, cfg, Scheme::kOp2d, std::move(init),
                           [&](const std::vector<int>& order, std::vector<Waypoint3D>& wps) {
                             return optimize_horizontal(scn, order, wps, cfg);
                           });
}

}  // namespace optour
