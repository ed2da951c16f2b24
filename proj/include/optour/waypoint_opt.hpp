#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "optour/chain_solver.hpp"
#include "optour/config.hpp"
#include "optour/errors.hpp"
#include "optour/geometry.hpp"
#include "optour/surrogates.hpp"
#include "optour/types.hpp"

// Waypoint optimization for a fixed visiting order: alternate an altitude
// pass and a horizontal pass (block coordinate descent). Each pass repeats
// surrogate construction at the incumbent and one convex chain solve until
// the improvement falls below the objective tolerance. Every accepted step
// keeps all waypoints feasible for the original constraints, so the trace
// objective is non-increasing end to end.

namespace optour {

enum class TraceBlock { kAltitude, kHorizontal, kOrder };

inline const char* trace_block_name(TraceBlock b) {
  switch (b) {
    case TraceBlock::kAltitude: return "Z";
    case TraceBlock::kHorizontal: return "Q";
    default: return "ORDER";
  }
}

struct TraceEntry {
  int iter = 0;
  TraceBlock block = TraceBlock::kOrder;
  double objective_m = 0.0;
  double max_violation = 0.0;
};

using IterationTrace = std::vector<TraceEntry>;

struct OptimizeResult {
  std::vector<Waypoint3D> waypoints;
  IterationTrace trace;
  bool converged = false;  // stopped on small improvement rather than an iteration cap
};

/// Chain length through the per-target waypoints in the given visiting order.
inline double ordered_chain_length(const Scenario& scn, const std::vector<Waypoint3D>& wps,
                                   const std::vector<int>& order) {
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(order.size());
  for (int k : order) pts.push_back(wps[static_cast<std::size_t>(k)].position());
  return chain_length(scn.start.position(), scn.end.position(), pts);
}

/// Largest positive violation of any original constraint over all waypoints.
inline double scenario_max_violation(const Scenario& scn, const std::vector<Waypoint3D>& wps) {
  double worst = 0.0;
  for (std::size_t k = 0; k < scn.targets.size(); ++k) {
    const auto check = neighbourhood_contains(scn.camera, wps[k], scn.targets[k], 0.0);
    worst = std::max(worst, -check.resolution_margin);
    worst = std::max(worst, -check.projection_margin);
    worst = std::max(worst, -check.focal_margin);
  }
  return std::max(0.0, worst);
}

namespace detail {

inline void require_valid_order(const Scenario& scn, const std::vector<int>& order) {
  const std::size_t k = scn.targets.size();
  if (order.size() != k) throw DomainError("visiting order and target count disagree");
  std::vector<bool> seen(k, false);
  for (int i : order) {
    if (i < 0 || static_cast<std::size_t>(i) >= k || seen[i]) {
      throw DomainError("visiting order is not a permutation of the targets");
    }
    seen[i] = true;
  }
}

inline void require_feasible_waypoints(const Scenario& scn, const std::vector<Waypoint3D>& wps,
                                       double feas_tol, const char* who) {
  if (wps.size() != scn.targets.size()) {
    throw DomainError(std::string(who) + ": one waypoint per target required");
  }
  for (std::size_t k = 0; k < wps.size(); ++k) {
    if (!neighbourhood_contains(scn.camera, wps[k], scn.targets[k], feas_tol).inside) {
      throw DomainError(std::string(who) + ": waypoint for target " + std::to_string(k + 1) +
                        " violates its neighbourhood constraints");
    }
  }
}

struct PassOutcome {
  double objective = 0.0;
  bool converged = false;
};

// One SCA pass over a single block family. Returns the final objective and
// appends one trace entry per accepted solve.
template <TraceBlock BlockTag>
PassOutcome sca_pass(const Scenario& scn, const std::vector<int>& order,
                     std::vector<Waypoint3D>& wps, const SolverConfig& cfg, int sca_iters,
                     IterationTrace& trace, int& iter) {
  PassOutcome out_pass;
  double obj = ordered_chain_length(scn, wps, order);
  for (int it = 0; it < sca_iters; ++it) {
    bool accepted = false;
    double new_obj = obj;

    if constexpr (BlockTag == TraceBlock::kAltitude) {
      ChainProblem<AltitudeConstraintSet> pb;
      pb.start_point = scn.start.position();
      pb.end_point = scn.end.position();
      for (int k : order) {
        const Waypoint3D& wp = wps[k];
        const GroundTarget& gt = scn.targets[k];
        pb.constraints.push_back(build_altitude_constraints(
            scn.camera, gt, SurrogatePoint{wp.z, wp.xy - gt.xy}, cfg.feas_tol));
        pb.bases.push_back({wp.xy.x(), wp.xy.y(), 0.0});
        AltitudeConstraintSet::Block z0;
        z0[0] = wp.z;
        pb.start.push_back(z0);
      }
      const auto out = solve_chain(pb, cfg);
      if (out.status != SolveStatus::kNumericalFailure) {
        for (std::size_t i = 0; i < order.size(); ++i) wps[order[i]].z = out.solution[i][0];
        new_obj = out.objective_m;
        accepted = true;
      }
    } else {
      ChainProblem<HorizontalConstraintSet> pb;
      pb.start_point = scn.start.position();
      pb.end_point = scn.end.position();
      for (int k : order) {
        const Waypoint3D& wp = wps[k];
        const GroundTarget& gt = scn.targets[k];
        pb.constraints.push_back(build_horizontal_constraints(
            scn.camera, gt, SurrogatePoint{wp.z, wp.xy - gt.xy}, cfg.feas_tol));
        pb.bases.push_back({gt.xy.x(), gt.xy.y(), wp.z});
        pb.start.push_back(wp.xy - gt.xy);
      }
      const auto out = solve_chain(pb, cfg);
      if (out.status != SolveStatus::kNumericalFailure) {
        for (std::size_t i = 0; i < order.size(); ++i) {
          wps[order[i]].xy = scn.targets[order[i]].xy + out.solution[i];
        }
        new_obj = out.objective_m;
        accepted = true;
      }
    }

    if (!accepted) break;  // revert-to-incumbent semantics: wps were not touched
    trace.push_back({iter++, BlockTag, new_obj, scenario_max_violation(scn, wps)});
    const bool converged = obj - new_obj < cfg.obj_tol * std::max(1.0, std::abs(obj));
    obj = new_obj;
    if (converged) {
      out_pass.converged = true;
      break;
    }
  }
  out_pass.objective = obj;
  return out_pass;
}

}  // namespace detail

/// Optimizes only the altitudes, horizontal positions held fixed.
inline OptimizeResult optimize_altitudes(const Scenario& scn, const std::vector<int>& order,
                                         std::vector<Waypoint3D> wps, const SolverConfig& cfg) {
  detail::require_valid_order(scn, order);
  detail::require_feasible_waypoints(scn, wps, cfg.feas_tol, "optimize_altitudes");
  OptimizeResult res{std::move(wps), {}, false};
  int iter = 1;
  res.converged = detail::sca_pass<TraceBlock::kAltitude>(scn, order, res.waypoints, cfg,
                                                          cfg.max_sca_iters, res.trace, iter)
                      .converged;
  return res;
}

/// Optimizes only the horizontal positions, altitudes held fixed.
inline OptimizeResult optimize_horizontal(const Scenario& scn, const std::vector<int>& order,
                                          std::vector<Waypoint3D> wps, const SolverConfig& cfg) {
  detail::require_valid_order(scn, order);
  detail::require_feasible_waypoints(scn, wps, cfg.feas_tol, "optimize_horizontal");
  OptimizeResult res{std::move(wps), {}, false};
  int iter = 1;
  res.converged = detail::sca_pass<TraceBlock::kHorizontal>(scn, order, res.waypoints, cfg,
                                                            cfg.max_sca_iters, res.trace, iter)
                      .converged;
  return res;
}

/// Full block coordinate descent over altitudes and horizontal positions.
inline OptimizeResult optimize_waypoints(const Scenario& scn, const std::vector<int>& order,
                                         std::vector<Waypoint3D> wps, const SolverConfig& cfg) {
  detail::require_valid_order(scn, order);
  detail::require_feasible_waypoints(scn, wps, cfg.feas_tol, "optimize_waypoints");
  OptimizeResult res{std::move(wps), {}, false};
  int iter = 1;
  const int sca_iters = cfg.interleave_sca ? 1 : cfg.max_sca_iters;
  double obj = ordered_chain_length(scn, res.waypoints, order);
  for (int sweep = 0; sweep < cfg.max_bcd_iters; ++sweep) {
    double new_obj = obj;
    if (cfg.bcd_z_first) {
      detail::sca_pass<TraceBlock::kAltitude>(scn, order, res.waypoints, cfg, sca_iters,
                                              res.trace, iter);
      new_obj = detail::sca_pass<TraceBlock::kHorizontal>(scn, order, res.waypoints, cfg,
                                                          sca_iters, res.trace, iter)
                    .objective;
    } else {
      detail::sca_pass<TraceBlock::kHorizontal>(scn, order, res.waypoints, cfg, sca_iters,
                                                res.trace, iter);
      new_obj = detail::sca_pass<TraceBlock::kAltitude>(scn, order, res.waypoints, cfg, sca_iters,
                                                        res.trace, iter)
                    .objective;
    }
    const bool converged = obj - new_obj < cfg.obj_tol * std::max(1.0, std::abs(obj));
    obj = new_obj;
    if (converged) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace optour
