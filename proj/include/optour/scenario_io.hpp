#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "optour/config.hpp"
#include "optour/errors.hpp"
#include "optour/geometry.hpp"
#include "optour/planner.hpp"
#include "optour/types.hpp"

// Versioned JSON documents for scenarios, results, and solver configuration,
// plus the seeded scenario generator. Parsing is strict: unknown fields are
// rejected so schema drift surfaces immediately. Serialization relies on the
// JSON library's shortest-round-trip number formatting, which keeps files
// lossless and byte-deterministic.

namespace optour {

inline constexpr int kSchemaVersion = 1;

namespace detail {

inline const nlohmann::json& require_fields(const nlohmann::json& j,
                                            std::initializer_list<const char*> required,
                                            std::initializer_list<const char*> optional,
                                            const char* ctx) {
  if (!j.is_object()) throw IoError(std::string(ctx) + ": expected a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : required) known = known || item.key() == k;
    for (const char* k : optional) known = known || item.key() == k;
    if (!known) throw IoError(std::string(ctx) + ": unknown field '" + item.key() + "'");
  }
  for (const char* k : required) {
    if (!j.contains(k)) throw IoError(std::string(ctx) + ": missing field '" + k + "'");
  }
  return j;
}

inline double number(const nlohmann::json& j, const char* key, const char* ctx) {
  if (!j.at(key).is_number()) {
    throw IoError(std::string(ctx) + ": field '" + key + "' must be a number");
  }
  return j.at(key).get<double>();
}

// Uniform doubles drawn straight from the mt19937_64 stream, so generated
// scenarios are identical across standard libraries.
class UniformRng {
 public:
  explicit UniformRng(std::uint64_t seed) : eng_(seed) {}
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(eng_() >> 11) * 0x1.0p-53);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace detail

// ---- Scenario documents ----

inline nlohmann::json scenario_to_json(const Scenario& scn) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["camera"] = {{"f0_m", scn.camera.focal_m},
                 {"w0_m", scn.camera.plane_w_m},
                 {"l0_m", scn.camera.plane_l_m}};
  j["targets"] = nlohmann::json::array();
  for (const auto& gt : scn.targets) {
    j["targets"].push_back(
        {{"x_m", gt.xy.x()}, {"y_m", gt.xy.y()}, {"r_m", gt.radius_m}, {"i_min", gt.min_resolution}});
  }
  j["start"] = {{"x_m", scn.start.xy.x()}, {"y_m", scn.start.xy.y()}, {"z_m", scn.start.z}};
  j["end"] = {{"x_m", scn.end.xy.x()}, {"y_m", scn.end.xy.y()}, {"z_m", scn.end.z}};
  return j;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  detail::require_fields(j, {"schema_version", "camera", "targets", "start", "end"}, {},
                         "scenario");
  if (!j.at("schema_version").is_number_integer() ||
      j.at("schema_version").get<int>() != kSchemaVersion) {
    throw IoError("scenario: unsupported schema_version");
  }
  const auto& jc = detail::require_fields(j.at("camera"), {"f0_m", "w0_m", "l0_m"}, {}, "camera");
  const auto& js = detail::require_fields(j.at("start"), {"x_m", "y_m", "z_m"}, {}, "start");
  const auto& je = detail::require_fields(j.at("end"), {"x_m", "y_m", "z_m"}, {}, "end");
  if (!j.at("targets").is_array() || j.at("targets").empty()) {
    throw IoError("scenario: 'targets' must be a non-empty array");
  }

  try {
    Scenario scn{CameraIntrinsics(detail::number(jc, "f0_m", "camera"),
                                  detail::number(jc, "w0_m", "camera"),
                                  detail::number(jc, "l0_m", "camera")),
                 {},
                 Waypoint3D{{detail::number(js, "x_m", "start"), detail::number(js, "y_m", "start")},
                            detail::number(js, "z_m", "start")},
                 Waypoint3D{{detail::number(je, "x_m", "end"), detail::number(je, "y_m", "end")},
                            detail::number(je, "z_m", "end")}};
    for (const auto& jt : j.at("targets")) {
      detail::require_fields(jt, {"x_m", "y_m", "r_m", "i_min"}, {}, "target");
      scn.targets.emplace_back(
          Eigen::Vector2d(detail::number(jt, "x_m", "target"), detail::number(jt, "y_m", "target")),
          detail::number(jt, "r_m", "target"), detail::number(jt, "i_min", "target"));
    }
    return scn;
  } catch (const DomainError& e) {
    throw IoError(std::string("scenario: ") + e.what());
  }
}

// ---- Result documents ----

inline TraceBlock trace_block_from_name(const std::string& s) {
  if (s == "Z") return TraceBlock::kAltitude;
  if (s == "Q") return TraceBlock::kHorizontal;
  if (s == "ORDER") return TraceBlock::kOrder;
  throw IoError("result: unknown trace block '" + s + "'");
}

inline Scheme scheme_from_name(const std::string& s) {
  if (s == "op3d") return Scheme::kOp3d;
  if (s == "op2d") return Scheme::kOp2d;
  if (s == "vp2d") return Scheme::kVp2d;
  throw IoError("unknown scheme '" + s + "'");
}

inline nlohmann::json result_to_json(const PlanResult& res) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["scheme"] = scheme_name(res.scheme);
  j["order"] = nlohmann::json::array();
  for (int k : res.tour.order) j["order"].push_back(k + 1);  // 1-based on disk
  j["waypoints"] = nlohmann::json::array();
  for (const auto& w : res.waypoints) {
    j["waypoints"].push_back({{"x_m", w.xy.x()}, {"y_m", w.xy.y()}, {"z_m", w.z}});
  }
  j["distance_m"] = res.distance_m;
  j["trace"] = nlohmann::json::array();
  for (const auto& e : res.trace) {
    j["trace"].push_back({{"iter", e.iter},
                          {"block", trace_block_name(e.block)},
                          {"objective_m", e.objective_m},
                          {"max_violation", e.max_violation}});
  }
  j["feasibility"] = nlohmann::json::array();
  for (std::size_t k = 0; k < res.feasibility.per_target.size(); ++k) {
    const auto& m = res.feasibility.per_target[k];
    nlohmann::json jm = {{"target", k + 1},
                         {"resolution_margin", m.resolution},
                         {"projection_margin_m", m.projection},
                         {"focal_margin_m", m.focal}};
    jm["resolution_margin_exact"] =
        m.resolution_exact ? nlohmann::json(*m.resolution_exact) : nlohmann::json();
    jm["projection_margin_exact_m"] =
        m.projection_exact ? nlohmann::json(*m.projection_exact) : nlohmann::json();
    j["feasibility"].push_back(jm);
  }
  return j;
}

inline PlanResult result_from_json(const nlohmann::json& j) {
  detail::require_fields(
      j, {"schema_version", "scheme", "order", "waypoints", "distance_m", "trace", "feasibility"},
      {}, "result");
  if (!j.at("schema_version").is_number_integer() ||
      j.at("schema_version").get<int>() != kSchemaVersion) {
    throw IoError("result: unsupported schema_version");
  }
  PlanResult res;
  res.scheme = scheme_from_name(j.at("scheme").get<std::string>());
  for (const auto& o : j.at("order")) res.tour.order.push_back(o.get<int>() - 1);
  for (const auto& jw : j.at("waypoints")) {
    detail::require_fields(jw, {"x_m", "y_m", "z_m"}, {}, "waypoint");
    res.waypoints.push_back(Waypoint3D{{detail::number(jw, "x_m", "waypoint"),
                                        detail::number(jw, "y_m", "waypoint")},
                                       detail::number(jw, "z_m", "waypoint")});
  }
  res.distance_m = detail::number(j, "distance_m", "result");
  res.tour.length_m = res.distance_m;
  for (const auto& je : j.at("trace")) {
    detail::require_fields(je, {"iter", "block", "objective_m", "max_violation"}, {}, "trace");
    res.trace.push_back({je.at("iter").get<int>(),
                         trace_block_from_name(je.at("block").get<std::string>()),
                         detail::number(je, "objective_m", "trace"),
                         detail::number(je, "max_violation", "trace")});
  }
  for (const auto& jm : j.at("feasibility")) {
    detail::require_fields(jm,
                           {"target", "resolution_margin", "projection_margin_m",
                            "focal_margin_m", "resolution_margin_exact",
                            "projection_margin_exact_m"},
                           {}, "feasibility");
    TargetMargins m;
    m.resolution = detail::number(jm, "resolution_margin", "feasibility");
    m.projection = detail::number(jm, "projection_margin_m", "feasibility");
    m.focal = detail::number(jm, "focal_margin_m", "feasibility");
    if (!jm.at("resolution_margin_exact").is_null()) {
      m.resolution_exact = jm.at("resolution_margin_exact").get<double>();
    }
    if (!jm.at("projection_margin_exact_m").is_null()) {
      m.projection_exact = jm.at("projection_margin_exact_m").get<double>();
    }
    res.feasibility.per_target.push_back(m);
    res.feasibility.max_violation =
        std::max({res.feasibility.max_violation, -m.resolution, -m.projection, -m.focal});
  }
  res.feasibility.max_violation = std::max(0.0, res.feasibility.max_violation);
  res.feasibility.distance_m = res.distance_m;
  return res;
}

// ---- Solver configuration documents ----

inline SolverConfig config_from_json(const nlohmann::json& j) {
  detail::require_fields(j, {},
                         {"obj_tol", "feas_tol", "max_sca_iters", "max_bcd_iters",
                          "max_outer_iters", "max_newton_iters", "max_stage_newton",
                          "stall_stages", "smooth_eps_start", "smooth_eps_final", "barrier_t0",
                          "barrier_mu", "exact_order_cap", "order_solver", "bcd_z_first",
                          "interleave_sca", "rng_seed"},
                         "config");
  SolverConfig cfg;
  auto num = [&](const char* k, double& out) {
    if (j.contains(k)) out = detail::number(j, k, "config");
  };
  auto integer = [&](const char* k, int& out) {
    if (j.contains(k)) out = j.at(k).get<int>();
  };
  num("obj_tol", cfg.obj_tol);
  num("feas_tol", cfg.feas_tol);
  integer("max_sca_iters", cfg.max_sca_iters);
  integer("max_bcd_iters", cfg.max_bcd_iters);
  integer("max_outer_iters", cfg.max_outer_iters);
  integer("max_newton_iters", cfg.max_newton_iters);
  integer("max_stage_newton", cfg.max_stage_newton);
  integer("stall_stages", cfg.stall_stages);
  num("smooth_eps_start", cfg.smooth_eps_start);
  num("smooth_eps_final", cfg.smooth_eps_final);
  num("barrier_t0", cfg.barrier_t0);
  num("barrier_mu", cfg.barrier_mu);
  integer("exact_order_cap", cfg.exact_order_cap);
  if (j.contains("order_solver")) {
    const auto s = j.at("order_solver").get<std::string>();
    if (s == "auto") {
      cfg.order_solver = OrderSolverChoice::kAuto;
    } else if (s == "exact") {
      cfg.order_solver = OrderSolverChoice::kExact;
    } else if (s == "heuristic") {
      cfg.order_solver = OrderSolverChoice::kHeuristic;
    } else {
      throw IoError("config: order_solver must be auto, exact, or heuristic");
    }
  }
  if (j.contains("bcd_z_first")) cfg.bcd_z_first = j.at("bcd_z_first").get<bool>();
  if (j.contains("interleave_sca")) cfg.interleave_sca = j.at("interleave_sca").get<bool>();
  if (j.contains("rng_seed")) cfg.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  if (!(cfg.obj_tol > 0.0) || !(cfg.feas_tol > 0.0) || cfg.max_sca_iters < 1 ||
      cfg.max_bcd_iters < 1 || cfg.max_outer_iters < 1) {
    throw IoError("config: tolerances must be positive and iteration caps at least 1");
  }
  return cfg;
}

// ---- Files ----

inline nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("cannot parse '" + path + "': " + e.what());
  }
}

inline void save_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write to '" + path + "' failed");
}

inline Scenario load_scenario(const std::string& path) { return scenario_from_json(load_json(path)); }
inline void save_scenario(const Scenario& scn, const std::string& path) {
  save_json(scenario_to_json(scn), path);
}
inline PlanResult load_result(const std::string& path) { return result_from_json(load_json(path)); }
inline void save_result(const PlanResult& res, const std::string& path) {
  save_json(result_to_json(res), path);
}

// ---- Generation ----

struct GenParams {
  std::uint64_t seed = 1;
  int k = 30;
  double area_m = 300.0;
  double radius_m = 20.0;
  double imin_lo = 0.01;
  double imin_hi = 0.4;
};

/// Camera used by generated scenarios: a 35 mm lens over a 15.6 x 23.5 mm
/// sensor, the configuration the solver defaults are tuned for.
inline CameraIntrinsics default_camera() { return CameraIntrinsics(0.035, 0.0156, 0.0235); }

/// Seeded scenario: targets uniform in the square, requirements uniform in
/// the given range, route from the origin back to the origin.
inline Scenario generate_scenario(const GenParams& p) {
  if (p.k < 1) throw DomainError("generate_scenario: need at least one target");
  if (!(p.area_m >= 0.0) || !(p.radius_m > 0.0)) {
    throw DomainError("generate_scenario: area must be non-negative and radius positive");
  }
  if (!(p.imin_lo > 0.0) || !(p.imin_lo <= p.imin_hi) || !(p.imin_hi < 1.0)) {
    throw DomainError("generate_scenario: resolution range must satisfy 0 < lo <= hi < 1");
  }
  Scenario scn{default_camera(), {}, Waypoint3D{{0, 0}, 0}, Waypoint3D{{0, 0}, 0}};
  const GroundTarget probe(Eigen::Vector2d::Zero(), p.radius_m, p.imin_hi);
  const auto iv = nadir_altitude_interval(scn.camera, probe);
  if (iv.empty()) {
    std::ostringstream msg;
    msg << "generate_scenario: radius " << p.radius_m << " m with minimum resolution "
        << p.imin_hi << " admits no nadir altitude (needs " << iv.lo_m << " m <= " << iv.hi_m
        << " m)";
    throw InfeasibleScenarioError(msg.str());
  }
  detail::UniformRng rng(p.seed);
  for (int i = 0; i < p.k; ++i) {
    const double x = rng.uniform(0.0, p.area_m);
    const double y = rng.uniform(0.0, p.area_m);
    const double imin = rng.uniform(p.imin_lo, p.imin_hi);
    scn.targets.emplace_back(Eigen::Vector2d(x, y), p.radius_m, imin);
  }
  return scn;
}

}  // namespace optour
