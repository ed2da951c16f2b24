#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "optour/errors.hpp"
#include "optour/types.hpp"

// Oblique-photography geometry: slant distance, oblique angle, ground
// footprint, coverage area, image resolution, inner distances, and the
// neighbourhood membership test built from them.

namespace optour {

inline double offset_norm(const Waypoint3D& wp, const GroundTarget& gt) {
  return (wp.xy - gt.xy).norm();
}

/// Straight-line distance from the waypoint to the target center.
inline double slant_distance(const Waypoint3D& wp, const GroundTarget& gt) {
  return std::sqrt((wp.xy - gt.xy).squaredNorm() + wp.z * wp.z);
}

/// Angle between the camera's optical axis and the vertical, in [0, pi/2).
inline double oblique_angle(const Waypoint3D& wp, const GroundTarget& gt) {
  if (!(wp.z > 0.0)) throw DomainError("oblique_angle: altitude must be positive");
  return std::atan(offset_norm(wp, gt) / wp.z);
}

/// Ground footprint of the tilted camera: an isosceles trapezoid described by
/// its extent along the tilt direction and its two parallel edges.
struct FootprintExtents {
  double depth_m;      // extent from the near edge to the far edge
  double near_edge_m;  // parallel edge closest to the camera (the shorter one)
  double far_edge_m;   // parallel edge farthest from the camera
};

/// Exact trapezoid extents by similar triangles through the image plane.
/// Valid for slant_m > focal length and oblique angle below the half-FOV
/// complement; beyond that the far edge recedes to infinity.
inline FootprintExtents footprint_extents_exact(const CameraIntrinsics& cam, double slant_m,
                                                double oblique_rad) {
  if (!(slant_m > cam.focal_m)) {
    throw DomainError("footprint_extents_exact: slant distance must exceed the focal length");
  }
  if (!(oblique_rad >= 0.0) || oblique_rad >= cam.max_oblique_rad()) {
    throw DomainError("footprint_extents_exact: oblique angle outside [0, atan(2f/w))");
  }
  const double ct = std::cos(oblique_rad);
  const double st = std::sin(oblique_rad);
  const double reach = slant_m - cam.focal_m;
  const double half_w = 0.5 * cam.plane_w_m;
  const double den_near = cam.focal_m * ct + half_w * st;
  const double den_far = cam.focal_m * ct - half_w * st;  // positive on the valid domain
  FootprintExtents e;
  e.depth_m = cam.focal_m * cam.plane_w_m * reach * ct / (den_near * den_far);
  e.near_edge_m = cam.plane_l_m * reach * ct / den_near;
  e.far_edge_m = cam.plane_l_m * reach * ct / den_far;
  return e;
}

/// Multiplicative growth of the coverage area relative to the nadir pose.
/// Equals 1 at zero tilt and diverges as the angle approaches atan(2f/w).
inline double coverage_scale_factor(const CameraIntrinsics& cam, double oblique_rad) {
  if (!(oblique_rad >= 0.0) || oblique_rad >= cam.max_oblique_rad()) {
    throw DomainError("coverage_scale_factor: oblique angle outside [0, atan(2f/w))");
  }
  const double cw = cam.cot_half_fov_w();
  const double t = std::tan(oblique_rad);
  const double c = std::cos(oblique_rad);
  const double shrink = 1.0 - t * t / (cw * cw);
  return 1.0 / (shrink * shrink * c * c * c);
}

namespace detail {

inline void require_admissible_pose(const CameraIntrinsics& cam, const Waypoint3D& wp,
                                    const GroundTarget& gt, const char* who) {
  if (!(wp.z > 0.0) || !(cam.cot_half_fov_w() * wp.z - offset_norm(wp, gt) > 0.0)) {
    throw DomainError(std::string(who) + ": pose outside the camera's admissible cone");
  }
}

}  // namespace detail

/// Ground area covered by one image, in the far-field approximation where the
/// focal length is negligible against the slant distance.
inline double coverage_area(const CameraIntrinsics& cam, const Waypoint3D& wp,
                            const GroundTarget& gt) {
  detail::require_admissible_pose(cam, wp, gt, "coverage_area");
  const double cw = cam.cot_half_fov_w();
  const double cl = cam.cot_half_fov_l();
  const double z2 = wp.z * wp.z;
  const double off2 = (wp.xy - gt.xy).squaredNorm();
  const double dist2 = off2 + z2;
  const double core = z2 - off2 / (cw * cw);
  return 4.0 * z2 * wp.z * dist2 * std::sqrt(dist2) / (cw * cl * core * core);
}

/// Coverage area without the far-field approximation, from the trapezoid
/// area formula. Used as the reference the approximation is checked against.
inline double coverage_area_exact(const CameraIntrinsics& cam, const Waypoint3D& wp,
                                  const GroundTarget& gt) {
  detail::require_admissible_pose(cam, wp, gt, "coverage_area_exact");
  const double cw = cam.cot_half_fov_w();
  const double cl = cam.cot_half_fov_l();
  const double z2 = wp.z * wp.z;
  const double off2 = (wp.xy - gt.xy).squaredNorm();
  const double dist = std::sqrt(off2 + z2);
  const double reach = dist - cam.focal_m;
  if (!(reach > 0.0)) throw DomainError("coverage_area_exact: slant distance must exceed the focal length");
  const double core = z2 - off2 / (cw * cw);
  return 4.0 * reach * reach * z2 * wp.z * dist / (cw * cl * core * core);
}

/// Coefficient a of the resolution model: the resolution of a nadir image
/// taken from altitude z is a / z^2.
inline double nadir_resolution_coeff(const CameraIntrinsics& cam, const GroundTarget& gt) {
  return cam.cot_half_fov_w() * cam.cot_half_fov_l() * M_PI * gt.radius_m * gt.radius_m / 4.0;
}

/// Image resolution: the fraction of the coverage area occupied by the
/// target disk. Dimensionless, in (0, 1] for any pose worth taking.
inline double image_resolution(const CameraIntrinsics& cam, const Waypoint3D& wp,
                               const GroundTarget& gt) {
  detail::require_admissible_pose(cam, wp, gt, "image_resolution");
  const double cw = cam.cot_half_fov_w();
  const double z2 = wp.z * wp.z;
  const double off2 = (wp.xy - gt.xy).squaredNorm();
  const double dist2 = off2 + z2;
  const double core = z2 - off2 / (cw * cw);
  return nadir_resolution_coeff(cam, gt) * core * core /
         (dist2 * std::sqrt(dist2) * z2 * wp.z);
}

/// Distances from the target center to the footprint's near parallel edge
/// and to its slanted edge. Full projection of the disk requires both to be
/// at least the target radius.
struct InnerDistances {
  double near_side_m;
  double slant_side_m;
};

/// Far-field approximation of the inner distances.
inline InnerDistances inner_distances(const CameraIntrinsics& cam, const Waypoint3D& wp,
                                      const GroundTarget& gt) {
  detail::require_admissible_pose(cam, wp, gt, "inner_distances");
  const double cw = cam.cot_half_fov_w();
  const double cl = cam.cot_half_fov_l();
  const double off = offset_norm(wp, gt);
  const double d2 = off * off + wp.z * wp.z;
  InnerDistances r;
  r.near_side_m = d2 / (cw * wp.z + off);
  r.slant_side_m = d2 / std::sqrt(cl * cl * wp.z * wp.z + (1.0 + cl * cl) * off * off);
  return r;
}

/// Inner distances rebuilt from the exact trapezoid extents.
inline InnerDistances inner_distances_exact(const CameraIntrinsics& cam, const Waypoint3D& wp,
                                            const GroundTarget& gt) {
  const FootprintExtents e =
      footprint_extents_exact(cam, slant_distance(wp, gt), oblique_angle(wp, gt));
  const double edge_sum = e.near_edge_m + e.far_edge_m;
  const double half_gap = 0.5 * (e.far_edge_m - e.near_edge_m);
  const double slant_edge = std::sqrt(half_gap * half_gap + e.depth_m * e.depth_m);
  InnerDistances r;
  r.near_side_m = e.near_edge_m * e.depth_m / edge_sum;
  r.slant_side_m = e.near_edge_m * e.far_edge_m * e.depth_m / (edge_sum * slant_edge);
  return r;
}

enum class NeighbourhoodConstraint {
  kNone,            // all satisfied
  kResolution,      // image resolution below the target's requirement
  kFullProjection,  // disk not fully inside the footprint
  kFocalGeometry,   // pose outside the camera's admissible cone
};

struct NeighbourhoodCheck {
  bool inside = false;
  NeighbourhoodConstraint failed = NeighbourhoodConstraint::kNone;
  double resolution_margin = 0.0;  // resolution - min_resolution
  double projection_margin = 0.0;  // min(inner distances) - radius
  double focal_margin = 0.0;       // cot(half FOV) * z - horizontal offset
};

/// Membership test for the feasible image-taking region of one target.
/// Never throws: degenerate poses come back as not-inside with the first
/// violated constraint named. Each inequality gets an additive tolerance.
inline NeighbourhoodCheck neighbourhood_contains(const CameraIntrinsics& cam, const Waypoint3D& wp,
                                                 const GroundTarget& gt, double tol = 1e-9) {
  NeighbourhoodCheck out;
  const double off = offset_norm(wp, gt);
  out.focal_margin = cam.cot_half_fov_w() * wp.z - off;
  if (!(wp.z > 0.0)) {
    out.resolution_margin = -gt.min_resolution;
    out.projection_margin = -gt.radius_m;
    out.failed = NeighbourhoodConstraint::kResolution;
    return out;
  }
  const double cw = cam.cot_half_fov_w();
  const double cl = cam.cot_half_fov_l();
  const double z2 = wp.z * wp.z;
  const double d2 = off * off + z2;
  const double core = z2 - off * off / (cw * cw);
  const double resolution =
      nadir_resolution_coeff(cam, gt) * core * core / (d2 * std::sqrt(d2) * z2 * wp.z);
  const double near_side = d2 / (cw * wp.z + off);
  const double slant_side = d2 / std::sqrt(cl * cl * z2 + (1.0 + cl * cl) * off * off);
  out.resolution_margin = resolution - gt.min_resolution;
  out.projection_margin = std::min(near_side, slant_side) - gt.radius_m;
  if (out.resolution_margin < -tol) {
    out.failed = NeighbourhoodConstraint::kResolution;
  } else if (out.projection_margin < -tol) {
    out.failed = NeighbourhoodConstraint::kFullProjection;
  } else if (out.focal_margin < -tol) {
    out.failed = NeighbourhoodConstraint::kFocalGeometry;
  } else {
    out.inside = true;
  }
  return out;
}

/// Feasible altitude interval directly above the target. May be empty
/// (lo > hi) when the radius and resolution requirement are incompatible.
struct AltitudeInterval {
  double lo_m;
  double hi_m;
  bool empty() const { return lo_m > hi_m; }
};

inline AltitudeInterval nadir_altitude_interval(const CameraIntrinsics& cam,
                                                const GroundTarget& gt) {
  AltitudeInterval iv;
  iv.lo_m = gt.radius_m * std::max(cam.cot_half_fov_w(), cam.cot_half_fov_l());
  iv.hi_m = std::sqrt(nadir_resolution_coeff(cam, gt) / gt.min_resolution);
  return iv;
}

}  // namespace optour
