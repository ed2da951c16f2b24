#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "optour/errors.hpp"

namespace optour {

/// Pinhole camera with a rectangular image plane. The camera is assumed to
/// tilt within the plane spanned by the image width, so the ground footprint
/// is an isosceles trapezoid whose parallel edges map to the plane length.
struct CameraIntrinsics {
  double focal_m;
  double plane_w_m;
  double plane_l_m;

  CameraIntrinsics(double focal, double plane_w, double plane_l)
      : focal_m(focal), plane_w_m(plane_w), plane_l_m(plane_l) {
    if (!(focal > 0.0) || !(plane_w > 0.0) || !(plane_l > 0.0)) {
      throw DomainError("CameraIntrinsics: focal length and image-plane dimensions must be positive");
    }
  }

  /// Cotangent of the half field of view across the image-plane width.
  double cot_half_fov_w() const { return 2.0 * focal_m / plane_w_m; }
  /// Cotangent of the half field of view across the image-plane length.
  double cot_half_fov_l() const { return 2.0 * focal_m / plane_l_m; }
  /// Largest oblique angle for which the ground footprint stays finite.
  double max_oblique_rad() const { return std::atan(cot_half_fov_w()); }
};

/// A disk-shaped ground target with a minimum acceptable image resolution.
struct GroundTarget {
  Eigen::Vector2d xy;
  double radius_m;
  double min_resolution;

  GroundTarget(const Eigen::Vector2d& position, double radius, double min_res)
      : xy(position), radius_m(radius), min_resolution(min_res) {
    if (!(radius > 0.0)) throw DomainError("GroundTarget: radius must be positive");
    if (!(min_res > 0.0 && min_res < 1.0)) {
      throw DomainError("GroundTarget: minimum resolution must lie in (0, 1)");
    }
  }
};

/// A 3D location, split into horizontal coordinate and altitude.
/// Image-taking waypoints require z > 0; route endpoints may sit at z = 0.
struct Waypoint3D {
  Eigen::Vector2d xy{0.0, 0.0};
  double z = 0.0;

  Eigen::Vector3d position() const { return {xy.x(), xy.y(), z}; }
};

/// One planning instance: camera, targets, and the fixed route endpoints.
struct Scenario {
  CameraIntrinsics camera;
  std::vector<GroundTarget> targets;
  Waypoint3D start;
  Waypoint3D end;
};

}  // namespace optour
