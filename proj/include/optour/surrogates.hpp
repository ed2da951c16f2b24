#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "optour/errors.hpp"
#include "optour/geometry.hpp"
#include "optour/types.hpp"

// Convexified forms of the neighbourhood constraints and the first-order
// tangent minorants used to build per-waypoint convex constraint sets.
//
// The resolution requirement is handled in log form,
//     -1.5 ln(|l|^2 + z^2) - 3 ln z  >=  ln(i_min / a) - 2 ln(z^2 - |l|^2/cw^2),
// and the full-projection requirement in squared form,
//     (z^2 + |l|^2)^2  >=  r^2 max((cw z + |l|)^2, cl^2 z^2 + (1+cl^2)|l|^2),
// where l is the horizontal offset from the target and cw, cl the camera's
// half-FOV cotangents. Both right-hand sides are kept verbatim; the left-hand
// terms are minorized by tangents at the expansion point, so any point
// feasible for the surrogate set is feasible for the originals.

namespace optour {

inline double log_resolution_lhs(double z, double offset_n) {
  return -1.5 * std::log(offset_n * offset_n + z * z) - 3.0 * std::log(z);
}

/// Right-hand side of the log-form resolution constraint. The log argument is
/// floored at 1e-8 z^2 so line searches through the cone boundary stay finite.
inline double log_resolution_rhs(double z, double offset_n, const GroundTarget& gt,
                                 const CameraIntrinsics& cam) {
  const double cw = cam.cot_half_fov_w();
  const double core = std::max(z * z - offset_n * offset_n / (cw * cw), 1e-8 * z * z);
  return std::log(gt.min_resolution / nadir_resolution_coeff(cam, gt)) - 2.0 * std::log(core);
}

inline double projection_lhs(double z, double offset_n) {
  const double s = z * z + offset_n * offset_n;
  return s * s;
}

inline double projection_rhs(double z, double offset_n, const GroundTarget& gt,
                             const CameraIntrinsics& cam) {
  const double cw = cam.cot_half_fov_w();
  const double cl = cam.cot_half_fov_l();
  const double near_branch = (cw * z + offset_n) * (cw * z + offset_n);
  const double slant_branch = cl * cl * z * z + (1.0 + cl * cl) * offset_n * offset_n;
  return gt.radius_m * gt.radius_m * std::max(near_branch, slant_branch);
}

// Tangent minorants in the altitude direction (horizontal offset frozen).

/// Lower bound of -1.5 ln(|l|^2 + z^2), expanded in z^2 at z_ref.
inline double slant_log_lb_in_z(double z, double z_ref, double offset_n) {
  const double base = offset_n * offset_n + z_ref * z_ref;
  return -1.5 * std::log(base) - 1.5 / base * (z * z - z_ref * z_ref);
}

/// Lower bound of -3 ln z, expanded at z_ref.
inline double alt_log_lb(double z, double z_ref) {
  return -3.0 * std::log(z_ref) - 3.0 / z_ref * (z - z_ref);
}

/// Lower bound of z^4, expanded at z_ref.
inline double alt_quartic_lb(double z, double z_ref) {
  const double zr2 = z_ref * z_ref;
  return zr2 * zr2 + 4.0 * zr2 * z_ref * (z - z_ref);
}

/// Lower bound of 2 z^2 |l|^2 in z, with the offset frozen.
inline double cross_term_lb_in_z(double z, double z_ref, double offset_n) {
  const double o2 = offset_n * offset_n;
  return 2.0 * z_ref * z_ref * o2 + 4.0 * z_ref * o2 * (z - z_ref);
}

// Tangent minorants in the horizontal direction (altitude frozen).

/// Lower bound of -1.5 ln(|l|^2 + z^2), expanded in |l|^2 at l_ref.
inline double slant_log_lb_in_offset(const Eigen::Vector2d& l, const Eigen::Vector2d& l_ref,
                                     double z) {
  const double base = l_ref.squaredNorm() + z * z;
  return -1.5 * std::log(base) - 1.5 / base * (l.squaredNorm() - l_ref.squaredNorm());
}

/// Lower bound of 2 z^2 |l|^2, expanded in the offset vector at l_ref.
inline double cross_term_lb_in_offset(const Eigen::Vector2d& l, const Eigen::Vector2d& l_ref,
                                      double z) {
  return 2.0 * z * z * l_ref.squaredNorm() + 4.0 * z * z * l_ref.dot(l - l_ref);
}

/// Lower bound of |l|^4, expanded in the offset vector at l_ref.
inline double offset_quartic_lb(const Eigen::Vector2d& l, const Eigen::Vector2d& l_ref) {
  const double ref2 = l_ref.squaredNorm();
  return ref2 * ref2 + 4.0 * ref2 * l_ref.dot(l - l_ref);
}

/// Expansion point of one waypoint's surrogate constraints. Also carries the
/// frozen block: the offset when altitudes are optimized, the altitude when
/// horizontal positions are.
struct SurrogatePoint {
  double z_ref = 0.0;
  Eigen::Vector2d offset_ref{0.0, 0.0};
};

namespace detail {

inline void require_feasible_surrogate(const CameraIntrinsics& cam, const GroundTarget& gt,
                                       const SurrogatePoint& sp, double feas_tol,
                                       const char* who) {
  if (!(sp.z_ref > 0.0)) {
    throw DomainError(std::string(who) + ": expansion altitude must be positive");
  }
  const Waypoint3D wp{gt.xy + sp.offset_ref, sp.z_ref};
  if (!neighbourhood_contains(cam, wp, gt, feas_tol).inside) {
    throw DomainError(std::string(who) + ": expansion point violates the original constraints");
  }
}

}  // namespace detail

// Constraint sets expose count() inequalities g_i(x) <= 0 over the free
// block, with values, gradients, and Hessians. Values are normalized by a
// fixed per-constraint scale so residuals are comparable across constraints.
// Index map: 0 resolution, 1 projection near branch, 2 projection slant
// branch, 3 admissible cone.

class AltitudeConstraintSet {
 public:
  static constexpr int kDim = 1;
  using Block = Eigen::Matrix<double, 1, 1>;
  using Hess = Eigen::Matrix<double, 1, 1>;

  AltitudeConstraintSet(const CameraIntrinsics& cam, const GroundTarget& gt,
                        const SurrogatePoint& sp, double feas_tol = 1e-6)
      : cw_(cam.cot_half_fov_w()),
        cl_(cam.cot_half_fov_l()),
        r2_(gt.radius_m * gt.radius_m),
        off_(sp.offset_ref.norm()),
        z_ref_(sp.z_ref),
        res_gap_(std::log(gt.min_resolution / nadir_resolution_coeff(cam, gt))) {
    detail::require_feasible_surrogate(cam, gt, sp, feas_tol, "AltitudeConstraintSet");
    slant_base_ = off_ * off_ + z_ref_ * z_ref_;
    const double quartic_scale = slant_base_ * slant_base_;
    scale_[0] = 1.0;
    scale_[1] = scale_[2] = std::max(1.0, quartic_scale);
    scale_[3] = std::max(1.0, cw_ * z_ref_ + off_);
  }

  int count() const { return 4; }
  double scale(int i) const { return scale_[i]; }

  double value(int i, const Block& x) const {
    const double z = x[0];
    switch (i) {
      case 0: {
        if (!(z > 0.0)) return std::numeric_limits<double>::infinity();
        const double core = z * z - off_ * off_ / (cw_ * cw_);
        if (core <= 1e-8 * z * z) {
          // The cone-boundary floor region is genuinely infeasible for the
          // resolution constraint; report it as such with a finite value.
          const double g = res_gap_ - 2.0 * std::log(1e-8 * z * z) -
                           slant_log_lb_in_z(z, z_ref_, off_) - alt_log_lb(z, z_ref_);
          return std::max(g, 1.0);
        }
        return res_gap_ - 2.0 * std::log(core) - slant_log_lb_in_z(z, z_ref_, off_) -
               alt_log_lb(z, z_ref_);
      }
      case 1:
        return (r2_ * (cw_ * z + off_) * (cw_ * z + off_) - minorized_lhs(z)) / scale_[1];
      case 2:
        return (r2_ * (cl_ * cl_ * z * z + (1.0 + cl_ * cl_) * off_ * off_) - minorized_lhs(z)) /
               scale_[2];
      default:
        return (off_ - cw_ * z) / scale_[3];
    }
  }

  Block gradient(int i, const Block& x) const {
    const double z = x[0];
    Block g;
    switch (i) {
      case 0: {
        const double core = z * z - off_ * off_ / (cw_ * cw_);
        g[0] = -4.0 * z / core + 3.0 * z / slant_base_ + 3.0 / z_ref_;
        break;
      }
      case 1:
        g[0] = (2.0 * r2_ * cw_ * (cw_ * z + off_) - minorized_lhs_slope()) / scale_[1];
        break;
      case 2:
        g[0] = (2.0 * r2_ * cl_ * cl_ * z - minorized_lhs_slope()) / scale_[2];
        break;
      default:
        g[0] = -cw_ / scale_[3];
    }
    return g;
  }

  Hess hessian(int i, const Block& x) const {
    const double z = x[0];
    Hess h;
    switch (i) {
      case 0: {
        const double core = z * z - off_ * off_ / (cw_ * cw_);
        h(0, 0) = 4.0 * (z * z + off_ * off_ / (cw_ * cw_)) / (core * core) + 3.0 / slant_base_;
        break;
      }
      case 1:
        h(0, 0) = 2.0 * r2_ * cw_ * cw_ / scale_[1];
        break;
      case 2:
        h(0, 0) = 2.0 * r2_ * cl_ * cl_ / scale_[2];
        break;
      default:
        h(0, 0) = 0.0;
    }
    return h;
  }

 private:
  double minorized_lhs(double z) const {
    const double o2 = off_ * off_;
    return alt_quartic_lb(z, z_ref_) + cross_term_lb_in_z(z, z_ref_, off_) + o2 * o2;
  }
  double minorized_lhs_slope() const {
    return 4.0 * z_ref_ * z_ref_ * z_ref_ + 4.0 * z_ref_ * off_ * off_;
  }

  double cw_, cl_, r2_;
  double off_;     // frozen |l|
  double z_ref_;   // expansion altitude
  double res_gap_; // ln(i_min / a)
  double slant_base_ = 0.0;
  double scale_[4] = {1.0, 1.0, 1.0, 1.0};
};

class HorizontalConstraintSet {
 public:
  static constexpr int kDim = 2;
  using Block = Eigen::Vector2d;
  using Hess = Eigen::Matrix2d;

  HorizontalConstraintSet(const CameraIntrinsics& cam, const GroundTarget& gt,
                          const SurrogatePoint& sp, double feas_tol = 1e-6)
      : cw_(cam.cot_half_fov_w()),
        cl_(cam.cot_half_fov_l()),
        r2_(gt.radius_m * gt.radius_m),
        z_(sp.z_ref),
        l_ref_(sp.offset_ref),
        res_gap_(std::log(gt.min_resolution / nadir_resolution_coeff(cam, gt))) {
    detail::require_feasible_surrogate(cam, gt, sp, feas_tol, "HorizontalConstraintSet");
    slant_base_ = l_ref_.squaredNorm() + z_ * z_;
    scale_[0] = 1.0;
    scale_[1] = scale_[2] = std::max(1.0, slant_base_ * slant_base_);
    scale_[3] = std::max(1.0, cw_ * z_);
  }

  int count() const { return 4; }
  double scale(int i) const { return scale_[i]; }

  double value(int i, const Block& l) const {
    switch (i) {
      case 0: {
        const double core = z_ * z_ - l.squaredNorm() / (cw_ * cw_);
        if (core <= 1e-8 * z_ * z_) {
          const double g = res_gap_ - 2.0 * std::log(1e-8 * z_ * z_) -
                           slant_log_lb_in_offset(l, l_ref_, z_) + 3.0 * std::log(z_);
          return std::max(g, 1.0);
        }
        return res_gap_ - 2.0 * std::log(core) - slant_log_lb_in_offset(l, l_ref_, z_) +
               3.0 * std::log(z_);
      }
      case 1: {
        const double n = l.norm();
        return (r2_ * (cw_ * z_ + n) * (cw_ * z_ + n) - minorized_lhs(l)) / scale_[1];
      }
      case 2:
        return (r2_ * (cl_ * cl_ * z_ * z_ + (1.0 + cl_ * cl_) * l.squaredNorm()) -
                minorized_lhs(l)) /
               scale_[2];
      default:
        return (l.norm() - cw_ * z_) / scale_[3];
    }
  }

  Block gradient(int i, const Block& l) const {
    switch (i) {
      case 0: {
        const double core = z_ * z_ - l.squaredNorm() / (cw_ * cw_);
        const double dv = 2.0 / (cw_ * cw_ * core) + 1.5 / slant_base_;
        return 2.0 * dv * l;
      }
      case 1: {
        const double n = std::max(l.norm(), 1e-12);
        return (2.0 * r2_ * (cw_ * z_ + l.norm()) / n * l - minorized_lhs_grad()) / scale_[1];
      }
      case 2:
        return (2.0 * r2_ * (1.0 + cl_ * cl_) * l - minorized_lhs_grad()) / scale_[2];
      default: {
        const double n = std::max(l.norm(), 1e-12);
        return l / (n * scale_[3]);
      }
    }
  }

  Hess hessian(int i, const Block& l) const {
    switch (i) {
      case 0: {
        const double core = z_ * z_ - l.squaredNorm() / (cw_ * cw_);
        const double dv = 2.0 / (cw_ * cw_ * core) + 1.5 / slant_base_;
        const double d2v = 2.0 / (cw_ * cw_ * cw_ * cw_ * core * core);
        return 2.0 * dv * Hess::Identity() + 4.0 * d2v * l * l.transpose();
      }
      case 1: {
        // Curvature of the |l| term is capped near the kink at the origin;
        // values and line searches stay exact, only the Newton model blurs.
        const double m = std::max(l.norm(), 1e-4);
        const Hess radial = l * l.transpose() / (m * m);
        return 2.0 * r2_ *
               (radial + (cw_ * z_ + l.norm()) / m * (Hess::Identity() - radial)) / scale_[1];
      }
      case 2:
        return 2.0 * r2_ * (1.0 + cl_ * cl_) / scale_[2] * Hess::Identity();
      default: {
        const double m = std::max(l.norm(), 1e-4);
        const Hess radial = l * l.transpose() / (m * m);
        return (Hess::Identity() - radial) / (m * scale_[3]);
      }
    }
  }

 private:
  double minorized_lhs(const Block& l) const {
    const double z2 = z_ * z_;
    return z2 * z2 + cross_term_lb_in_offset(l, l_ref_, z_) + offset_quartic_lb(l, l_ref_);
  }
  Block minorized_lhs_grad() const {
    return (4.0 * z_ * z_ + 4.0 * l_ref_.squaredNorm()) * l_ref_;
  }

  double cw_, cl_, r2_;
  double z_;  // frozen altitude
  Eigen::Vector2d l_ref_;
  double res_gap_;
  double slant_base_ = 0.0;
  double scale_[4] = {1.0, 1.0, 1.0, 1.0};
};

inline AltitudeConstraintSet build_altitude_constraints(const CameraIntrinsics& cam,
                                                        const GroundTarget& gt,
                                                        const SurrogatePoint& sp,
                                                        double feas_tol = 1e-6) {
  return AltitudeConstraintSet(cam, gt, sp, feas_tol);
}

inline HorizontalConstraintSet build_horizontal_constraints(const CameraIntrinsics& cam,
                                                            const GroundTarget& gt,
                                                            const SurrogatePoint& sp,
                                                            double feas_tol = 1e-6) {
  return HorizontalConstraintSet(cam, gt, sp, feas_tol);
}

}  // namespace optour
