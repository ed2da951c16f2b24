#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "optour/surrogates.hpp"
#include "test_helpers.hpp"

using namespace optour;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

GroundTarget origin_target(double r = 20.0, double imin = 0.4) {
  return GroundTarget(Eigen::Vector2d::Zero(), r, imin);
}

// Rejection-samples a pose strictly inside the target's neighbourhood.
SurrogatePoint random_feasible_surrogate(test::Rng& rng, const CameraIntrinsics& cam,
                                         const GroundTarget& gt) {
  for (int tries = 0; tries < 10000; ++tries) {
    SurrogatePoint sp;
    sp.z_ref = rng.uniform(70.0, 140.0);
    const double off = rng.uniform(0.0, 0.6 * cam.cot_half_fov_w() * sp.z_ref);
    const double ang = rng.uniform(0.0, 2.0 * M_PI);
    sp.offset_ref = off * Eigen::Vector2d(std::cos(ang), std::sin(ang));
    const Waypoint3D wp{gt.xy + sp.offset_ref, sp.z_ref};
    const auto check = neighbourhood_contains(cam, wp, gt);
    if (check.inside && check.resolution_margin > 1e-3 && check.projection_margin > 1e-3) {
      return sp;
    }
  }
  FAIL("could not sample a feasible surrogate point");
  return {};
}

}  // namespace

TEST_CASE("transformed constraint sides") {
  const auto cam = test::survey_camera();
  const auto gt = origin_target();

  SECTION("log-form resolution constraint values") {
    CHECK_THAT(log_resolution_rhs(100.0, 0.0, gt, cam), WithinRel(-27.679590696357128, 1e-12));
    CHECK_THAT(log_resolution_lhs(100.0, 0.0), WithinRel(-27.63102111592855, 1e-12));
    // Feasible at the nadir example pose, matching resolution 0.4199 >= 0.4.
    CHECK(log_resolution_lhs(100.0, 0.0) >= log_resolution_rhs(100.0, 0.0, gt, cam));
  }

  SECTION("log form is tight when the requirement equals the achieved resolution") {
    const Waypoint3D wp{{40.0, -25.0}, 110.0};
    const double achieved = image_resolution(cam, wp, gt);
    const GroundTarget pinned(gt.xy, gt.radius_m, achieved);
    const double off = offset_norm(wp, pinned);
    CHECK_THAT(log_resolution_lhs(wp.z, off),
               WithinRel(log_resolution_rhs(wp.z, off, pinned, cam), 1e-12));
  }

  SECTION("squared-form projection constraint values") {
    CHECK_THAT(projection_rhs(100.0, 0.0, gt, cam), WithinRel(80539119.00065748, 1e-12));
    CHECK(projection_lhs(100.0, 0.0) >= projection_rhs(100.0, 0.0, gt, cam));
    const GroundTarget point_target(gt.xy, 1e-300, 0.4);
    CHECK(projection_rhs(100.0, 37.0, point_target, cam) == 0.0);
  }

  SECTION("equivalence with the original constraints") {
    test::Rng rng(101);
    for (int i = 0; i < 5000; ++i) {
      const double z = rng.uniform(30.0, 300.0);
      const double off = rng.uniform(0.0, 0.95 * cam.cot_half_fov_w() * z);
      const double ang = rng.uniform(0.0, 2.0 * M_PI);
      const Waypoint3D wp{off * Eigen::Vector2d(std::cos(ang), std::sin(ang)), z};
      const GroundTarget probe(Eigen::Vector2d::Zero(), rng.uniform(1.0, 40.0),
                               rng.uniform(0.01, 0.9));

      const double res = image_resolution(cam, wp, probe);
      if (std::abs(res - probe.min_resolution) > 1e-12 * probe.min_resolution) {
        const bool original = res >= probe.min_resolution;
        const bool logged = log_resolution_lhs(z, off) >= log_resolution_rhs(z, off, probe, cam);
        CHECK(original == logged);
      }

      const auto inner = inner_distances(cam, wp, probe);
      const double closest = std::min(inner.near_side_m, inner.slant_side_m);
      if (std::abs(closest - probe.radius_m) > 1e-12 * probe.radius_m) {
        const bool original = probe.radius_m <= closest;
        const bool squared = projection_lhs(z, off) >= projection_rhs(z, off, probe, cam);
        CHECK(original == squared);
      }
    }
  }
}

TEST_CASE("tangent minorant examples") {
  CHECK_THAT(alt_log_lb(100.0, 100.0), WithinRel(-3.0 * std::log(100.0), 1e-12));
  CHECK_THAT(alt_log_lb(110.0, 100.0), WithinRel(-14.115510557964276, 1e-12));
  CHECK(alt_log_lb(110.0, 100.0) <= -3.0 * std::log(110.0));
  CHECK_THAT(alt_quartic_lb(90.0, 100.0), WithinRel(6.0e7, 1e-12));
  CHECK(alt_quartic_lb(90.0, 100.0) <= 6.561e7);

  const Eigen::Vector2d zero(0.0, 0.0), five(5.0, 0.0), ten(10.0, 0.0);
  CHECK_THAT(offset_quartic_lb(zero, zero), WithinAbs(0.0, 1e-15));
  CHECK_THAT(offset_quartic_lb(ten, five), WithinRel(3125.0, 1e-12));
  CHECK(offset_quartic_lb(ten, five) <= 1e4);
  CHECK_THAT(cross_term_lb_in_offset(ten, five, 100.0), WithinRel(1.5e6, 1e-12));
  CHECK(cross_term_lb_in_offset(ten, five, 100.0) <= 2e6);
}

TEST_CASE("all seven minorants are global lower bounds, tight at the expansion point") {
  const auto cam = test::survey_camera();
  const double cw = cam.cot_half_fov_w();
  test::Rng rng(202);

  auto check_bound = [](double surrogate, double target) {
    CHECK(surrogate <= target + 1e-9 * std::abs(target) + 1e-12);
  };
  auto check_tight = [](double surrogate, double target) {
    CHECK(std::abs(surrogate - target) <= 1e-9 * std::abs(target) + 1e-12);
  };

  for (int i = 0; i < 10000; ++i) {
    const double z = rng.uniform(1.0, 500.0);
    const double z_ref = rng.uniform(1.0, 500.0);
    const double off = rng.uniform(0.0, 0.95 * cw * z);
    const double ang = rng.uniform(0.0, 2.0 * M_PI);
    const double ref_ang = rng.uniform(0.0, 2.0 * M_PI);
    const Eigen::Vector2d l = off * Eigen::Vector2d(std::cos(ang), std::sin(ang));
    const Eigen::Vector2d l_ref = rng.uniform(0.0, 0.95 * cw * z) *
                                  Eigen::Vector2d(std::cos(ref_ang), std::sin(ref_ang));

    const double slant_log = -1.5 * std::log(off * off + z * z);
    check_bound(slant_log_lb_in_z(z, z_ref, off), slant_log);
    check_tight(slant_log_lb_in_z(z_ref, z_ref, off), -1.5 * std::log(off * off + z_ref * z_ref));

    check_bound(alt_log_lb(z, z_ref), -3.0 * std::log(z));
    check_tight(alt_log_lb(z_ref, z_ref), -3.0 * std::log(z_ref));

    check_bound(alt_quartic_lb(z, z_ref), z * z * z * z);
    check_tight(alt_quartic_lb(z_ref, z_ref), z_ref * z_ref * z_ref * z_ref);

    check_bound(cross_term_lb_in_z(z, z_ref, off), 2.0 * z * z * off * off);
    check_tight(cross_term_lb_in_z(z_ref, z_ref, off), 2.0 * z_ref * z_ref * off * off);

    check_bound(slant_log_lb_in_offset(l, l_ref, z), -1.5 * std::log(l.squaredNorm() + z * z));
    check_tight(slant_log_lb_in_offset(l_ref, l_ref, z),
                -1.5 * std::log(l_ref.squaredNorm() + z * z));

    check_bound(cross_term_lb_in_offset(l, l_ref, z), 2.0 * z * z * l.squaredNorm());
    check_tight(cross_term_lb_in_offset(l_ref, l_ref, z), 2.0 * z * z * l_ref.squaredNorm());

    check_bound(offset_quartic_lb(l, l_ref), l.squaredNorm() * l.squaredNorm());
    check_tight(offset_quartic_lb(l_ref, l_ref), l_ref.squaredNorm() * l_ref.squaredNorm());
  }
}

TEST_CASE("constraint set construction") {
  const auto cam = test::survey_camera();
  const auto gt = origin_target();

  SECTION("feasible at its own expansion point") {
    test::Rng rng(303);
    for (int i = 0; i < 200; ++i) {
      const auto sp = random_feasible_surrogate(rng, cam, gt);
      const auto alt = build_altitude_constraints(cam, gt, sp);
      AltitudeConstraintSet::Block z;
      z[0] = sp.z_ref;
      for (int c = 0; c < alt.count(); ++c) CHECK(alt.value(c, z) <= 1e-9);
      const auto hor = build_horizontal_constraints(cam, gt, sp);
      for (int c = 0; c < hor.count(); ++c) CHECK(hor.value(c, sp.offset_ref) <= 1e-9);
    }
  }

  SECTION("infeasible expansion points are rejected") {
    CHECK_THROWS_AS(build_altitude_constraints(cam, gt, SurrogatePoint{200.0, {0, 0}}),
                    DomainError);
    CHECK_THROWS_AS(build_horizontal_constraints(cam, gt, SurrogatePoint{-5.0, {0, 0}}),
                    DomainError);
  }

  SECTION("nadir expansion kills the linear offset terms") {
    const SurrogatePoint sp{96.0, {0.0, 0.0}};
    const auto hor = build_horizontal_constraints(cam, gt, sp);
    const Eigen::Vector2d probe(12.0, -3.0);
    const double z4 = sp.z_ref * sp.z_ref * sp.z_ref * sp.z_ref;
    const double expected =
        (projection_rhs(sp.z_ref, probe.norm(), gt, cam) - z4) / hor.scale(1);
    CHECK_THAT(hor.value(1, probe), WithinRel(expected, 1e-12));
  }
}

TEST_CASE("surrogate sets are inner approximations of the neighbourhood") {
  const auto cam = test::survey_camera();
  const auto gt = origin_target();
  test::Rng rng(404);

  int accepted_alt = 0, accepted_hor = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto sp = random_feasible_surrogate(rng, cam, gt);

    const auto alt = build_altitude_constraints(cam, gt, sp);
    AltitudeConstraintSet::Block z;
    z[0] = rng.uniform(0.5 * sp.z_ref, 1.5 * sp.z_ref);
    bool ok = true;
    for (int c = 0; c < alt.count(); ++c) ok = ok && alt.value(c, z) <= 0.0;
    if (ok) {
      ++accepted_alt;
      CHECK(neighbourhood_contains(cam, {gt.xy + sp.offset_ref, z[0]}, gt).inside);
    }

    const auto hor = build_horizontal_constraints(cam, gt, sp);
    const double ang = rng.uniform(0.0, 2.0 * M_PI);
    const Eigen::Vector2d l =
        sp.offset_ref + rng.uniform(0.0, 40.0) * Eigen::Vector2d(std::cos(ang), std::sin(ang));
    ok = true;
    for (int c = 0; c < hor.count(); ++c) ok = ok && hor.value(c, l) <= 0.0;
    if (ok) {
      ++accepted_hor;
      CHECK(neighbourhood_contains(cam, {gt.xy + l, sp.z_ref}, gt).inside);
    }
  }
  // The sampler must actually exercise the accept branch.
  CHECK(accepted_alt > 500);
  CHECK(accepted_hor > 500);
}

TEST_CASE("constraint gradients match central finite differences") {
  const auto cam = test::survey_camera();
  const auto gt = origin_target();
  test::Rng rng(505);
  const double h = 1e-6;

  for (int i = 0; i < 500; ++i) {
    const auto sp = random_feasible_surrogate(rng, cam, gt);

    const auto alt = build_altitude_constraints(cam, gt, sp);
    AltitudeConstraintSet::Block z, zp, zm;
    z[0] = rng.uniform(0.85 * sp.z_ref, 1.15 * sp.z_ref);
    for (int c = 0; c < alt.count(); ++c) {
      zp[0] = z[0] + h;
      zm[0] = z[0] - h;
      const double fd = (alt.value(c, zp) - alt.value(c, zm)) / (2.0 * h);
      const double an = alt.gradient(c, z)[0];
      CHECK(std::abs(fd - an) <= 1e-4 * std::max(std::abs(an), 1e-4));
    }

    const auto hor = build_horizontal_constraints(cam, gt, sp);
    const double ang = rng.uniform(0.0, 2.0 * M_PI);
    Eigen::Vector2d l =
        sp.offset_ref + rng.uniform(0.5, 20.0) * Eigen::Vector2d(std::cos(ang), std::sin(ang));
    if (l.norm() < 0.5 || l.norm() > 0.9 * cam.cot_half_fov_w() * sp.z_ref) continue;
    for (int c = 0; c < hor.count(); ++c) {
      const Eigen::Vector2d an = hor.gradient(c, l);
      Eigen::Vector2d fd;
      for (int axis = 0; axis < 2; ++axis) {
        Eigen::Vector2d lp = l, lm = l;
        lp[axis] += h;
        lm[axis] -= h;
        fd[axis] = (hor.value(c, lp) - hor.value(c, lm)) / (2.0 * h);
      }
      CHECK((fd - an).norm() <= 1e-4 * std::max(an.norm(), 1e-4));
    }
  }
}

TEST_CASE("constraints are midpoint convex on the free block") {
  const auto cam = test::survey_camera();
  const auto gt = origin_target();
  test::Rng rng(606);

  for (int i = 0; i < 10000; ++i) {
    const auto sp = random_feasible_surrogate(rng, cam, gt);

    const auto alt = build_altitude_constraints(cam, gt, sp);
    AltitudeConstraintSet::Block a, b, mid;
    a[0] = rng.uniform(0.75 * sp.z_ref, 1.3 * sp.z_ref);
    b[0] = rng.uniform(0.75 * sp.z_ref, 1.3 * sp.z_ref);
    mid[0] = 0.5 * (a[0] + b[0]);
    for (int c = 0; c < alt.count(); ++c) {
      const double ga = alt.value(c, a), gb = alt.value(c, b);
      CHECK(alt.value(c, mid) <= 0.5 * (ga + gb) + 1e-9 * (1.0 + std::abs(ga) + std::abs(gb)));
    }

    const auto hor = build_horizontal_constraints(cam, gt, sp);
    auto draw_l = [&] {
      const double ang = rng.uniform(0.0, 2.0 * M_PI);
      return Eigen::Vector2d(sp.offset_ref +
                             rng.uniform(0.0, 0.25 * cam.cot_half_fov_w() * sp.z_ref) *
                                 Eigen::Vector2d(std::cos(ang), std::sin(ang)));
    };
    const Eigen::Vector2d la = draw_l(), lb = draw_l(), lmid = 0.5 * (la + lb);
    for (int c = 0; c < hor.count(); ++c) {
      const double ga = hor.value(c, la), gb = hor.value(c, lb);
      CHECK(hor.value(c, lmid) <= 0.5 * (ga + gb) + 1e-9 * (1.0 + std::abs(ga) + std::abs(gb)));
    }
  }
}
