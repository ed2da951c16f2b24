#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>

#include "optour/route.hpp"
#include "test_helpers.hpp"

using namespace optour;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Eigen::Vector3d v3(double x, double y, double z) { return {x, y, z}; }

std::vector<Eigen::Vector3d> random_points(test::Rng& rng, int k, double span = 300.0) {
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < k; ++i) {
    pts.push_back(v3(rng.uniform(0, span), rng.uniform(0, span), rng.uniform(80, 120)));
  }
  return pts;
}

Tour brute_force(const Eigen::Vector3d& start, const Eigen::Vector3d& end,
                 const std::vector<Eigen::Vector3d>& pts) {
  std::vector<int> perm(pts.size());
  std::iota(perm.begin(), perm.end(), 0);
  Tour best;
  best.length_m = std::numeric_limits<double>::infinity();
  do {
    std::vector<Eigen::Vector3d> path;
    for (int i : perm) path.push_back(pts[i]);
    const double len = chain_length(start, end, path);
    if (len < best.length_m) {
      best.length_m = len;
      best.order = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double two_opt_best_delta(const Eigen::Vector3d& start, const Eigen::Vector3d& end,
                          const std::vector<Eigen::Vector3d>& pts, const std::vector<int>& order) {
  const int k = static_cast<int>(order.size());
  auto at = [&](int i) -> Eigen::Vector3d {
    if (i < 0) return start;
    if (i >= k) return end;
    return pts[order[i]];
  };
  double best = 0.0;
  for (int i = 0; i < k - 1; ++i) {
    for (int j = i + 1; j < k; ++j) {
      const double delta = (at(j) - at(i - 1)).norm() + (at(j + 1) - at(i)).norm() -
                           (at(i) - at(i - 1)).norm() - (at(j + 1) - at(j)).norm();
      best = std::min(best, delta);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("single waypoint") {
  const auto t = solve_order_exact(v3(0, 0, 0), v3(1, 0, 0), {v3(5, 5, 5)});
  REQUIRE(t.order == std::vector<int>{0});
  const auto h = solve_order_heuristic(v3(0, 0, 0), v3(1, 0, 0), {v3(5, 5, 5)});
  REQUIRE(h.order == std::vector<int>{0});
}

TEST_CASE("symmetric two-waypoint tie breaks lexicographically") {
  const std::vector<Eigen::Vector3d> pts{v3(100, 0, 100), v3(200, 0, 100)};
  const auto t = solve_order_exact(v3(0, 0, 0), v3(0, 0, 0), pts);
  CHECK(t.order == std::vector<int>{0, 1});
  CHECK_THAT(t.length_m, WithinRel(465.0281539872885, 1e-12));
}

TEST_CASE("exact solver matches brute force on K=7") {
  test::Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pts = random_points(rng, 7);
    const auto start = v3(rng.uniform(0, 300), rng.uniform(0, 300), 0);
    const auto end = v3(rng.uniform(0, 300), rng.uniform(0, 300), 0);
    const auto exact = solve_order_exact(start, end, pts);
    const auto brute = brute_force(start, end, pts);
    CHECK_THAT(exact.length_m, WithinAbs(brute.length_m, 1e-9));
    CHECK_THAT(exact.length_m,
               WithinRel(chain_length(start, end,
                                      [&] {
                                        std::vector<Eigen::Vector3d> p;
                                        for (int i : exact.order) p.push_back(pts[i]);
                                        return p;
                                      }()),
                         1e-12));
  }
}

TEST_CASE("exact solver rejects oversized instances") {
  test::Rng rng(5);
  const auto pts = random_points(rng, 14);
  CHECK_THROWS_AS(solve_order_exact(v3(0, 0, 0), v3(0, 0, 0), pts, 13), DomainError);
}

TEST_CASE("heuristic is optimal for up to three waypoints") {
  test::Rng rng(31);
  for (int k = 1; k <= 3; ++k) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto pts = random_points(rng, k);
      const auto start = v3(rng.uniform(0, 300), rng.uniform(0, 300), 0);
      const auto end = v3(rng.uniform(0, 300), rng.uniform(0, 300), 0);
      const auto heur = solve_order_heuristic(start, end, pts);
      const auto brute = brute_force(start, end, pts);
      CHECK_THAT(heur.length_m, WithinAbs(brute.length_m, 1e-9));
    }
  }
}

TEST_CASE("heuristic stays within 5% of exact on K=9") {
  test::Rng rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pts = random_points(rng, 9);
    const auto start = v3(rng.uniform(0, 300), rng.uniform(0, 300), 0);
    const auto end = v3(rng.uniform(0, 300), rng.uniform(0, 300), 0);
    const auto exact = solve_order_exact(start, end, pts);
    const auto heur = solve_order_heuristic(start, end, pts);
    CHECK(exact.length_m <= heur.length_m + 1e-9);
    CHECK(heur.length_m <= 1.05 * exact.length_m);
    CHECK(two_opt_best_delta(start, end, pts, heur.order) >= -1e-9);
  }
}

TEST_CASE("collinear waypoints sweep monotonically") {
  std::vector<Eigen::Vector3d> pts;
  for (int i = 1; i <= 6; ++i) pts.push_back(v3(10.0 * i, 0, 0));
  const std::vector<int> sweep{0, 1, 2, 3, 4, 5};
  const auto exact = solve_order_exact(v3(0, 0, 0), v3(0, 0, 0), pts);
  CHECK(exact.order == sweep);
  const auto heur = solve_order_heuristic(v3(0, 0, 0), v3(0, 0, 0), pts);
  CHECK(heur.order == sweep);
  const auto brute = brute_force(v3(0, 0, 0), v3(0, 0, 0), pts);
  CHECK_THAT(exact.length_m, WithinAbs(brute.length_m, 1e-9));
}

TEST_CASE("tour length is invariant under rigid motion") {
  test::Rng rng(91);
  const auto pts = random_points(rng, 8);
  const auto start = v3(10, 20, 0);
  const auto end = v3(250, 250, 0);

  const double angle = 1.1;
  Eigen::Matrix3d rot;
  rot << std::cos(angle), -std::sin(angle), 0, std::sin(angle), std::cos(angle), 0, 0, 0, 1;
  const Eigen::Vector3d shift(-43.0, 17.0, 5.0);

  auto moved = [&](const Eigen::Vector3d& p) { return Eigen::Vector3d(rot * p + shift); };
  std::vector<Eigen::Vector3d> pts2;
  for (const auto& p : pts) pts2.push_back(moved(p));

  const auto base = solve_order_exact(start, end, pts);
  const auto turned = solve_order_exact(moved(start), moved(end), pts2);
  CHECK_THAT(turned.length_m, WithinRel(base.length_m, 1e-9));

  const auto hbase = solve_order_heuristic(start, end, pts);
  const auto hturned = solve_order_heuristic(moved(start), moved(end), pts2);
  CHECK_THAT(hturned.length_m, WithinRel(hbase.length_m, 1e-9));
  CHECK(base.length_m <= hbase.length_m + 1e-9);
}
