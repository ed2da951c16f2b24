#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "optour/plot.hpp"
#include "optour/scenario_io.hpp"
#include "test_helpers.hpp"

using namespace optour;
using Catch::Matchers::WithinAbs;

namespace {

PlanResult small_plan(const Scenario& scn) { return plan(scn, SolverConfig{}); }

Scenario small_scenario() {
  GenParams p;
  p.seed = 3;
  p.k = 4;
  return generate_scenario(p);
}

}  // namespace

TEST_CASE("scenario documents round-trip losslessly") {
  const auto scn = small_scenario();
  const auto j = scenario_to_json(scn);
  const auto parsed = scenario_from_json(nlohmann::json::parse(j.dump()));
  CHECK(scenario_to_json(parsed).dump() == j.dump());
  REQUIRE(parsed.targets.size() == scn.targets.size());
  for (std::size_t k = 0; k < scn.targets.size(); ++k) {
    CHECK(std::memcmp(&parsed.targets[k].min_resolution, &scn.targets[k].min_resolution,
                      sizeof(double)) == 0);
    CHECK(parsed.targets[k].xy == scn.targets[k].xy);
  }
  CHECK(std::memcmp(&parsed.camera.focal_m, &scn.camera.focal_m, sizeof(double)) == 0);
}

TEST_CASE("result documents round-trip losslessly") {
  const auto scn = small_scenario();
  const auto res = small_plan(scn);
  const auto j = result_to_json(res);
  const auto parsed = result_from_json(nlohmann::json::parse(j.dump()));
  CHECK(result_to_json(parsed).dump() == j.dump());
  CHECK(parsed.tour.order == res.tour.order);
  CHECK(std::memcmp(&parsed.distance_m, &res.distance_m, sizeof(double)) == 0);
  REQUIRE(parsed.trace.size() == res.trace.size());
  for (std::size_t i = 0; i < res.trace.size(); ++i) {
    CHECK(parsed.trace[i].block == res.trace[i].block);
    CHECK(std::memcmp(&parsed.trace[i].objective_m, &res.trace[i].objective_m, sizeof(double)) ==
          0);
  }
  // The stored distance stays consistent with the stored waypoints.
  CHECK_THAT(ordered_chain_length(scn, parsed.waypoints, parsed.tour.order),
             WithinAbs(parsed.distance_m, 1e-9));
}

TEST_CASE("strict parsing") {
  auto j = scenario_to_json(small_scenario());

  SECTION("unknown fields are rejected") {
    j["comment"] = "hello";
    CHECK_THROWS_AS(scenario_from_json(j), IoError);
  }
  SECTION("missing fields are rejected") {
    j.erase("camera");
    CHECK_THROWS_AS(scenario_from_json(j), IoError);
  }
  SECTION("wrong schema version is rejected") {
    j["schema_version"] = 99;
    CHECK_THROWS_AS(scenario_from_json(j), IoError);
  }
  SECTION("invalid domain values surface as document errors") {
    j["targets"][0]["r_m"] = -3.0;
    CHECK_THROWS_AS(scenario_from_json(j), IoError);
  }
  SECTION("empty target lists are rejected") {
    j["targets"] = nlohmann::json::array();
    CHECK_THROWS_AS(scenario_from_json(j), IoError);
  }
  SECTION("non-numeric coordinates are rejected") {
    j["start"]["x_m"] = "zero";
    CHECK_THROWS_AS(scenario_from_json(j), IoError);
  }
}

TEST_CASE("configuration documents") {
  CHECK(config_from_json(nlohmann::json::object()).obj_tol == SolverConfig{}.obj_tol);

  nlohmann::json j{{"obj_tol", 1e-8}, {"max_bcd_iters", 5}, {"order_solver", "heuristic"},
                   {"bcd_z_first", false}};
  const auto cfg = config_from_json(j);
  CHECK(cfg.obj_tol == 1e-8);
  CHECK(cfg.max_bcd_iters == 5);
  CHECK(cfg.order_solver == OrderSolverChoice::kHeuristic);
  CHECK_FALSE(cfg.bcd_z_first);

  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"objective_tol", 1.0}}), IoError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"order_solver", "magic"}}), IoError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"obj_tol", -1.0}}), IoError);
}

TEST_CASE("scenario generation") {
  SECTION("deterministic given the seed") {
    GenParams p;
    p.seed = 11;
    p.k = 12;
    CHECK(scenario_to_json(generate_scenario(p)).dump() ==
          scenario_to_json(generate_scenario(p)).dump());
    p.seed = 12;
    CHECK(scenario_to_json(generate_scenario(p)).dump() !=
          scenario_to_json(generate_scenario(GenParams{11, 12, 300.0, 20.0, 0.01, 0.4})).dump());
  }

  SECTION("defaults match the survey regime and are nadir-feasible") {
    const auto scn = generate_scenario(GenParams{});
    CHECK(scn.targets.size() == 30);
    CHECK(scn.start.position() == Eigen::Vector3d::Zero());
    CHECK(scn.end.position() == Eigen::Vector3d::Zero());
    for (const auto& gt : scn.targets) {
      CHECK(gt.xy.x() >= 0.0);
      CHECK(gt.xy.x() <= 300.0);
      CHECK(gt.xy.y() >= 0.0);
      CHECK(gt.xy.y() <= 300.0);
      CHECK(gt.radius_m == 20.0);
      CHECK(gt.min_resolution >= 0.01);
      CHECK(gt.min_resolution <= 0.4);
      CHECK_FALSE(nadir_altitude_interval(scn.camera, gt).empty());
    }
  }

  SECTION("degenerate area puts the single target at the origin") {
    const auto scn = generate_scenario(GenParams{5, 1, 0.0, 20.0, 0.1, 0.1});
    REQUIRE(scn.targets.size() == 1);
    CHECK(scn.targets[0].xy == Eigen::Vector2d::Zero());
  }

  SECTION("impossible parameter regimes are rejected with diagnostics") {
    CHECK_THROWS_AS(generate_scenario(GenParams{1, 5, 300.0, 20.0, 0.1, 0.6}),
                    InfeasibleScenarioError);
    CHECK_THROWS_AS(generate_scenario(GenParams{1, 0, 300.0, 20.0, 0.1, 0.4}), DomainError);
    CHECK_THROWS_AS(generate_scenario(GenParams{1, 5, 300.0, 20.0, 0.5, 0.4}), DomainError);
  }
}

TEST_CASE("plot writer") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "optour_plot_test";
  fs::create_directories(dir);
  const auto scn = small_scenario();
  const auto res = small_plan(scn);

  SECTION("emits an SVG and a CSV twin") {
    const auto svg_path = (dir / "out.svg").string();
    write_plot_svg(scn, res, svg_path);
    std::ifstream svg(svg_path);
    REQUIRE(svg.good());
    std::string head;
    std::getline(svg, head);
    CHECK(head.rfind("<svg", 0) == 0);

    std::ifstream csv(dir / "out.csv");
    REQUIRE(csv.good());
    std::string header;
    std::getline(csv, header);
    CHECK(header == "iter,block,objective_m,max_violation");
    int rows = 0;
    for (std::string line; std::getline(csv, line);) ++rows;
    CHECK(rows == static_cast<int>(res.trace.size()));
  }

  SECTION("a single-entry trace still renders") {
    const auto vp = plan_vp_2d(scn, 100.0);
    CHECK(vp.trace.size() == 1);
    CHECK_NOTHROW(write_plot_svg(scn, vp, (dir / "vp.svg").string()));
  }

  SECTION("tampered results are refused") {
    auto bad = res;
    bad.distance_m += 10.0;
    CHECK_THROWS_AS(write_plot_svg(scn, bad, (dir / "bad.svg").string()), InconsistencyError);
    auto short_result = res;
    short_result.waypoints.pop_back();
    CHECK_THROWS_AS(write_plot_svg(scn, short_result, (dir / "bad2.svg").string()),
                    InconsistencyError);
  }

  fs::remove_all(dir);
}

TEST_CASE("awkward doubles survive the files") {
  auto scn = small_scenario();
  scn.targets[0].xy.x() = 0.1 + 0.2;           // 0.30000000000000004
  scn.targets[0].min_resolution = M_PI / 10.0;  // many digits
  const auto parsed = scenario_from_json(nlohmann::json::parse(scenario_to_json(scn).dump()));
  CHECK(std::memcmp(&parsed.targets[0].xy.x(), &scn.targets[0].xy.x(), sizeof(double)) == 0);
  CHECK(std::memcmp(&parsed.targets[0].min_resolution, &scn.targets[0].min_resolution,
                    sizeof(double)) == 0);
}
