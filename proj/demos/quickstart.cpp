// Library walkthrough: generate a scenario, run the three planning schemes
// chained into each other, and render the best result.

#include <cstdio>

#include "optour/plot.hpp"
#include "optour/scenario_io.hpp"

int main() {
  optour::GenParams params;
  params.seed = 7;
  params.k = 8;
  const optour::Scenario scn = optour::generate_scenario(params);

  const auto vp = optour::plan_vp_2d(scn, 100.0);
  const auto op2d =
      optour::plan_op_2d(scn, 100.0, {}, optour::InitialPlan{vp.tour, vp.waypoints});
  const auto op3d = optour::plan(scn, {}, optour::InitialPlan{op2d.tour, op2d.waypoints});

  std::printf("targets: %zu\n", scn.targets.size());
  std::printf("vp2d  distance: %9.2f m\n", vp.distance_m);
  std::printf("op2d  distance: %9.2f m\n", op2d.distance_m);
  std::printf("op3d  distance: %9.2f m  (max violation %.2g)\n", op3d.distance_m,
              op3d.feasibility.max_violation);

  optour::save_scenario(scn, "quickstart_scenario.json");
  optour::save_result(op3d, "quickstart_result.json");
  optour::write_plot_svg(scn, op3d, "quickstart_plot.svg");
  std::printf("wrote quickstart_scenario.json, quickstart_result.json, "
              "quickstart_plot.svg, quickstart_plot.csv\n");
  return 0;
}
