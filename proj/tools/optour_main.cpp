#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "optour/plot.hpp"
#include "optour/scenario_io.hpp"

// Command-line front end. Exit codes: 0 success, 1 infeasible scenario,
// 2 I/O or document problem, 3 solver failure.

namespace {

using namespace optour;

int run_iterations(const PlanResult& res) {
  return res.trace.empty() ? 0 : static_cast<int>(res.trace.size()) - 1;
}

PlanResult run_scheme(const Scenario& scn, Scheme scheme, double altitude,
                      const SolverConfig& cfg, const std::optional<InitialPlan>& warm) {
  switch (scheme) {
    case Scheme::kVp2d: return plan_vp_2d(scn, altitude, cfg);
    case Scheme::kOp2d: return plan_op_2d(scn, altitude, cfg, warm);
    default: return plan(scn, cfg, warm);
  }
}

void cmd_plan(const std::string& scenario_path, const std::string& scheme_str, double altitude,
              const std::string& config_path, const std::string& out_path) {
  const Scenario scn = load_scenario(scenario_path);
  const SolverConfig cfg =
      config_path.empty() ? SolverConfig{} : config_from_json(load_json(config_path));
  const PlanResult res = run_scheme(scn, scheme_from_name(scheme_str), altitude, cfg, {});
  save_result(res, out_path);
  std::printf("%s: distance %.3f m over %zu targets, %d iterations, max violation %.3g\n",
              scheme_name(res.scheme), res.distance_m, scn.targets.size(), run_iterations(res),
              res.feasibility.max_violation);
}

int cmd_eval(const std::string& scenario_path, const std::string& result_path, double feas_tol) {
  const Scenario scn = load_scenario(scenario_path);
  const PlanResult res = load_result(result_path);
  const FeasibilityReport rep = evaluate(scn, res);
  std::printf("target  resolution  projection_m  focal_m  resolution(exact)  projection_m(exact)\n");
  for (std::size_t k = 0; k < rep.per_target.size(); ++k) {
    const auto& m = rep.per_target[k];
    std::printf("%6zu  %10.4g  %12.4g  %7.4g  %17s  %19s\n", k + 1, m.resolution, m.projection,
                m.focal,
                m.resolution_exact ? std::to_string(*m.resolution_exact).c_str() : "n/a",
                m.projection_exact ? std::to_string(*m.projection_exact).c_str() : "n/a");
  }
  std::printf("stored distance   %.6f m\n", res.distance_m);
  std::printf("recomputed        %.6f m\n", rep.distance_m);
  std::printf("max violation     %.6g\n", rep.max_violation);
  if (rep.max_violation > feas_tol) {
    std::fprintf(stderr, "error: result violates the constraints beyond %.3g\n", feas_tol);
    return 1;
  }
  return 0;
}

void cmd_bench(int seeds, const GenParams& base, double altitude,
               const std::vector<std::string>& schemes, const std::string& out_csv,
               const SolverConfig& cfg, bool timing) {
  std::ofstream out(out_csv);
  if (!out) throw IoError("cannot write '" + out_csv + "'");
  out << "seed,scheme,distance_m,iterations,wall_ms\n";
  char row[160];
  for (int seed = 1; seed <= seeds; ++seed) {
    GenParams p = base;
    p.seed = static_cast<std::uint64_t>(seed);
    const Scenario scn = generate_scenario(p);
    std::optional<PlanResult> vp, op2;
    for (const auto& name : schemes) {
      const Scheme scheme = scheme_from_name(name);
      std::optional<InitialPlan> warm;
      if (scheme == Scheme::kOp2d && vp) warm = InitialPlan{vp->tour, vp->waypoints};
      if (scheme == Scheme::kOp3d) {
        if (op2) {
          warm = InitialPlan{op2->tour, op2->waypoints};
        } else if (vp) {
          warm = InitialPlan{vp->tour, vp->waypoints};
        }
      }
      const auto t0 = std::chrono::steady_clock::now();
      const PlanResult res = run_scheme(scn, scheme, altitude, cfg, warm);
      const auto t1 = std::chrono::steady_clock::now();
      const double wall_ms =
          timing ? std::chrono::duration<double, std::milli>(t1 - t0).count() : 0.0;
      std::snprintf(row, sizeof(row), "%d,%s,%.12g,%d,%.3f\n", seed, scheme_name(res.scheme),
                    res.distance_m, run_iterations(res), wall_ms);
      out << row;
      if (scheme == Scheme::kVp2d) vp = res;
      if (scheme == Scheme::kOp2d) op2 = res;
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV photo-tour planning under an oblique camera model"};
  app.require_subcommand(1);

  GenParams gp;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "Generate a seeded random scenario");
  gen->add_option("--seed", gp.seed, "RNG seed")->capture_default_str();
  gen->add_option("--k", gp.k, "number of targets")->capture_default_str();
  gen->add_option("--area", gp.area_m, "square side length [m]")->capture_default_str();
  gen->add_option("--radius", gp.radius_m, "target radius [m]")->capture_default_str();
  gen->add_option("--imin-lo", gp.imin_lo, "resolution requirement lower bound")
      ->capture_default_str();
  gen->add_option("--imin-hi", gp.imin_hi, "resolution requirement upper bound")
      ->capture_default_str();
  gen->add_option("--out", gen_out, "output scenario file")->required();

  std::string plan_scenario, plan_scheme = "op3d", plan_config, plan_out;
  double plan_altitude = 100.0;
  auto* planc = app.add_subcommand("plan", "Plan a tour for a scenario");
  planc->add_option("--scenario", plan_scenario, "scenario file")->required();
  planc->add_option("--scheme", plan_scheme, "op3d, op2d, or vp2d")->capture_default_str();
  planc->add_option("--altitude", plan_altitude, "fixed altitude for op2d/vp2d [m]")
      ->capture_default_str();
  planc->add_option("--config", plan_config, "solver configuration file");
  planc->add_option("--out", plan_out, "output result file")->required();

  std::string eval_scenario, eval_result;
  double eval_tol = 1e-6;
  auto* evalc = app.add_subcommand("eval", "Re-check a result against its scenario");
  evalc->add_option("--scenario", eval_scenario, "scenario file")->required();
  evalc->add_option("--result", eval_result, "result file")->required();
  evalc->add_option("--feas-tol", eval_tol, "acceptable violation")->capture_default_str();

  int bench_seeds = 5;
  GenParams bench_gp;
  double bench_altitude = 100.0;
  std::vector<std::string> bench_schemes{"vp2d", "op2d", "op3d"};
  std::string bench_csv, bench_config;
  bool bench_timing = false;
  auto* bench = app.add_subcommand("bench", "Run seeded scenarios across schemes");
  bench->add_option("--seeds", bench_seeds, "number of seeds (1..N)")->capture_default_str();
  bench->add_option("--k", bench_gp.k, "targets per scenario")->capture_default_str();
  bench->add_option("--area", bench_gp.area_m, "square side length [m]")->capture_default_str();
  bench->add_option("--radius", bench_gp.radius_m, "target radius [m]")->capture_default_str();
  bench->add_option("--imin-lo", bench_gp.imin_lo, "resolution lower bound")
      ->capture_default_str();
  bench->add_option("--imin-hi", bench_gp.imin_hi, "resolution upper bound")
      ->capture_default_str();
  bench->add_option("--altitude", bench_altitude, "fixed altitude for op2d/vp2d [m]")
      ->capture_default_str();
  bench->add_option("--schemes", bench_schemes, "schemes to run, in order")
      ->delimiter(',')
      ->capture_default_str();
  bench->add_option("--out-csv", bench_csv, "output CSV file")->required();
  bench->add_option("--config", bench_config, "solver configuration file");
  bench->add_flag("--timing", bench_timing,
                  "record wall-clock times (off by default so reruns are byte-identical)");

  std::string plot_scenario, plot_result, plot_out;
  auto* plotc = app.add_subcommand("plot", "Render a result as SVG plus a trace CSV");
  plotc->add_option("--scenario", plot_scenario, "scenario file")->required();
  plotc->add_option("--result", plot_result, "result file")->required();
  plotc->add_option("--out", plot_out, "output SVG file")->required();

  int eval_code = 0;
  gen->callback([&] { save_scenario(generate_scenario(gp), gen_out); });
  planc->callback([&] { cmd_plan(plan_scenario, plan_scheme, plan_altitude, plan_config, plan_out); });
  evalc->callback([&] { eval_code = cmd_eval(eval_scenario, eval_result, eval_tol); });
  bench->callback([&] {
    const SolverConfig cfg =
        bench_config.empty() ? SolverConfig{} : config_from_json(load_json(bench_config));
    cmd_bench(bench_seeds, bench_gp, bench_altitude, bench_schemes, bench_csv, cfg, bench_timing);
  });
  plotc->callback([&] {
    write_plot_svg(load_scenario(plot_scenario), load_result(plot_result), plot_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const InfeasibleScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InconsistencyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return eval_code;
}
