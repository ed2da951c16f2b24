#pragma once

#include <cstdint>

namespace optour {

enum class OrderSolverChoice { kAuto, kExact, kHeuristic };

/// One bag of knobs shared by the chain solver, the waypoint optimizer, and
/// the planner. Defaults are tuned for survey-scale scenarios (tens of
/// targets, hundreds of meters).
struct SolverConfig {
  double obj_tol = 1e-6;   // relative objective improvement threshold
  double feas_tol = 1e-6;  // tolerance on constraint residuals

  int max_sca_iters = 30;   // surrogate rebuilds per block pass
  int max_bcd_iters = 20;   // altitude/horizontal alternation sweeps
  int max_outer_iters = 10; // waypoint/order alternations

  int max_newton_iters = 500;  // Newton budget per chain solve
  int max_stage_newton = 50;   // Newton budget per centering stage
  int stall_stages = 3;        // stagnation window for early convergence

  double smooth_eps_start = 1e-2;  // objective smoothing schedule, meters
  double smooth_eps_final = 1e-8;
  double barrier_t0 = 1.0;
  double barrier_mu = 10.0;

  int exact_order_cap = 13;  // largest instance handed to the exact order solver
  OrderSolverChoice order_solver = OrderSolverChoice::kAuto;

  bool bcd_z_first = true;     // altitude pass before horizontal pass
  bool interleave_sca = false; // one surrogate rebuild per pass instead of running to convergence

  std::uint64_t rng_seed = 1;
};

}  // namespace optour
