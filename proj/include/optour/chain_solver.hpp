#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "optour/config.hpp"
#include "optour/errors.hpp"

// Minimizes the length of a chain of 3D segments through one free block per
// waypoint (a scalar altitude or a 2D horizontal offset), between two fixed
// endpoints, subject to per-block smooth convex inequalities g_i(x_b) <= 0.
//
// Method: the sum of segment norms is smoothed as sqrt(|v|^2 + eps^2) and
// minimized with a feasible-start log barrier; eps and the barrier weight
// follow a joint continuation schedule. Iterates stay strictly feasible, so
// returned solutions satisfy every constraint as stated, and the reported
// objective is always the unsmoothed chain length.

namespace optour {

/// Total length of the polyline start -> pts[0] -> ... -> pts.back() -> end.
inline double chain_length(const Eigen::Vector3d& start, const Eigen::Vector3d& end,
                           const std::vector<Eigen::Vector3d>& pts) {
  double total = 0.0;
  Eigen::Vector3d prev = start;
  for (const auto& p : pts) {
    total += (p - prev).norm();
    prev = p;
  }
  return total + (end - prev).norm();
}

enum class SolveStatus { kConverged, kIterationLimit, kNumericalFailure };

/// A fixed-order chain with one free block per waypoint. `bases` hold the
/// frozen coordinates of each waypoint with the free components zeroed:
/// a scalar block is an altitude (lifted along z), a 2D block a horizontal
/// offset (lifted along x, y). `constraints` may be empty for unconstrained
/// problems, otherwise one set per block.
template <class CS>
struct ChainProblem {
  Eigen::Vector3d start_point{0, 0, 0};
  Eigen::Vector3d end_point{0, 0, 0};
  std::vector<Eigen::Vector3d> bases;
  std::vector<typename CS::Block> start;
  std::vector<CS> constraints;
};

template <class CS>
struct SolveOutcome {
  std::vector<typename CS::Block> solution;
  double objective_m = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::kConverged;
  double max_violation = 0.0;  // largest positive normalized residual at the solution
};

namespace detail {

template <class CS>
class ChainSolver {
  static constexpr int kD = CS::kDim;
  using Block = typename CS::Block;
  using Lift = Eigen::Matrix<double, 3, kD>;

 public:
  ChainSolver(const ChainProblem<CS>& pb, const SolverConfig& cfg) : pb_(pb), cfg_(cfg) {
    lift_.setZero();
    if constexpr (kD == 1) {
      lift_(2, 0) = 1.0;
    } else {
      lift_(0, 0) = 1.0;
      lift_(1, 1) = 1.0;
    }
  }

  SolveOutcome<CS> run() {
    const int blocks = static_cast<int>(pb_.bases.size());
    const bool constrained = !pb_.constraints.empty();
    SolveOutcome<CS> out;
    out.solution = pb_.start;
    out.objective_m = objective(pb_.start);
    if (blocks == 0) return out;

    frozen_.assign(blocks, false);
    std::vector<Block> x = pb_.start;
    if (constrained) {
      for (int b = 0; b < blocks; ++b) {
        const double margin = worst_residual(b, x[b]);
        if (margin > cfg_.feas_tol) {
          throw SolverError("solve_chain: start point violates the constraint set");
        }
        if (margin > -1e-9) {
          if (!phase1(b, x[b])) frozen_[b] = true;
        }
      }
    }

    offsets_.assign(blocks, -1);
    int n = 0;
    for (int b = 0; b < blocks; ++b) {
      if (!frozen_[b]) {
        offsets_[b] = n;
        n += kD;
      }
    }
    if (n == 0) return out;

    const int m = constrained ? count_free_constraints() : 0;
    const double gap_target = cfg_.obj_tol * std::max(1.0, out.objective_m);

    std::vector<Block> best = x;
    double best_obj = objective(x);
    double t = cfg_.barrier_t0;
    double eps = std::max(cfg_.smooth_eps_start, cfg_.smooth_eps_final);
    int newton_total = 0;
    double prev_stage_obj = best_obj;
    int stalled_stages = 0;
    out.status = SolveStatus::kIterationLimit;

    while (true) {
      if (!center(x, t, eps, newton_total)) {
        out.status = SolveStatus::kNumericalFailure;
        break;
      }
      const double cur = objective(x);
      if (cur < best_obj) {
        best_obj = cur;
        best = x;
      }
      const bool eps_done = eps <= cfg_.smooth_eps_final * (1.0 + 1e-12);
      if (eps_done && (m == 0 || m / t <= gap_target)) {
        out.status = SolveStatus::kConverged;
        break;
      }
      if (std::abs(prev_stage_obj - cur) < cfg_.obj_tol * std::max(1.0, std::abs(cur))) {
        if (++stalled_stages >= cfg_.stall_stages && eps_done) {
          out.status = SolveStatus::kConverged;
          break;
        }
      } else {
        stalled_stages = 0;
      }
      prev_stage_obj = cur;
      if (newton_total >= cfg_.max_newton_iters) {
        out.status = SolveStatus::kIterationLimit;
        break;
      }
      t *= cfg_.barrier_mu;
      eps = std::max(eps * 0.1, cfg_.smooth_eps_final);
    }

    out.iterations = newton_total;
    if (best_obj <= out.objective_m) {
      out.solution = best;
      out.objective_m = best_obj;
    }
    if (constrained) {
      double viol = 0.0;
      for (int b = 0; b < blocks; ++b) {
        viol = std::max(viol, worst_residual(b, out.solution[b]));
      }
      out.max_violation = std::max(0.0, viol);
    }
    return out;
  }

 private:
  double worst_residual(int b, const Block& xb) const {
    const CS& cs = pb_.constraints[b];
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < cs.count(); ++i) worst = std::max(worst, cs.value(i, xb));
    return worst;
  }

  int count_free_constraints() const {
    int m = 0;
    for (std::size_t b = 0; b < pb_.constraints.size(); ++b) {
      if (!frozen_[b]) m += pb_.constraints[b].count();
    }
    return m;
  }

  Eigen::Vector3d point(int b, const Block& xb) const { return pb_.bases[b] + lift_ * xb; }

  double objective(const std::vector<Block>& x) const {
    double total = 0.0;
    Eigen::Vector3d prev = pb_.start_point;
    for (std::size_t b = 0; b < x.size(); ++b) {
      const Eigen::Vector3d p = point(static_cast<int>(b), x[b]);
      total += (p - prev).norm();
      prev = p;
    }
    return total + (pb_.end_point - prev).norm();
  }

  // t * smoothed objective + log barrier; +inf outside the strict interior.
  double merit(const std::vector<Block>& x, double t, double eps) const {
    double f = 0.0;
    Eigen::Vector3d prev = pb_.start_point;
    for (std::size_t b = 0; b < x.size(); ++b) {
      const Eigen::Vector3d p = point(static_cast<int>(b), x[b]);
      f += std::sqrt((p - prev).squaredNorm() + eps * eps);
      prev = p;
    }
    f += std::sqrt((pb_.end_point - prev).squaredNorm() + eps * eps);

    double barrier = 0.0;
    if (!pb_.constraints.empty()) {
      for (std::size_t b = 0; b < x.size(); ++b) {
        if (frozen_[b]) continue;
        const CS& cs = pb_.constraints[b];
        for (int i = 0; i < cs.count(); ++i) {
          const double g = cs.value(i, x[b]);
          if (!(g < 0.0)) return std::numeric_limits<double>::infinity();
          barrier -= std::log(-g);
        }
      }
    }
    const double value = t * f + barrier;
    return std::isfinite(value) ? value : std::numeric_limits<double>::infinity();
  }

  void assemble(const std::vector<Block>& x, double t, double eps, Eigen::VectorXd& grad,
                Eigen::MatrixXd& hess) const {
    const int blocks = static_cast<int>(x.size());
    grad.setZero();
    hess.setZero();

    // Smoothed chain objective: every leg couples two consecutive entities.
    std::vector<Eigen::Vector3d> pos(blocks);
    for (int b = 0; b < blocks; ++b) pos[b] = point(b, x[b]);
    for (int leg = 0; leg <= blocks; ++leg) {
      const Eigen::Vector3d from = (leg == 0) ? pb_.start_point : pos[leg - 1];
      const Eigen::Vector3d to = (leg == blocks) ? pb_.end_point : pos[leg];
      const Eigen::Vector3d v = to - from;
      const double s = std::sqrt(v.squaredNorm() + eps * eps);
      const Eigen::Vector3d dir = v / s;
      const Eigen::Matrix3d curv =
          (Eigen::Matrix3d::Identity() - dir * dir.transpose()) / s;
      const int bf = leg - 1, bt = leg;
      const bool from_free = bf >= 0 && !frozen_[bf];
      const bool to_free = bt < blocks && !frozen_[bt];
      if (from_free) {
        grad.template segment<kD>(offsets_[bf]) -= t * lift_.transpose() * dir;
        hess.template block<kD, kD>(offsets_[bf], offsets_[bf]) +=
            t * lift_.transpose() * curv * lift_;
      }
      if (to_free) {
        grad.template segment<kD>(offsets_[bt]) += t * lift_.transpose() * dir;
        hess.template block<kD, kD>(offsets_[bt], offsets_[bt]) +=
            t * lift_.transpose() * curv * lift_;
      }
      if (from_free && to_free) {
        const Eigen::Matrix<double, kD, kD> cross = lift_.transpose() * curv * lift_;
        hess.template block<kD, kD>(offsets_[bf], offsets_[bt]) -= t * cross;
        hess.template block<kD, kD>(offsets_[bt], offsets_[bf]) -= t * cross.transpose();
      }
    }

    if (pb_.constraints.empty()) return;
    for (int b = 0; b < blocks; ++b) {
      if (frozen_[b]) continue;
      const CS& cs = pb_.constraints[b];
      const int o = offsets_[b];
      for (int i = 0; i < cs.count(); ++i) {
        const double g = cs.value(i, x[b]);
        const auto gr = cs.gradient(i, x[b]);
        const auto he = cs.hessian(i, x[b]);
        grad.template segment<kD>(o) += gr / (-g);
        hess.template block<kD, kD>(o, o) += gr * gr.transpose() / (g * g) + he / (-g);
      }
    }
  }

  // One centering stage; returns false on an unrecoverable numerical problem.
  bool center(std::vector<Block>& x, double t, double eps, int& newton_total) {
    const int blocks = static_cast<int>(x.size());
    int n = 0;
    for (int b = 0; b < blocks; ++b) {
      if (!frozen_[b]) n += kD;
    }
    Eigen::VectorXd grad(n);
    Eigen::MatrixXd hess(n, n);

    for (int it = 0; it < cfg_.max_stage_newton && newton_total < cfg_.max_newton_iters; ++it) {
      assemble(x, t, eps, grad, hess);
      if (!grad.allFinite() || !hess.allFinite()) return false;

      Eigen::VectorXd step;
      double damping = 0.0;
      while (true) {
        Eigen::MatrixXd h = hess;
        if (damping > 0.0) h.diagonal().array() += damping;
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
        step = ldlt.solve(-grad);
        if (ldlt.info() == Eigen::Success && step.allFinite() && grad.dot(step) < 0.0) break;
        damping = (damping == 0.0) ? 1e-8 * (1.0 + hess.diagonal().cwiseAbs().maxCoeff())
                                   : damping * 10.0;
        if (damping > 1e12) return false;
      }

      const double decrement = -grad.dot(step);
      if (decrement * 0.5 <= 1e-9 * (1.0 + t)) return true;  // centered

      const double base = merit(x, t, eps);
      double alpha = 1.0;
      bool moved = false;
      std::vector<Block> trial = x;
      while (alpha >= 1e-14) {
        for (int b = 0; b < blocks; ++b) {
          if (!frozen_[b]) {
            trial[b] = x[b] + alpha * step.template segment<kD>(offsets_[b]);
          }
        }
        if (merit(trial, t, eps) <= base - 1e-4 * alpha * decrement) {
          x = trial;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      ++newton_total;
      if (!moved) return true;  // flat within line-search resolution
    }
    return true;
  }

  // Finds a strictly interior point for one block by minimizing the worst
  // residual; returns false (leaving xb untouched) when the feasible set has
  // no usable interior near the start.
  bool phase1(int b, Block& xb) {
    const CS& cs = pb_.constraints[b];
    const int m = cs.count();
    using Vec = Eigen::Matrix<double, kD + 1, 1>;
    using Mat = Eigen::Matrix<double, kD + 1, kD + 1>;

    Block x = xb;
    double s = std::max(0.0, worst_residual(b, x)) + 1.0;
    double best_s = worst_residual(b, x);
    Block best_x = x;

    auto merit1 = [&](const Block& xc, double sc, double t) {
      double v = t * sc;
      for (int i = 0; i < m; ++i) {
        const double slack = sc - cs.value(i, xc);
        if (!(slack > 0.0)) return std::numeric_limits<double>::infinity();
        v -= std::log(slack);
      }
      return v;
    };

    for (double t = 1.0; t <= 1e10; t *= 10.0) {
      for (int it = 0; it < 40; ++it) {
        Vec grad = Vec::Zero();
        Mat hess = Mat::Zero();
        grad[kD] = t;
        for (int i = 0; i < m; ++i) {
          const double slack = s - cs.value(i, x);
          const auto gi = cs.gradient(i, x);
          const auto hi = cs.hessian(i, x);
          Vec e;
          e.template head<kD>() = gi;
          e[kD] = -1.0;
          grad += e / slack;
          hess += e * e.transpose() / (slack * slack);
          hess.template topLeftCorner<kD, kD>() += hi / slack;
        }
        Mat h = hess;
        h.diagonal().array() += 1e-12;
        const Vec step = Eigen::LDLT<Mat>(h).solve(-grad);
        if (!step.allFinite()) break;
        const double decrement = -grad.dot(step);
        if (decrement * 0.5 <= 1e-12 * (1.0 + t)) break;

        const double base = merit1(x, s, t);
        double alpha = 1.0;
        while (alpha >= 1e-14) {
          const Block xt = x + alpha * step.template head<kD>();
          const double st = s + alpha * step[kD];
          if (merit1(xt, st, t) <= base - 1e-4 * alpha * decrement) {
            x = xt;
            s = st;
            break;
          }
          alpha *= 0.5;
        }
        const double actual = worst_residual(b, x);
        if (actual < best_s) {
          best_s = actual;
          best_x = x;
        }
        if (actual < -1e-7) {
          xb = x;
          return true;
        }
      }
    }
    if (best_s < 0.0) {
      xb = best_x;
      return true;
    }
    return false;
  }

  const ChainProblem<CS>& pb_;
  const SolverConfig& cfg_;
  Lift lift_;
  std::vector<bool> frozen_;
  std::vector<int> offsets_;
};

}  // namespace detail

/// Solves the chain problem to within cfg.obj_tol (relative) of its optimum.
/// The returned point is feasible and never worse than the start point; see
/// SolveStatus for the certificate that ended the run.
template <class CS>
SolveOutcome<CS> solve_chain(const ChainProblem<CS>& pb, const SolverConfig& cfg) {
  if (!pb.constraints.empty() && pb.constraints.size() != pb.bases.size()) {
    throw SolverError("solve_chain: constraint sets and blocks disagree in count");
  }
  if (pb.start.size() != pb.bases.size()) {
    throw SolverError("solve_chain: start values and blocks disagree in count");
  }
  return detail::ChainSolver<CS>(pb, cfg).run();
}

}  // namespace optour
