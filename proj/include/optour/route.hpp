#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "optour/chain_solver.hpp"
#include "optour/errors.hpp"

// Visiting-order optimization: an open-path tour from a fixed start through
// every waypoint to a fixed end. Exact dynamic programming over subsets for
// small instances, nearest-neighbour construction plus 2-opt otherwise.

namespace optour {

/// A visiting order over waypoints 0..K-1 and the resulting chain length.
struct Tour {
  std::vector<int> order;
  double length_m = 0.0;
};

namespace detail {

inline std::vector<Eigen::Vector3d> permuted(const std::vector<Eigen::Vector3d>& pts,
                                             const std::vector<int>& order) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(order.size());
  for (int i : order) out.push_back(pts[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace detail

/// Globally optimal order by dynamic programming over subsets, O(2^K K^2).
/// Ties resolve to the lexicographically smallest order. Instances larger
/// than exact_cap are rejected; use the heuristic there.
inline Tour solve_order_exact(const Eigen::Vector3d& start, const Eigen::Vector3d& end,
                              const std::vector<Eigen::Vector3d>& pts, int exact_cap = 13) {
  const int k = static_cast<int>(pts.size());
  if (k < 1) throw DomainError("solve_order_exact: need at least one waypoint");
  if (k > exact_cap) {
    throw DomainError("solve_order_exact: instance exceeds the exact-solver cap");
  }

  Eigen::MatrixXd c(k, k);
  std::vector<double> from_start(k), to_end(k);
  for (int i = 0; i < k; ++i) {
    from_start[i] = (pts[i] - start).norm();
    to_end[i] = (end - pts[i]).norm();
    for (int j = 0; j < k; ++j) c(i, j) = (pts[j] - pts[i]).norm();
  }

  // cost_to_end[i][mask]: cheapest path that starts at waypoint i, visits
  // exactly the waypoints in mask (i excluded), and finishes at the end point.
  const std::uint32_t full = (1u << k) - 1u;
  std::vector<std::vector<double>> cost_to_end(
      static_cast<std::size_t>(k), std::vector<double>(full + 1u, 0.0));
  for (int i = 0; i < k; ++i) cost_to_end[i][0] = to_end[i];
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    for (int i = 0; i < k; ++i) {
      if (mask & (1u << i)) continue;
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < k; ++j) {
        if (!(mask & (1u << j))) continue;
        best = std::min(best, c(i, j) + cost_to_end[j][mask & ~(1u << j)]);
      }
      cost_to_end[i][mask] = best;
    }
  }

  double total = std::numeric_limits<double>::infinity();
  for (int j = 0; j < k; ++j) {
    total = std::min(total, from_start[j] + cost_to_end[j][full & ~(1u << j)]);
  }

  // Walk the table front-to-back, preferring the smallest index whenever a
  // choice still achieves the optimal remaining cost.
  Tour tour;
  tour.order.reserve(k);
  std::uint32_t remaining = full;
  int prev = -1;
  double needed = total;
  const double tie_eps = 1e-9 * (1.0 + std::abs(total));
  while (remaining != 0) {
    int pick = -1;
    for (int j = 0; j < k; ++j) {
      if (!(remaining & (1u << j))) continue;
      const double step = (prev < 0 ? from_start[j] : c(prev, j));
      if (step + cost_to_end[j][remaining & ~(1u << j)] <= needed + tie_eps) {
        pick = j;
        break;
      }
    }
    if (pick < 0) throw SolverError("solve_order_exact: table reconstruction failed");
    tour.order.push_back(pick);
    remaining &= ~(1u << pick);
    needed = cost_to_end[pick][remaining];
    prev = pick;
  }
  tour.length_m = chain_length(start, end, detail::permuted(pts, tour.order));
  return tour;
}

/// Nearest-neighbour construction plus a handful of seeded random restarts,
/// each polished by local search: 2-opt segment reversals interleaved with
/// or-opt segment relocations (lengths 1..3) until neither finds an
/// improvement. The returned order admits no improving 2-exchange.
/// Deterministic given the seed.
inline Tour solve_order_heuristic(const Eigen::Vector3d& start, const Eigen::Vector3d& end,
                                  const std::vector<Eigen::Vector3d>& pts,
                                  std::uint64_t seed = 0) {
  const int k = static_cast<int>(pts.size());
  if (k < 1) throw DomainError("solve_order_heuristic: need at least one waypoint");

  auto at = [&](const std::vector<int>& ord, int i) -> const Eigen::Vector3d& {
    if (i < 0) return start;
    if (i >= static_cast<int>(ord.size())) return end;
    return pts[ord[i]];
  };
  auto dist = [](const Eigen::Vector3d& a, const Eigen::Vector3d& b) { return (a - b).norm(); };

  auto local_search = [&](std::vector<int> order) {
    const double eps = 1e-12 * (1.0 + chain_length(start, end, detail::permuted(pts, order)));

    auto two_opt_pass = [&]() {
      bool improved = false;
      for (int i = 0; i < k - 1; ++i) {
        for (int j = i + 1; j < k; ++j) {
          const double delta = dist(at(order, i - 1), at(order, j)) +
                               dist(at(order, i), at(order, j + 1)) -
                               dist(at(order, i - 1), at(order, i)) -
                               dist(at(order, j), at(order, j + 1));
          if (delta < -eps) {
            std::reverse(order.begin() + i, order.begin() + j + 1);
            improved = true;
          }
        }
      }
      return improved;
    };

    // Relocates a short segment elsewhere in the path, forward or reversed.
    auto or_opt_pass = [&]() {
      bool improved = false;
      for (int len = 1; len <= std::min(3, k - 1); ++len) {
        for (int i = 0; i + len <= k; ++i) {
          const double removal = dist(at(order, i - 1), at(order, i + len)) -
                                 dist(at(order, i - 1), at(order, i)) -
                                 dist(at(order, i + len - 1), at(order, i + len));
          std::vector<int> rest;
          rest.reserve(k - len);
          rest.insert(rest.end(), order.begin(), order.begin() + i);
          rest.insert(rest.end(), order.begin() + i + len, order.end());
          const Eigen::Vector3d& seg_front = pts[order[i]];
          const Eigen::Vector3d& seg_back = pts[order[i + len - 1]];

          bool applied = false;
          for (int j = 0; j <= k - len && !applied; ++j) {
            if (j == i) continue;  // same position, no change
            const Eigen::Vector3d& a = at(rest, j - 1);
            const Eigen::Vector3d& b = at(rest, j);
            const double gap = dist(a, b);
            const double fwd = removal + dist(a, seg_front) + dist(seg_back, b) - gap;
            const double rev = removal + dist(a, seg_back) + dist(seg_front, b) - gap;
            if (std::min(fwd, rev) < -eps) {
              std::vector<int> seg(order.begin() + i, order.begin() + i + len);
              if (rev < fwd) std::reverse(seg.begin(), seg.end());
              rest.insert(rest.begin() + j, seg.begin(), seg.end());
              order = std::move(rest);
              improved = true;
              applied = true;
            }
          }
          if (applied) break;
        }
      }
      return improved;
    };

    bool improved = true;
    while (improved) {
      improved = two_opt_pass();
      improved = or_opt_pass() || improved;
    }
    Tour t;
    t.length_m = chain_length(start, end, detail::permuted(pts, order));
    t.order = std::move(order);
    return t;
  };

  std::vector<int> nn;
  nn.reserve(k);
  {
    std::vector<bool> used(k, false);
    Eigen::Vector3d cur = start;
    for (int step = 0; step < k; ++step) {
      int pick = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < k; ++j) {
        if (used[j]) continue;
        const double d = (pts[j] - cur).norm();
        if (d < best) {
          best = d;
          pick = j;
        }
      }
      used[pick] = true;
      nn.push_back(pick);
      cur = pts[pick];
    }
  }

  Tour best = local_search(nn);
  std::mt19937_64 eng(seed);
  const int restarts = k >= 4 ? 6 : 0;
  for (int r = 0; r < restarts; ++r) {
    std::vector<int> shuffled = nn;
    for (int i = k - 1; i > 0; --i) {  // Fisher-Yates on the engine's raw stream
      const int j = static_cast<int>(eng() % static_cast<std::uint64_t>(i + 1));
      std::swap(shuffled[i], shuffled[j]);
    }
    Tour cand = local_search(std::move(shuffled));
    if (cand.length_m < best.length_m - 1e-12) best = std::move(cand);
  }
  return best;
}

}  // namespace optour
