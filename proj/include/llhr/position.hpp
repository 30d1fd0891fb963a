#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "llhr/channel.hpp"
#include "llhr/errors.hpp"
#include "llhr/model.hpp"
#include "llhr/power.hpp"

namespace llhr {

struct PositionSolution {
  std::vector<Vec2> positions;
  std::vector<int> assigned_cells;
  double objective_w = 0.0;           // total threshold power of the final layout
  double discrete_objective_w = 0.0;  // objective after the cell-assignment phase
  int iterations = 0;                 // accepted improvement steps
  std::vector<double> objective_trace;  // objective after each accepted step
};

struct P2Options {
  bool refine = true;      // run the continuous within-disk refinement phase
  int max_rounds = 60;     // refinement sweeps over the fleet
  int max_ls_passes = 200; // local-search passes in the discrete phase
};

// All cell centers, row-major: the discrete candidate set.
inline std::vector<Vec2> candidate_positions(const GridSpec& grid) {
  validate_grid(grid);
  std::vector<Vec2> out;
  out.reserve(std::size_t(grid.cell_count()));
  for (int c = 0; c < grid.cell_count(); ++c) out.push_back(cell_center(grid, c));
  return out;
}

// Threshold power of one link at distance d: coefficient * clamp(d)^2.
inline double pair_threshold_w(double coefficient, double d_m) {
  const double d = clamp_distance(d_m);
  return coefficient * (d * d);
}

// Total threshold power of a layout; +inf when any link exceeds its
// transmitter's power cap.
inline double position_objective(const std::vector<Link>& links, const ChannelParams& params,
                                 const std::vector<UavProfile>& profiles,
                                 const std::vector<Vec2>& positions) {
  double sum = 0.0;
  for (const Link& l : links) {
    const double coeff = link_coefficient(params, l.k_bits);
    const double thr = pair_threshold_w(coeff, distance(positions[l.from], positions[l.to]));
    if (!(thr <= profiles[l.from].p_max_w)) return std::numeric_limits<double>::infinity();
    sum += thr;
  }
  return sum;
}

namespace detail {

struct P2Context {
  const std::vector<Link>* links = nullptr;
  std::vector<double> coeffs;          // per link
  std::vector<Vec2> centers;           // per cell
  std::vector<double> p_max;           // per UAV
  double sep_m = 0.0;                  // minimum pairwise distance 2R
  int uavs = 0;
};

inline double assignment_objective(const P2Context& ctx, const std::vector<int>& cells) {
  double sum = 0.0;
  for (std::size_t l = 0; l < ctx.links->size(); ++l) {
    const Link& link = (*ctx.links)[l];
    const double thr = pair_threshold_w(
        ctx.coeffs[l], distance(ctx.centers[cells[link.from]], ctx.centers[cells[link.to]]));
    if (!(thr <= ctx.p_max[link.from])) return std::numeric_limits<double>::infinity();
    sum += thr;
  }
  return sum;
}

// Exhaustive enumeration over injective cell assignments, first-found ties
// kept so the result is the lexicographically smallest optimal vector.
inline void enumerate_assignments(const P2Context& ctx, int uav, std::vector<int>& cells,
                                  std::vector<bool>& used, double& best,
                                  std::vector<int>& best_cells) {
  if (uav == ctx.uavs) {
    const double obj = assignment_objective(ctx, cells);
    if (obj < best) {
      best = obj;
      best_cells = cells;
    }
    return;
  }
  for (int c = 0; c < int(ctx.centers.size()); ++c) {
    if (used[c]) continue;
    used[c] = true;
    cells[uav] = c;
    enumerate_assignments(ctx, uav + 1, cells, used, best, best_cells);
    used[c] = false;
  }
}

// Greedy insertion: each UAV in index order takes the free cell that adds the
// least threshold power against the already placed ones.
inline std::vector<int> greedy_assignment(const P2Context& ctx) {
  const int cells_n = int(ctx.centers.size());
  std::vector<int> cells(ctx.uavs, -1);
  std::vector<bool> used(cells_n, false);
  for (int u = 0; u < ctx.uavs; ++u) {
    int best_cell = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int c = 0; c < cells_n; ++c) {
      if (used[c]) continue;
      double cost = 0.0;
      bool ok = true;
      for (std::size_t l = 0; l < ctx.links->size() && ok; ++l) {
        const Link& link = (*ctx.links)[l];
        if (link.from != u && link.to != u) continue;
        const int other = link.from == u ? link.to : link.from;
        if (other >= u) continue;  // not placed yet
        const double thr = pair_threshold_w(
            ctx.coeffs[l], distance(ctx.centers[c], ctx.centers[cells[other]]));
        if (!(thr <= ctx.p_max[link.from])) ok = false;
        cost += thr;
      }
      if (!ok) continue;
      if (cost < best_cost) {
        best_cost = cost;
        best_cell = c;
      }
    }
    if (best_cell < 0) {  // no cap-feasible cell; take the lowest free one
      for (int c = 0; c < cells_n; ++c)
        if (!used[c]) {
          best_cell = c;
          break;
        }
    }
    used[best_cell] = true;
    cells[u] = best_cell;
  }
  return cells;
}

}  // namespace detail

// Layout minimizing the total reliability-threshold power over the active
// links, subject to: each UAV inside the disk of radius R around its assigned
// cell center, pairwise separation >= 2R, and no link threshold above its
// transmitter's cap. Two phases: injective assignment of UAVs to cell centers
// (exhaustive for <= 4 UAVs on <= 16 cells, otherwise greedy insertion plus
// swap/relocate local search), then projected coordinate descent inside the
// containment disks. Deterministic: ties break toward lower cell indices and
// moves are scanned in a fixed order.
inline PositionSolution solve_p2(const std::vector<Link>& links, const GridSpec& grid,
                                 const ChannelParams& params,
                                 const std::vector<UavProfile>& profiles,
                                 const std::vector<Vec2>& init, const P2Options& opt = {}) {
  validate_grid(grid);
  const int n = int(profiles.size());
  if (int(init.size()) != n)
    throw ValidationError("solve_p2: init must hold one position per UAV");
  for (const Vec2& p : init)
    if (!inside_grid(grid, p)) throw InfeasibleError("solve_p2: infeasible start: outside grid");

  const double sep = 2.0 * grid.cell_radius_m;
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k)
      if (distance(init[i], init[k]) < sep)
        throw InfeasibleError("solve_p2: infeasible start: uavs " + std::to_string(i) + " and " +
                              std::to_string(k) + " closer than 2R");

  for (const Link& l : links) {
    if (l.from < 0 || l.from >= n || l.to < 0 || l.to >= n || l.from == l.to)
      throw ValidationError("solve_p2: link endpoints out of range");
    if (l.k_bits == 0) throw ValidationError("solve_p2: link payload must be > 0 bits");
  }

  PositionSolution sol;
  if (links.empty()) {  // nothing to optimize; keep the incoming layout
    sol.positions = init;
    sol.assigned_cells.resize(n);
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < grid.cell_count(); ++c) {
        const double d = distance(init[i], cell_center(grid, c));
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      sol.assigned_cells[i] = best;
    }
    return sol;
  }

  if (n > grid.cell_count())
    throw InfeasibleError("solve_p2: more UAVs than cells; separation cannot hold");

  detail::P2Context ctx;
  ctx.links = &links;
  ctx.centers = candidate_positions(grid);
  ctx.sep_m = sep;
  ctx.uavs = n;
  ctx.p_max.resize(n);
  for (int i = 0; i < n; ++i) ctx.p_max[i] = profiles[i].p_max_w;
  ctx.coeffs.resize(links.size());
  double worst_floor = 0.0;  // max over links of the threshold at the separation minimum
  for (std::size_t l = 0; l < links.size(); ++l) {
    ctx.coeffs[l] = link_coefficient(params, links[l].k_bits);
    const double floor = pair_threshold_w(ctx.coeffs[l], sep);
    worst_floor = std::max(worst_floor, floor);
    if (!(floor <= ctx.p_max[links[l].from]))
      throw InfeasibleError(
          "solve_p2: link " + std::to_string(links[l].from) + "->" + std::to_string(links[l].to) +
          " violates its power cap even at the separation minimum; smallest achievable "
          "max-link power is " +
          std::to_string(worst_floor) + " W");
  }

  // Phase 1: discrete assignment.
  std::vector<int> cells;
  double discrete_obj = std::numeric_limits<double>::infinity();
  if (n <= 4 && grid.cell_count() <= 16) {
    std::vector<int> work(n, -1);
    std::vector<bool> used(grid.cell_count(), false);
    detail::enumerate_assignments(ctx, 0, work, used, discrete_obj, cells);
    if (cells.empty())
      throw InfeasibleError("solve_p2: no cap-feasible cell assignment exists");
  } else {
    cells = detail::greedy_assignment(ctx);
    discrete_obj = detail::assignment_objective(ctx, cells);
    // Local search: best strictly improving relocate or swap per pass.
    std::vector<bool> used(grid.cell_count(), false);
    for (int c : cells) used[c] = true;
    for (int pass = 0; pass < opt.max_ls_passes; ++pass) {
      double best_obj = discrete_obj;
      int move_u = -1, move_v = -1, move_cell = -1;
      std::vector<int> trial = cells;
      for (int u = 0; u < n; ++u) {
        for (int c = 0; c < grid.cell_count(); ++c) {
          if (used[c]) continue;
          trial[u] = c;
          const double obj = detail::assignment_objective(ctx, trial);
          if (obj < best_obj) {
            best_obj = obj;
            move_u = u;
            move_cell = c;
            move_v = -1;
          }
          trial[u] = cells[u];
        }
      }
      for (int u = 0; u < n; ++u) {
        for (int v = u + 1; v < n; ++v) {
          std::swap(trial[u], trial[v]);
          const double obj = detail::assignment_objective(ctx, trial);
          if (obj < best_obj) {
            best_obj = obj;
            move_u = u;
            move_v = v;
            move_cell = -1;
          }
          std::swap(trial[u], trial[v]);
        }
      }
      if (move_u < 0) break;
      if (move_v < 0) {
        used[cells[move_u]] = false;
        used[move_cell] = true;
        cells[move_u] = move_cell;
      } else {
        std::swap(cells[move_u], cells[move_v]);
      }
      discrete_obj = best_obj;
      sol.iterations++;
      sol.objective_trace.push_back(discrete_obj);
    }
    if (std::isinf(discrete_obj))
      throw InfeasibleError("solve_p2: no cap-feasible cell assignment found");
  }

  sol.assigned_cells = cells;
  sol.positions.resize(n);
  for (int i = 0; i < n; ++i) sol.positions[i] = ctx.centers[cells[i]];
  sol.discrete_objective_w = discrete_obj;
  sol.objective_w = discrete_obj;
  if (sol.objective_trace.empty()) sol.objective_trace.push_back(discrete_obj);

  // Phase 2: projected coordinate descent within the containment disks.
  if (opt.refine) {
    const double R = grid.cell_radius_m;
    for (int round = 0; round < opt.max_rounds; ++round) {
      bool moved = false;
      for (int u = 0; u < n; ++u) {
        double wsum = 0.0;
        Vec2 target{0.0, 0.0};
        for (std::size_t l = 0; l < links.size(); ++l) {
          const Link& link = links[l];
          if (link.from != u && link.to != u) continue;
          const int other = link.from == u ? link.to : link.from;
          wsum += ctx.coeffs[l];
          target.x += ctx.coeffs[l] * sol.positions[other].x;
          target.y += ctx.coeffs[l] * sol.positions[other].y;
        }
        if (wsum <= 0.0) continue;
        target.x /= wsum;
        target.y /= wsum;

        const Vec2 center = ctx.centers[cells[u]];
        auto clamp_disk = [&](Vec2 p) {
          const double d = distance(p, center);
          if (d <= R) return p;
          const double s = R / d * (1.0 - 1e-13);
          return Vec2{center.x + (p.x - center.x) * s, center.y + (p.y - center.y) * s};
        };
        Vec2 cand = clamp_disk(target);
        bool ok = false;
        for (int repair = 0; repair < 8; ++repair) {
          int violator = -1;
          for (int k = 0; k < n; ++k) {
            if (k == u) continue;
            if (distance(cand, sol.positions[k]) < sep) {
              violator = k;
              break;
            }
          }
          if (violator < 0) {
            ok = true;
            break;
          }
          Vec2 away{cand.x - sol.positions[violator].x, cand.y - sol.positions[violator].y};
          double len = std::hypot(away.x, away.y);
          if (len == 0.0) {
            away = {1.0, 0.0};
            len = 1.0;
          }
          const double scale = sep * (1.0 + 1e-12) / len;
          cand = {sol.positions[violator].x + away.x * scale,
                  sol.positions[violator].y + away.y * scale};
          cand = clamp_disk(cand);
        }
        if (!ok) continue;
        for (int k = 0; k < n && ok; ++k)
          if (k != u && distance(cand, sol.positions[k]) < sep) ok = false;
        if (!ok) continue;

        const Vec2 old = sol.positions[u];
        sol.positions[u] = cand;
        const double obj = position_objective(links, params, profiles, sol.positions);
        if (obj < sol.objective_w) {
          sol.objective_w = obj;
          sol.iterations++;
          sol.objective_trace.push_back(obj);
          moved = true;
        } else {
          sol.positions[u] = old;
        }
      }
      if (!moved) break;
    }
  }

  // Keep the incoming layout if it is feasible and strictly better.
  {
    bool init_ok = true;
    std::vector<int> init_cells(n, -1);
    std::vector<bool> taken(grid.cell_count(), false);
    for (int i = 0; i < n && init_ok; ++i) {
      int best = -1;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < grid.cell_count(); ++c) {
        const double d = distance(init[i], cell_center(grid, c));
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (best < 0 || taken[best] || best_d > grid.cell_radius_m) init_ok = false;
      else {
        taken[best] = true;
        init_cells[i] = best;
      }
    }
    if (init_ok) {
      const double init_obj = position_objective(links, params, profiles, init);
      if (init_obj < sol.objective_w) {
        sol.positions = init;
        sol.assigned_cells = init_cells;
        sol.objective_w = init_obj;
        sol.objective_trace.push_back(init_obj);
      }
    }
  }
  return sol;
}

}  // namespace llhr
