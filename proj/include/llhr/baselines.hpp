#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "llhr/errors.hpp"
#include "llhr/model.hpp"
#include "llhr/rand.hpp"

namespace llhr {

enum class StrategyKind { llhr, heuristic_static, random_cells };

inline std::string strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::llhr: return "llhr";
    case StrategyKind::heuristic_static: return "heuristic";
    case StrategyKind::random_cells: return "random";
  }
  return "?";
}

inline StrategyKind parse_strategy(std::string_view name) {
  if (name == "llhr") return StrategyKind::llhr;
  if (name == "heuristic") return StrategyKind::heuristic_static;
  if (name == "random") return StrategyKind::random_cells;
  throw ConfigError("unknown strategy '" + std::string(name) +
                    "' (expected llhr, heuristic or random)");
}

// Movement policy of the fleet. The seed drives only the random strategy; the
// static path only the heuristic one.
struct Strategy {
  StrategyKind kind = StrategyKind::llhr;
  std::uint64_t seed = 0;
  std::vector<int> static_path;

  bool operator==(const Strategy&) const = default;
};

// Back-and-forth lawnmower sweep over all cells, row by row.
inline std::vector<int> boustrophedon_path(const GridSpec& grid) {
  std::vector<int> path;
  path.reserve(std::size_t(grid.cell_count()));
  for (int row = 0; row < grid.rows; ++row) {
    if (row % 2 == 0)
      for (int col = 0; col < grid.cols; ++col) path.push_back(row * grid.cols + col);
    else
      for (int col = grid.cols - 1; col >= 0; --col) path.push_back(row * grid.cols + col);
  }
  return path;
}

inline Strategy make_strategy(StrategyKind kind, const Scenario& scenario) {
  Strategy s;
  s.kind = kind;
  if (kind == StrategyKind::random_cells) s.seed = scenario.seed;
  if (kind == StrategyKind::heuristic_static) s.static_path = boustrophedon_path(scenario.grid);
  return s;
}

inline void validate_strategy(const Strategy& strategy, const Scenario& scenario) {
  if (strategy.kind != StrategyKind::heuristic_static) return;
  if (strategy.static_path.empty())
    throw ValidationError("strategy.static_path: empty path for the heuristic strategy");
  for (int c : strategy.static_path)
    if (c < 0 || c >= scenario.grid.cell_count())
      throw ValidationError("strategy.static_path: cell " + std::to_string(c) +
                            " outside the grid");
  if (strategy.static_path.size() < scenario.fleet.size())
    throw ValidationError("strategy.static_path: shorter than the fleet; UAVs would collide");
}

// Heuristic placement: the fleet marches along the static path, UAV i one step
// ahead of UAV i-1, wrapping cyclically.
inline std::vector<int> heuristic_cells(const std::vector<int>& path, int fleet_size, int frame) {
  std::vector<int> cells(fleet_size);
  for (int i = 0; i < fleet_size; ++i)
    cells[i] = path[std::size_t(frame + i) % path.size()];
  return cells;
}

// Random placement: whole layouts of uniformly drawn cell centers are rejected
// until the pairwise separation holds, so accepted layouts are uniform over
// the feasible set.
inline std::vector<int> random_cells(const GridSpec& grid, int fleet_size, std::mt19937_64& rng,
                                     int max_attempts = 1000) {
  const double sep = 2.0 * grid.cell_radius_m;
  std::vector<int> cells(fleet_size);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    for (int i = 0; i < fleet_size; ++i)
      cells[i] = int(uniform_index(rng, std::uint64_t(grid.cell_count())));
    bool ok = true;
    for (int i = 0; i < fleet_size && ok; ++i)
      for (int k = i + 1; k < fleet_size && ok; ++k)
        if (distance(cell_center(grid, cells[i]), cell_center(grid, cells[k])) < sep) ok = false;
    if (ok) return cells;
  }
  throw InfeasibleError("random placement: no separation-feasible layout after " +
                        std::to_string(max_attempts) + " attempts");
}

}  // namespace llhr
