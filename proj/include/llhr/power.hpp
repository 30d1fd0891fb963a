#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "llhr/channel.hpp"
#include "llhr/errors.hpp"
#include "llhr/model.hpp"

namespace llhr {

// One directed reliability demand: UAV `from` must deliver packets of k_bits
// to UAV `to` within one packet duration.
struct Link {
  int from = 0;
  int to = 0;
  std::uint64_t k_bits = 0;

  bool operator==(const Link&) const = default;
};

struct PowerSolution {
  std::vector<double> powers_w;                  // one entry per UAV
  double total_w = 0.0;
  std::vector<std::pair<int, int>> binding_links;  // links whose threshold equals the UAV power
};

// Minimum-total-power assignment under per-link reliability thresholds and the
// per-UAV cap. The objective is separable and every constraint is a lower
// bound on a single variable, so the optimum is the per-UAV maximum of the
// outgoing link thresholds (zero for UAVs with no outgoing link).
inline PowerSolution solve_p1(const std::vector<Vec2>& positions, const std::vector<Link>& links,
                              const ChannelParams& params, const std::vector<UavProfile>& profiles) {
  const int n = int(positions.size());
  if (profiles.size() != positions.size())
    throw ValidationError("solve_p1: positions and profiles disagree on fleet size");

  std::vector<double> powers(n, 0.0);
  std::vector<double> thresholds(links.size(), 0.0);
  for (std::size_t l = 0; l < links.size(); ++l) {
    const Link& link = links[l];
    if (link.from < 0 || link.from >= n || link.to < 0 || link.to >= n || link.from == link.to)
      throw ValidationError("solve_p1: link endpoints out of range");
    const double d = distance(positions[link.from], positions[link.to]);
    double th = 0.0;
    try {
      th = threshold_power(params, link.k_bits, d);
    } catch (const InfeasibleError&) {
      throw InfeasibleError("link " + std::to_string(link.from) + "->" + std::to_string(link.to) +
                            ": payload of " + std::to_string(link.k_bits) +
                            " bits is unreachable within tau at any power");
    }
    thresholds[l] = th;
    if (th > powers[link.from]) powers[link.from] = th;
  }

  PowerSolution sol;
  sol.powers_w = powers;
  for (int i = 0; i < n; ++i) {
    if (powers[i] > profiles[i].p_max_w) {
      // Report the first link that forces the violating threshold.
      for (std::size_t l = 0; l < links.size(); ++l) {
        if (links[l].from == i && thresholds[l] == powers[i])
          throw InfeasibleError("link " + std::to_string(links[l].from) + "->" +
                                std::to_string(links[l].to) + " needs " +
                                std::to_string(thresholds[l]) + " W > p_max " +
                                std::to_string(profiles[i].p_max_w) + " W of uav " +
                                std::to_string(i));
      }
    }
    sol.total_w += powers[i];
  }
  for (std::size_t l = 0; l < links.size(); ++l)
    if (powers[links[l].from] > 0.0 && thresholds[l] == powers[links[l].from])
      sol.binding_links.emplace_back(links[l].from, links[l].to);
  return sol;
}

}  // namespace llhr
