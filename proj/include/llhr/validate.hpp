#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "llhr/allocation.hpp"
#include "llhr/model.hpp"
#include "llhr/power.hpp"

namespace llhr {

// Standalone constraint checks, independent of the solvers that produced the
// artifacts. Each returns a list of human-readable violations (empty = clean).

// Memory/compute capacity and completeness of a layer placement.
inline std::vector<std::string> check_allocation(const AllocationPlan& plan,
                                                 const AllocInstance& inst) {
  std::vector<std::string> out;
  if (plan.assign.size() != inst.requests.size()) {
    out.push_back("assignment rows (" + std::to_string(plan.assign.size()) +
                  ") do not match request count (" + std::to_string(inst.requests.size()) + ")");
    return out;
  }
  std::vector<std::uint64_t> mem_used(inst.uavs(), 0);
  std::vector<double> cmp_used(inst.uavs(), 0.0);
  for (std::size_t r = 0; r < plan.assign.size(); ++r) {
    if (int(plan.assign[r].size()) != inst.layers()) {
      out.push_back("request " + std::to_string(r) + ": not exactly one UAV per layer");
      continue;
    }
    for (int j = 0; j < inst.layers(); ++j) {
      const int i = plan.assign[r][j];
      if (i < 0 || i >= inst.uavs()) {
        out.push_back("request " + std::to_string(r) + " layer " + std::to_string(j) +
                      ": UAV index out of range");
        continue;
      }
      mem_used[i] += inst.profile[j].mem_bytes;
      cmp_used[i] += double(inst.profile[j].load_mults);
    }
  }
  for (int i = 0; i < inst.uavs(); ++i) {
    if (mem_used[i] > inst.fleet[i].mem_capacity_bytes)
      out.push_back("uav " + std::to_string(i) + ": memory load " + std::to_string(mem_used[i]) +
                    " B exceeds capacity " + std::to_string(inst.fleet[i].mem_capacity_bytes) +
                    " B");
    if (cmp_used[i] > inst.compute_capacity[i])
      out.push_back("uav " + std::to_string(i) + ": compute load exceeds per-frame capacity");
  }
  return out;
}

// Per-UAV transmit power caps.
inline std::vector<std::string> check_powers(const PowerSolution& power,
                                             const std::vector<UavProfile>& profiles) {
  std::vector<std::string> out;
  if (power.powers_w.size() != profiles.size()) {
    out.push_back("power vector length does not match fleet size");
    return out;
  }
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    if (power.powers_w[i] < 0.0)
      out.push_back("uav " + std::to_string(i) + ": negative transmit power");
    if (power.powers_w[i] > profiles[i].p_max_w)
      out.push_back("uav " + std::to_string(i) + ": transmit power " +
                    std::to_string(power.powers_w[i]) + " W exceeds cap " +
                    std::to_string(profiles[i].p_max_w) + " W");
  }
  return out;
}

// Pairwise collision-avoidance separation.
inline std::vector<std::string> check_separation(const std::vector<Vec2>& positions,
                                                 double min_separation_m) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < positions.size(); ++i)
    for (std::size_t k = i + 1; k < positions.size(); ++k)
      if (distance(positions[i], positions[k]) < min_separation_m)
        out.push_back("uavs " + std::to_string(i) + " and " + std::to_string(k) +
                      " are closer than the minimum separation");
  return out;
}

}  // namespace llhr
