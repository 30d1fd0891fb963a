#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "llhr/cnn.hpp"
#include "llhr/errors.hpp"
#include "llhr/model.hpp"

namespace llhr {

// Dense matrix of lower-bound achievable rates between ordered UAV pairs.
struct RateMatrix {
  int size = 0;
  std::vector<double> bps;  // row-major, diagonal unused

  RateMatrix() = default;
  explicit RateMatrix(int n) : size(n), bps(std::size_t(n) * n, 0.0) {}

  double operator()(int from, int to) const { return bps[std::size_t(from) * size + to]; }
  double& at(int from, int to) { return bps[std::size_t(from) * size + to]; }
};

// Everything the layer-placement solvers need for one time frame.
struct AllocInstance {
  std::vector<Request> requests;
  std::vector<UavProfile> fleet;
  std::vector<LayerCost> profile;        // per layer of the (single) model
  RateMatrix rates;
  std::vector<double> compute_capacity;  // multiplications per frame, e_i * T

  int uavs() const { return int(fleet.size()); }
  int layers() const { return int(profile.size()); }
};

struct AllocOptions {
  // When set, a hop carrying K bits is usable only if rate * tau_s >= K, i.e.
  // the packet completes within one packet duration at the guaranteed rate.
  bool reliability_gate = false;
  double tau_s = 0.0;
};

struct LatencyBreakdown {
  double source_tx_s = 0.0;  // input handoff when layer 1 is not on the source
  double compute_s = 0.0;    // per-layer processing
  double inter_tx_s = 0.0;   // intermediate tensors between consecutive layers

  bool operator==(const LatencyBreakdown&) const = default;
};

struct AllocationPlan {
  std::vector<std::vector<int>> assign;  // assign[r][j] = executing UAV
  double latency_s = 0.0;
  LatencyBreakdown breakdown;
  std::vector<double> per_request_s;
};

namespace detail {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Edge usability under the reliability gate. A same-UAV transition is always
// free; a real hop needs a positive rate, and with the gate enabled the
// payload must fit in one packet duration at that rate.
inline bool hop_usable(const AllocInstance& inst, const AllocOptions& opt, int from, int to,
                       std::uint64_t k_bits) {
  if (from == to) return true;
  const double rate = inst.rates(from, to);
  if (!(rate > 0.0)) return false;
  if (opt.reliability_gate && double(k_bits) > rate * opt.tau_s * (1.0 + 1e-9)) return false;
  return true;
}

inline double hop_cost(const AllocInstance& inst, int from, int to, std::uint64_t k_bits) {
  if (from == to) return 0.0;
  return double(k_bits) / inst.rates(from, to);
}

inline void validate_instance(const AllocInstance& inst) {
  if (inst.fleet.empty()) throw ValidationError("allocation: empty fleet");
  if (inst.profile.empty()) throw ValidationError("allocation: empty layer profile");
  if (inst.rates.size != inst.uavs()) throw ValidationError("allocation: rate matrix size mismatch");
  if (int(inst.compute_capacity.size()) != inst.uavs())
    throw ValidationError("allocation: compute capacity size mismatch");
  for (const Request& r : inst.requests)
    if (r.source_uav < 0 || r.source_uav >= inst.uavs())
      throw ValidationError("allocation: request source out of range");
}

// Necessary capacity conditions, checked up front for clear error messages.
inline void check_capacity_bounds(const AllocInstance& inst) {
  const std::uint64_t rq = inst.requests.size();
  std::uint64_t mem_demand = 0;
  double compute_demand = 0.0;
  for (const LayerCost& c : inst.profile) {
    bool fits_somewhere = false;
    for (int i = 0; i < inst.uavs(); ++i)
      if (c.mem_bytes <= inst.fleet[i].mem_capacity_bytes &&
          double(c.load_mults) <= inst.compute_capacity[i])
        fits_somewhere = true;
    if (!fits_somewhere && rq > 0)
      throw InfeasibleError("allocation infeasible: a layer needs " +
                            std::to_string(c.mem_bytes) + " B and " +
                            std::to_string(c.load_mults) +
                            " multiplications, which no UAV can hold in one frame");
    mem_demand = checked_add(mem_demand, checked_mul(c.mem_bytes, rq));
    compute_demand += double(rq) * double(c.load_mults);
  }
  std::uint64_t mem_cap = 0;
  double compute_cap = 0.0;
  for (int i = 0; i < inst.uavs(); ++i) {
    mem_cap = checked_add(mem_cap, inst.fleet[i].mem_capacity_bytes);
    compute_cap += inst.compute_capacity[i];
  }
  if (mem_demand > mem_cap)
    throw InfeasibleError("allocation infeasible: memory demand " + std::to_string(mem_demand) +
                          " B exceeds fleet capacity " + std::to_string(mem_cap) + " B");
  if (compute_demand > compute_cap)
    throw InfeasibleError("allocation infeasible: compute demand " +
                          std::to_string(std::uint64_t(compute_demand)) +
                          " multiplications exceeds fleet capacity " +
                          std::to_string(std::uint64_t(compute_cap)));
}

}  // namespace detail

struct LatencyReport {
  double latency_s = 0.0;
  LatencyBreakdown breakdown;
  std::vector<double> per_request_s;
};

// End-to-end latency of a complete assignment: per request, the source input
// handoff (when layer 1 runs elsewhere), every layer's compute time, and one
// transmission per boundary between layers placed on different UAVs.
inline LatencyReport plan_latency(const std::vector<std::vector<int>>& assign,
                                  const AllocInstance& inst) {
  detail::validate_instance(inst);
  if (assign.size() != inst.requests.size())
    throw ValidationError("plan_latency: incomplete assignment (request rows missing)");
  LatencyReport rep;
  rep.per_request_s.reserve(assign.size());
  for (std::size_t r = 0; r < assign.size(); ++r) {
    if (int(assign[r].size()) != inst.layers())
      throw ValidationError("plan_latency: incomplete assignment for request " + std::to_string(r));
    double src = 0.0, comp = 0.0, inter = 0.0;
    const int source = inst.requests[r].source_uav;
    const int first = assign[r][0];
    if (first < 0 || first >= inst.uavs())
      throw ValidationError("plan_latency: assignment references unknown UAV");
    if (first != source) {
      if (!(inst.rates(source, first) > 0.0))
        throw InfeasibleError("plan_latency: zero-rate link " + std::to_string(source) + "->" +
                              std::to_string(first));
      src = double(inst.requests[r].input_bits()) / inst.rates(source, first);
    }
    for (int j = 0; j < inst.layers(); ++j) {
      const int uav = assign[r][j];
      if (uav < 0 || uav >= inst.uavs())
        throw ValidationError("plan_latency: assignment references unknown UAV");
      comp += double(inst.profile[j].load_mults) / inst.fleet[uav].mult_per_sec;
      if (j + 1 < inst.layers() && assign[r][j + 1] != uav) {
        const int next = assign[r][j + 1];
        if (!(inst.rates(uav, next) > 0.0))
          throw InfeasibleError("plan_latency: zero-rate link " + std::to_string(uav) + "->" +
                                std::to_string(next));
        inter += double(inst.profile[j].out_bits) / inst.rates(uav, next);
      }
    }
    rep.breakdown.source_tx_s += src;
    rep.breakdown.compute_s += comp;
    rep.breakdown.inter_tx_s += inter;
    rep.per_request_s.push_back(src + comp + inter);
  }
  rep.latency_s = rep.breakdown.source_tx_s + rep.breakdown.compute_s + rep.breakdown.inter_tx_s;
  return rep;
}

namespace detail {

inline AllocationPlan finish_plan(std::vector<std::vector<int>> assign, const AllocInstance& inst) {
  AllocationPlan plan;
  LatencyReport rep = plan_latency(assign, inst);
  plan.assign = std::move(assign);
  plan.latency_s = rep.latency_s;
  plan.breakdown = rep.breakdown;
  plan.per_request_s = std::move(rep.per_request_s);
  return plan;
}

// Capacity-relaxed chain shortest path per request: suffix[j][i] is the
// cheapest way to run layers j..L-1 given layer j-1 sits on UAV i, and
// entry is the cheapest full chain including the source handoff. These are
// exact per-request optima when capacities do not couple, which makes them
// tight lower bounds for the branch and bound.
struct ChainBound {
  std::vector<std::vector<double>> suffix;  // [j][i], j in [1, L], suffix[L][i] = 0
  double entry = kInf;
};

inline ChainBound chain_bound(const AllocInstance& inst, const AllocOptions& opt,
                              const Request& req) {
  const int U = inst.uavs(), L = inst.layers();
  ChainBound b;
  b.suffix.assign(std::size_t(L) + 1, std::vector<double>(U, 0.0));
  for (int j = L - 1; j >= 1; --j) {
    const std::uint64_t k = inst.profile[j - 1].out_bits;
    for (int i = 0; i < U; ++i) {
      double best = kInf;
      for (int i2 = 0; i2 < U; ++i2) {
        if (!hop_usable(inst, opt, i, i2, k)) continue;
        const double cost = hop_cost(inst, i, i2, k) +
                            double(inst.profile[j].load_mults) / inst.fleet[i2].mult_per_sec +
                            b.suffix[j + 1][i2];
        if (cost < best) best = cost;
      }
      b.suffix[j][i] = best;
    }
  }
  const std::uint64_t k_in = req.input_bits();
  for (int i = 0; i < U; ++i) {
    if (!hop_usable(inst, opt, req.source_uav, i, k_in)) continue;
    const double cost = hop_cost(inst, req.source_uav, i, k_in) +
                        double(inst.profile[0].load_mults) / inst.fleet[i].mult_per_sec +
                        b.suffix[1][i];
    if (cost < b.entry) b.entry = cost;
  }
  return b;
}

struct BnB {
  const AllocInstance& inst;
  const AllocOptions& opt;
  int U, L, R;
  std::vector<ChainBound> bounds;     // per request
  std::vector<double> rest_min;       // rest_min[r] = sum of entry bounds for requests >= r
  std::vector<std::vector<int>> assign;
  std::vector<std::uint64_t> res_mem;
  std::vector<double> res_cmp;
  double incumbent = kInf;
  std::vector<std::vector<int>> best;

  BnB(const AllocInstance& instance, const AllocOptions& options)
      : inst(instance), opt(options), U(instance.uavs()), L(instance.layers()),
        R(int(instance.requests.size())) {
    bounds.reserve(R);
    for (const Request& req : inst.requests) bounds.push_back(chain_bound(inst, opt, req));
    rest_min.assign(R + 1, 0.0);
    for (int r = R - 1; r >= 0; --r) rest_min[r] = rest_min[r + 1] + bounds[r].entry;
    assign.assign(R, std::vector<int>(L, -1));
    res_mem.resize(U);
    res_cmp.resize(U);
    for (int i = 0; i < U; ++i) {
      res_mem[i] = inst.fleet[i].mem_capacity_bytes;
      res_cmp[i] = inst.compute_capacity[i];
    }
  }

  void search(int r, int j, double prefix) {
    if (r == R) {
      AllocationPlan plan = finish_plan(assign, inst);
      if (plan.latency_s < incumbent) {
        incumbent = plan.latency_s;
        best = assign;
      }
      return;
    }
    const int prev = j == 0 ? inst.requests[r].source_uav : assign[r][j - 1];
    const std::uint64_t k =
        j == 0 ? inst.requests[r].input_bits() : inst.profile[j - 1].out_bits;
    const std::uint64_t mem = inst.profile[j].mem_bytes;
    const std::uint64_t load = inst.profile[j].load_mults;
    for (int i = 0; i < U; ++i) {
      if (mem > res_mem[i] || double(load) > res_cmp[i]) continue;
      if (!hop_usable(inst, opt, prev, i, k)) continue;
      const double inc = hop_cost(inst, prev, i, k) + double(load) / inst.fleet[i].mult_per_sec;
      const double bound = prefix + inc + bounds[r].suffix[j + 1][i] + rest_min[r + 1];
      if (!(bound < incumbent)) continue;
      assign[r][j] = i;
      res_mem[i] -= mem;
      res_cmp[i] -= double(load);
      if (j + 1 < L) search(r, j + 1, prefix + inc);
      else search(r + 1, 0, prefix + inc);
      res_mem[i] += mem;
      res_cmp[i] += double(load);
      assign[r][j] = -1;
    }
  }
};

}  // namespace detail

// Globally optimal layer placement by depth-first branch and bound over the
// per-(request, layer) choices. The bound relaxes the capacity coupling and
// completes each request by its chain shortest path, which is tight whenever
// capacities are slack. Decisions are explored in lexicographic (request,
// layer, UAV) order and the incumbent is replaced only on strict improvement,
// so ties resolve to the lexicographically smallest assignment.
inline AllocationPlan solve_p3_exact(const AllocInstance& inst, const AllocOptions& opt = {}) {
  detail::validate_instance(inst);
  detail::check_capacity_bounds(inst);
  if (inst.requests.empty()) return detail::finish_plan({}, inst);
  detail::BnB bnb(inst, opt);
  bnb.search(0, 0, 0.0);
  if (bnb.best.empty())
    throw InfeasibleError(
        "allocation infeasible: no assignment satisfies the memory/compute capacities and "
        "usable-link constraints");
  return detail::finish_plan(bnb.best, inst);
}

// Scalable fallback: requests in id order, each solved by a chain shortest
// path over (layer, UAV) states restricted to UAVs whose remaining capacity
// holds the layer. If the reconstructed path overruns a UAV's residual while
// walking (several layers of the same request stacking onto one UAV), the
// consumed prefix is frozen and the remainder re-solved. Feasible but not
// necessarily optimal once capacities couple requests.
inline AllocationPlan solve_p3_greedy(const AllocInstance& inst, const AllocOptions& opt = {}) {
  detail::validate_instance(inst);
  detail::check_capacity_bounds(inst);
  const int U = inst.uavs(), L = inst.layers();
  std::vector<std::uint64_t> res_mem(U);
  std::vector<double> res_cmp(U);
  for (int i = 0; i < U; ++i) {
    res_mem[i] = inst.fleet[i].mem_capacity_bytes;
    res_cmp[i] = inst.compute_capacity[i];
  }

  std::vector<std::vector<int>> assign(inst.requests.size(), std::vector<int>(L, -1));
  for (std::size_t r = 0; r < inst.requests.size(); ++r) {
    int start_layer = 0;
    int prev_uav = inst.requests[r].source_uav;
    while (start_layer < L) {
      // Shortest path over layers start_layer..L-1 with the current residuals.
      std::vector<std::vector<double>> cost(L, std::vector<double>(U, detail::kInf));
      std::vector<std::vector<int>> parent(L, std::vector<int>(U, -1));
      for (int j = start_layer; j < L; ++j) {
        const std::uint64_t k =
            j == 0 ? inst.requests[r].input_bits() : inst.profile[j - 1].out_bits;
        const std::uint64_t mem = inst.profile[j].mem_bytes;
        const double load = double(inst.profile[j].load_mults);
        for (int i = 0; i < U; ++i) {
          if (mem > res_mem[i] || load > res_cmp[i]) continue;
          const double compute = load / inst.fleet[i].mult_per_sec;
          if (j == start_layer) {
            if (!detail::hop_usable(inst, opt, prev_uav, i, k)) continue;
            cost[j][i] = detail::hop_cost(inst, prev_uav, i, k) + compute;
          } else {
            for (int p = 0; p < U; ++p) {
              if (cost[j - 1][p] == detail::kInf) continue;
              if (!detail::hop_usable(inst, opt, p, i, k)) continue;
              const double c = cost[j - 1][p] + detail::hop_cost(inst, p, i, k) + compute;
              if (c < cost[j][i]) {
                cost[j][i] = c;
                parent[j][i] = p;
              }
            }
          }
        }
      }
      int tail = -1;
      double best = detail::kInf;
      for (int i = 0; i < U; ++i)
        if (cost[L - 1][i] < best) {
          best = cost[L - 1][i];
          tail = i;
        }
      if (tail < 0)
        throw InfeasibleError("allocation infeasible: request " + std::to_string(r) +
                              " has no capacity-feasible chain");
      for (int j = L - 1; j >= start_layer; --j) {
        assign[r][j] = tail;
        tail = parent[j][tail];
      }
      // Commit the path while residuals allow; re-solve from the first overrun.
      int j = start_layer;
      for (; j < L; ++j) {
        const int i = assign[r][j];
        const std::uint64_t mem = inst.profile[j].mem_bytes;
        const double load = double(inst.profile[j].load_mults);
        if (mem > res_mem[i] || load > res_cmp[i]) break;
        res_mem[i] -= mem;
        res_cmp[i] -= load;
      }
      if (j == L) break;
      // The first DP layer always fits (the DP filtered on the same residuals),
      // so an overrun implies j > start_layer and assign[r][j-1] is committed.
      prev_uav = assign[r][j - 1];
      start_layer = j;
    }
  }
  return detail::finish_plan(std::move(assign), inst);
}

// Exhaustive enumeration over all U^(L*RQ) assignments; the test oracle.
inline AllocationPlan brute_force_p3(const AllocInstance& inst, const AllocOptions& opt = {}) {
  detail::validate_instance(inst);
  const int U = inst.uavs(), L = inst.layers();
  const int cells = L * int(inst.requests.size());
  if (cells * std::log(double(U)) > std::log(1e7))
    throw ValidationError("brute_force_p3: instance too large (U^(L*RQ) > 1e7)");
  if (inst.requests.empty()) return detail::finish_plan({}, inst);

  std::vector<int> flat(cells, 0);
  std::vector<std::vector<int>> assign(inst.requests.size(), std::vector<int>(L, 0));
  double best_latency = detail::kInf;
  std::vector<std::vector<int>> best;
  while (true) {
    for (int t = 0; t < cells; ++t) assign[t / L][t % L] = flat[t];
    bool feasible = true;
    std::vector<std::uint64_t> mem_used(U, 0);
    std::vector<double> cmp_used(U, 0.0);
    for (std::size_t r = 0; r < assign.size() && feasible; ++r) {
      int prev = inst.requests[r].source_uav;
      for (int j = 0; j < L && feasible; ++j) {
        const int i = assign[r][j];
        const std::uint64_t k =
            j == 0 ? inst.requests[r].input_bits() : inst.profile[j - 1].out_bits;
        if (!detail::hop_usable(inst, opt, prev, i, k)) feasible = false;
        mem_used[i] += inst.profile[j].mem_bytes;
        cmp_used[i] += double(inst.profile[j].load_mults);
        prev = i;
      }
    }
    for (int i = 0; i < U && feasible; ++i)
      if (mem_used[i] > inst.fleet[i].mem_capacity_bytes || cmp_used[i] > inst.compute_capacity[i])
        feasible = false;
    if (feasible) {
      const double latency = plan_latency(assign, inst).latency_s;
      if (latency < best_latency) {
        best_latency = latency;
        best = assign;
      }
    }
    int t = cells - 1;  // lexicographic odometer
    while (t >= 0 && flat[t] == U - 1) flat[t--] = 0;
    if (t < 0) break;
    flat[t]++;
  }
  if (best.empty())
    throw InfeasibleError("allocation infeasible: exhaustive enumeration found no feasible plan");
  return detail::finish_plan(best, inst);
}

}  // namespace llhr
