#pragma once

// Shared generators and independent oracles for the test suites. The oracles
// are deliberately straight-line re-implementations, kept free of the library
// code paths they are used to check.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "llhr/llhr.hpp"

namespace llhr::testing {

inline double rel_err(double got, double want) {
  if (want == 0.0) return std::fabs(got);
  return std::fabs(got - want) / std::fabs(want);
}

// --------------------------------------------------------------------------
// Independent latency oracle: literal indicator-variable triple sums.

inline double oracle_latency(const std::vector<std::vector<int>>& assign,
                             const AllocInstance& inst) {
  const int U = inst.uavs();
  const int L = inst.layers();
  const int RQ = int(inst.requests.size());
  // delta[r][i][j] = 1 iff UAV i executes layer j of request r.
  std::vector<std::vector<std::vector<int>>> delta(
      RQ, std::vector<std::vector<int>>(U, std::vector<int>(L, 0)));
  for (int r = 0; r < RQ; ++r)
    for (int j = 0; j < L; ++j) delta[r][assign[r][j]][j] = 1;

  long double total = 0.0L;
  // Intermediate transfers between consecutive layers on different UAVs.
  for (int r = 0; r < RQ; ++r)
    for (int i = 0; i < U; ++i)
      for (int k = 0; k < U; ++k) {
        if (k == i) continue;
        for (int j = 0; j + 1 < L; ++j)
          if (delta[r][i][j] && delta[r][k][j + 1])
            total += (long double)(inst.profile[j].out_bits) / inst.rates(i, k);
      }
  // Per-device processing time.
  for (int i = 0; i < U; ++i) {
    long double t = 0.0L;
    for (int r = 0; r < RQ; ++r)
      for (int j = 0; j < L; ++j)
        if (delta[r][i][j]) t += (long double)(inst.profile[j].load_mults);
    total += t / inst.fleet[i].mult_per_sec;
  }
  // Source handoff when layer 1 runs off the capturing UAV.
  for (int r = 0; r < RQ; ++r) {
    const int s = inst.requests[r].source_uav;
    for (int k = 0; k < U; ++k) {
      if (k == s) continue;
      if ((1 - delta[r][s][0]) && delta[r][k][0])
        total += (long double)(inst.requests[r].input_bits()) / inst.rates(s, k);
    }
  }
  return double(total);
}

// --------------------------------------------------------------------------
// Independent placement oracle: enumerate every injective assignment of UAVs
// to cell centers and evaluate the threshold-power objective directly.

inline double oracle_p2_objective(const std::vector<Link>& links, const GridSpec& grid,
                                  const ChannelParams& params,
                                  const std::vector<UavProfile>& profiles) {
  const int n = int(profiles.size());
  const int cells = grid.cell_count();
  std::vector<int> pick(n, -1);
  std::vector<bool> used(cells, false);
  double best = std::numeric_limits<double>::infinity();

  auto evaluate = [&]() {
    double sum = 0.0;
    for (const Link& l : links) {
      const Vec2 a = cell_center(grid, pick[l.from]);
      const Vec2 b = cell_center(grid, pick[l.to]);
      double d = std::hypot(a.x - b.x, a.y - b.y);
      if (d < 1.0) d = 1.0;
      const double coeff = params.noise_power_w / params.h0 *
                           std::expm1(double(l.k_bits) * std::numbers::ln2 /
                                      (params.bandwidth_hz * params.tau_s));
      const double thr = coeff * d * d;
      if (thr > profiles[l.from].p_max_w) return std::numeric_limits<double>::infinity();
      sum += thr;
    }
    return sum;
  };

  std::function<void(int)> rec = [&](int u) {
    if (u == n) {
      best = std::min(best, evaluate());
      return;
    }
    for (int c = 0; c < cells; ++c) {
      if (used[c]) continue;
      used[c] = true;
      pick[u] = c;
      rec(u + 1);
      used[c] = false;
    }
  };
  rec(0);
  return best;
}

// --------------------------------------------------------------------------
// Random instance generators.

struct InstanceParams {
  int max_uavs = 3;
  int max_layers = 4;
  int max_requests = 2;
  bool loose_capacity = false;  // capacities that never bind
  bool gate = false;
};

inline AllocInstance random_instance(std::mt19937_64& rng, const InstanceParams& p) {
  AllocInstance inst;
  const int U = 1 + int(uniform_index(rng, std::uint64_t(p.max_uavs)));
  const int L = 1 + int(uniform_index(rng, std::uint64_t(p.max_layers)));
  const int RQ = 1 + int(uniform_index(rng, std::uint64_t(p.max_requests)));

  std::uint64_t total_mem = 0;
  double total_load = 0.0;
  for (int j = 0; j < L; ++j) {
    LayerCost c;
    c.load_mults = 1 + uniform_index(rng, 1000);
    c.mem_bytes = 1 + uniform_index(rng, 1000);
    c.out_bits = 1 + uniform_index(rng, 5000);
    total_mem += c.mem_bytes;
    total_load += double(c.load_mults);
    inst.profile.push_back(c);
  }
  for (int i = 0; i < U; ++i) {
    UavProfile u;
    if (p.loose_capacity) {
      u.mem_capacity_bytes = total_mem * std::uint64_t(RQ) + 1000;
      inst.compute_capacity.push_back(total_load * RQ + 1000.0);
    } else {
      u.mem_capacity_bytes = total_mem / 2 + 1 + uniform_index(rng, total_mem * RQ + 1);
      inst.compute_capacity.push_back(total_load / 2.0 + 1.0 +
                                      uniform_index(rng, std::uint64_t(total_load) * RQ + 1));
    }
    u.mult_per_sec = uniform_real(rng, 1e3, 1e6);
    u.p_max_w = 1.0;
    inst.fleet.push_back(u);
  }
  inst.rates = RateMatrix(U);
  for (int i = 0; i < U; ++i)
    for (int k = 0; k < U; ++k) {
      if (i == k) continue;
      // Occasionally dead links to exercise the usability handling.
      inst.rates.at(i, k) = uniform01(rng) < 0.15 ? 0.0 : uniform_real(rng, 1e4, 1e8);
    }
  for (int r = 0; r < RQ; ++r) {
    Request req;
    req.id = r;
    req.source_uav = int(uniform_index(rng, std::uint64_t(U)));
    req.input_bytes = 1 + uniform_index(rng, 2000);
    req.model_id = "m";
    inst.requests.push_back(req);
  }
  return inst;
}

// A valid scenario with randomized geometry, fleet, channel and a small
// random model; always passes validate_scenario.
inline Scenario random_scenario(std::mt19937_64& rng) {
  Scenario s;
  s.grid.cols = 3 + int(uniform_index(rng, 6));
  s.grid.rows = 3 + int(uniform_index(rng, 6));
  s.grid.cell_width_m = uniform_real(rng, 20.0, 60.0);
  s.grid.cell_height_m = s.grid.cell_width_m;
  s.grid.cell_radius_m =
      std::min(s.grid.cell_width_m, s.grid.cell_height_m) / 2.0 * uniform_real(rng, 0.5, 1.0);

  const int U = 2 + int(uniform_index(rng, 4));
  for (int i = 0; i < U; ++i) {
    UavProfile p;
    p.mem_capacity_bytes = 1 << 20;
    p.mult_per_sec = uniform_real(rng, 1e8, 6e8);
    p.p_max_w = 0.12;
    s.fleet.push_back(p);
  }

  s.channel.h0 = 1e-5;
  s.channel.noise_power_w = 1e-20;
  s.channel.bandwidth_hz = uniform_real(rng, 5e6, 3e7);
  s.channel.tau_s = 1e-4;

  CnnModel m;
  m.id = "tiny";
  const int L = 2 + int(uniform_index(rng, 3));
  for (int j = 0; j < L; ++j) {
    LayerSpec l;
    l.kind = uniform01(rng) < 0.5 ? LayerKind::convolutional : LayerKind::fully_connected;
    l.in_channels = 1 + uniform_index(rng, 16);
    l.out_channels = 1 + uniform_index(rng, 16);
    if (l.kind == LayerKind::convolutional) {
      l.filter_side = 1 + uniform_index(rng, 4);
      l.out_spatial_side = 1 + uniform_index(rng, 8);
    }
    l.weight_count = default_weight_count(l);
    l.weight_bits = 32;
    m.layers.push_back(l);
  }
  m.inter_layer_bits = default_inter_layer_bits(m.layers, 8);
  m.input_bits = 8 * (1 + uniform_index(rng, 2000));
  m.output_bits = 64;
  s.model = m;

  const int RQ = 1 + int(uniform_index(rng, 3));
  for (int r = 0; r < RQ; ++r) {
    Request req;
    req.id = r;
    req.source_uav = int(uniform_index(rng, std::uint64_t(U)));
    req.input_bytes = (m.input_bits + 7) / 8;
    req.model_id = m.id;
    s.requests.push_back(req);
  }
  s.time_frame_s = uniform_real(rng, 0.5, 2.0);
  s.seed = rng();
  return s;
}

}  // namespace llhr::testing
