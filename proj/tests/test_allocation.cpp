#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "llhr/allocation.hpp"

using namespace llhr;
using llhr::testing::rel_err;

namespace {

// Three heterogeneous UAVs with uniform generous rates.
AllocInstance lenet_instance(int uavs, double rate_bps, double frame_s = 10.0) {
  AllocInstance inst;
  const double speeds[] = {560e6, 512e6, 256e6};
  for (int i = 0; i < uavs; ++i) {
    UavProfile p;
    p.mem_capacity_bytes = 1073741824;
    p.mult_per_sec = speeds[i % 3];
    p.p_max_w = 0.12;
    inst.fleet.push_back(p);
    inst.compute_capacity.push_back(p.mult_per_sec * frame_s);
  }
  inst.profile = profile_model(lenet5());
  inst.rates = RateMatrix(uavs);
  for (int i = 0; i < uavs; ++i)
    for (int k = 0; k < uavs; ++k)
      if (i != k) inst.rates.at(i, k) = rate_bps;
  return inst;
}

void add_request(AllocInstance& inst, int source, std::uint64_t input_bytes = 3072) {
  Request r;
  r.id = int(inst.requests.size());
  r.source_uav = source;
  r.input_bytes = input_bytes;
  r.model_id = "lenet5";
  inst.requests.push_back(r);
}

}  // namespace

TEST_CASE("all layers on the source has no transmission terms") {
  AllocInstance inst = lenet_instance(3, 1e8);
  add_request(inst, 0);
  const LatencyReport rep = plan_latency({{0, 0, 0, 0, 0}}, inst);
  CHECK(rep.breakdown.source_tx_s == 0.0);
  CHECK(rep.breakdown.inter_tx_s == 0.0);
  CHECK(rel_err(rep.latency_s, 0.0011637857142857142) < 1e-12);
  CHECK(rep.latency_s == rep.breakdown.source_tx_s + rep.breakdown.compute_s +
                             rep.breakdown.inter_tx_s);
}

TEST_CASE("a single split adds exactly one boundary transfer") {
  AllocInstance inst = lenet_instance(2, 1e8);
  add_request(inst, 0);
  const LatencyReport whole = plan_latency({{0, 0, 0, 0, 0}}, inst);
  const LatencyReport split = plan_latency({{0, 0, 0, 0, 1}}, inst);
  // Boundary after layer 4 carries inter_layer_bits[3] = 2688 bits.
  const double hop = 2688.0 / 1e8;
  CHECK(rel_err(split.breakdown.inter_tx_s, hop) < 1e-12);
  const double compute_delta = 840.0 / 512e6 - 840.0 / 560e6;
  CHECK(rel_err(split.latency_s, whole.latency_s + hop + compute_delta) < 1e-9);
}

TEST_CASE("latency matches the independent indicator-sum oracle") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 200; ++trial) {
    llhr::testing::InstanceParams p;
    p.loose_capacity = true;
    const AllocInstance inst = llhr::testing::random_instance(rng, p);
    std::vector<std::vector<int>> assign(inst.requests.size(),
                                         std::vector<int>(inst.layers()));
    bool usable = true;
    for (auto& row : assign) {
      int prev = -1;
      for (int j = 0; j < inst.layers(); ++j) {
        row[j] = int(uniform_index(rng, std::uint64_t(inst.uavs())));
        if (j > 0 && row[j] != row[j - 1] && !(inst.rates(row[j - 1], row[j]) > 0.0))
          usable = false;
        prev = row[j];
      }
      (void)prev;
    }
    for (std::size_t r = 0; r < assign.size(); ++r)
      if (assign[r][0] != inst.requests[r].source_uav &&
          !(inst.rates(inst.requests[r].source_uav, assign[r][0]) > 0.0))
        usable = false;
    if (!usable) continue;
    const LatencyReport rep = plan_latency(assign, inst);
    CHECK(rel_err(rep.latency_s, llhr::testing::oracle_latency(assign, inst)) < 1e-12);
    CHECK(rep.latency_s ==
          rep.breakdown.source_tx_s + rep.breakdown.compute_s + rep.breakdown.inter_tx_s);
  }
}

TEST_CASE("lenet on three heterogeneous uavs matches the oracle") {
  AllocInstance inst = lenet_instance(3, 2e8);
  add_request(inst, 2);
  const std::vector<std::vector<int>> assign = {{0, 0, 1, 2, 1}};
  CHECK(rel_err(plan_latency(assign, inst).latency_s,
                llhr::testing::oracle_latency(assign, inst)) < 1e-12);
}

TEST_CASE("plan_latency error paths") {
  AllocInstance inst = lenet_instance(2, 1e8);
  add_request(inst, 0);
  REQUIRE_THROWS_AS(plan_latency({}, inst), ValidationError);
  REQUIRE_THROWS_AS(plan_latency({{0, 0, 0}}, inst), ValidationError);
  inst.rates.at(0, 1) = 0.0;
  REQUIRE_THROWS_WITH(plan_latency({{0, 1, 1, 1, 1}}, inst),
                      Catch::Matchers::ContainsSubstring("zero-rate"));
}

TEST_CASE("single uav forces an all-on-source plan or infeasibility") {
  AllocInstance inst = lenet_instance(1, 1e8);
  add_request(inst, 0);
  const AllocationPlan plan = solve_p3_exact(inst);
  CHECK(plan.assign == std::vector<std::vector<int>>{{0, 0, 0, 0, 0}});
  AllocInstance tight = inst;
  tight.compute_capacity[0] = 1000.0;
  REQUIRE_THROWS_AS(solve_p3_exact(tight), InfeasibleError);
}

TEST_CASE("slow link keeps both layers on the source") {
  AllocInstance inst;
  for (int i = 0; i < 2; ++i) {
    UavProfile p;
    p.mem_capacity_bytes = 1 << 20;
    p.mult_per_sec = 1e6;
    p.p_max_w = 1.0;
    inst.fleet.push_back(p);
    inst.compute_capacity.push_back(1e9);
  }
  inst.profile = {{1000, 10, 8000}, {1000, 10, 64}};
  inst.rates = RateMatrix(2);
  inst.rates.at(0, 1) = inst.rates.at(1, 0) = 100.0;  // 80 s per hop
  add_request(inst, 0, 100);
  const AllocationPlan plan = solve_p3_exact(inst);
  CHECK(plan.assign == std::vector<std::vector<int>>{{0, 0}});
  CHECK(plan.latency_s == brute_force_p3(inst).latency_s);
}

TEST_CASE("exact solver equals brute force on random instances") {
  std::mt19937_64 rng(47);
  int compared = 0;
  for (int trial = 0; trial < 120; ++trial) {
    llhr::testing::InstanceParams p;
    const AllocInstance inst = llhr::testing::random_instance(rng, p);
    AllocationPlan exact, brute;
    bool exact_ok = true, brute_ok = true;
    try {
      exact = solve_p3_exact(inst);
    } catch (const InfeasibleError&) {
      exact_ok = false;
    }
    try {
      brute = brute_force_p3(inst);
    } catch (const InfeasibleError&) {
      brute_ok = false;
    }
    REQUIRE(exact_ok == brute_ok);
    if (!exact_ok) continue;
    CHECK(rel_err(exact.latency_s, brute.latency_s) < 1e-12);
    ++compared;
  }
  CHECK(compared > 40);
}

TEST_CASE("exact solver equals brute force with the reliability gate") {
  std::mt19937_64 rng(53);
  AllocOptions opt;
  opt.reliability_gate = true;
  opt.tau_s = 1e-2;
  for (int trial = 0; trial < 60; ++trial) {
    llhr::testing::InstanceParams p;
    const AllocInstance inst = llhr::testing::random_instance(rng, p);
    AllocationPlan exact, brute;
    bool exact_ok = true, brute_ok = true;
    try {
      exact = solve_p3_exact(inst, opt);
    } catch (const InfeasibleError&) {
      exact_ok = false;
    }
    try {
      brute = brute_force_p3(inst, opt);
    } catch (const InfeasibleError&) {
      brute_ok = false;
    }
    REQUIRE(exact_ok == brute_ok);
    if (exact_ok) CHECK(rel_err(exact.latency_s, brute.latency_s) < 1e-12);
  }
}

TEST_CASE("greedy equals exact when capacities never bind") {
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 80; ++trial) {
    llhr::testing::InstanceParams p;
    p.loose_capacity = true;
    const AllocInstance inst = llhr::testing::random_instance(rng, p);
    const AllocationPlan exact = solve_p3_exact(inst);
    const AllocationPlan greedy = solve_p3_greedy(inst);
    CHECK(rel_err(greedy.latency_s, exact.latency_s) < 1e-12);
  }
}

TEST_CASE("single request greedy is exact") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 50; ++trial) {
    llhr::testing::InstanceParams p;
    p.max_requests = 1;
    p.loose_capacity = true;
    const AllocInstance inst = llhr::testing::random_instance(rng, p);
    CHECK(rel_err(solve_p3_greedy(inst).latency_s, solve_p3_exact(inst).latency_s) < 1e-12);
  }
}

TEST_CASE("adversarial tight memory makes greedy suboptimal but feasible") {
  AllocInstance inst;
  const double e[] = {10.0, 1.0};
  for (int i = 0; i < 2; ++i) {
    UavProfile p;
    p.mem_capacity_bytes = 12;
    p.mult_per_sec = e[i];
    p.p_max_w = 1.0;
    inst.fleet.push_back(p);
    inst.compute_capacity.push_back(1e9);
  }
  inst.profile = {{10, 6, 8}, {2, 6, 8}};
  inst.rates = RateMatrix(2);
  inst.rates.at(0, 1) = inst.rates.at(1, 0) = 1e12;
  add_request(inst, 0, 1);
  add_request(inst, 0, 1);

  const AllocationPlan greedy = solve_p3_greedy(inst);
  const AllocationPlan exact = solve_p3_exact(inst);
  const AllocationPlan brute = brute_force_p3(inst);
  CHECK(rel_err(exact.latency_s, brute.latency_s) < 1e-12);
  CHECK(greedy.latency_s > exact.latency_s);
  // Greedy's plan still satisfies the capacity constraints.
  CHECK(check_allocation(greedy, inst).empty());
}

TEST_CASE("adding a uav or raising a rate never hurts the optimum") {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 40; ++trial) {
    llhr::testing::InstanceParams p;
    p.max_uavs = 2;
    p.max_layers = 3;
    const AllocInstance inst = llhr::testing::random_instance(rng, p);
    AllocationPlan base;
    try {
      base = solve_p3_exact(inst);
    } catch (const InfeasibleError&) {
      continue;
    }
    // Add a fresh UAV wired with generous rates.
    AllocInstance bigger = inst;
    UavProfile extra;
    extra.mem_capacity_bytes = 1 << 20;
    extra.mult_per_sec = 5e5;
    extra.p_max_w = 1.0;
    bigger.fleet.push_back(extra);
    bigger.compute_capacity.push_back(1e9);
    RateMatrix r(bigger.uavs());
    for (int i = 0; i < inst.uavs(); ++i)
      for (int k = 0; k < inst.uavs(); ++k) r.at(i, k) = inst.rates(i, k);
    for (int i = 0; i < inst.uavs(); ++i) {
      r.at(i, inst.uavs()) = 1e8;
      r.at(inst.uavs(), i) = 1e8;
    }
    bigger.rates = std::move(r);
    CHECK(solve_p3_exact(bigger).latency_s <= base.latency_s * (1.0 + 1e-12));

    // Raise one positive rate.
    AllocInstance faster = inst;
    bool bumped = false;
    for (int i = 0; i < inst.uavs() && !bumped; ++i)
      for (int k = 0; k < inst.uavs() && !bumped; ++k)
        if (i != k && faster.rates(i, k) > 0.0) {
          faster.rates.at(i, k) *= 3.0;
          bumped = true;
        }
    if (bumped) CHECK(solve_p3_exact(faster).latency_s <= base.latency_s * (1.0 + 1e-12));
  }
}

TEST_CASE("brute force refuses oversized instances") {
  AllocInstance inst = lenet_instance(6, 1e8);
  for (int r = 0; r < 4; ++r) add_request(inst, r);
  REQUIRE_THROWS_AS(brute_force_p3(inst), ValidationError);
}

TEST_CASE("reliability gate blocks oversized hops") {
  AllocInstance inst;
  const double e[] = {1.0, 100.0};
  for (int i = 0; i < 2; ++i) {
    UavProfile p;
    p.mem_capacity_bytes = 1 << 20;
    p.mult_per_sec = e[i];
    p.p_max_w = 1.0;
    inst.fleet.push_back(p);
    inst.compute_capacity.push_back(1e9);
  }
  inst.profile = {{100, 10, 800}, {100, 10, 64}};
  inst.rates = RateMatrix(2);
  inst.rates.at(0, 1) = inst.rates.at(1, 0) = 1e6;
  add_request(inst, 0, 1000);  // 8000-bit input

  AllocOptions gate;
  gate.reliability_gate = true;
  gate.tau_s = 1e-3;  // rate * tau = 1000 bits < input payload
  const AllocationPlan gated = solve_p3_exact(inst, gate);
  CHECK(gated.assign[0][0] == 0);  // input handoff blocked, layer 1 pinned to source
  const AllocationPlan open = solve_p3_exact(inst);
  CHECK(open.assign[0][0] == 1);  // without the gate the fast helper wins
  CHECK(open.latency_s < gated.latency_s);
}
