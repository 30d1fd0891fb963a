#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "llhr/allocation.hpp"
#include "llhr/baselines.hpp"
#include "llhr/channel.hpp"
#include "llhr/errors.hpp"
#include "llhr/model.hpp"
#include "llhr/position.hpp"
#include "llhr/power.hpp"
#include "llhr/rand.hpp"
#include "llhr/validate.hpp"

namespace llhr {

enum class AllocSolver { automatic, exact, greedy };

// Metrics of one simulated time frame. Latency and power fields are present
// only when every solver stage succeeded.
struct FrameResult {
  int frame = 0;
  StrategyKind strategy = StrategyKind::llhr;
  bool feasible = false;
  std::optional<double> latency_s;       // total classification latency of the frame
  std::optional<double> total_power_w;   // sum of reliable transmit powers
  std::optional<double> min_power_w;     // per-UAV mean of the minimum reliable powers
  std::vector<double> per_request_s;
  std::string note;                      // infeasibility reason when !feasible
};

struct FrameOutput {
  PositionSolution position;
  std::optional<PowerSolution> power;  // minimum reliable powers for the realized links
  std::optional<AllocationPlan> plan;
  std::vector<Link> links;  // reliability demands realized by the allocation
  FrameResult metrics;
};

inline RateMatrix rate_matrix(const std::vector<Vec2>& positions,
                              const std::vector<double>& powers_w, const ChannelParams& params) {
  const int n = int(positions.size());
  RateMatrix rates(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      if (i == k) continue;
      rates.at(i, k) = data_rate(params, powers_w[i], distance(positions[i], positions[k]));
    }
  return rates;
}

inline AllocInstance make_alloc_instance(const Scenario& scenario, RateMatrix rates) {
  AllocInstance inst;
  inst.requests = scenario.requests;
  inst.fleet = scenario.fleet;
  inst.profile = profile_model(scenario.model);
  inst.rates = std::move(rates);
  inst.compute_capacity.reserve(scenario.fleet.size());
  for (const UavProfile& p : scenario.fleet)
    inst.compute_capacity.push_back(p.mult_per_sec * scenario.time_frame_s);
  return inst;
}

// Reliability demands implied by an allocation: the input handoff of every
// request whose first layer runs off-source, plus one demand per boundary
// between consecutive layers on different UAVs.
inline std::vector<Link> demand_links(const AllocationPlan& plan,
                                      const std::vector<Request>& requests,
                                      const std::vector<LayerCost>& profile) {
  std::vector<Link> links;
  for (std::size_t r = 0; r < plan.assign.size(); ++r) {
    const int source = requests[r].source_uav;
    if (plan.assign[r].empty()) continue;
    if (plan.assign[r][0] != source)
      links.push_back({source, plan.assign[r][0], requests[r].input_bits()});
    for (std::size_t j = 0; j + 1 < plan.assign[r].size(); ++j)
      if (plan.assign[r][j] != plan.assign[r][j + 1])
        links.push_back({plan.assign[r][j], plan.assign[r][j + 1], profile[j].out_bits});
  }
  return links;
}

// First-frame bootstrap: a cycle over UAV indices so every UAV starts powered
// and able to hand requests off. The warmup payload is the largest request
// input that stays reliability-feasible at the separation-minimum distance 2R
// (captured inputs are the first thing the swarm must move); when no input
// fits one packet duration, the largest feasible inter-layer tensor is used
// instead, and with no feasible payload at all the frame starts demand-free.
inline std::vector<Link> bootstrap_links(const Scenario& scenario) {
  const int n = int(scenario.fleet.size());
  if (n < 2) return {};
  double min_pmax = scenario.fleet[0].p_max_w;
  for (const UavProfile& p : scenario.fleet) min_pmax = std::min(min_pmax, p.p_max_w);
  const double sep = 2.0 * scenario.grid.cell_radius_m;

  auto feasible = [&](std::uint64_t k_bits) {
    return pair_threshold_w(link_coefficient(scenario.channel, k_bits), sep) <= min_pmax;
  };
  std::uint64_t best = 0;
  for (const Request& r : scenario.requests)
    if (r.input_bits() > best && feasible(r.input_bits())) best = r.input_bits();
  if (best == 0)
    for (std::uint64_t k : scenario.model.inter_layer_bits)
      if (k > best && feasible(k)) best = k;
  if (best == 0) return {};

  std::vector<Link> links;
  for (int i = 0; i + 1 < n; ++i) links.push_back({i, i + 1, best});
  links.push_back({n - 1, 0, best});
  return links;
}

// One simulated fleet: positions, powers and allocation re-optimized each
// frame under the configured movement strategy. Stage infeasibility is
// recorded in the frame metrics and the run continues.
//
// Frame order: the previous allocation's links are the reliability demands
// for the position and power stages; the allocation stage then plans against
// the rates those powers support, and the powers are finally re-minimized for
// the links the new allocation actually uses (the reported transmit powers
// and hop latencies always describe realized traffic, never the warmup
// demands).
class FrameEngine {
 public:
  FrameEngine(Scenario scenario, Strategy strategy, AllocSolver solver = AllocSolver::automatic)
      : scenario_(std::move(scenario)), strategy_(std::move(strategy)), solver_(solver) {
    validate_scenario(scenario_);
    validate_strategy(strategy_, scenario_);
    const int n = int(scenario_.fleet.size());
    if (n > scenario_.grid.cell_count())
      throw ValidationError("fleet larger than the grid; no collision-free layout exists");
    profile_ = profile_model(scenario_.model);
    cells_.resize(n);
    positions_.resize(n);
    for (int i = 0; i < n; ++i) {
      cells_[i] = i;
      positions_[i] = cell_center(scenario_.grid, i);
    }
  }

  const Scenario& scenario() const { return scenario_; }
  const std::vector<Vec2>& positions() const { return positions_; }
  const std::vector<int>& cells() const { return cells_; }
  int frame() const { return frame_; }

  FrameOutput step() {
    FrameOutput out;
    out.metrics.frame = frame_;
    out.metrics.strategy = strategy_.kind;
    const int n = int(scenario_.fleet.size());
    const std::vector<Link> demands = last_plan_
                                          ? demand_links(*last_plan_, scenario_.requests, profile_)
                                          : bootstrap_links(scenario_);

    try {
      switch (strategy_.kind) {
        case StrategyKind::llhr: {
          out.position = solve_p2(p2_links(demands), scenario_.grid, scenario_.channel,
                                  scenario_.fleet, positions_);
          break;
        }
        case StrategyKind::heuristic_static: {
          out.position = placed_solution(
              heuristic_cells(strategy_.static_path, n, frame_), demands);
          break;
        }
        case StrategyKind::random_cells: {
          std::mt19937_64 rng(mix_seed(scenario_.seed, strategy_.seed, std::uint64_t(frame_)));
          out.position = placed_solution(random_cells(scenario_.grid, n, rng), demands);
          break;
        }
      }
    } catch (const Error& e) {
      out.metrics.note = e.what();
      ++frame_;
      return out;
    }
    positions_ = out.position.positions;
    cells_ = out.position.assigned_cells;

    // Planning powers for the incoming demands; they bound which hops the
    // allocation may rely on.
    PowerSolution planning;
    try {
      planning = solve_p1(positions_, demands, scenario_.channel, scenario_.fleet);
    } catch (const Error& e) {
      out.metrics.note = e.what();
      ++frame_;
      return out;
    }

    AllocInstance inst = make_alloc_instance(
        scenario_, rate_matrix(positions_, planning.powers_w, scenario_.channel));
    AllocOptions aopt;
    aopt.reliability_gate = scenario_.reliability_gate;
    aopt.tau_s = scenario_.channel.tau_s;
    try {
      out.plan = use_exact(inst) ? solve_p3_exact(inst, aopt) : solve_p3_greedy(inst, aopt);
    } catch (const Error& e) {
      out.metrics.note = e.what();
      ++frame_;
      return out;
    }
    last_plan_ = out.plan;

    // Re-minimize the powers for the links the plan actually uses and report
    // latency at the rates those powers sustain. The reliability gate keeps
    // every realized hop's threshold at or below the planning power, so this
    // stage can only fail when the gate was disabled by configuration.
    out.links = demand_links(*out.plan, scenario_.requests, profile_);
    try {
      out.power = solve_p1(positions_, out.links, scenario_.channel, scenario_.fleet);
    } catch (const Error& e) {
      out.metrics.note = e.what();
      ++frame_;
      return out;
    }
    const AllocInstance realized = make_alloc_instance(
        scenario_, rate_matrix(positions_, out.power->powers_w, scenario_.channel));
    const LatencyReport rep = plan_latency(out.plan->assign, realized);
    out.plan->latency_s = rep.latency_s;
    out.plan->breakdown = rep.breakdown;
    out.plan->per_request_s = rep.per_request_s;

    out.metrics.feasible = true;
    out.metrics.latency_s = out.plan->latency_s;
    out.metrics.total_power_w = out.power->total_w;
    out.metrics.min_power_w = out.power->total_w / double(n);
    out.metrics.per_request_s = out.plan->per_request_s;
    ++frame_;
    return out;
  }

 private:
  bool use_exact(const AllocInstance& inst) const {
    if (solver_ == AllocSolver::exact) return true;
    if (solver_ == AllocSolver::greedy) return false;
    const double cells = double(inst.layers()) * double(inst.requests.size());
    return cells * std::log(double(inst.uavs())) <= std::log(1e6);
  }

  std::vector<Link> p2_links(const std::vector<Link>& demand) const {
    if (!scenario_.position_all_pairs) return demand;
    std::uint64_t k = 0;
    for (const Link& l : demand) k = std::max(k, l.k_bits);
    if (k == 0) return demand;
    std::vector<Link> all;
    const int n = int(scenario_.fleet.size());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) all.push_back({i, j, k});
    return all;
  }

  PositionSolution placed_solution(const std::vector<int>& cells,
                                   const std::vector<Link>& links) const {
    PositionSolution sol;
    sol.assigned_cells = cells;
    sol.positions.reserve(cells.size());
    for (int c : cells) sol.positions.push_back(cell_center(scenario_.grid, c));
    auto violations = check_separation(sol.positions, 2.0 * scenario_.grid.cell_radius_m);
    if (!violations.empty()) throw InfeasibleError("placement: " + violations.front());
    sol.objective_w =
        position_objective(links, scenario_.channel, scenario_.fleet, sol.positions);
    sol.discrete_objective_w = sol.objective_w;
    sol.objective_trace = {sol.objective_w};
    return sol;
  }

  Scenario scenario_;
  Strategy strategy_;
  AllocSolver solver_;
  std::vector<LayerCost> profile_;
  std::vector<Vec2> positions_;
  std::vector<int> cells_;
  std::optional<AllocationPlan> last_plan_;
  int frame_ = 0;
};

inline std::vector<FrameResult> run_frames(const Scenario& scenario, const Strategy& strategy,
                                           int n_frames,
                                           AllocSolver solver = AllocSolver::automatic) {
  FrameEngine engine(scenario, strategy, solver);
  std::vector<FrameResult> out;
  out.reserve(std::size_t(n_frames));
  for (int f = 0; f < n_frames; ++f) out.push_back(engine.step().metrics);
  return out;
}

// Replays the deterministic frame sequence up to `frame` and returns that
// frame's stage solutions. Throws when any stage of the requested frame was
// infeasible.
inline std::tuple<PositionSolution, PowerSolution, AllocationPlan> run_strategy(
    const Strategy& strategy, const Scenario& scenario, int frame,
    AllocSolver solver = AllocSolver::automatic) {
  if (frame < 0) throw ValidationError("run_strategy: frame must be >= 0");
  FrameEngine engine(scenario, strategy, solver);
  FrameOutput out;
  for (int f = 0; f <= frame; ++f) out = engine.step();
  if (!out.power || !out.plan)
    throw InfeasibleError("frame " + std::to_string(frame) + " infeasible: " + out.metrics.note);
  return {std::move(out.position), std::move(*out.power), std::move(*out.plan)};
}

// ---------------------------------------------------------------------------
// Parameter sweeps

enum class SweepVariable { p_max, bandwidth, uav_count, request_count, device_profile, cnn_model };

inline std::string sweep_variable_name(SweepVariable v) {
  switch (v) {
    case SweepVariable::p_max: return "p_max";
    case SweepVariable::bandwidth: return "bandwidth";
    case SweepVariable::uav_count: return "uav_count";
    case SweepVariable::request_count: return "request_count";
    case SweepVariable::device_profile: return "device_profile";
    case SweepVariable::cnn_model: return "cnn_model";
  }
  return "?";
}

inline SweepVariable parse_sweep_variable(std::string_view name) {
  if (name == "p_max") return SweepVariable::p_max;
  if (name == "bandwidth") return SweepVariable::bandwidth;
  if (name == "uav_count") return SweepVariable::uav_count;
  if (name == "request_count") return SweepVariable::request_count;
  if (name == "device_profile") return SweepVariable::device_profile;
  if (name == "cnn_model") return SweepVariable::cnn_model;
  throw ConfigError("unknown sweep variable '" + std::string(name) + "'");
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// One swept value: numeric for most variables, a model id for cnn_model.
struct SweepValue {
  bool is_text = false;
  double num = 0.0;
  std::string text;

  static SweepValue number(double v) { return {false, v, {}}; }
  static SweepValue name(std::string s) { return {true, 0.0, std::move(s)}; }
  std::string to_string() const { return is_text ? text : format_double(num); }

  bool operator==(const SweepValue&) const = default;
};

struct SweepSpec {
  SweepVariable variable = SweepVariable::p_max;
  std::vector<SweepValue> values;
  int trials = 20;
  int frames = 3;
  std::vector<Strategy> strategies;
  AllocSolver solver = AllocSolver::automatic;
};

struct SweepRow {
  std::string variable;
  SweepValue value;
  StrategyKind strategy = StrategyKind::llhr;
  int trial = 0;
  FrameResult frame;
};

struct SweepCellStats {
  SweepValue value;
  StrategyKind strategy = StrategyKind::llhr;
  int rows = 0;
  int feasible_rows = 0;
  double mean_latency_s = 0.0;
  double sd_latency_s = 0.0;
  double mean_min_power_w = 0.0;
  double sd_min_power_w = 0.0;
};

inline Scenario apply_sweep_value(const Scenario& base, SweepVariable variable,
                                  const SweepValue& value) {
  Scenario s = base;
  switch (variable) {
    case SweepVariable::p_max:
      for (UavProfile& p : s.fleet) p.p_max_w = value.num;
      break;
    case SweepVariable::bandwidth:
      s.channel.bandwidth_hz = value.num;
      break;
    case SweepVariable::uav_count: {
      const int n = int(value.num);
      if (n < 1) throw ConfigError("uav_count sweep values must be >= 1");
      std::vector<UavProfile> fleet;
      fleet.reserve(std::size_t(n));
      for (int i = 0; i < n; ++i) fleet.push_back(base.fleet[std::size_t(i) % base.fleet.size()]);
      s.fleet = std::move(fleet);
      break;
    }
    case SweepVariable::request_count:
      if (int(value.num) < 1) throw ConfigError("request_count sweep values must be >= 1");
      break;  // applied during request generation
    case SweepVariable::device_profile:
      for (UavProfile& p : s.fleet) p.mult_per_sec = value.num;
      break;
    case SweepVariable::cnn_model:
      s.model = builtin_model(value.text);
      break;
  }
  return s;
}

// Per-trial request stream: `count` requests with sources drawn uniformly over
// the fleet and the model's default input payload.
inline std::vector<Request> generate_requests(const CnnModel& model, int count, int fleet_size,
                                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Request> out;
  out.reserve(std::size_t(count));
  const std::uint64_t input_bytes = (model.input_bits + 7) / 8;
  for (int r = 0; r < count; ++r) {
    const int src = std::min(fleet_size - 1, int(uniform01(rng) * fleet_size));
    out.push_back({r, src, input_bytes, model.id});
  }
  return out;
}

struct SweepResults {
  std::vector<SweepRow> rows;
  std::vector<SweepCellStats> cells;
};

// Cross product of values x strategies x trials x frames. Each cell draws its
// own request streams (one per trial, seed independent of the swept value so
// flat axes stay exactly flat); failures are recorded and the sweep continues.
inline SweepResults run_sweep(const SweepSpec& spec, const Scenario& base) {
  validate_scenario(base);
  if (spec.values.empty()) throw ConfigError("sweep: values must be non-empty");
  if (spec.trials < 1) throw ConfigError("sweep: trials must be >= 1");
  if (spec.frames < 1) throw ConfigError("sweep: frames must be >= 1");
  if (spec.strategies.empty()) throw ConfigError("sweep: at least one strategy required");

  SweepResults results;
  const std::string var_name = sweep_variable_name(spec.variable);
  for (const SweepValue& value : spec.values) {
    const Scenario cell_base = apply_sweep_value(base, spec.variable, value);
    for (std::size_t si = 0; si < spec.strategies.size(); ++si) {
      SweepCellStats stats;
      stats.value = value;
      stats.strategy = spec.strategies[si].kind;
      std::vector<double> latencies, powers;
      for (int trial = 0; trial < spec.trials; ++trial) {
        Scenario s = cell_base;
        const int count = spec.variable == SweepVariable::request_count
                              ? int(value.num)
                              : int(base.requests.size());
        s.requests = generate_requests(
            s.model, count, int(s.fleet.size()),
            mix_seed(base.seed, 0x7265712eULL, std::uint64_t(si), std::uint64_t(trial)));
        s.seed = mix_seed(base.seed, std::uint64_t(si), std::uint64_t(trial));
        std::vector<FrameResult> frames;
        try {
          frames = run_frames(s, spec.strategies[si], spec.frames, spec.solver);
        } catch (const Error& e) {
          FrameResult fr;
          fr.strategy = spec.strategies[si].kind;
          fr.note = e.what();
          frames.assign(std::size_t(spec.frames), fr);
        }
        for (const FrameResult& fr : frames) {
          results.rows.push_back({var_name, value, spec.strategies[si].kind, trial, fr});
          stats.rows++;
          if (fr.feasible) {
            stats.feasible_rows++;
            latencies.push_back(*fr.latency_s);
            powers.push_back(*fr.min_power_w);
          }
        }
      }
      auto mean_sd = [](const std::vector<double>& xs) {
        if (xs.empty()) return std::pair<double, double>{0.0, 0.0};
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= double(xs.size());
        double var = 0.0;
        for (double x : xs) var += (x - mean) * (x - mean);
        var = xs.size() > 1 ? var / double(xs.size() - 1) : 0.0;
        return std::pair<double, double>{mean, std::sqrt(var)};
      };
      std::tie(stats.mean_latency_s, stats.sd_latency_s) = mean_sd(latencies);
      std::tie(stats.mean_min_power_w, stats.sd_min_power_w) = mean_sd(powers);
      results.cells.push_back(std::move(stats));
    }
  }
  return results;
}

// ---------------------------------------------------------------------------
// CSV results table

inline const char* kSweepCsvHeader =
    "variable,value,strategy,trial,frame,latency_s,total_power_w,min_power_w,feasible";

inline void write_sweep_csv(std::ostream& os, const SweepResults& results) {
  os << kSweepCsvHeader << '\n';
  for (const SweepRow& row : results.rows) {
    os << row.variable << ',' << row.value.to_string() << ',' << strategy_name(row.strategy)
       << ',' << row.trial << ',' << row.frame.frame << ',';
    if (row.frame.feasible) {
      os << format_double(*row.frame.latency_s) << ',' << format_double(*row.frame.total_power_w)
         << ',' << format_double(*row.frame.min_power_w) << ",1\n";
    } else {
      os << ",,,0\n";
    }
  }
}

inline std::string sweep_csv_string(const SweepResults& results) {
  std::ostringstream oss;
  write_sweep_csv(oss, results);
  return oss.str();
}

// Parses a results table back into rows; the inverse of write_sweep_csv on its
// own output.
inline std::vector<SweepRow> parse_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kSweepCsvHeader)
    throw ConfigError("sweep csv: missing or unexpected header");
  std::vector<SweepRow> rows;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        fields.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    if (fields.size() != 9)
      throw ConfigError("sweep csv line " + std::to_string(line_no) + ": expected 9 fields");
    SweepRow row;
    row.variable = fields[0];
    char* end = nullptr;
    const double num = std::strtod(fields[1].c_str(), &end);
    row.value = (end && *end == '\0' && !fields[1].empty()) ? SweepValue::number(num)
                                                            : SweepValue::name(fields[1]);
    row.strategy = parse_strategy(fields[2]);
    row.trial = std::stoi(fields[3]);
    row.frame.frame = std::stoi(fields[4]);
    row.frame.strategy = row.strategy;
    row.frame.feasible = fields[8] == "1";
    if (row.frame.feasible) {
      row.frame.latency_s = std::strtod(fields[5].c_str(), nullptr);
      row.frame.total_power_w = std::strtod(fields[6].c_str(), nullptr);
      row.frame.min_power_w = std::strtod(fields[7].c_str(), nullptr);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace llhr
