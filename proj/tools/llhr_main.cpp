// Command line front end: single runs (JSON plan dumps), parameter sweeps
// (CSV tables) and CNN cost profiles.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "llhr/llhr.hpp"

namespace {

using ordered_json = nlohmann::ordered_json;

llhr::AllocSolver parse_solver(const std::string& name) {
  if (name == "auto") return llhr::AllocSolver::automatic;
  if (name == "exact") return llhr::AllocSolver::exact;
  if (name == "greedy") return llhr::AllocSolver::greedy;
  throw llhr::ConfigError("unknown solver '" + name + "' (expected auto, exact or greedy)");
}

ordered_json frame_to_json(const llhr::FrameOutput& out, const llhr::AllocInstance& inst) {
  ordered_json j;
  j["frame"] = out.metrics.frame;
  j["feasible"] = out.metrics.feasible;
  if (!out.metrics.feasible) {
    j["note"] = out.metrics.note;
    return j;
  }
  j["latency_s"] = *out.metrics.latency_s;
  j["total_power_w"] = *out.metrics.total_power_w;
  j["min_power_w"] = *out.metrics.min_power_w;
  ordered_json positions = ordered_json::array();
  for (const llhr::Vec2& p : out.position.positions) positions.push_back({p.x, p.y});
  j["positions"] = std::move(positions);
  j["assigned_cells"] = out.position.assigned_cells;
  j["powers_w"] = out.power->powers_w;
  j["per_request_s"] = out.metrics.per_request_s;
  j["breakdown"] = {{"source_tx_s", out.plan->breakdown.source_tx_s},
                    {"compute_s", out.plan->breakdown.compute_s},
                    {"inter_tx_s", out.plan->breakdown.inter_tx_s}};

  // Tabular plan export: per (request, layer) the executing UAV, the transfer
  // into that layer and the cumulative latency along the chain.
  ordered_json plan = ordered_json::array();
  for (std::size_t r = 0; r < out.plan->assign.size(); ++r) {
    ordered_json req;
    req["request"] = int(r);
    req["source_uav"] = inst.requests[r].source_uav;
    ordered_json layers = ordered_json::array();
    double cumulative = 0.0;
    int prev = inst.requests[r].source_uav;
    for (std::size_t jl = 0; jl < out.plan->assign[r].size(); ++jl) {
      const int uav = out.plan->assign[r][jl];
      const std::uint64_t k_bits =
          jl == 0 ? inst.requests[r].input_bits() : inst.profile[jl - 1].out_bits;
      const double hop = uav == prev ? 0.0 : double(k_bits) / inst.rates(prev, uav);
      const double compute = double(inst.profile[jl].load_mults) / inst.fleet[uav].mult_per_sec;
      cumulative += hop + compute;
      layers.push_back({{"layer", int(jl)},
                        {"uav", uav},
                        {"hop_s", hop},
                        {"compute_s", compute},
                        {"cumulative_s", cumulative}});
      prev = uav;
    }
    req["layers"] = std::move(layers);
    plan.push_back(std::move(req));
  }
  j["plan"] = std::move(plan);
  return j;
}

int cmd_run(const std::string& config_path, const std::string& strategy_name, int frames,
            std::optional<std::uint64_t> seed, const std::string& out_path,
            const std::string& solver_name) {
  llhr::Scenario scenario = llhr::load_scenario_file(config_path);
  if (seed) scenario.seed = *seed;
  const llhr::Strategy strategy =
      llhr::make_strategy(llhr::parse_strategy(strategy_name), scenario);
  const llhr::AllocSolver solver = parse_solver(solver_name);

  llhr::FrameEngine engine(scenario, strategy, solver);
  ordered_json doc;
  doc["strategy"] = strategy_name;
  doc["config"] = config_path;
  doc["seed"] = scenario.seed;
  doc["frames"] = frames;
  ordered_json results = ordered_json::array();
  int feasible_frames = 0;
  for (int f = 0; f < frames; ++f) {
    llhr::FrameOutput out = engine.step();
    llhr::AllocInstance inst;
    if (out.metrics.feasible) {
      inst = llhr::make_alloc_instance(
          scenario, llhr::rate_matrix(out.position.positions, out.power->powers_w,
                                      scenario.channel));
      ++feasible_frames;
    }
    results.push_back(frame_to_json(out, inst));
  }
  doc["results"] = std::move(results);

  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream os(out_path, std::ios::binary);
    if (!os) throw llhr::ConfigError("cannot write '" + out_path + "'");
    os << text;
  }
  return feasible_frames == 0 && frames > 0 ? 2 : 0;
}

int cmd_sweep(const std::string& config_path, const std::string& spec_path,
              const std::string& out_path) {
  const llhr::Scenario scenario = llhr::load_scenario_file(config_path);
  const llhr::SweepSpec spec = llhr::load_sweep_file(spec_path, scenario);
  const llhr::SweepResults results = llhr::run_sweep(spec, scenario);

  const std::string csv = llhr::sweep_csv_string(results);
  if (out_path.empty()) {
    std::cout << csv;
  } else {
    std::ofstream os(out_path, std::ios::binary);
    if (!os) throw llhr::ConfigError("cannot write '" + out_path + "'");
    os << csv;
    // Per-cell summary on stdout when the table goes to a file.
    std::cout << "value,strategy,feasible_rows,mean_latency_s,sd_latency_s,mean_min_power_w,"
                 "sd_min_power_w\n";
    for (const llhr::SweepCellStats& c : results.cells) {
      std::cout << c.value.to_string() << ',' << llhr::strategy_name(c.strategy) << ','
                << c.feasible_rows << '/' << c.rows << ','
                << llhr::format_double(c.mean_latency_s) << ','
                << llhr::format_double(c.sd_latency_s) << ','
                << llhr::format_double(c.mean_min_power_w) << ','
                << llhr::format_double(c.sd_min_power_w) << '\n';
    }
  }
  int feasible = 0;
  for (const llhr::SweepCellStats& c : results.cells) feasible += c.feasible_rows;
  return feasible == 0 ? 2 : 0;
}

int cmd_profile(const std::string& model_ref) {
  const llhr::CnnModel model = llhr::resolve_model(model_ref);
  const std::vector<llhr::LayerCost> profile = llhr::profile_model(model);
  std::cout << "model " << model.id << ": " << model.layers.size() << " layers, input "
            << model.input_bits << " bits, output " << model.output_bits << " bits\n";
  std::cout << "layer kind load_mults mem_bytes out_bits\n";
  for (std::size_t j = 0; j < profile.size(); ++j) {
    const char* kind =
        model.layers[j].kind == llhr::LayerKind::convolutional ? "conv" : "fc";
    std::cout << (j + 1) << ' ' << kind << ' ' << profile[j].load_mults << ' '
              << profile[j].mem_bytes << ' ' << profile[j].out_bits << '\n';
  }
  std::cout << "total - " << llhr::total_load(profile) << ' '
            << llhr::total_memory_bytes(profile) << " -\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LLHR swarm inference planner"};
  app.require_subcommand(1);

  std::string config_path, out_path, spec_path, model_ref;
  std::string strategy_name = "llhr";
  std::string solver_name = "auto";
  int frames = 1;
  std::optional<std::uint64_t> seed;

  CLI::App* run = app.add_subcommand("run", "simulate frames and dump plans as JSON");
  run->add_option("--config", config_path, "scenario file")->required();
  run->add_option("--strategy", strategy_name, "llhr|heuristic|random")
      ->check(CLI::IsMember({"llhr", "heuristic", "random"}));
  run->add_option("--frames", frames, "number of time frames")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--out", out_path, "output JSON path (stdout when omitted)");
  run->add_option("--solver", solver_name, "auto|exact|greedy")
      ->check(CLI::IsMember({"auto", "exact", "greedy"}));

  CLI::App* sweep = app.add_subcommand("sweep", "run a parameter sweep and emit CSV");
  sweep->add_option("--config", config_path, "base scenario file")->required();
  sweep->add_option("--spec", spec_path, "sweep spec file")->required();
  sweep->add_option("--out", out_path, "output CSV path (stdout when omitted)");

  CLI::App* profile = app.add_subcommand("profile", "print the per-layer cost table");
  profile->add_option("--model", model_ref, "lenet5|alexnet|<descriptor file>")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, strategy_name, frames, seed, out_path, solver_name);
    if (sweep->parsed()) return cmd_sweep(config_path, spec_path, out_path);
    if (profile->parsed()) return cmd_profile(model_ref);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
