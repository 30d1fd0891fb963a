#pragma once

#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "llhr/baselines.hpp"
#include "llhr/cnn.hpp"
#include "llhr/errors.hpp"
#include "llhr/model.hpp"
#include "llhr/sim.hpp"

namespace llhr {

// Config dialect: line oriented, '#' comments, [section] headers, key = value
// entries. Unknown sections and keys are errors (fail closed), as are
// duplicate keys within one section.

struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;
};

struct ConfigSection {
  std::string name;
  int line = 0;
  std::vector<ConfigEntry> entries;
};

struct ConfigDoc {
  std::string source;  // file name for error messages
  std::vector<ConfigSection> sections;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

inline ConfigDoc parse_config(std::string_view text, std::string source = "<config>") {
  ConfigDoc doc;
  doc.source = std::move(source);
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(doc.source + ":" + std::to_string(line_no) + ": malformed section header");
      doc.sections.push_back(
          {std::string(detail::trim(line.substr(1, line.size() - 2))), line_no, {}});
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(doc.source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    if (doc.sections.empty())
      throw ConfigError(doc.source + ":" + std::to_string(line_no) + ": entry outside any section");
    doc.sections.back().entries.push_back({std::string(detail::trim(line.substr(0, eq))),
                                           std::string(detail::trim(line.substr(eq + 1))), line_no});
  }
  return doc;
}

// Typed accessor over one section; every key must be consumed exactly once.
class SectionReader {
 public:
  SectionReader(const ConfigDoc& doc, const ConfigSection& section)
      : doc_(doc), section_(section), used_(section.entries.size(), false) {}

  std::optional<std::string> take(const std::string& key) {
    std::optional<std::string> found;
    for (std::size_t i = 0; i < section_.entries.size(); ++i) {
      if (section_.entries[i].key != key) continue;
      if (used_[i] || found)
        throw ConfigError(where(section_.entries[i].line) + ": duplicate key '" + key + "'");
      used_[i] = true;
      found = section_.entries[i].value;
    }
    return found;
  }

  std::string require(const std::string& key) {
    auto v = take(key);
    if (!v)
      throw ConfigError(where(section_.line) + ": [" + section_.name + "] missing required key '" +
                        key + "'");
    return *v;
  }

  double require_double(const std::string& key) { return to_double(key, require(key)); }
  std::uint64_t require_u64(const std::string& key) { return to_u64(key, require(key)); }
  int require_int(const std::string& key) { return int(to_u64(key, require(key))); }

  std::optional<double> take_double(const std::string& key) {
    auto v = take(key);
    if (!v) return std::nullopt;
    return to_double(key, *v);
  }
  std::optional<std::uint64_t> take_u64(const std::string& key) {
    auto v = take(key);
    if (!v) return std::nullopt;
    return to_u64(key, *v);
  }
  std::optional<int> take_int(const std::string& key) {
    auto v = take_u64(key);
    if (!v) return std::nullopt;
    return int(*v);
  }
  std::optional<bool> take_bool(const std::string& key) {
    auto v = take(key);
    if (!v) return std::nullopt;
    if (*v == "true") return true;
    if (*v == "false") return false;
    throw ConfigError(where(section_.line) + ": key '" + key + "' expects true or false");
  }

  // Fail closed: reject any key the loader did not recognize.
  void finish() const {
    for (std::size_t i = 0; i < section_.entries.size(); ++i)
      if (!used_[i])
        throw ConfigError(where(section_.entries[i].line) + ": unknown key '" +
                          section_.entries[i].key + "' in [" + section_.name + "]");
  }

  const std::string& name() const { return section_.name; }
  int line() const { return section_.line; }

 private:
  std::string where(int line) const { return doc_.source + ":" + std::to_string(line); }

  double to_double(const std::string& key, const std::string& value) const {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (value.empty() || (end && *end != '\0') || errno == ERANGE)
      throw ConfigError(where(section_.line) + ": key '" + key + "': '" + value +
                        "' is not a number");
    return v;
  }

  std::uint64_t to_u64(const std::string& key, const std::string& value) const {
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
    if (value.empty() || (end && *end != '\0') || errno == ERANGE || value.front() == '-')
      throw ConfigError(where(section_.line) + ": key '" + key + "': '" + value +
                        "' is not a non-negative integer");
    return v;
  }

  const ConfigDoc& doc_;
  const ConfigSection& section_;
  std::vector<bool> used_;
};

// ---------------------------------------------------------------------------
// CNN model loading

namespace detail {

inline LayerSpec layer_from_section(const ConfigDoc& doc, const ConfigSection& section,
                                    std::uint64_t default_weight_bits) {
  SectionReader r(doc, section);
  LayerSpec layer;
  const std::string kind = r.require("kind");
  if (kind == "conv") layer.kind = LayerKind::convolutional;
  else if (kind == "fc") layer.kind = LayerKind::fully_connected;
  else
    throw ConfigError(doc.source + ":" + std::to_string(section.line) +
                      ": layer kind must be conv or fc, got '" + kind + "'");
  layer.in_channels = r.require_u64("in_channels");
  layer.out_channels = r.require_u64("out_channels");
  if (layer.kind == LayerKind::convolutional) {
    layer.filter_side = r.require_u64("filter_side");
    layer.out_spatial_side = r.require_u64("out_spatial_side");
  }
  layer.weight_bits = r.take_u64("weight_bits").value_or(default_weight_bits);
  layer.weight_count = r.take_u64("weight_count").value_or(default_weight_count(layer));
  // out_bits handled by the model loader (it needs layer ordering); leave the
  // key unconsumed only if absent.
  r.take("out_bits");
  r.finish();
  return layer;
}

inline std::optional<std::uint64_t> layer_out_bits_override(const ConfigDoc& doc,
                                                            const ConfigSection& section) {
  for (const ConfigEntry& e : section.entries)
    if (e.key == "out_bits") {
      errno = 0;
      char* end = nullptr;
      const unsigned long long v = std::strtoull(e.value.c_str(), &end, 10);
      if (e.value.empty() || (end && *end != '\0') || errno == ERANGE)
        throw ConfigError(doc.source + ":" + std::to_string(e.line) +
                          ": out_bits must be a non-negative integer");
      return v;
    }
  return std::nullopt;
}

}  // namespace detail

// Builds a model from a [model] section plus the [layer] sections that follow
// it in document order.
inline CnnModel model_from_doc(const ConfigDoc& doc, std::size_t model_index,
                               const std::vector<std::size_t>& layer_indices) {
  SectionReader r(doc, doc.sections[model_index]);
  const std::string id = r.require("id");
  if (layer_indices.empty()) {
    r.finish();
    return builtin_model(id);  // bare id refers to a built-in
  }
  CnnModel m;
  m.id = id;
  const std::uint64_t weight_bits = r.take_u64("weight_bits").value_or(32);
  const std::uint64_t activation_bits = r.take_u64("activation_bits").value_or(32);
  const auto input_bits = r.take_u64("input_bits");
  const auto output_bits = r.take_u64("output_bits");
  for (std::size_t idx : layer_indices)
    m.layers.push_back(detail::layer_from_section(doc, doc.sections[idx], weight_bits));
  if (!input_bits)
    throw ConfigError(doc.source + ": [model] '" + id + "': input_bits is required for " +
                      "custom models");
  m.input_bits = *input_bits;
  m.output_bits = output_bits.value_or(
      default_layer_out_bits(m.layers.back(), activation_bits));
  for (std::size_t j = 0; j + 1 < layer_indices.size(); ++j) {
    const auto override = detail::layer_out_bits_override(doc, doc.sections[layer_indices[j]]);
    m.inter_layer_bits.push_back(
        override.value_or(default_layer_out_bits(m.layers[j], activation_bits)));
  }
  if (auto last = detail::layer_out_bits_override(doc, doc.sections[layer_indices.back()]))
    throw ConfigError(doc.source + ": [model] '" + id +
                      "': out_bits on the last layer is ignored; set output_bits instead");
  r.finish();
  validate_model(m);
  return m;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file '" + path + "'");
  std::ostringstream oss;
  oss << in.rdbuf();
  return oss.str();
}

inline CnnModel load_model(const std::string& text, const std::string& source = "<model>") {
  const ConfigDoc doc = parse_config(text, source);
  std::optional<std::size_t> model_index;
  std::vector<std::size_t> layer_indices;
  for (std::size_t i = 0; i < doc.sections.size(); ++i) {
    if (doc.sections[i].name == "model") {
      if (model_index)
        throw ConfigError(source + ":" + std::to_string(doc.sections[i].line) +
                          ": multiple [model] sections");
      model_index = i;
    } else if (doc.sections[i].name == "layer") {
      if (!model_index)
        throw ConfigError(source + ":" + std::to_string(doc.sections[i].line) +
                          ": [layer] before [model]");
      layer_indices.push_back(i);
    } else {
      throw ConfigError(source + ":" + std::to_string(doc.sections[i].line) +
                        ": unknown section [" + doc.sections[i].name + "]");
    }
  }
  if (!model_index) throw ConfigError(source + ": missing [model] section");
  return model_from_doc(doc, *model_index, layer_indices);
}

inline CnnModel load_model_file(const std::string& path) {
  return load_model(read_file(path), path);
}

// Resolves a model reference used by the CLI: a built-in id or a file path.
inline CnnModel resolve_model(const std::string& ref) {
  if (is_builtin_model(ref)) return builtin_model(ref);
  return load_model_file(ref);
}

// ---------------------------------------------------------------------------
// Scenario loading

inline Scenario load_scenario(const std::string& text, const std::string& source = "<scenario>",
                              const std::string& base_dir = ".") {
  const ConfigDoc doc = parse_config(text, source);
  Scenario s;
  bool saw_grid = false, saw_channel = false, saw_model = false;
  std::optional<std::size_t> model_index;
  std::vector<std::size_t> layer_indices;
  std::vector<std::size_t> uav_indices, request_indices;
  std::optional<std::size_t> scenario_index;

  for (std::size_t i = 0; i < doc.sections.size(); ++i) {
    const std::string& name = doc.sections[i].name;
    if (name == "scenario") {
      if (scenario_index)
        throw ConfigError(source + ":" + std::to_string(doc.sections[i].line) +
                          ": multiple [scenario] sections");
      scenario_index = i;
    } else if (name == "grid") {
      if (saw_grid)
        throw ConfigError(source + ":" + std::to_string(doc.sections[i].line) +
                          ": multiple [grid] sections");
      saw_grid = true;
      SectionReader r(doc, doc.sections[i]);
      s.grid.cell_width_m = r.require_double("cell_width_m");
      s.grid.cell_height_m = r.require_double("cell_height_m");
      s.grid.cols = r.require_int("cols");
      s.grid.rows = r.require_int("rows");
      s.grid.cell_radius_m = r.require_double("cell_radius_m");
      r.finish();
    } else if (name == "channel") {
      if (saw_channel)
        throw ConfigError(source + ":" + std::to_string(doc.sections[i].line) +
                          ": multiple [channel] sections");
      saw_channel = true;
      SectionReader r(doc, doc.sections[i]);
      s.channel.h0 = r.require_double("h0");
      s.channel.tau_s = r.require_double("tau_s");
      const auto noise_w = r.take_double("noise_power_w");
      const auto noise_dbm = r.take_double("noise_dbm");
      if (noise_w.has_value() == noise_dbm.has_value())
        throw ConfigError(source + ": [channel] needs exactly one of noise_power_w / noise_dbm");
      s.channel.noise_power_w = noise_w ? *noise_w : dbm_to_watt(*noise_dbm);
      const auto bw_hz = r.take_double("bandwidth_hz");
      const auto bw_mhz = r.take_double("bandwidth_mhz");
      if (bw_hz.has_value() == bw_mhz.has_value())
        throw ConfigError(source + ": [channel] needs exactly one of bandwidth_hz / bandwidth_mhz");
      s.channel.bandwidth_hz = bw_hz ? *bw_hz : mhz_to_hz(*bw_mhz);
      r.finish();
    } else if (name == "model") {
      if (saw_model)
        throw ConfigError(source + ":" + std::to_string(doc.sections[i].line) +
                          ": multiple [model] sections");
      saw_model = true;
      model_index = i;
    } else if (name == "layer") {
      if (!model_index)
        throw ConfigError(source + ":" + std::to_string(doc.sections[i].line) +
                          ": [layer] before [model]");
      layer_indices.push_back(i);
    } else if (name == "uav") {
      uav_indices.push_back(i);
    } else if (name == "request") {
      request_indices.push_back(i);
    } else {
      throw ConfigError(source + ":" + std::to_string(doc.sections[i].line) +
                        ": unknown section [" + name + "]");
    }
  }

  if (scenario_index) {
    SectionReader r(doc, doc.sections[*scenario_index]);
    s.time_frame_s = r.take_double("time_frame_s").value_or(1.0);
    s.seed = r.take_u64("seed").value_or(0);
    s.reliability_gate = r.take_bool("reliability_gate").value_or(true);
    s.position_all_pairs = r.take_bool("position_all_pairs").value_or(false);
    r.finish();
  }
  if (!saw_grid) throw ConfigError(source + ": missing [grid] section");
  if (!saw_channel) throw ConfigError(source + ": missing [channel] section");
  if (!model_index) throw ConfigError(source + ": missing [model] section");

  {
    SectionReader r(doc, doc.sections[*model_index]);
    const auto file = r.take("file");
    if (file) {
      r.finish();
      if (!layer_indices.empty())
        throw ConfigError(source + ": [model] with file= cannot also define [layer] sections");
      const std::filesystem::path p = std::filesystem::path(base_dir) / *file;
      s.model = load_model_file(p.string());
    } else {
      s.model = model_from_doc(doc, *model_index, layer_indices);
    }
  }

  for (std::size_t idx : uav_indices) {
    SectionReader r(doc, doc.sections[idx]);
    UavProfile p;
    p.mem_capacity_bytes = r.require_u64("mem_capacity_bytes");
    p.mult_per_sec = r.require_double("mult_per_sec");
    p.p_max_w = r.require_double("p_max_w");
    const int count = r.take_int("count").value_or(1);
    r.finish();
    if (count < 1)
      throw ConfigError(source + ":" + std::to_string(doc.sections[idx].line) +
                        ": [uav] count must be >= 1");
    for (int c = 0; c < count; ++c) s.fleet.push_back(p);
  }

  for (std::size_t idx : request_indices) {
    SectionReader r(doc, doc.sections[idx]);
    Request req;
    req.id = int(s.requests.size());
    req.source_uav = r.require_int("source_uav");
    req.input_bytes = r.take_u64("input_bytes").value_or((s.model.input_bits + 7) / 8);
    req.model_id = r.take("model").value_or(s.model.id);
    r.finish();
    s.requests.push_back(std::move(req));
  }

  validate_scenario(s);
  return s;
}

inline Scenario load_scenario_file(const std::string& path) {
  const std::filesystem::path p(path);
  return load_scenario(read_file(path), path, p.parent_path().string());
}

// ---------------------------------------------------------------------------
// Canonical emission; parse(emit(s)) == s for any valid scenario.

inline void emit_model(std::ostream& os, const CnnModel& m) {
  os << "[model]\n";
  os << "id = " << m.id << "\n";
  os << "input_bits = " << m.input_bits << "\n";
  os << "output_bits = " << m.output_bits << "\n";
  for (std::size_t j = 0; j < m.layers.size(); ++j) {
    const LayerSpec& l = m.layers[j];
    os << "\n[layer]\n";
    os << "kind = " << (l.kind == LayerKind::convolutional ? "conv" : "fc") << "\n";
    os << "in_channels = " << l.in_channels << "\n";
    os << "out_channels = " << l.out_channels << "\n";
    if (l.kind == LayerKind::convolutional) {
      os << "filter_side = " << l.filter_side << "\n";
      os << "out_spatial_side = " << l.out_spatial_side << "\n";
    }
    os << "weight_count = " << l.weight_count << "\n";
    os << "weight_bits = " << l.weight_bits << "\n";
    if (j + 1 < m.layers.size()) os << "out_bits = " << m.inter_layer_bits[j] << "\n";
  }
}

inline std::string emit_scenario(const Scenario& s) {
  std::ostringstream os;
  os << "[scenario]\n";
  os << "time_frame_s = " << format_double(s.time_frame_s) << "\n";
  os << "seed = " << s.seed << "\n";
  os << "reliability_gate = " << (s.reliability_gate ? "true" : "false") << "\n";
  os << "position_all_pairs = " << (s.position_all_pairs ? "true" : "false") << "\n";
  os << "\n[grid]\n";
  os << "cell_width_m = " << format_double(s.grid.cell_width_m) << "\n";
  os << "cell_height_m = " << format_double(s.grid.cell_height_m) << "\n";
  os << "cols = " << s.grid.cols << "\n";
  os << "rows = " << s.grid.rows << "\n";
  os << "cell_radius_m = " << format_double(s.grid.cell_radius_m) << "\n";
  os << "\n[channel]\n";
  os << "h0 = " << format_double(s.channel.h0) << "\n";
  os << "noise_power_w = " << format_double(s.channel.noise_power_w) << "\n";
  os << "bandwidth_hz = " << format_double(s.channel.bandwidth_hz) << "\n";
  os << "tau_s = " << format_double(s.channel.tau_s) << "\n\n";
  emit_model(os, s.model);
  for (const UavProfile& p : s.fleet) {
    os << "\n[uav]\n";
    os << "mem_capacity_bytes = " << p.mem_capacity_bytes << "\n";
    os << "mult_per_sec = " << format_double(p.mult_per_sec) << "\n";
    os << "p_max_w = " << format_double(p.p_max_w) << "\n";
  }
  for (const Request& r : s.requests) {
    os << "\n[request]\n";
    os << "source_uav = " << r.source_uav << "\n";
    os << "input_bytes = " << r.input_bytes << "\n";
    os << "model = " << r.model_id << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Sweep spec loading

inline SweepSpec load_sweep(const std::string& text, const Scenario& scenario,
                            const std::string& source = "<sweep>") {
  const ConfigDoc doc = parse_config(text, source);
  if (doc.sections.size() != 1 || doc.sections[0].name != "sweep")
    throw ConfigError(source + ": expected exactly one [sweep] section");
  SectionReader r(doc, doc.sections[0]);
  SweepSpec spec;
  spec.variable = parse_sweep_variable(r.require("variable"));
  {
    std::istringstream vs(r.require("values"));
    std::string tok;
    while (vs >> tok) {
      if (spec.variable == SweepVariable::cnn_model) {
        spec.values.push_back(SweepValue::name(tok));
      } else {
        errno = 0;
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if ((end && *end != '\0') || errno == ERANGE)
          throw ConfigError(source + ": sweep value '" + tok + "' is not a number");
        spec.values.push_back(SweepValue::number(v));
      }
    }
    if (spec.values.empty()) throw ConfigError(source + ": sweep values must be non-empty");
  }
  spec.trials = r.take_int("trials").value_or(20);
  spec.frames = r.take_int("frames").value_or(3);
  if (auto solver = r.take("solver")) {
    if (*solver == "auto") spec.solver = AllocSolver::automatic;
    else if (*solver == "exact") spec.solver = AllocSolver::exact;
    else if (*solver == "greedy") spec.solver = AllocSolver::greedy;
    else throw ConfigError(source + ": solver must be auto, exact or greedy");
  }
  {
    const std::string names = r.take("strategies").value_or("llhr");
    std::istringstream ss(names);
    std::string tok;
    while (ss >> tok) spec.strategies.push_back(make_strategy(parse_strategy(tok), scenario));
    if (spec.strategies.empty())
      throw ConfigError(source + ": strategies must name at least one strategy");
  }
  r.finish();
  return spec;
}

inline SweepSpec load_sweep_file(const std::string& path, const Scenario& scenario) {
  return load_sweep(read_file(path), scenario, path);
}

}  // namespace llhr
