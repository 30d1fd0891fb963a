#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "llhr/cnn.hpp"
#include "llhr/errors.hpp"

namespace llhr {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Vec2&) const = default;
};

inline double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline double distance_sq(Vec2 a, Vec2 b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// Rectangular coverage area partitioned into cols x rows equal cells, indexed
// row-major from the south-west corner. cell_radius_m bounds how far a UAV may
// drift from its assigned cell center and sets the collision separation 2R.
struct GridSpec {
  double cell_width_m = 40.0;
  double cell_height_m = 40.0;
  int cols = 12;
  int rows = 12;
  double cell_radius_m = 20.0;

  int cell_count() const { return cols * rows; }
  double width_m() const { return cell_width_m * cols; }
  double height_m() const { return cell_height_m * rows; }

  bool operator==(const GridSpec&) const = default;
};

inline Vec2 cell_center(const GridSpec& grid, int cell) {
  if (cell < 0 || cell >= grid.cell_count())
    throw ValidationError("cell_center: cell index " + std::to_string(cell) +
                          " out of range [0, " + std::to_string(grid.cell_count()) + ")");
  const int col = cell % grid.cols;
  const int row = cell / grid.cols;
  return {(col + 0.5) * grid.cell_width_m, (row + 0.5) * grid.cell_height_m};
}

inline bool inside_grid(const GridSpec& grid, Vec2 p) {
  return p.x >= 0.0 && p.x <= grid.width_m() && p.y >= 0.0 && p.y <= grid.height_m();
}

// Device capacities of one UAV.
struct UavProfile {
  std::uint64_t mem_capacity_bytes = 0;  // weight storage budget
  double mult_per_sec = 0.0;             // multiplications per second
  double p_max_w = 0.0;                  // transmit power ceiling

  bool operator==(const UavProfile&) const = default;
};

// Per-frame kinematic and radio state of one UAV.
struct UavState {
  int id = 0;
  Vec2 position;
  int assigned_cell = 0;
  double tx_power_w = 0.0;

  bool operator==(const UavState&) const = default;
};

// Line-of-sight channel constants shared by every link.
struct ChannelParams {
  double h0 = 1e-5;             // mean path gain at the 1 m reference distance
  double noise_power_w = 1e-20; // thermal noise
  double bandwidth_hz = 1e7;    // per-link transmission bandwidth
  double tau_s = 1e-4;          // duration of one data packet

  bool operator==(const ChannelParams&) const = default;
};

// One classification request captured by a source UAV.
struct Request {
  int id = 0;
  int source_uav = 0;
  std::uint64_t input_bytes = 0;
  std::string model_id;

  std::uint64_t input_bits() const { return bytes_to_bits(input_bytes); }

  bool operator==(const Request&) const = default;
};

struct Scenario {
  GridSpec grid;
  std::vector<UavProfile> fleet;
  ChannelParams channel;
  std::vector<Request> requests;
  CnnModel model;
  double time_frame_s = 1.0;
  std::uint64_t seed = 0;
  // When true, layer placement may only use hops whose guaranteed rate
  // delivers the payload within one packet duration tau.
  bool reliability_gate = true;
  // When true, the position objective couples every ordered UAV pair instead
  // of only the active traffic links.
  bool position_all_pairs = false;

  bool operator==(const Scenario&) const = default;
};

namespace detail {

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

}  // namespace detail

inline void validate_grid(const GridSpec& g) {
  detail::require(g.cols >= 1 && g.rows >= 1, "grid.cols/rows: need cols*rows >= 1");
  detail::require(g.cell_width_m > 0.0, "grid.cell_width_m: must be > 0");
  detail::require(g.cell_height_m > 0.0, "grid.cell_height_m: must be > 0");
  detail::require(g.cell_radius_m > 0.0, "grid.cell_radius_m: must be > 0");
  detail::require(g.cell_radius_m <= std::min(g.cell_width_m, g.cell_height_m) / 2.0,
                  "grid.cell_radius_m: exceeds half of the smaller cell dimension");
}

inline void validate_profile(const UavProfile& p, std::size_t index) {
  const std::string path = "fleet[" + std::to_string(index) + "].";
  detail::require(p.mem_capacity_bytes > 0, path + "mem_capacity_bytes: must be > 0");
  detail::require(p.mult_per_sec > 0.0, path + "mult_per_sec: must be > 0");
  detail::require(p.p_max_w > 0.0, path + "p_max_w: must be > 0");
}

inline void validate_channel(const ChannelParams& c) {
  detail::require(c.h0 > 0.0, "channel.h0: must be > 0");
  detail::require(c.h0 <= 1.0, "channel.h0: path gain cannot exceed 1");
  detail::require(c.noise_power_w > 0.0, "channel.noise_power_w: must be > 0");
  detail::require(c.bandwidth_hz > 0.0, "channel.bandwidth_hz: must be > 0");
  detail::require(c.tau_s > 0.0, "channel.tau_s: must be > 0");
}

inline void validate_state(const UavState& s, const GridSpec& grid, const UavProfile& profile) {
  const std::string path = "uav[" + std::to_string(s.id) + "].";
  detail::require(s.tx_power_w >= 0.0 && s.tx_power_w <= profile.p_max_w,
                  path + "tx_power_w: outside [0, p_max]");
  detail::require(inside_grid(grid, s.position), path + "position: outside the grid bounding box");
  detail::require(s.assigned_cell >= 0 && s.assigned_cell < grid.cell_count(),
                  path + "assigned_cell: out of range");
}

// Checks every scenario invariant; returns the scenario untouched on success
// and reports the first violated field otherwise.
inline const Scenario& validate_scenario(const Scenario& s) {
  validate_grid(s.grid);
  detail::require(!s.fleet.empty(), "fleet: empty fleet");
  for (std::size_t i = 0; i < s.fleet.size(); ++i) validate_profile(s.fleet[i], i);
  validate_channel(s.channel);
  validate_model(s.model);
  for (std::size_t r = 0; r < s.requests.size(); ++r) {
    const std::string path = "requests[" + std::to_string(r) + "].";
    detail::require(s.requests[r].input_bytes > 0, path + "input_bytes: must be > 0");
    detail::require(s.requests[r].source_uav >= 0 &&
                        s.requests[r].source_uav < int(s.fleet.size()),
                    path + "source_uav: not a valid fleet index");
    detail::require(s.requests[r].model_id == s.model.id,
                    path + "model: '" + s.requests[r].model_id +
                        "' does not match the scenario model '" + s.model.id + "'");
  }
  detail::require(s.time_frame_s > 0.0, "time_frame_s: must be > 0");
  return s;
}

}  // namespace llhr
