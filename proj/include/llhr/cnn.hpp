#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "llhr/errors.hpp"
#include "llhr/units.hpp"

namespace llhr {

enum class LayerKind { convolutional, fully_connected };

// One pipeline stage of a CNN. Only the quantities that drive cost are kept:
// channel/neuron counts, filter and output-map geometry, and weight storage.
struct LayerSpec {
  LayerKind kind = LayerKind::convolutional;
  std::uint64_t in_channels = 0;        // feature maps (conv) or neurons (fc) feeding this layer
  std::uint64_t out_channels = 0;       // feature maps (conv) or neurons (fc) produced
  std::uint64_t filter_side = 0;        // conv only: square filter edge
  std::uint64_t out_spatial_side = 0;   // conv only: square output map edge
  std::uint64_t weight_count = 0;       // stored weights
  std::uint64_t weight_bits = 32;       // bits per stored weight

  bool operator==(const LayerSpec&) const = default;
};

struct CnnModel {
  std::string id;
  std::vector<LayerSpec> layers;
  // Size in bits of the activation tensor passed from layer j to layer j+1.
  // Length is layers.size() - 1.
  std::vector<std::uint64_t> inter_layer_bits;
  std::uint64_t input_bits = 0;    // captured input fed to layer 1
  std::uint64_t output_bits = 0;   // classification result emitted by the last layer

  bool operator==(const CnnModel&) const = default;
};

// Multiplications needed by a convolutional layer:
// in_channels * filter_side^2 * out_channels * out_spatial_side^2.
inline std::uint64_t conv_load(const LayerSpec& layer) {
  if (layer.kind != LayerKind::convolutional)
    throw ValidationError("conv_load: layer is not convolutional");
  std::uint64_t v = checked_mul(layer.in_channels, checked_mul(layer.filter_side, layer.filter_side));
  v = checked_mul(v, layer.out_channels);
  return checked_mul(v, checked_mul(layer.out_spatial_side, layer.out_spatial_side));
}

// Multiplications needed by a fully connected layer: in_channels * out_channels.
inline std::uint64_t fc_load(const LayerSpec& layer) {
  if (layer.kind != LayerKind::fully_connected)
    throw ValidationError("fc_load: layer is not fully connected");
  return checked_mul(layer.in_channels, layer.out_channels);
}

inline std::uint64_t layer_load(const LayerSpec& layer) {
  return layer.kind == LayerKind::convolutional ? conv_load(layer) : fc_load(layer);
}

// Weight storage of a layer in bits: weight_count * weight_bits.
inline std::uint64_t layer_memory_bits(const LayerSpec& layer) {
  return checked_mul(layer.weight_count, layer.weight_bits);
}

inline std::uint64_t layer_memory_bytes(const LayerSpec& layer) {
  return layer_memory_bits(layer) / 8;  // weight_bits is a multiple of 8
}

// Weight count implied by the layer geometry (no bias terms).
inline std::uint64_t default_weight_count(const LayerSpec& layer) {
  if (layer.kind == LayerKind::convolutional)
    return checked_mul(checked_mul(layer.in_channels, layer.out_channels),
                       checked_mul(layer.filter_side, layer.filter_side));
  return checked_mul(layer.in_channels, layer.out_channels);
}

// Activation tensor emitted by a layer, in bits.
inline std::uint64_t default_layer_out_bits(const LayerSpec& layer, std::uint64_t activation_bits) {
  if (layer.kind == LayerKind::convolutional)
    return checked_mul(checked_mul(layer.out_channels,
                                   checked_mul(layer.out_spatial_side, layer.out_spatial_side)),
                       activation_bits);
  return checked_mul(layer.out_channels, activation_bits);
}

inline std::vector<std::uint64_t> default_inter_layer_bits(const std::vector<LayerSpec>& layers,
                                                           std::uint64_t activation_bits) {
  std::vector<std::uint64_t> out;
  for (std::size_t j = 0; j + 1 < layers.size(); ++j)
    out.push_back(default_layer_out_bits(layers[j], activation_bits));
  return out;
}

inline void validate_layer(const LayerSpec& layer, std::size_t index) {
  const std::string path = "model.layers[" + std::to_string(index) + "].";
  if (layer.in_channels == 0) throw ValidationError(path + "in_channels: must be >= 1");
  if (layer.out_channels == 0) throw ValidationError(path + "out_channels: must be >= 1");
  if (layer.kind == LayerKind::convolutional) {
    if (layer.filter_side == 0) throw ValidationError(path + "filter_side: must be >= 1");
    if (layer.out_spatial_side == 0) throw ValidationError(path + "out_spatial_side: must be >= 1");
  }
  if (layer.weight_bits != 8 && layer.weight_bits != 16 && layer.weight_bits != 32 &&
      layer.weight_bits != 64)
    throw ValidationError(path + "weight_bits: must be one of 8, 16, 32, 64");
}

inline void validate_model(const CnnModel& model) {
  if (model.layers.empty()) throw ValidationError("model.layers: empty layer list");
  for (std::size_t j = 0; j < model.layers.size(); ++j) validate_layer(model.layers[j], j);
  if (model.inter_layer_bits.size() + 1 != model.layers.size())
    throw ValidationError("model.inter_layer_bits: expected one entry per layer boundary (" +
                          std::to_string(model.layers.size() - 1) + "), got " +
                          std::to_string(model.inter_layer_bits.size()));
  for (std::size_t j = 0; j < model.inter_layer_bits.size(); ++j)
    if (model.inter_layer_bits[j] == 0)
      throw ValidationError("model.inter_layer_bits[" + std::to_string(j) + "]: must be > 0");
  if (model.input_bits == 0) throw ValidationError("model.input_bits: must be > 0");
  if (model.output_bits == 0) throw ValidationError("model.output_bits: must be > 0");
}

// Per-layer cost triple: compute load, weight storage, and the size of the
// tensor the layer sends downstream (the classification result for the last).
struct LayerCost {
  std::uint64_t load_mults = 0;
  std::uint64_t mem_bytes = 0;
  std::uint64_t out_bits = 0;

  bool operator==(const LayerCost&) const = default;
};

inline std::vector<LayerCost> profile_model(const CnnModel& model) {
  validate_model(model);
  std::vector<LayerCost> out;
  out.reserve(model.layers.size());
  for (std::size_t j = 0; j < model.layers.size(); ++j) {
    const bool last = j + 1 == model.layers.size();
    out.push_back({layer_load(model.layers[j]), layer_memory_bytes(model.layers[j]),
                   last ? model.output_bits : model.inter_layer_bits[j]});
  }
  return out;
}

inline std::uint64_t total_load(const std::vector<LayerCost>& profile) {
  std::uint64_t sum = 0;
  for (const auto& c : profile) sum = checked_add(sum, c.load_mults);
  return sum;
}

inline std::uint64_t total_memory_bytes(const std::vector<LayerCost>& profile) {
  std::uint64_t sum = 0;
  for (const auto& c : profile) sum = checked_add(sum, c.mem_bytes);
  return sum;
}

namespace detail {

inline LayerSpec conv_layer(std::uint64_t in, std::uint64_t out, std::uint64_t filter,
                            std::uint64_t spatial) {
  LayerSpec l;
  l.kind = LayerKind::convolutional;
  l.in_channels = in;
  l.out_channels = out;
  l.filter_side = filter;
  l.out_spatial_side = spatial;
  l.weight_count = default_weight_count(l);
  return l;
}

inline LayerSpec fc_layer(std::uint64_t in, std::uint64_t out) {
  LayerSpec l;
  l.kind = LayerKind::fully_connected;
  l.in_channels = in;
  l.out_channels = out;
  l.weight_count = default_weight_count(l);
  return l;
}

}  // namespace detail

// LeNet-5 on 32x32x3 input: two convolutional stages (ReLU/pooling folded in)
// followed by three fully connected stages. 32-bit weights and activations,
// 8-bit input pixels.
inline CnnModel lenet5() {
  CnnModel m;
  m.id = "lenet5";
  m.layers = {
      detail::conv_layer(3, 6, 5, 28),
      detail::conv_layer(6, 16, 5, 10),
      detail::fc_layer(400, 120),
      detail::fc_layer(120, 84),
      detail::fc_layer(84, 10),
  };
  m.inter_layer_bits = default_inter_layer_bits(m.layers, 32);
  m.input_bits = 32 * 32 * 3 * 8;
  m.output_bits = 10 * 32;
  return m;
}

// AlexNet on 227x227x3 input: five convolutional stages plus three fully
// connected stages, standard single-tower dimensions.
inline CnnModel alexnet() {
  CnnModel m;
  m.id = "alexnet";
  m.layers = {
      detail::conv_layer(3, 96, 11, 55),
      detail::conv_layer(96, 256, 5, 27),
      detail::conv_layer(256, 384, 3, 13),
      detail::conv_layer(384, 384, 3, 13),
      detail::conv_layer(384, 256, 3, 13),
      detail::fc_layer(9216, 4096),
      detail::fc_layer(4096, 4096),
      detail::fc_layer(4096, 1000),
  };
  m.inter_layer_bits = default_inter_layer_bits(m.layers, 32);
  m.input_bits = 227 * 227 * 3 * 8;
  m.output_bits = 1000 * 32;
  return m;
}

inline bool is_builtin_model(std::string_view id) { return id == "lenet5" || id == "alexnet"; }

inline CnnModel builtin_model(std::string_view id) {
  if (id == "lenet5") return lenet5();
  if (id == "alexnet") return alexnet();
  throw ConfigError("unknown built-in model id '" + std::string(id) + "'");
}

}  // namespace llhr
