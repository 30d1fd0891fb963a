#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>

#include "llhr/errors.hpp"
#include "llhr/model.hpp"

namespace llhr {

// Line-of-sight link budget between two UAVs.
struct LinkBudget {
  double gain = 0.0;      // received/transmitted power ratio
  double rate_bps = 0.0;  // lower-bound achievable data rate
  double distance_m = 0.0;
};

// The path model is undefined below the 1 m reference distance; clamp there
// so the gain never exceeds h0.
inline double clamp_distance(double d_m) { return d_m < 1.0 ? 1.0 : d_m; }

// Free-space style gain h0 / d^2.
inline double channel_gain(const ChannelParams& params, double d_m) {
  if (!(d_m > 0.0)) throw ValidationError("channel_gain: distance must be > 0");
  const double d = clamp_distance(d_m);
  return params.h0 / (d * d);
}

// Lower-bound achievable rate B * log2(1 + gain * P / sigma^2) in bits/s.
inline double data_rate(const ChannelParams& params, double p_tx_w, double d_m) {
  if (p_tx_w < 0.0) throw ValidationError("data_rate: transmit power must be >= 0");
  const double snr = channel_gain(params, d_m) * p_tx_w / params.noise_power_w;
  return params.bandwidth_hz * std::log2(1.0 + snr);
}

// Exponent K*ln2/(B*tau) controlling the reliability threshold. Above ~700 the
// threshold overflows a double, i.e. the payload cannot be delivered in one
// packet duration at any physical power.
inline double reliability_exponent(const ChannelParams& params, std::uint64_t k_bits) {
  return double(k_bits) * std::numbers::ln2 / (params.bandwidth_hz * params.tau_s);
}

inline constexpr double kMaxReliabilityExponent = 700.0;

inline bool reliability_reachable(const ChannelParams& params, std::uint64_t k_bits) {
  return reliability_exponent(params, k_bits) <= kMaxReliabilityExponent;
}

// Minimum transmit power at which k_bits complete within one packet duration
// tau at the lower-bound rate: (sigma^2/h) * (exp(K*ln2/(B*tau)) - 1).
inline double threshold_power(const ChannelParams& params, std::uint64_t k_bits, double d_m) {
  if (k_bits == 0) throw ValidationError("threshold_power: payload must be > 0 bits");
  const double exponent = reliability_exponent(params, k_bits);
  if (exponent > kMaxReliabilityExponent)
    throw InfeasibleError("unreachable reliability: payload of " + std::to_string(k_bits) +
                          " bits cannot be delivered within tau at any finite power");
  const double h = channel_gain(params, d_m);
  return params.noise_power_w / h * std::expm1(exponent);
}

// Distance-independent factor of the threshold power, so that
// threshold_power(K, d) == link_coefficient(K) * clamp(d)^2.
// Returns +inf when the payload is unreachable.
inline double link_coefficient(const ChannelParams& params, std::uint64_t k_bits) {
  const double exponent = reliability_exponent(params, k_bits);
  if (exponent > kMaxReliabilityExponent) return std::numeric_limits<double>::infinity();
  return params.noise_power_w / params.h0 * std::expm1(exponent);
}

inline LinkBudget link_budget(const ChannelParams& params, double p_tx_w, double d_m) {
  return {channel_gain(params, d_m), data_rate(params, p_tx_w, d_m), clamp_distance(d_m)};
}

}  // namespace llhr
