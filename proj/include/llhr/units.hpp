#pragma once

#include <cmath>
#include <cstdint>

#include "llhr/errors.hpp"

namespace llhr {

// All internal quantities are SI: watts, seconds, meters, bytes for storage,
// bits for link payloads. dBm and MHz exist only at the config boundary.

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

inline double watt_to_dbm(double watt) {
  if (watt <= 0.0) throw Error("watt_to_dbm: power must be positive");
  return 10.0 * std::log10(watt) + 30.0;
}

inline double mhz_to_hz(double mhz) { return mhz * 1e6; }

inline std::uint64_t bytes_to_bits(std::uint64_t bytes) {
  if (bytes > UINT64_MAX / 8) throw Error("bytes_to_bits: overflow");
  return bytes * 8;
}

// Multiply with overflow detection; layer cost arithmetic must stay exact.
inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw Error("integer overflow in cost arithmetic");
  return out;
}

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) throw Error("integer overflow in cost arithmetic");
  return out;
}

}  // namespace llhr
