#pragma once

#include <stdexcept>
#include <string>

namespace llhr {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent configuration input.
struct ConfigError : Error {
  using Error::Error;
};

// A domain invariant does not hold (bad scenario, bad model, bad state).
struct ValidationError : Error {
  using Error::Error;
};

// A solver could not produce a feasible solution.
struct InfeasibleError : Error {
  using Error::Error;
};

}  // namespace llhr
