#pragma once

#include <stdexcept>
#include <string>

namespace heff {

// bad input files / malformed configuration (CLI exit code 2)
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// physics validity violations: degeneracy, non-perturbative coupling,
// inconsistent drive frequencies (CLI exit code 3)
struct PhysicsError : std::runtime_error {
  explicit PhysicsError(const std::string& what) : std::runtime_error(what) {}
};

// internal consistency failures (CLI exit code 4)
struct InternalError : std::logic_error {
  explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace heff
