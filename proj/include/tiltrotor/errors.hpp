#pragma once

#include <stdexcept>
#include <string>

namespace tiltrotor {

/// Euler extraction requested at |pitch| = pi/2 where roll and yaw are not separable.
struct GimbalLockError : std::runtime_error {
  explicit GimbalLockError(const std::string& what) : std::runtime_error(what) {}
};

/// The equilibrium rotor-loading system is singular or too ill-conditioned to solve.
struct SingularAllocationError : std::runtime_error {
  explicit SingularAllocationError(const std::string& what) : std::runtime_error(what) {}
};

/// A rotor speed magnitude is too small for the input map to be invertible.
struct RotorSpeedError : std::runtime_error {
  explicit RotorSpeedError(const std::string& what) : std::runtime_error(what) {}
};

/// The decoupling matrix cannot be inverted at the current state.
struct SingularDecouplingError : std::runtime_error {
  explicit SingularDecouplingError(const std::string& what) : std::runtime_error(what) {}
};

/// The simulated state left the sane envelope (non-finite values or runaway position).
struct DivergenceError : std::runtime_error {
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// A gait parameter or requested tilt falls outside the guaranteed-invertible range.
struct GaitRangeError : std::domain_error {
  explicit GaitRangeError(const std::string& what) : std::domain_error(what) {}
};

/// Configuration document is malformed or violates an invariant.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tiltrotor
