#pragma once

#include <algorithm>
#include <cmath>

#include "tiltrotor/errors.hpp"
#include "tiltrotor/types.hpp"
#include "tiltrotor/vehicle_model.hpp"

namespace tiltrotor {

/// Largest tilt magnitude any gait is allowed to command. Keeps the
/// decoupling matrix invertible along the whole schedule.
inline constexpr double kMaxGaitTilt = 0.65;

enum class GaitKind { Fixed, TrotInstant, TrotContinuous };

/// Time schedule for the shared tilt signal rho(t).
template <typename Scalar = double>
struct GaitPlan {
  GaitKind kind{GaitKind::Fixed};
  Scalar rho_fixed{Scalar(0)};            // Fixed only
  Scalar period{Scalar(2)};               // Trot kinds only, s
  Scalar rho_max{Scalar(kMaxGaitTilt)};   // Trot amplitude

  void validate() const {
    using std::abs;
    if (kind == GaitKind::Fixed) {
      if (abs(rho_fixed) > Scalar(kMaxGaitTilt)) {
        throw ConfigError("gait: |rho| must be <= 0.65");
      }
      return;
    }
    if (!(period > Scalar(0))) throw ConfigError("gait: period must be > 0");
    if (!(rho_max > Scalar(0)) || rho_max > Scalar(kMaxGaitTilt)) {
      throw ConfigError("gait: rho_max must lie in (0, 0.65]");
    }
  }

  static GaitPlan fixed(Scalar rho) { return {GaitKind::Fixed, rho, Scalar(1), Scalar(kMaxGaitTilt)}; }
  static GaitPlan trot_instant(Scalar period, Scalar amplitude = Scalar(kMaxGaitTilt)) {
    return {GaitKind::TrotInstant, Scalar(0), period, amplitude};
  }
  static GaitPlan trot_continuous(Scalar period, Scalar amplitude = Scalar(kMaxGaitTilt)) {
    return {GaitKind::TrotContinuous, Scalar(0), period, amplitude};
  }
};

using GaitPland = GaitPlan<double>;

namespace detail {

// Phase of t within one period as a fraction in [0, 1), with a 1e-12
// snap-to-integer guard so period boundaries do not flicker between
// branches under floating-point drift of t.
template <typename Scalar>
Scalar gait_phase(Scalar t, Scalar period) {
  using std::floor;
  const Scalar cycles = t / period;
  Scalar phase = cycles - floor(cycles);
  if (phase > Scalar(1) - Scalar(1e-12)) phase = Scalar(0);
  if (phase < Scalar(1e-12)) phase = Scalar(0);
  return phase;
}

}  // namespace detail

/// Tilt signal at time t. The trot branches treat the half-period boundary
/// as part of the leading (positive) branch.
template <typename Scalar>
Scalar gait_rho(const GaitPlan<Scalar>& plan, Scalar t) {
  switch (plan.kind) {
    case GaitKind::Fixed:
      return plan.rho_fixed;
    case GaitKind::TrotInstant: {
      const Scalar phase = detail::gait_phase(t, plan.period);
      return phase <= Scalar(0.5) + Scalar(1e-12) ? plan.rho_max : -plan.rho_max;
    }
    case GaitKind::TrotContinuous: {
      const Scalar phase = detail::gait_phase(t, plan.period);
      const Scalar rho = phase <= Scalar(0.5) + Scalar(1e-12)
                             ? plan.rho_max * (Scalar(1) - Scalar(4) * phase)
                             : plan.rho_max * (Scalar(4) * phase - Scalar(3));
      return std::clamp(rho, -plan.rho_max, plan.rho_max);
    }
  }
  return Scalar(0);
}

/// Cat-trot assignment: front pair tilts opposite to the rear pair.
template <typename Scalar>
TiltAngles<Scalar> tilt_angles_from_rho(Scalar rho) {
  using std::abs;
  if (abs(rho) > Scalar(kMaxGaitTilt)) {
    throw GaitRangeError("tilt_angles_from_rho: |rho| must be <= 0.65");
  }
  return TiltAngles<Scalar>(-rho, -rho, rho, rho);
}

/// Invertibility margin of the level-attitude allocation. This is the
/// quartic trig polynomial whose sign decides whether allocation_matrix is
/// invertible; it is proportional to that matrix's determinant with a
/// constant that depends only on the vehicle parameters. Coefficients are
/// evaluated from the parameters at full precision (they depend only on the
/// ratio arm_length * thrust_coeff / drag_moment_coeff) and the leading
/// term is normalized to 4.
template <typename Scalar>
Scalar invertibility_margin(const TiltAngles<Scalar>& alpha,
                            const VehicleParams<Scalar>& params = VehicleParams<Scalar>{}) {
  using std::cos;
  using std::sin;
  const Scalar a = params.arm_length * params.thrust_coeff;
  const Scalar b = params.drag_moment_coeff;
  const Scalar k2 = a / b - Scalar(2) * b / a;
  const Scalar k3 = Scalar(1) - (b / a) * (b / a);
  const Scalar k4 = Scalar(2);
  const Scalar k5 = b / a;
  const Scalar s1 = sin(alpha(0)), c1 = cos(alpha(0));
  const Scalar s2 = sin(alpha(1)), c2 = cos(alpha(1));
  const Scalar s3 = sin(alpha(2)), c3 = cos(alpha(2));
  const Scalar s4 = sin(alpha(3)), c4 = cos(alpha(3));
  return Scalar(4) * c1 * c2 * c3 * c4 +
         k2 * (c1 * c2 * c3 * s4 - c1 * c2 * s3 * c4 + c1 * s2 * c3 * c4 -
               s1 * c2 * c3 * c4) +
         k3 * (c1 * c2 * s3 * s4 + c1 * s2 * s3 * c4 + s1 * c2 * c3 * s4 +
               s1 * s2 * c3 * c4) +
         k4 * (-c1 * s2 * c3 * s4 - s1 * c2 * s3 * c4) +
         k5 * (-c1 * s2 * s3 * s4 + s1 * c2 * s3 * s4 - s1 * s2 * c3 * s4 +
               s1 * s2 * s3 * c4);
}

/// Margin along the cat-trot family: the polynomial collapses to
/// 4 cos^2(rho), which stays above 4 cos^2(0.65) > 2.5 on the allowed range.
template <typename Scalar>
Scalar trot_margin_closed_form(Scalar rho) {
  using std::cos;
  const Scalar c = cos(rho);
  return Scalar(4) * c * c;
}

}  // namespace tiltrotor
