#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tiltrotor/decoupler.hpp"
#include "tiltrotor/errors.hpp"
#include "tiltrotor/flc.hpp"
#include "tiltrotor/gait.hpp"
#include "tiltrotor/types.hpp"
#include "tiltrotor/vehicle_model.hpp"

namespace tiltrotor {

enum class ReferenceKind { Setpoint, Rectilinear, Circular };
enum class DecouplerKind { Conventional, Modified };

/// Reference at one instant: position/velocity plus the acceleration that
/// is actually fed forward (zero for the circular reference), the yaw
/// reference, and the altitude jerk feedforward.
struct RefSample {
  Vec3d position{Vec3d::Zero()};
  Vec3d velocity{Vec3d::Zero()};
  Vec3d accel{Vec3d::Zero()};
  double yaw{0.0};
  double altitude_jerk{0.0};
};

/// Everything one tracking run needs. Defaults reproduce the headline
/// experiments: 1 ms steps, 300 rad/s initial rotor speed, stable gain
/// preset, saturation off.
struct ExperimentConfig {
  ReferenceKind reference{ReferenceKind::Setpoint};
  GaitPland gait{};
  DecouplerKind decoupler{DecouplerKind::Modified};
  AttitudeGainsd attitude_gains{AttitudeGainsd::stable()};
  PositionGainsd position_gains{};
  std::string gains_preset{"stable"};
  double dt{1e-3};
  double duration{60.0};
  double steady_window{10.0};
  std::optional<double> sup_window{};  // auto when unset
  double initial_rotor_speed{300.0};
  std::optional<double> saturation_limit{};  // rad/s^2, off when unset

  /// Tail window for the supremum metric: explicit value if set, otherwise
  /// the last 20% of the run but at least 10 gait periods.
  double sup_window_resolved() const {
    if (sup_window) return *sup_window;
    double w = 0.2 * duration;
    if (gait.kind != GaitKind::Fixed) w = std::max(w, 10.0 * gait.period);
    return w;
  }

  static double default_duration(ReferenceKind kind) {
    return kind == ReferenceKind::Circular ? 40.0 * M_PI : 60.0;
  }

  void validate() const;
};

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

/// One record of the uniformly sampled run.
struct TrajectorySample {
  double t{};
  VehicleStated state{};
  double rho{};
  TiltAnglesd alpha{TiltAnglesd::Zero()};
  Vec4d command{Vec4d::Zero()};
  RefSample ref{};
  Vec3d error{Vec3d::Zero()};  // state position minus reference position
};

struct Trajectory {
  double dt{};
  std::vector<TrajectorySample> samples;
};

struct SupError {
  double x{};
  double y{};
  double norm{};
};

struct Metrics {
  Vec2d steady_state_error{Vec2d::Zero()};
  bool non_converged_warning{false};
  SupError sup_error{};
  bool diverged{false};
  std::string failure{};
  long saturation_count{0};
};

struct RunResult {
  Trajectory trajectory;
  Metrics metrics;
};

/// Position/velocity reference at time t for the three trajectory kinds.
RefSample reference_sample(ReferenceKind kind, double t);

namespace detail {

/// Mutable bookkeeping shared by the control evaluations of one run.
struct ControlScratch {
  double cached_rho{std::numeric_limits<double>::quiet_NaN()};
  LateralForcesd cached_forces{};
  long saturation_count{0};
};

/// Controller evaluation at one instant: gait tilt, outer position loop,
/// attitude-position decoupling with model-based reference derivatives,
/// third-order laws, and the inversion of the linearization.
Vec4d control_input(const VehicleStated& s, double t, double rho,
                    const ExperimentConfig& cfg, const VehicleParamsd& params,
                    ControlScratch* scratch);

/// Classical fourth-order Runge-Kutta step of an arbitrary state field;
/// no re-orthonormalization, the caller owns that.
template <typename Field>
VehicleStated rk4_step(const VehicleStated& s, double t, double dt,
                       const Field& field) {
  const StateDerivatived k1 = field(s, t);
  const StateDerivatived k2 = field(advanced(s, k1, 0.5 * dt), t + 0.5 * dt);
  const StateDerivatived k3 = field(advanced(s, k2, 0.5 * dt), t + 0.5 * dt);
  const StateDerivatived k4 = field(advanced(s, k3, dt), t + dt);
  VehicleStated out;
  out.position =
      s.position + dt / 6.0 * (k1.velocity + 2.0 * k2.velocity + 2.0 * k3.velocity + k4.velocity);
  out.velocity = s.velocity + dt / 6.0 *
                                  (k1.acceleration + 2.0 * k2.acceleration +
                                   2.0 * k3.acceleration + k4.acceleration);
  out.rotation = s.rotation + dt / 6.0 *
                                  (k1.rotation_rate + 2.0 * k2.rotation_rate +
                                   2.0 * k3.rotation_rate + k4.rotation_rate);
  out.body_rates = s.body_rates + dt / 6.0 *
                                      (k1.angular_acceleration + 2.0 * k2.angular_acceleration +
                                       2.0 * k3.angular_acceleration + k4.angular_acceleration);
  out.rotor_speeds = s.rotor_speeds + dt / 6.0 *
                                          (k1.rotor_acceleration + 2.0 * k2.rotor_acceleration +
                                           2.0 * k3.rotor_acceleration + k4.rotor_acceleration);
  return out;
}

/// Closed-loop step used by step() and run_experiment(); optionally
/// reports the control input evaluated at the step start.
VehicleStated closed_loop_step(const VehicleStated& s, double t,
                               const ExperimentConfig& cfg,
                               const VehicleParamsd& params,
                               ControlScratch* scratch, Vec4d* command_at_start);

}  // namespace detail

/// Advance the closed loop by one dt: controller evaluated at every stage,
/// rotation re-orthonormalized, divergence guarded.
VehicleStated step(const VehicleStated& s, double t, const ExperimentConfig& cfg,
                   const VehicleParamsd& params);

/// Run one experiment from the standard initial condition and compute the
/// tail-window metrics. Controller or divergence failures mark the metrics
/// instead of propagating, so partial results stay usable.
RunResult run_experiment(const ExperimentConfig& cfg,
                         const VehicleParamsd& params = VehicleParamsd{});

/// Mean of the horizontal errors over the final `window` seconds. Sets
/// *warning when the error spread suggests the run has not settled.
Vec2d steady_state_error(const Trajectory& traj, double window,
                         bool* warning = nullptr);

/// Per-axis and Euclidean suprema of the horizontal error over the final
/// `window` seconds.
SupError sup_dynamic_error(const Trajectory& traj, double window);

}  // namespace tiltrotor
