#include "tiltrotor/simulator.hpp"

#include <algorithm>
#include <cmath>

namespace tiltrotor {

void ExperimentConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  if (!(duration >= 10.0 * dt)) throw ConfigError("duration must be at least 10*dt");
  gait.validate();
  if (!attitude_gains.valid()) throw ConfigError("attitude gains must all be positive");
  if (!position_gains.valid()) throw ConfigError("position gains must all be positive");
  if (!(steady_window > 0.0) || steady_window > duration + 1e-12) {
    throw ConfigError("steady_window must lie in (0, duration]");
  }
  const double sup_w = sup_window_resolved();
  if (!(sup_w > 0.0) || sup_w > duration + 1e-12) {
    throw ConfigError(
        "supremum window exceeds the duration; lengthen the run or shorten the gait period");
  }
  if (gait.kind == GaitKind::TrotInstant) {
    const double half_steps = 0.5 * gait.period / dt;
    if (std::abs(half_steps - std::round(half_steps)) > 1e-9) {
      throw ConfigError("trot_instant requires (period/2)/dt to be an integer");
    }
  }
  if (!(initial_rotor_speed > 1.0)) {
    throw ConfigError("initial_rotor_speed must exceed 1 rad/s");
  }
  if (saturation_limit && !(*saturation_limit > 0.0)) {
    throw ConfigError("saturation limit must be > 0");
  }
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.reference == b.reference && a.gait.kind == b.gait.kind &&
         a.gait.rho_fixed == b.gait.rho_fixed && a.gait.period == b.gait.period &&
         a.gait.rho_max == b.gait.rho_max && a.decoupler == b.decoupler &&
         a.attitude_gains.kp1 == b.attitude_gains.kp1 &&
         a.attitude_gains.kp2 == b.attitude_gains.kp2 &&
         a.attitude_gains.kp3 == b.attitude_gains.kp3 &&
         a.attitude_gains.kpz1 == b.attitude_gains.kpz1 &&
         a.attitude_gains.kpz2 == b.attitude_gains.kpz2 &&
         a.attitude_gains.kpz3 == b.attitude_gains.kpz3 &&
         a.attitude_gains.ordering == b.attitude_gains.ordering &&
         a.position_gains.kx1 == b.position_gains.kx1 &&
         a.position_gains.ky1 == b.position_gains.ky1 &&
         a.position_gains.kx2 == b.position_gains.kx2 &&
         a.position_gains.ky2 == b.position_gains.ky2 &&
         a.gains_preset == b.gains_preset && a.dt == b.dt &&
         a.duration == b.duration && a.steady_window == b.steady_window &&
         a.sup_window == b.sup_window &&
         a.initial_rotor_speed == b.initial_rotor_speed &&
         a.saturation_limit == b.saturation_limit;
}

RefSample reference_sample(ReferenceKind kind, double t) {
  RefSample r;
  switch (kind) {
    case ReferenceKind::Setpoint:
      break;
    case ReferenceKind::Rectilinear:
      r.position = Vec3d(1.5 * t, 1.5 * t, 0.0);
      r.velocity = Vec3d(1.5, 1.5, 0.0);
      break;
    case ReferenceKind::Circular: {
      const double th = 0.1 * t;
      r.position = Vec3d(5.0 * std::cos(th), 5.0 * std::sin(th), 0.0);
      r.velocity = Vec3d(-0.5 * std::sin(th), 0.5 * std::cos(th), 0.0);
      // circular acceleration is deliberately not fed forward
      break;
    }
  }
  return r;
}

namespace detail {

Vec4d control_input(const VehicleStated& s, double t, double rho,
                    const ExperimentConfig& cfg, const VehicleParamsd& params,
                    ControlScratch* scratch) {
  const TiltAnglesd alpha = tilt_angles_from_rho(rho);
  const RefSample ref = reference_sample(cfg.reference, t);

  // Model-based translational acceleration and the input-free part of its
  // derivative; both feed the reference-derivative chain below.
  const Mat34d f = force_map(alpha, params);
  const Vec4d w = rotor_loading(s.rotor_speeds);
  const Vec3d specific_thrust = s.rotation * (f * w) / params.mass;
  const Vec3d accel = Vec3d(0.0, 0.0, -params.gravity) + specific_thrust;
  const Vec3d drift_jerk = s.rotation * (hat<double>(s.body_rates) * (f * w)) / params.mass;

  const PositionGainsd& pg = cfg.position_gains;
  const Vec2d acc_cmd =
      position_command<double>(ref.position.head<2>(), ref.velocity.head<2>(),
                               ref.accel.head<2>(), s, pg);
  // First and second derivatives of the demanded acceleration along the
  // model, with the tilt schedule and the rotor inputs treated as frozen.
  const Vec2d acc_cmd_dot(
      pg.kx1 * (ref.accel.x() - accel.x()) + pg.kx2 * (ref.velocity.x() - s.velocity.x()),
      pg.ky1 * (ref.accel.y() - accel.y()) + pg.ky2 * (ref.velocity.y() - s.velocity.y()));
  const Vec2d acc_cmd_ddot(
      pg.kx1 * (-drift_jerk.x()) + pg.kx2 * (ref.accel.x() - accel.x()),
      pg.ky1 * (-drift_jerk.y()) + pg.ky2 * (ref.accel.y() - accel.y()));

  // The decoupler is a linearization about the current state, so it is
  // evaluated at the measured yaw; the yaw channel still tracks ref.yaw.
  const OutputVectord meas = measured_outputs(s, alpha, params);
  const double yaw = meas.y(2);

  AttitudeReferenced att;
  if (cfg.decoupler == DecouplerKind::Modified) {
    LateralForcesd forces;
    if (scratch && scratch->cached_rho == rho) {
      forces = scratch->cached_forces;
    } else {
      forces = lateral_equilibrium_forces(alpha, params);
      if (scratch) {
        scratch->cached_rho = rho;
        scratch->cached_forces = forces;
      }
    }
    att = reference_attitude_modified(acc_cmd(0), acc_cmd(1), yaw, forces, params);
  } else {
    att = reference_attitude_conventional(acc_cmd(0), acc_cmd(1), yaw, params);
  }

  // Reference-derivative chain: the tilt schedule is frozen (so the
  // equilibrium-force correction differentiates to zero) but the yaw motion
  // is carried through, with yaw rate and acceleration taken from the same
  // identification the attitude loop uses.
  const double sy = std::sin(yaw), cy = std::cos(yaw);
  const double yaw_rate = meas.ydot(2);
  const double yaw_accel = meas.yddot(2);
  const double g = params.gravity;
  const Vec2d a_rot(acc_cmd(0) * cy + acc_cmd(1) * sy,
                    -acc_cmd(0) * sy + acc_cmd(1) * cy);
  OutputReferenced oref;
  oref.y << att.roll, att.pitch, ref.yaw, ref.position.z();
  oref.ydot << (acc_cmd_dot(0) * sy - acc_cmd_dot(1) * cy + yaw_rate * a_rot(0)) / g,
      (acc_cmd_dot(0) * cy + acc_cmd_dot(1) * sy + yaw_rate * a_rot(1)) / g, 0.0,
      ref.velocity.z();
  oref.yddot << (acc_cmd_ddot(0) * sy - acc_cmd_ddot(1) * cy +
                 2.0 * yaw_rate * (acc_cmd_dot(0) * cy + acc_cmd_dot(1) * sy) +
                 yaw_accel * a_rot(0) -
                 yaw_rate * yaw_rate * (acc_cmd(0) * sy - acc_cmd(1) * cy)) /
                    g,
      (acc_cmd_ddot(0) * cy + acc_cmd_ddot(1) * sy +
       2.0 * yaw_rate * (-acc_cmd_dot(0) * sy + acc_cmd_dot(1) * cy) +
       yaw_accel * a_rot(1) -
       yaw_rate * yaw_rate * (acc_cmd(0) * cy + acc_cmd(1) * sy)) /
          g,
      0.0, ref.accel.z();
  oref.yjerk << 0.0, 0.0, 0.0, ref.altitude_jerk;

  const Vec4d jerk_demand = attitude_altitude_command(oref, meas, cfg.attitude_gains);
  const Mat4d delta = decoupling_matrix(s, alpha, params);
  const Vec4d ma = drift_term(s, alpha, params);

  // The translational jerk also carries a rotor-input term, which makes the
  // roll/pitch reference second derivatives depend on the input being
  // computed. The dependence is linear, so fold it into the inversion:
  // (delta - g_coupling) u = jerk_demand - ma reproduces
  // u = delta^-1 (jerk_demand(u) - ma) exactly.
  const Eigen::Matrix<double, 3, 4> input_jerk =
      (s.rotation * f * (2.0 * s.rotor_speeds.cwiseAbs()).asDiagonal()) / params.mass;
  const Vec3<double> k_roll = cfg.attitude_gains.attitude_coeffs(0);
  const Vec3<double> k_pitch = cfg.attitude_gains.attitude_coeffs(1);
  Mat4d g_coupling = Mat4d::Zero();
  g_coupling.row(0) = k_roll(0) / params.gravity *
                      (-pg.kx1 * sy * input_jerk.row(0) + pg.ky1 * cy * input_jerk.row(1));
  g_coupling.row(1) = k_pitch(0) / params.gravity *
                      (-pg.kx1 * cy * input_jerk.row(0) - pg.ky1 * sy * input_jerk.row(1));
  Eigen::PartialPivLU<Mat4d> lu(delta - g_coupling);
  if (!(lu.rcond() > 1e-12)) {
    throw SingularDecouplingError("control_input: coupled inversion is singular");
  }
  Vec4d u = lu.solve(jerk_demand - ma);

  if (cfg.saturation_limit) {
    const double limit = *cfg.saturation_limit;
    bool clipped = false;
    for (int i = 0; i < 4; ++i) {
      if (u(i) > limit) {
        u(i) = limit;
        clipped = true;
      } else if (u(i) < -limit) {
        u(i) = -limit;
        clipped = true;
      }
    }
    if (clipped && scratch) ++scratch->saturation_count;
  }
  return u;
}

VehicleStated closed_loop_step(const VehicleStated& s, double t,
                               const ExperimentConfig& cfg,
                               const VehicleParamsd& params,
                               ControlScratch* scratch, Vec4d* command_at_start) {
  const double dt = cfg.dt;
  // The instant-switch gait is piecewise constant with jumps aligned to
  // step boundaries, so every stage of this step sees the mid-step value;
  // the other gaits are evaluated at the stage times.
  const auto stage_rho = [&](double stage_time) {
    if (cfg.gait.kind == GaitKind::TrotInstant) {
      return gait_rho(cfg.gait, t + 0.5 * dt);
    }
    return gait_rho(cfg.gait, stage_time);
  };
  const auto field = [&](const VehicleStated& x, double stage_time,
                         const Vec4d* known_command) {
    const double rho = stage_rho(stage_time);
    const Vec4d u = known_command
                        ? *known_command
                        : control_input(x, stage_time, rho, cfg, params, scratch);
    return state_derivative(x, tilt_angles_from_rho(rho), u, params);
  };

  const Vec4d u0 = control_input(s, t, stage_rho(t), cfg, params, scratch);
  if (command_at_start) *command_at_start = u0;

  const StateDerivatived k1 = field(s, t, &u0);
  const StateDerivatived k2 = field(advanced(s, k1, 0.5 * dt), t + 0.5 * dt, nullptr);
  const StateDerivatived k3 = field(advanced(s, k2, 0.5 * dt), t + 0.5 * dt, nullptr);
  const StateDerivatived k4 = field(advanced(s, k3, dt), t + dt, nullptr);

  VehicleStated out;
  out.position = s.position + dt / 6.0 *
                                  (k1.velocity + 2.0 * k2.velocity +
                                   2.0 * k3.velocity + k4.velocity);
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
  out.rotation = orthonormalized(out.rotation);

  const bool finite = out.position.allFinite() && out.velocity.allFinite() &&
                      out.rotation.allFinite() && out.body_rates.allFinite() &&
                      out.rotor_speeds.allFinite();
  if (!finite || out.position.norm() > 1e6) {
    throw DivergenceError("closed_loop_step: state left the sane envelope");
  }
  return out;
}

}  // namespace detail

VehicleStated step(const VehicleStated& s, double t, const ExperimentConfig& cfg,
                   const VehicleParamsd& params) {
  return detail::closed_loop_step(s, t, cfg, params, nullptr, nullptr);
}

RunResult run_experiment(const ExperimentConfig& cfg, const VehicleParamsd& params) {
  cfg.validate();
  if (!params.valid()) throw ConfigError("vehicle parameters must all be positive");

  const long n_steps = std::lround(cfg.duration / cfg.dt);

  VehicleStated s;
  s.position = reference_sample(cfg.reference, 0.0).position;
  s.rotor_speeds = cfg.initial_rotor_speed * Vec4d(-1.0, 1.0, -1.0, 1.0);

  RunResult result;
  Trajectory& traj = result.trajectory;
  traj.dt = cfg.dt;
  traj.samples.reserve(static_cast<size_t>(n_steps) + 1);

  detail::ControlScratch scratch;
  const auto record = [&](double t, const VehicleStated& state, const Vec4d& command) {
    TrajectorySample sample;
    sample.t = t;
    sample.state = state;
    sample.rho = gait_rho(cfg.gait, t);
    sample.alpha = tilt_angles_from_rho(sample.rho);
    sample.command = command;
    sample.ref = reference_sample(cfg.reference, t);
    sample.error = state.position - sample.ref.position;
    traj.samples.push_back(sample);
  };

  Metrics& metrics = result.metrics;
  try {
    for (long k = 0; k < n_steps; ++k) {
      const double t = static_cast<double>(k) * cfg.dt;
      Vec4d command;
      const VehicleStated next =
          detail::closed_loop_step(s, t, cfg, params, &scratch, &command);
      record(t, s, command);
      s = next;
    }
    const double t_end = static_cast<double>(n_steps) * cfg.dt;
    const Vec4d command_end = detail::control_input(
        s, t_end, gait_rho(cfg.gait, t_end), cfg, params, &scratch);
    record(t_end, s, command_end);
  } catch (const std::runtime_error& e) {
    metrics.diverged = true;
    metrics.failure = e.what();
  }

  metrics.saturation_count = scratch.saturation_count;
  if (!metrics.diverged && !traj.samples.empty()) {
    metrics.steady_state_error =
        steady_state_error(traj, cfg.steady_window, &metrics.non_converged_warning);
    metrics.sup_error = sup_dynamic_error(traj, cfg.sup_window_resolved());
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    metrics.steady_state_error = Vec2d(nan, nan);
    metrics.sup_error = {nan, nan, nan};
  }
  return result;
}

namespace {

// Samples covering the half-open tail (t_end - window, t_end]: an exact
// number of periods of a periodic signal then averages to zero.
size_t tail_begin_index(const Trajectory& traj, double window) {
  const size_t n = traj.samples.size();
  auto count = static_cast<long>(std::lround(window / traj.dt));
  count = std::clamp<long>(count, 1, static_cast<long>(n));
  return n - static_cast<size_t>(count);
}

}  // namespace

Vec2d steady_state_error(const Trajectory& traj, double window, bool* warning) {
  const size_t begin = tail_begin_index(traj, window);
  const size_t n = traj.samples.size() - begin;
  Vec2d mean = Vec2d::Zero();
  for (size_t i = begin; i < traj.samples.size(); ++i) {
    mean += traj.samples[i].error.head<2>();
  }
  mean /= static_cast<double>(n);
  if (warning) {
    Vec2d var = Vec2d::Zero();
    for (size_t i = begin; i < traj.samples.size(); ++i) {
      const Vec2d d = traj.samples[i].error.head<2>() - mean;
      var += d.cwiseProduct(d);
    }
    var /= static_cast<double>(n);
    const Vec2d sd = var.cwiseSqrt();
    *warning = sd.x() > 0.1 * std::abs(mean.x()) + 1e-3 ||
               sd.y() > 0.1 * std::abs(mean.y()) + 1e-3;
  }
  return mean;
}

SupError sup_dynamic_error(const Trajectory& traj, double window) {
  const size_t begin = tail_begin_index(traj, window);
  SupError sup;
  for (size_t i = begin; i < traj.samples.size(); ++i) {
    const Vec2d e = traj.samples[i].error.head<2>();
    sup.x = std::max(sup.x, std::abs(e.x()));
    sup.y = std::max(sup.y, std::abs(e.y()));
    sup.norm = std::max(sup.norm, e.norm());
  }
  return sup;
}

}  // namespace tiltrotor
