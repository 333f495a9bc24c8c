#pragma once

#include <array>
#include <cmath>
#include <string>

#include <Eigen/LU>

#include "tiltrotor/errors.hpp"
#include "tiltrotor/types.hpp"
#include "tiltrotor/vehicle_model.hpp"

namespace tiltrotor {

/// Controlled outputs (roll, pitch, yaw, altitude) with their first and
/// second derivatives under the controller's derivative identification:
/// attitude rates are the body rates, attitude accelerations come from the
/// torque map.
template <typename Scalar = double>
struct OutputVector {
  Vec4<Scalar> y{Vec4<Scalar>::Zero()};
  Vec4<Scalar> ydot{Vec4<Scalar>::Zero()};
  Vec4<Scalar> yddot{Vec4<Scalar>::Zero()};
};

using OutputVectord = OutputVector<double>;

/// Reference for the output channels including the jerk feedforward.
template <typename Scalar = double>
struct OutputReference {
  Vec4<Scalar> y{Vec4<Scalar>::Zero()};
  Vec4<Scalar> ydot{Vec4<Scalar>::Zero()};
  Vec4<Scalar> yddot{Vec4<Scalar>::Zero()};
  Vec4<Scalar> yjerk{Vec4<Scalar>::Zero()};
};

using OutputReferenced = OutputReference<double>;

/// How the three published gain matrices map onto the (accel, rate, pos)
/// error terms of the third-order law. Literal applies them in the
/// published order; Swapped reverses it, which is the ordering that
/// satisfies the third-order Routh condition with the published values.
enum class GainOrdering { Literal, Swapped };

/// Third-order attitude/altitude gains. kp1..kp3 hold the roll/pitch/yaw
/// diagonals as published; ordering selects how they attach to the error
/// derivatives.
template <typename Scalar = double>
struct AttitudeGains {
  Vec3<Scalar> kp1{Vec3<Scalar>::Ones()};
  Vec3<Scalar> kp2{Scalar(10), Scalar(10), Scalar(1)};
  Vec3<Scalar> kp3{Scalar(50), Scalar(50), Scalar(1)};
  Scalar kpz1{Scalar(10)};
  Scalar kpz2{Scalar(5)};
  Scalar kpz3{Scalar(10)};
  GainOrdering ordering{GainOrdering::Swapped};

  /// Published gain set applied in the published order. Fails the Routh
  /// condition on roll/pitch and leaves yaw marginal.
  static AttitudeGains paper() {
    AttitudeGains g;
    g.ordering = GainOrdering::Literal;
    return g;
  }

  /// Default set: swapped ordering for roll/pitch and a damped yaw triple
  /// (3, 3, 1), everything Routh-stable.
  static AttitudeGains stable() {
    AttitudeGains g;
    g.kp2 = Vec3<Scalar>(Scalar(10), Scalar(10), Scalar(3));
    g.kp3 = Vec3<Scalar>(Scalar(50), Scalar(50), Scalar(3));
    g.ordering = GainOrdering::Swapped;
    return g;
  }

  /// Effective coefficients (k_accel, k_rate, k_pos) for attitude channel
  /// i in 0..2, after applying the ordering.
  Vec3<Scalar> attitude_coeffs(int channel) const {
    if (ordering == GainOrdering::Literal) {
      return Vec3<Scalar>(kp1(channel), kp2(channel), kp3(channel));
    }
    return Vec3<Scalar>(kp3(channel), kp2(channel), kp1(channel));
  }

  Vec3<Scalar> altitude_coeffs() const {
    if (ordering == GainOrdering::Literal) return Vec3<Scalar>(kpz1, kpz2, kpz3);
    return Vec3<Scalar>(kpz3, kpz2, kpz1);
  }

  bool valid() const {
    return (kp1.array() > Scalar(0)).all() && (kp2.array() > Scalar(0)).all() &&
           (kp3.array() > Scalar(0)).all() && kpz1 > Scalar(0) &&
           kpz2 > Scalar(0) && kpz3 > Scalar(0);
  }
};

using AttitudeGainsd = AttitudeGains<double>;

/// Horizontal-position PD gains.
template <typename Scalar = double>
struct PositionGains {
  Scalar kx1{Scalar(1)};
  Scalar ky1{Scalar(1)};
  Scalar kx2{Scalar(1)};
  Scalar ky2{Scalar(1)};

  bool valid() const {
    return kx1 > Scalar(0) && ky1 > Scalar(0) && kx2 > Scalar(0) && ky2 > Scalar(0);
  }
};

using PositionGainsd = PositionGains<double>;

/// Outputs and derivatives measured from the plant state. Attitude rates
/// use the small-angle identification ydot = body rates, the same
/// identification under which the decoupling matrix is exact.
template <typename Scalar>
OutputVector<Scalar> measured_outputs(const VehicleState<Scalar>& s,
                                      const TiltAngles<Scalar>& alpha,
                                      const VehicleParams<Scalar>& params) {
  const Vec3<Scalar> euler = euler_from_rotation(s.rotation);
  const Vec4<Scalar> w = rotor_loading(s.rotor_speeds);
  const Mat34<Scalar> f = force_map(alpha, params);
  const Vec3<Scalar> omega_dot =
      params.inertia.cwiseInverse().asDiagonal() * (torque_map(alpha, params) * w);
  OutputVector<Scalar> out;
  out.y << euler(0), euler(1), euler(2), s.position.z();
  out.ydot << s.body_rates(0), s.body_rates(1), s.body_rates(2), s.velocity.z();
  const Scalar z_accel =
      -params.gravity + (s.rotation * (f * w))(2) / params.mass;
  out.yddot << omega_dot(0), omega_dot(1), omega_dot(2), z_accel;
  return out;
}

/// Decoupling matrix: rotor angular accelerations to output jerks. Requires
/// every rotor speed magnitude above 1 rad/s; the chain-rule factor
/// 2 |speed| vanishes at standstill and the matrix would be singular.
template <typename Scalar>
Mat4<Scalar> decoupling_matrix(const VehicleState<Scalar>& s,
                               const TiltAngles<Scalar>& alpha,
                               const VehicleParams<Scalar>& params) {
  if (!(s.rotor_speeds.cwiseAbs().minCoeff() > Scalar(1))) {
    throw RotorSpeedError("decoupling_matrix: rotor speed magnitude must exceed 1 rad/s");
  }
  const Mat34<Scalar> tau = torque_map(alpha, params);
  const Mat34<Scalar> f = force_map(alpha, params);
  Mat4<Scalar> delta;
  delta.template topRows<3>() = params.inertia.cwiseInverse().asDiagonal() * tau;
  delta.template bottomRows<1>() =
      (s.rotation.row(2) * f) / params.mass;
  const Vec4<Scalar> chain = Scalar(2) * s.rotor_speeds.cwiseAbs();
  return delta * chain.asDiagonal();
}

/// Input-independent part of the output jerks. Only the altitude channel
/// carries drift: the attitude rows of the input map are constant while the
/// tilt schedule is frozen, but the thrust direction rotates with the body.
template <typename Scalar>
Vec4<Scalar> drift_term(const VehicleState<Scalar>& s,
                        const TiltAngles<Scalar>& alpha,
                        const VehicleParams<Scalar>& params) {
  const Mat34<Scalar> f = force_map(alpha, params);
  const Vec4<Scalar> w = rotor_loading(s.rotor_speeds);
  Vec4<Scalar> ma = Vec4<Scalar>::Zero();
  ma(3) = (s.rotation.row(2) * (hat(s.body_rates) * (f * w)))(0) / params.mass;
  return ma;
}

/// Third-order PD law for the four output channels: jerk feedforward plus
/// gains on the acceleration, rate and position errors.
template <typename Scalar>
Vec4<Scalar> attitude_altitude_command(const OutputReference<Scalar>& ref,
                                       const OutputVector<Scalar>& meas,
                                       const AttitudeGains<Scalar>& gains) {
  Vec4<Scalar> cmd;
  for (int i = 0; i < 3; ++i) {
    const Vec3<Scalar> k = gains.attitude_coeffs(i);
    cmd(i) = ref.yjerk(i) + k(0) * (ref.yddot(i) - meas.yddot(i)) +
             k(1) * (ref.ydot(i) - meas.ydot(i)) + k(2) * (ref.y(i) - meas.y(i));
  }
  const Vec3<Scalar> kz = gains.altitude_coeffs();
  cmd(3) = ref.yjerk(3) + kz(0) * (ref.yddot(3) - meas.yddot(3)) +
           kz(1) * (ref.ydot(3) - meas.ydot(3)) + kz(2) * (ref.y(3) - meas.y(3));
  return cmd;
}

/// Horizontal PD law: demanded accelerations from position/velocity errors
/// plus the acceleration feedforward.
template <typename Scalar>
Vec2<Scalar> position_command(const Vec2<Scalar>& pos_ref,
                              const Vec2<Scalar>& vel_ref,
                              const Vec2<Scalar>& accel_ref,
                              const VehicleState<Scalar>& s,
                              const PositionGains<Scalar>& gains) {
  Vec2<Scalar> cmd;
  cmd(0) = accel_ref(0) + gains.kx1 * (vel_ref(0) - s.velocity.x()) +
           gains.kx2 * (pos_ref(0) - s.position.x());
  cmd(1) = accel_ref(1) + gains.ky1 * (vel_ref(1) - s.velocity.y()) +
           gains.ky2 * (pos_ref(1) - s.position.y());
  return cmd;
}

/// Invert the linearization: rotor accelerations realizing the demanded
/// output jerks. Throws SingularDecouplingError when the decoupling matrix
/// is too ill-conditioned (estimated condition number above 1e12).
template <typename Scalar>
Vec4<Scalar> invert_control(const Vec4<Scalar>& jerk_demand,
                            const Mat4<Scalar>& delta, const Vec4<Scalar>& ma) {
  Eigen::PartialPivLU<Mat4<Scalar>> lu(delta);
  if (!(lu.rcond() > Scalar(1e-12))) {
    throw SingularDecouplingError("invert_control: decoupling matrix is singular");
  }
  return lu.solve(jerk_demand - ma);
}

/// Routh verdict for one third-order channel e''' + k1 e'' + k2 e' + k3 e.
template <typename Scalar = double>
struct ChannelStability {
  std::string name;
  Scalar k1{}, k2{}, k3{};
  Scalar margin{};  // k1 * k2 - k3
  bool pass{};
};

/// Verdict for one second-order position channel.
template <typename Scalar = double>
struct PositionChannelStability {
  std::string name;
  Scalar k1{}, k2{};
  bool pass{};
};

template <typename Scalar = double>
struct StabilityReport {
  std::array<ChannelStability<Scalar>, 4> channels;  // roll, pitch, yaw, altitude
  std::array<PositionChannelStability<Scalar>, 2> position;  // x, y
  bool all_pass{};
};

using StabilityReportd = StabilityReport<double>;

namespace detail {

template <typename Scalar>
ChannelStability<Scalar> routh_third_order(const std::string& name,
                                           const Vec3<Scalar>& k) {
  ChannelStability<Scalar> c;
  c.name = name;
  c.k1 = k(0);
  c.k2 = k(1);
  c.k3 = k(2);
  c.margin = k(0) * k(1) - k(2);
  c.pass = k(0) > Scalar(0) && k(1) > Scalar(0) && k(2) > Scalar(0) &&
           c.margin > Scalar(0);
  return c;
}

}  // namespace detail

/// Routh stability check of every closed-loop channel, using each channel's
/// effective coefficient ordering.
template <typename Scalar>
StabilityReport<Scalar> check_gain_stability(const AttitudeGains<Scalar>& att,
                                             const PositionGains<Scalar>& pos) {
  StabilityReport<Scalar> report;
  const char* names[3] = {"roll", "pitch", "yaw"};
  for (int i = 0; i < 3; ++i) {
    report.channels[i] = detail::routh_third_order<Scalar>(names[i], att.attitude_coeffs(i));
  }
  report.channels[3] = detail::routh_third_order<Scalar>("altitude", att.altitude_coeffs());
  report.position[0] = {"x", pos.kx1, pos.kx2, pos.kx1 > Scalar(0) && pos.kx2 > Scalar(0)};
  report.position[1] = {"y", pos.ky1, pos.ky2, pos.ky1 > Scalar(0) && pos.ky2 > Scalar(0)};
  report.all_pass = true;
  for (const auto& c : report.channels) report.all_pass = report.all_pass && c.pass;
  for (const auto& c : report.position) report.all_pass = report.all_pass && c.pass;
  return report;
}

}  // namespace tiltrotor
