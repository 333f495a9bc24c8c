#pragma once

#include <cmath>

#include "tiltrotor/errors.hpp"
#include "tiltrotor/types.hpp"

namespace tiltrotor {

/// Physical constants of the tilt-rotor. Defaults are the studied vehicle.
template <typename Scalar = double>
struct VehicleParams {
  Scalar mass{Scalar(0.429)};              // kg
  Scalar arm_length{Scalar(0.1785)};       // m
  Scalar gravity{Scalar(9.8)};             // m/s^2
  Vec3<Scalar> inertia{Scalar(2.24e-3), Scalar(2.99e-3),
                       Scalar(4.80e-3)};   // diagonal of I_B, kg m^2
  Scalar thrust_coeff{Scalar(8.048e-6)};   // N s^2/rad^2
  Scalar drag_moment_coeff{Scalar(2.423e-7)};  // N m s^2/rad^2

  bool valid() const {
    return mass > Scalar(0) && arm_length > Scalar(0) && gravity > Scalar(0) &&
           (inertia.array() > Scalar(0)).all() && thrust_coeff > Scalar(0) &&
           drag_moment_coeff > Scalar(0);
  }
};

using VehicleParamsd = VehicleParams<double>;

/// Full rigid-body state. The rotation takes body coordinates to world
/// coordinates; rotor speeds are signed with pattern (-, +, -, +).
template <typename Scalar = double>
struct VehicleState {
  Vec3<Scalar> position{Vec3<Scalar>::Zero()};   // X, Y, Z in world frame, m
  Vec3<Scalar> velocity{Vec3<Scalar>::Zero()};   // m/s
  Mat3<Scalar> rotation{Mat3<Scalar>::Identity()};
  Vec3<Scalar> body_rates{Vec3<Scalar>::Zero()};  // p, q, r, rad/s
  Vec4<Scalar> rotor_speeds{Vec4<Scalar>::Zero()};  // signed, rad/s
};

using VehicleStated = VehicleState<double>;

/// Time derivative of VehicleState, same layout.
template <typename Scalar = double>
struct StateDerivative {
  Vec3<Scalar> velocity{Vec3<Scalar>::Zero()};
  Vec3<Scalar> acceleration{Vec3<Scalar>::Zero()};
  Mat3<Scalar> rotation_rate{Mat3<Scalar>::Zero()};
  Vec3<Scalar> angular_acceleration{Vec3<Scalar>::Zero()};
  Vec4<Scalar> rotor_acceleration{Vec4<Scalar>::Zero()};
};

using StateDerivatived = StateDerivative<double>;

/// state + h * derivative, componentwise. The rotation block leaves the
/// orthogonal group; integrators re-orthonormalize after combining stages.
template <typename Scalar>
VehicleState<Scalar> advanced(const VehicleState<Scalar>& s,
                              const StateDerivative<Scalar>& d, Scalar h) {
  VehicleState<Scalar> out;
  out.position = s.position + h * d.velocity;
  out.velocity = s.velocity + h * d.acceleration;
  out.rotation = s.rotation + h * d.rotation_rate;
  out.body_rates = s.body_rates + h * d.angular_acceleration;
  out.rotor_speeds = s.rotor_speeds + h * d.rotor_acceleration;
  return out;
}

/// Skew-symmetric matrix of v, so that hat(v) * u = v x u.
template <typename Scalar>
Mat3<Scalar> hat(const Vec3<Scalar>& v) {
  Mat3<Scalar> m;
  m << Scalar(0), -v.z(), v.y(),
       v.z(), Scalar(0), -v.x(),
       -v.y(), v.x(), Scalar(0);
  return m;
}

/// Body-to-world rotation from Z-Y-X Euler angles (roll phi, pitch theta,
/// yaw psi).
template <typename Scalar>
Mat3<Scalar> rotation_from_euler(Scalar roll, Scalar pitch, Scalar yaw) {
  using std::cos;
  using std::sin;
  const Scalar sp = sin(roll), cp = cos(roll);
  const Scalar st = sin(pitch), ct = cos(pitch);
  const Scalar ss = sin(yaw), cs = cos(yaw);
  Mat3<Scalar> r;
  r << ct * cs, sp * st * cs - cp * ss, cp * st * cs + sp * ss,
       ct * ss, sp * st * ss + cp * cs, cp * st * ss - sp * cs,
       -st, sp * ct, cp * ct;
  return r;
}

/// Inverse of rotation_from_euler with pitch restricted to (-pi/2, pi/2).
/// Throws GimbalLockError when |R(2,0)| is within 1e-9 of 1.
template <typename Scalar>
Vec3<Scalar> euler_from_rotation(const Mat3<Scalar>& r) {
  using std::abs;
  using std::asin;
  using std::atan2;
  if (abs(r(2, 0)) >= Scalar(1) - Scalar(1e-9)) {
    throw GimbalLockError("euler_from_rotation: pitch at +-pi/2");
  }
  const Scalar pitch = asin(-r(2, 0));
  const Scalar roll = atan2(r(2, 1), r(2, 2));
  const Scalar yaw = atan2(r(1, 0), r(0, 0));
  return Vec3<Scalar>(roll, pitch, yaw);
}

/// Thrust direction map F(alpha): body-frame force per unit signed squared
/// rotor speed, one column per rotor.
template <typename Scalar>
Mat34<Scalar> force_map(const TiltAngles<Scalar>& alpha,
                        const VehicleParams<Scalar>& params) {
  using std::cos;
  using std::sin;
  const Scalar kf = params.thrust_coeff;
  const Scalar s1 = sin(alpha(0)), c1 = cos(alpha(0));
  const Scalar s2 = sin(alpha(1)), c2 = cos(alpha(1));
  const Scalar s3 = sin(alpha(2)), c3 = cos(alpha(2));
  const Scalar s4 = sin(alpha(3)), c4 = cos(alpha(3));
  Mat34<Scalar> f;
  f << Scalar(0), kf * s2, Scalar(0), -kf * s4,
       kf * s1, Scalar(0), -kf * s3, Scalar(0),
       -kf * c1, kf * c2, -kf * c3, kf * c4;
  return f;
}

/// Torque map tau(alpha): body-frame moment per unit signed squared rotor
/// speed. Combines arm-lever thrust terms and drag moments.
template <typename Scalar>
Mat34<Scalar> torque_map(const TiltAngles<Scalar>& alpha,
                         const VehicleParams<Scalar>& params) {
  using std::cos;
  using std::sin;
  const Scalar a = params.arm_length * params.thrust_coeff;
  const Scalar b = params.drag_moment_coeff;
  const Scalar s1 = sin(alpha(0)), c1 = cos(alpha(0));
  const Scalar s2 = sin(alpha(1)), c2 = cos(alpha(1));
  const Scalar s3 = sin(alpha(2)), c3 = cos(alpha(2));
  const Scalar s4 = sin(alpha(3)), c4 = cos(alpha(3));
  Mat34<Scalar> t;
  t << Scalar(0), a * c2 - b * s2, Scalar(0), -a * c4 + b * s4,
       a * c1 + b * s1, Scalar(0), -a * c3 - b * s3, Scalar(0),
       a * s1 - b * c1, -a * s2 - b * c2, a * s3 - b * c3, -a * s4 - b * c4;
  return t;
}

/// Signed squared rotor speeds w_i = speed_i * |speed_i|.
template <typename Scalar>
Vec4<Scalar> rotor_loading(const Vec4<Scalar>& rotor_speeds) {
  return rotor_speeds.cwiseProduct(rotor_speeds.cwiseAbs());
}

/// Input matrix of the level-attitude linearization: the first three rows
/// map rotor loading to angular acceleration, the last row to specific
/// vertical thrust. Used for equilibrium allocation and its singularity
/// analysis.
template <typename Scalar>
Mat4<Scalar> allocation_matrix(const TiltAngles<Scalar>& alpha,
                               const VehicleParams<Scalar>& params) {
  const Mat34<Scalar> tau = torque_map(alpha, params);
  const Mat34<Scalar> f = force_map(alpha, params);
  Mat4<Scalar> m;
  m.template topRows<3>() = params.inertia.cwiseInverse().asDiagonal() * tau;
  m.template bottomRows<1>() = f.template bottomRows<1>() / params.mass;
  return m;
}

/// Nonlinear plant: translational dynamics driven by tilted thrusts,
/// rotational dynamics by the torque map, attitude kinematics on SO(3),
/// and rotor speeds integrating the commanded accelerations.
template <typename Scalar>
StateDerivative<Scalar> state_derivative(const VehicleState<Scalar>& s,
                                         const TiltAngles<Scalar>& alpha,
                                         const Vec4<Scalar>& rotor_accel,
                                         const VehicleParams<Scalar>& params) {
  const Mat34<Scalar> f = force_map(alpha, params);
  const Vec4<Scalar> w = rotor_loading(s.rotor_speeds);
  StateDerivative<Scalar> d;
  d.velocity = s.velocity;
  d.acceleration = Vec3<Scalar>(Scalar(0), Scalar(0), -params.gravity) +
                   s.rotation * (f * w) / params.mass;
  d.rotation_rate = s.rotation * hat(s.body_rates);
  d.angular_acceleration =
      params.inertia.cwiseInverse().asDiagonal() * (torque_map(alpha, params) * w);
  d.rotor_acceleration = rotor_accel;
  return d;
}

/// One Newton step of the symmetric orthogonalization R (R^T R)^(-1/2);
/// ample for the per-step drift of a fixed-step integrator.
template <typename Scalar>
Mat3<Scalar> orthonormalized(const Mat3<Scalar>& r) {
  return Scalar(1.5) * r - Scalar(0.5) * r * (r.transpose() * r);
}

}  // namespace tiltrotor
