#pragma once

#include <cmath>

#include <Eigen/LU>

#include "tiltrotor/errors.hpp"
#include "tiltrotor/types.hpp"
#include "tiltrotor/vehicle_model.hpp"

namespace tiltrotor {

/// Equilibrium lateral thrust components in the world frame at level
/// attitude, N. Both vanish when all tilt angles are zero.
template <typename Scalar = double>
struct LateralForces {
  Scalar f_x{Scalar(0)};
  Scalar f_y{Scalar(0)};
};

using LateralForcesd = LateralForces<double>;

/// Roll/pitch references handed to the attitude loop, plus the yaw
/// reference they were computed for.
template <typename Scalar = double>
struct AttitudeReference {
  Scalar roll{Scalar(0)};
  Scalar pitch{Scalar(0)};
  Scalar yaw{Scalar(0)};
};

using AttitudeReferenced = AttitudeReference<double>;

/// Signed squared rotor speeds that hold the vehicle at level attitude:
/// zero angular acceleration and vertical thrust balancing gravity.
/// Throws SingularAllocationError when the allocation system is singular
/// (estimated condition number above 1e12).
template <typename Scalar>
Vec4<Scalar> hover_rotor_loading(const TiltAngles<Scalar>& alpha,
                                 const VehicleParams<Scalar>& params) {
  const Mat4<Scalar> m = allocation_matrix(alpha, params);
  Eigen::PartialPivLU<Mat4<Scalar>> lu(m);
  if (!(lu.rcond() > Scalar(1e-12))) {
    throw SingularAllocationError(
        "hover_rotor_loading: allocation matrix is singular at this tilt");
  }
  return lu.solve(Vec4<Scalar>(Scalar(0), Scalar(0), Scalar(0), params.gravity));
}

/// Lateral force left over when the equilibrium loading is pushed through
/// the tilted thrust directions.
template <typename Scalar>
LateralForces<Scalar> lateral_equilibrium_forces(const TiltAngles<Scalar>& alpha,
                                                 const VehicleParams<Scalar>& params) {
  const Vec4<Scalar> w = hover_rotor_loading(alpha, params);
  const Mat34<Scalar> f = force_map(alpha, params);
  return {f.row(0).dot(w), f.row(1).dot(w)};
}

/// Attitude-position decoupler of a collinear quadrotor: horizontal
/// acceleration demand to small-angle roll/pitch references.
template <typename Scalar>
AttitudeReference<Scalar> reference_attitude_conventional(
    Scalar accel_x, Scalar accel_y, Scalar yaw_ref,
    const VehicleParams<Scalar>& params) {
  using std::cos;
  using std::sin;
  const Scalar sy = sin(yaw_ref), cy = cos(yaw_ref);
  AttitudeReference<Scalar> ref;
  ref.roll = (accel_x * sy - accel_y * cy) / params.gravity;
  ref.pitch = (accel_x * cy + accel_y * sy) / params.gravity;
  ref.yaw = yaw_ref;
  return ref;
}

/// Decoupler corrected for the tilt-induced equilibrium lateral force, so
/// that level-flight force balance is reproduced at nonzero tilts. Falls
/// back to the conventional map when the forces are zero.
template <typename Scalar>
AttitudeReference<Scalar> reference_attitude_modified(
    Scalar accel_x, Scalar accel_y, Scalar yaw_ref,
    const LateralForces<Scalar>& forces, const VehicleParams<Scalar>& params) {
  AttitudeReference<Scalar> ref =
      reference_attitude_conventional(accel_x, accel_y, yaw_ref, params);
  const Scalar mg = params.mass * params.gravity;
  ref.roll += forces.f_y / mg;
  ref.pitch -= forces.f_x / mg;
  return ref;
}

}  // namespace tiltrotor
