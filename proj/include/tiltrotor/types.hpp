#pragma once

#include <Eigen/Dense>

namespace tiltrotor {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Vec4 = Eigen::Matrix<Scalar, 4, 1>;
template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using Mat4 = Eigen::Matrix<Scalar, 4, 4>;
template <typename Scalar>
using Mat34 = Eigen::Matrix<Scalar, 3, 4>;

using Vec2d = Vec2<double>;
using Vec3d = Vec3<double>;
using Vec4d = Vec4<double>;
using Mat3d = Mat3<double>;
using Mat4d = Mat4<double>;
using Mat34d = Mat34<double>;

/// Tilt angle of each arm, radians, ordered rotor 1..4.
template <typename Scalar>
using TiltAngles = Vec4<Scalar>;
using TiltAnglesd = TiltAngles<double>;

}  // namespace tiltrotor
