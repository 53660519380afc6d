// artiscene - articulated 3D scene graphs from point trajectories
//
// Rigid-body and screw algebra: twists, the SE(3) exponential and
// logarithmic maps, axis reconstruction and rigid replay of point sets.

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "artiscene/errors.hpp"

namespace artiscene {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kPi = 3.14159265358979323846;

/// Below this magnitude a rotational or translational twist component is
/// treated as absent (rad resp. m per unit configuration).
inline constexpr double kDegenerateMagnitude = 1e-6;

/// Element of se(3). `omega` is the rotational part, `vel` the translational.
struct Twist {
  Vec3 omega = Vec3::Zero();
  Vec3 vel = Vec3::Zero();

  [[nodiscard]] bool is_finite() const {
    return omega.allFinite() && vel.allFinite();
  }
  [[nodiscard]] bool is_zero() const {
    return omega.norm() + vel.norm() == 0.0;
  }
  [[nodiscard]] Eigen::Matrix<double, 6, 1> coeffs() const {
    Eigen::Matrix<double, 6, 1> c;
    c << omega, vel;
    return c;
  }
  static Twist from_coeffs(const Eigen::Matrix<double, 6, 1>& c) {
    return Twist{c.head<3>(), c.tail<3>()};
  }
};

enum class AxisKind { kRevolute, kPrismatic };

inline std::string to_string(AxisKind kind) {
  return kind == AxisKind::kRevolute ? "REVOLUTE" : "PRISMATIC";
}

inline AxisKind axis_kind_from_string(const std::string& s) {
  if (s == "REVOLUTE") return AxisKind::kRevolute;
  if (s == "PRISMATIC") return AxisKind::kPrismatic;
  fail(ErrorKind::kValidation, "unknown axis kind '" + s + "'");
}

/// Line of motion of a one-degree-of-freedom articulation. `point` is only
/// meaningful for revolute axes.
struct ScrewAxis {
  AxisKind kind = AxisKind::kRevolute;
  Vec3 direction = Vec3::UnitZ();
  Vec3 point = Vec3::Zero();
};

struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }

  static RigidTransform from_matrix(const Mat4& m) {
    return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
  }

  [[nodiscard]] Mat4 matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
  }

  [[nodiscard]] Vec3 apply(const Vec3& p) const {
    return rotation * p + translation;
  }

  [[nodiscard]] RigidTransform inverse() const {
    const Mat3 rt = rotation.transpose();
    return {rt, -(rt * translation)};
  }

  RigidTransform operator*(const RigidTransform& other) const {
    return {rotation * other.rotation,
            rotation * other.translation + translation};
  }

  /// Orthonormality and det = +1 within `tol` per entry.
  [[nodiscard]] bool is_valid(double tol = 1e-9) const {
    if (!rotation.allFinite() || !translation.allFinite()) return false;
    const Mat3 err = rotation.transpose() * rotation - Mat3::Identity();
    if (err.cwiseAbs().maxCoeff() > tol) return false;
    return std::abs(rotation.determinant() - 1.0) <= tol;
  }
};

inline Mat3 skew(const Vec3& v) {
  Mat3 s;
  // clang-format off
  s <<  0.0,  -v.z(),  v.y(),
        v.z(),  0.0,  -v.x(),
       -v.y(),  v.x(),  0.0;
  // clang-format on
  return s;
}

namespace detail {

// Series coefficients of the SO(3) exponential and its left Jacobian, with
// Taylor expansions below a = 1e-3.
inline constexpr double kSmallAngle = 1e-3;

inline double sinc(double a) {
  if (a < kSmallAngle) {
    const double a2 = a * a;
    return 1.0 - a2 / 6.0 + a2 * a2 / 120.0;
  }
  return std::sin(a) / a;
}

// (1 - cos a) / a^2
inline double coeff_a(double a) {
  if (a < kSmallAngle) {
    const double a2 = a * a;
    return 0.5 - a2 / 24.0 + a2 * a2 / 720.0;
  }
  return (1.0 - std::cos(a)) / (a * a);
}

// (a - sin a) / a^3
inline double coeff_b(double a) {
  if (a < kSmallAngle) {
    const double a2 = a * a;
    return 1.0 / 6.0 - a2 / 120.0 + a2 * a2 / 5040.0;
  }
  return (a - std::sin(a)) / (a * a * a);
}

// d(coeff_a)/da divided by a
inline double coeff_a_prime_over_a(double a) {
  if (a < kSmallAngle) {
    const double a2 = a * a;
    return -1.0 / 12.0 + a2 / 180.0 - a2 * a2 / 6720.0;
  }
  const double a2 = a * a;
  return (a * std::sin(a) - 2.0 * (1.0 - std::cos(a))) / (a2 * a2);
}

// d(coeff_b)/da divided by a
inline double coeff_b_prime_over_a(double a) {
  if (a < kSmallAngle) {
    const double a2 = a * a;
    return -1.0 / 60.0 + a2 / 1260.0 - a2 * a2 / 60480.0;
  }
  const double a2 = a * a;
  return ((1.0 - std::cos(a)) * a - 3.0 * (a - std::sin(a))) / (a2 * a2 * a);
}

// 1/a^2 - (1 + cos a) / (2 a sin a), the quadratic coefficient of J^-1.
inline double coeff_inv(double a) {
  if (a < kSmallAngle) {
    const double a2 = a * a;
    return 1.0 / 12.0 + a2 / 720.0 + a2 * a2 / 30240.0;
  }
  return 1.0 / (a * a) - (1.0 + std::cos(a)) / (2.0 * a * std::sin(a));
}

}  // namespace detail

/// Rodrigues rotation for the rotation vector `phi`.
inline Mat3 so3_exp(const Vec3& phi) {
  const double a = phi.norm();
  const Mat3 k = skew(phi);
  return Mat3::Identity() + detail::sinc(a) * k + detail::coeff_a(a) * k * k;
}

/// Left Jacobian of SO(3); also the matrix mapping the translational twist
/// part onto the translation of exp(xi).
inline Mat3 so3_left_jacobian(const Vec3& phi) {
  const double a = phi.norm();
  const Mat3 k = skew(phi);
  return Mat3::Identity() + detail::coeff_a(a) * k + detail::coeff_b(a) * k * k;
}

inline Mat3 so3_left_jacobian_inverse(const Vec3& phi) {
  const double a = phi.norm();
  const Mat3 k = skew(phi);
  return Mat3::Identity() - 0.5 * k + detail::coeff_inv(a) * k * k;
}

/// exp(xi * theta) in closed form.
inline RigidTransform exp_map(const Twist& xi, double theta) {
  if (!xi.is_finite() || !std::isfinite(theta)) {
    fail(ErrorKind::kInvalidArgument, "exp_map: non-finite twist or configuration");
  }
  const Vec3 phi = xi.omega * theta;
  const Vec3 rho = xi.vel * theta;
  return {so3_exp(phi), so3_left_jacobian(phi) * rho};
}

struct TwistAngle {
  Twist xi;
  double theta = 0.0;
};

/// Inverse of exp_map on the principal branch. The gauge is fixed to
/// |omega| = 1 with theta the rotation angle, or, for pure translations, to
/// |vel| = 1 with theta the translation length.
inline TwistAngle log_map(const RigidTransform& T) {
  if (!T.is_valid()) {
    fail(ErrorKind::kInvalidArgument, "log_map: input is not a rigid transform");
  }
  const Mat3& R = T.rotation;
  const Vec3 w(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  const double sin_a = 0.5 * w.norm();
  const double cos_a = std::clamp(0.5 * (R.trace() - 1.0), -1.0, 1.0);
  const double angle = std::atan2(sin_a, cos_a);

  if (angle >= kPi - 1e-6) {
    fail(ErrorKind::kBranchAmbiguity,
         "log_map: rotation angle at or beyond pi is outside the principal branch");
  }
  if (angle < 1e-12) {
    const double len = T.translation.norm();
    if (len == 0.0) return {};
    return {Twist{Vec3::Zero(), T.translation / len}, len};
  }
  const Vec3 axis = w.normalized();
  const Vec3 phi = axis * angle;
  const Vec3 rho = so3_left_jacobian_inverse(phi) * T.translation;
  return {Twist{axis, rho / angle}, angle};
}

/// Ratio of translation along the axis to rotation, omega.v / |omega|^2.
inline double pitch(const Twist& xi) {
  const double w2 = xi.omega.squaredNorm();
  return w2 > 0.0 ? xi.omega.dot(xi.vel) / w2 : 0.0;
}

inline ScrewAxis screw_axis_from_twist(const Twist& xi, AxisKind kind) {
  if (kind == AxisKind::kRevolute) {
    const double wn = xi.omega.norm();
    if (!(wn > kDegenerateMagnitude)) {
      fail(ErrorKind::kDegenerateTwist, "revolute axis requires |omega| > 1e-6");
    }
    return {kind, xi.omega / wn, xi.omega.cross(xi.vel) / (wn * wn)};
  }
  const double vn = xi.vel.norm();
  if (!(vn > kDegenerateMagnitude)) {
    fail(ErrorKind::kDegenerateTwist, "prismatic axis requires |v| > 1e-6");
  }
  return {kind, xi.vel / vn, Vec3::Zero()};
}

/// Twist generating a unit-speed motion about / along `axis`.
inline Twist twist_from_axis(const ScrewAxis& axis) {
  const Vec3 d = axis.direction.normalized();
  if (axis.kind == AxisKind::kPrismatic) return {Vec3::Zero(), d};
  return {d, -d.cross(axis.point)};
}

inline std::vector<Vec3> replay_points(std::span<const Vec3> points,
                                       const Twist& xi, double theta) {
  const RigidTransform T = exp_map(xi, theta);
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(T.apply(p));
  return out;
}

/// Least-squares rigid alignment (Kabsch) taking `from[i]` onto `to[i]`.
inline RigidTransform fit_rigid_transform(std::span<const Vec3> from,
                                          std::span<const Vec3> to) {
  if (from.size() != to.size() || from.empty()) {
    fail(ErrorKind::kShape, "fit_rigid_transform: point sets differ in size or are empty");
  }
  Vec3 ca = Vec3::Zero();
  Vec3 cb = Vec3::Zero();
  for (std::size_t i = 0; i < from.size(); ++i) {
    ca += from[i];
    cb += to[i];
  }
  ca /= static_cast<double>(from.size());
  cb /= static_cast<double>(to.size());
  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < from.size(); ++i) {
    h += (from[i] - ca) * (to[i] - cb).transpose();
  }
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  const Mat3 r = svd.matrixV() * d * svd.matrixU().transpose();
  return {r, cb - r * ca};
}

}  // namespace artiscene
