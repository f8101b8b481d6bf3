#include "geoflat/so3.hpp"

#include <algorithm>
#include <cmath>

namespace {
constexpr double kPi = 3.14159265358979323846;
}

namespace geoflat::so3 {

Matrix3d hat(const Vector3d& w) {
  Matrix3d W;
  W << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return W;
}

Vector3d vee(const Matrix3d& W) {
  return {0.5 * (W(2, 1) - W(1, 2)), 0.5 * (W(0, 2) - W(2, 0)), 0.5 * (W(1, 0) - W(0, 1))};
}

Matrix3d exp(const Vector3d& w) {
  const double theta2 = w.squaredNorm();
  const Matrix3d W = hat(w);
  double a, b;
  if (theta2 < 1e-8) {
    a = 1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0;
    b = 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0;
  } else {
    const double theta = std::sqrt(theta2);
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  return Matrix3d::Identity() + a * W + b * W * W;
}

Vector3d log(const Matrix3d& R) {
  const double c = std::clamp(0.5 * (R.trace() - 1.0), -1.0, 1.0);
  const Vector3d v = vee(R);
  const double s = v.norm();
  const double theta = std::atan2(s, c);
  if (s < 1e-12 && c > 0.0) return v;
  if (kPi - theta < 1e-3) {
    // Near pi the antisymmetric part vanishes; read the axis off the
    // symmetric part, (R + R^T)/2 = cos(theta) I + (1 - cos(theta)) a a^T.
    const Matrix3d A = (0.5 * (R + R.transpose()) - c * Matrix3d::Identity()) / (1.0 - c);
    int k = 0;
    A.diagonal().maxCoeff(&k);
    Vector3d axis = A.col(k) / std::sqrt(std::max(A(k, k), 1e-300));
    axis.normalize();
    if (axis.dot(v) < 0.0) axis = -axis;
    return theta * axis;
  }
  return theta / s * v;
}

Matrix3d dexp_inv(const Vector3d& phi) {
  const double theta2 = phi.squaredNorm();
  const Matrix3d P = hat(phi);
  double c;
  if (theta2 < 1e-6) {
    c = 1.0 / 12.0 + theta2 / 720.0;
  } else {
    const double theta = std::sqrt(theta2);
    c = (1.0 - theta * std::sin(theta) / (2.0 * (1.0 - std::cos(theta)))) / theta2;
  }
  return Matrix3d::Identity() + 0.5 * P + c * P * P;
}

Matrix3d rot_z(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Matrix3d R;
  R << c, -s, 0.0,
       s, c, 0.0,
       0.0, 0.0, 1.0;
  return R;
}

Matrix3d orthonormalize(const Matrix3d& R) {
  Eigen::JacobiSVD<Matrix3d> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix3d U = svd.matrixU();
  const Matrix3d V = svd.matrixV();
  if ((U * V.transpose()).determinant() < 0.0) U.col(2) = -U.col(2);
  return U * V.transpose();
}

double orthogonality_error(const Matrix3d& R) {
  return (R.transpose() * R - Matrix3d::Identity()).cwiseAbs().maxCoeff() +
         std::abs(R.determinant() - 1.0);
}

}  // namespace geoflat::so3
