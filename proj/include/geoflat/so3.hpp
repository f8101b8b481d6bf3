#pragma once

#include <Eigen/Dense>

namespace geoflat::so3 {

using Eigen::Matrix3d;
using Eigen::Vector3d;

Matrix3d hat(const Vector3d& w);
Vector3d vee(const Matrix3d& W);

/// Rodrigues formula.
Matrix3d exp(const Vector3d& w);

/// Principal logarithm; returns the rotation vector with angle in [0, pi].
Vector3d log(const Matrix3d& R);

/// Inverse of the left-trivialized differential of exp: if R(t) = R0 exp(phi(t))
/// then phi' = dexp_inv(phi) * omega, with omega the body angular velocity.
Matrix3d dexp_inv(const Vector3d& phi);

Matrix3d rot_z(double angle);

/// Nearest rotation in the Frobenius sense (polar factor via SVD).
Matrix3d orthonormalize(const Matrix3d& R);

/// Max entry of |R^T R - I| plus |det R - 1|.
double orthogonality_error(const Matrix3d& R);

}  // namespace geoflat::so3
