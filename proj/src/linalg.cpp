#include "geoflat/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace geoflat {

namespace {

int rank_from(const Vec& sv, double rel_tol) {
  if (sv.size() == 0 || sv[0] <= 0.0) return 0;
  int r = 0;
  while (r < sv.size() && sv[r] > rel_tol * sv[0]) ++r;
  return r;
}

}  // namespace

Mat orthonormal_basis(const Mat& A, double rel_tol) {
  if (A.cols() == 0) return Mat(A.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(rank_from(svd.singularValues(), rel_tol));
}

Mat nullspace(const Mat& A, double rel_tol) {
  const int n = static_cast<int>(A.cols());
  if (A.rows() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullV);
  const int r = rank_from(svd.singularValues(), rel_tol);
  return svd.matrixV().rightCols(n - r);
}

int numerical_rank(const Mat& A, double rel_tol) {
  if (A.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(A);
  return rank_from(svd.singularValues(), rel_tol);
}

double subspace_distance(const Mat& A, const Mat& B, double rel_tol) {
  if (A.rows() == B.rows() && A.cols() == B.cols() && A == B) return 0.0;
  const Mat Qa = orthonormal_basis(A, rel_tol);
  const Mat Qb = orthonormal_basis(B, rel_tol);
  if (Qa.cols() != Qb.cols()) return 1.0;
  if (Qa.cols() == 0) return 0.0;
  const Mat R = Qa - Qb * (Qb.transpose() * Qa);
  Eigen::JacobiSVD<Mat> svd(R);
  return svd.singularValues()[0];
}

Mat polar_orthonormalize(const Mat& Q) {
  if (Q.cols() == 0) return Q;
  Eigen::SelfAdjointEigenSolver<Mat> eig(Q.transpose() * Q);
  const Mat inv_sqrt = eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                       eig.eigenvectors().transpose();
  return Q * inv_sqrt;
}

}  // namespace geoflat
