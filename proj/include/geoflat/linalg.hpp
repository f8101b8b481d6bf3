#pragma once

// Small dense helpers shared by the distribution and subspace checks.

#include "geoflat/core.hpp"

namespace geoflat {

/// Orthonormal basis of the column span of A, dropping directions whose
/// singular value is below rel_tol times the largest one.
Mat orthonormal_basis(const Mat& A, double rel_tol = 1e-9);

/// Orthonormal basis of ker A (columns), same cutoff.
Mat nullspace(const Mat& A, double rel_tol = 1e-9);

int numerical_rank(const Mat& A, double rel_tol = 1e-9);

/// Largest principal-angle sine between span A and span B; 1 if the ranks
/// differ, 0 if the inputs are identical.
double subspace_distance(const Mat& A, const Mat& B, double rel_tol = 1e-9);

/// Q (Q^T Q)^{-1/2}: the orthonormal frame closest to Q.
Mat polar_orthonormalize(const Mat& Q);

}  // namespace geoflat
