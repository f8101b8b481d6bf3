#pragma once

// Riemannian primitives: metric evaluation, musical isomorphisms, Christoffel
// symbols and the left-hand side of the forced geodesic equation
//   nabla_{qdot} qdot + grad P = f#.

#include "geoflat/core.hpp"
#include "geoflat/model.hpp"

#include <functional>
#include <vector>

namespace geoflat {

/// Gamma[k](i, j) = Gamma^k_{ij}.
using Christoffel = std::vector<Mat>;

/// M(q), validated: symmetric within 1e-12 (relative) and smallest
/// eigenvalue above 1e-12 ||M||. Throws ModelError otherwise.
Mat metric_at(const SystemModel& system, const ConfigPoint& q);

/// M(q)^{-1} f.
TangentVec sharp(const SystemModel& system, const CotangentVec& f);
CotangentVec flat_iso(const SystemModel& system, const TangentVec& v);

/// (dP)# in the chart frame.
TangentVec grad_potential(const SystemModel& system, const ConfigPoint& q);

/// Central-difference partials dM/dq^k with step 1e-6 max(1, |q|).
std::vector<Mat> metric_partials_fd(const SystemModel& system, const ConfigPoint& q);

Christoffel christoffel_from_partials(const Mat& M, const std::vector<Mat>& dM);

/// Levi-Civita symbols of a coordinate chart; uses analytic metric partials
/// when the system supplies them. Throws ModelError for body-frame charts.
Christoffel christoffel_at(const SystemModel& system, const ConfigPoint& q);

/// Same, always through finite-difference metric partials.
Christoffel christoffel_fd(const SystemModel& system, const ConfigPoint& q);

/// nabla_Y X at q for a vector field given by its frame components.
/// The component derivative is a 5-point difference along retract (step 1e-5).
Vec covariant_derivative(const SystemModel& system, const ConfigPoint& q, const Vec& Y,
                         const std::function<Vec(const ConfigPoint&)>& field);

/// nabla_{qdot} qdot + grad P. A curve is dynamically feasible iff the result
/// lies in sharp(F_q).
TangentVec dynamics_residual(const SystemModel& system, const ConfigPoint& q, const TangentVec& qdot,
                             const TangentVec& qddot);

/// Frame acceleration produced by force coefficients c on F's columns:
///   qddot = M^{-1} F c - grad P - nabla_{qdot} qdot.
Vec forced_acceleration(const SystemModel& system, const ConfigPoint& q, const Vec& qdot, const Vec& force_coeffs);

double kinetic_energy(const SystemModel& system, const ConfigPoint& q, const Vec& qdot);
double total_energy(const SystemModel& system, const ConfigPoint& q, const Vec& qdot);

}  // namespace geoflat
