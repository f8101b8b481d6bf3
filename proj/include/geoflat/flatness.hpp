#pragma once

// Unactuated subbundle UQ, underactuation distribution Delta and the checks
// for geometric flatness: dim G = rank F, Delta-equivariance, orthogonality
// of a section to Delta and regularity of the implicit dynamics.

#include "geoflat/model.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace geoflat {

/// Basis vectors (columns) of a distribution at a point.
struct DistributionSample {
  ConfigPoint at;
  Mat basis;

  int rank() const { return static_cast<int>(basis.cols()); }
};

/// Orthonormal basis of ker F(q)^T. Throws ModelError if rank F drops below
/// the generic rank of the system.
DistributionSample unactuated_basis(const SystemModel& system, const ConfigPoint& q);

/// A smooth frame field of UQ near q: the system's closed form when it has
/// one, otherwise the nullspace at q continued by projection and polar
/// re-orthonormalization.
std::function<Mat(const ConfigPoint&)> unactuated_frame_field(const SystemModel& system, const ConfigPoint& q);

/// Span of UQ and all nabla_{Y_j} X_i (frame fields Y_j), pruned at 1e-9.
DistributionSample underactuation_distribution(const SystemModel& system, const ConfigPoint& q);

/// Rank of F at a few fixed sample points (the maximum seen).
int generic_control_rank(const SystemModel& system);

bool check_dim_condition(const SystemModel& system);

/// Largest |<T sigma(d/ds), delta>_M| over sampled shapes, with both
/// arguments of unit metric length.
double orthogonality_residual_at(const SystemModel& system, const SectionMap& section, const ShapePoint& s);
double check_orthogonality(const SystemModel& system, const SectionMap& section, int n_samples,
                           std::uint64_t seed = 1);

/// Largest principal-angle sine between T Phi_g(Delta_q) and Delta_{g q}.
double delta_equivariance_residual(const SystemModel& system, const GroupElement& g, const ConfigPoint& q);
double check_delta_equivariance(const SystemModel& system, int n_samples, std::uint64_t seed = 1);

struct ImplicitDynamicsEval {
  Vec value;
  /// dE/ds in shape_tangent_basis(s) directions.
  Mat jacobian_shape;
};

/// E_i(s; g, xi, xidot) = <X_i, xidot^a V_a + nabla_{xi_Q} xi_Q + grad P>
/// at q = Phi_g(sigma(s)).
Vec implicit_dynamics_value(const SystemModel& system, const Trivialization& triv, const ShapePoint& s,
                            const GroupElement& g, const Vec& xi, const Vec& xidot);

/// Value and central-difference shape Jacobian (step 1e-6).
ImplicitDynamicsEval implicit_dynamics(const SystemModel& system, const Trivialization& triv, const ShapePoint& s,
                                       const GroupElement& g, const Vec& xi, const Vec& xidot);

/// <X_i, nabla_qdot qdot + grad P> for an arbitrary state, with X the UQ
/// frame at q.
Vec implicit_dynamics_general(const SystemModel& system, const ConfigPoint& q, const Vec& qdot, const Vec& qddot);

/// The same quantity evaluated along bundle_curve with nonzero shape
/// velocity and acceleration; time derivatives by a 5-point stencil of step h.
Vec implicit_dynamics_full(const SystemModel& system, const Trivialization& triv, const ShapePoint& s,
                           const Vec& sdot, const Vec& sddot, const GroupElement& g, const Vec& xi,
                           const Vec& xidot, double h = 1e-3);

struct RegularityEval {
  double det = 0.0;
  double condition = 0.0;
  /// Normalization so the determinant threshold is unit-free.
  double scale = 1.0;
  bool singular = false;
};

RegularityEval regularity_at(const SystemModel& system, const Trivialization& triv, const ShapePoint& s,
                             const GroupElement& g, const Vec& xi, const Vec& xidot);

struct SingularTuple {
  ShapePoint s;
  GroupElement g;
  Vec xi, xidot;
  double det = 0.0;
};

struct RegularityReport {
  int samples = 0;
  int roots = 0;
  /// Samples where Newton found no root in the trivialization's domain.
  int skipped = 0;
  int generic_rank = 0;
  double generic_fraction = 0.0;
  std::vector<SingularTuple> singular;
};

/// Samples (g, xi, xidot) with translation parts and algebra components in
/// [-10, 10], solves E = 0 from 8 spread seeds and classifies every distinct
/// root. Sample i uses an RNG seeded by (seed, i), so results do not depend
/// on the thread count.
RegularityReport check_regularity(const SystemModel& system, const Trivialization& triv, int n_samples,
                                  std::uint64_t seed = 1);

}  // namespace geoflat
