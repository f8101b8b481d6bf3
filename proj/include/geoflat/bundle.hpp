#pragma once

// Principal-bundle operations on top of a SystemModel: trivializations,
// the velocity split qdot = xi^a V_a + sdot^alpha H_alpha, generators and the
// horizontal basis of the canonical flat connection.

#include "geoflat/model.hpp"

#include <utility>

namespace geoflat {

/// Shapes closer than this to a section's excluded pole are rejected.
inline constexpr double kPoleMargin = 1e-6;

ConfigPoint act(const SystemModel& system, const GroupElement& g, const ConfigPoint& q);
ShapePoint project(const SystemModel& system, const ConfigPoint& q);

/// q -> (pi(q), phi(q)). Throws DomainError near an excluded pole.
std::pair<ShapePoint, GroupElement> trivialize(const SystemModel& system, const Trivialization& triv,
                                               const ConfigPoint& q);

/// (s, g) -> Phi_g(sigma(s)). Throws DomainError near an excluded pole.
ConfigPoint untrivialize(const SystemModel& system, const Trivialization& triv, const ShapePoint& s,
                         const GroupElement& g);

ConfigPoint section_point(const Trivialization& triv, const ShapePoint& s);

struct VelocitySplit {
  LieAlgebraVec xi;
  /// Components in shape_tangent_basis(pi(q)).
  Vec sdot;
};

/// xi = gdot g^-1 with gdot from a 5-point difference of the group part
/// along qdot; sdot = T pi(qdot).
VelocitySplit velocity_split(const SystemModel& system, const Trivialization& triv, const ConfigPoint& q,
                             const Vec& qdot);

TangentVec infinitesimal_generator(const SystemModel& system, const LieAlgebraVec& xi, const ConfigPoint& q);

/// Columns V_a = (e_a)_Q at q.
Mat vertical_basis(const SystemModel& system, const ConfigPoint& q);

/// T sigma at s (frame components at sigma(s)), one column per
/// shape_tangent_basis(s) direction. 5-point difference, step 1e-4.
Mat section_tangent(const SystemModel& system, const SectionMap& section, const ShapePoint& s);

/// Horizontal basis H_alpha of the canonical flat connection at q.
Mat horizontal_basis(const SystemModel& system, const Trivialization& triv, const ConfigPoint& q);

/// q(t) = Phi_{exp(t xi + t^2/2 xidot) g}(sigma(s retracted by t sdot + t^2/2 sddot)):
/// a curve through Phi_g(sigma(s)) with shape velocity sdot, spatial group
/// velocity xi and its derivative xidot at t = 0.
ConfigPoint bundle_curve(const SystemModel& system, const Trivialization& triv, const ShapePoint& s,
                         const Vec& sdot, const Vec& sddot, const GroupElement& g, const Vec& xi,
                         const Vec& xidot, double t);

}  // namespace geoflat
