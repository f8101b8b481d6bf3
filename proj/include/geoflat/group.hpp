#pragma once

// The three symmetry groups used by the built-in systems, stored as minimal
// coordinate tuples:
//   R2     (g1, g2)
//   SE2    (g1, g2, g3)      translation + rotation angle, g3 wrapped
//   R3xS1  (g1, g2, g3, g4)  translation + angle, g4 wrapped
// Lie algebra vectors are expressed in the basis e_a whose generators are the
// coordinate directions at the identity. For SE2, xi is the spatial velocity
// g' g^-1 = (v1, v2, w).

#include "geoflat/core.hpp"

#include <string>
#include <vector>

namespace geoflat {

enum class GroupKind { R2, SE2, R3xS1 };

int group_dim(GroupKind kind);
std::string to_string(GroupKind kind);
GroupKind group_kind_from_string(const std::string& s);

/// Angle-valued coordinates of the group.
std::vector<bool> group_angle_mask(GroupKind kind);

struct GroupElement {
  GroupKind kind = GroupKind::R2;
  Vec data;

  static GroupElement identity(GroupKind kind);
};

struct LieAlgebraVec {
  GroupKind kind = GroupKind::R2;
  Vec comps;
};

GroupElement make_group_element(GroupKind kind, Vec data);

GroupElement compose(const GroupElement& a, const GroupElement& b);
GroupElement inverse(const GroupElement& g);
GroupElement group_exp(const LieAlgebraVec& xi);

/// Spatial velocity g' g^-1 from coordinate derivatives (angles unwrapped).
Vec spatial_velocity(const GroupElement& g, const Vec& gdot);

/// Time derivative of the spatial velocity.
Vec spatial_acceleration(const GroupElement& g, const Vec& gdot, const Vec& gddot);

/// Componentwise distance: Euclidean on translation parts, shortest angular
/// distance on circle parts, combined in quadrature.
double group_distance(const GroupElement& a, const GroupElement& b);

/// Coordinate difference a - b with angle components wrapped.
Vec group_difference(const GroupElement& a, const GroupElement& b);

/// Moves the angle components of `data` onto the branch nearest `reference`.
Vec unwrap_near(GroupKind kind, Vec data, const Vec& reference);

}  // namespace geoflat
