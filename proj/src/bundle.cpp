#include "geoflat/bundle.hpp"

namespace geoflat {

namespace {

void require_group(const SystemModel& system, const GroupElement& g) {
  if (g.kind != system.group_kind() || g.data.size() != system.group_dim()) {
    throw ModelError("group element does not match system '" + system.name() + "'");
  }
}

void require_shape_domain(const SectionMap& section, const ShapePoint& s) {
  if (!section.contains(s, kPoleMargin)) {
    throw DomainError("shape lies at the excluded pole of section '" + section.name + "'");
  }
}

template <class F>
Vec five_point(F&& f, double h) {
  return (-f(2 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2 * h)) / (12.0 * h);
}

}  // namespace

ConfigPoint act(const SystemModel& system, const GroupElement& g, const ConfigPoint& q) {
  require_group(system, g);
  require_same_chart(q, system.point(q.coords));
  return system.act(g, q);
}

ShapePoint project(const SystemModel& system, const ConfigPoint& q) { return system.project(q); }

ConfigPoint section_point(const Trivialization& triv, const ShapePoint& s) {
  require_shape_domain(triv.section, s);
  return triv.section.eval(s);
}

std::pair<ShapePoint, GroupElement> trivialize(const SystemModel& system, const Trivialization& triv,
                                               const ConfigPoint& q) {
  ShapePoint s = system.project(q);
  require_shape_domain(triv.section, s);
  return {std::move(s), triv.group_part(q)};
}

ConfigPoint untrivialize(const SystemModel& system, const Trivialization& triv, const ShapePoint& s,
                         const GroupElement& g) {
  require_group(system, g);
  return system.act(g, section_point(triv, s));
}

VelocitySplit velocity_split(const SystemModel& system, const Trivialization& triv, const ConfigPoint& q,
                             const Vec& qdot) {
  const auto [s, g0] = trivialize(system, triv, q);
  constexpr double h = 1e-4;
  auto offset = [&](double t) { return group_difference(triv.group_part(system.retract(q, t * qdot)), g0); };
  const Vec gdot = five_point(offset, h);
  return VelocitySplit{LieAlgebraVec{g0.kind, spatial_velocity(g0, gdot)},
                       system.projection_differential(q) * qdot};
}

TangentVec infinitesimal_generator(const SystemModel& system, const LieAlgebraVec& xi, const ConfigPoint& q) {
  if (xi.kind != system.group_kind() || xi.comps.size() != system.group_dim()) {
    throw ModelError("Lie algebra vector does not match system '" + system.name() + "'");
  }
  return TangentVec{q, system.generator(xi.comps, q)};
}

Mat vertical_basis(const SystemModel& system, const ConfigPoint& q) {
  const int k = system.group_dim();
  Mat V(system.dim(), k);
  for (int a = 0; a < k; ++a) V.col(a) = system.generator(Vec::Unit(k, a), q);
  return V;
}

Mat section_tangent(const SystemModel& system, const SectionMap& section, const ShapePoint& s) {
  require_shape_domain(section, s);
  const ConfigPoint base = section.eval(s);
  const int n = shape_dim(s.kind);
  constexpr double h = 1e-4;
  Mat T(system.dim(), n);
  for (int a = 0; a < n; ++a) {
    const Vec e = Vec::Unit(n, a);
    T.col(a) = five_point(
        [&](double t) { return system.local_coordinates(base, section.eval(shape_retract(s, t * e))); }, h);
  }
  return T;
}

Mat horizontal_basis(const SystemModel& system, const Trivialization& triv, const ConfigPoint& q) {
  const auto [s, g] = trivialize(system, triv, q);
  const ConfigPoint base = triv.section.eval(s);
  return system.action_pushforward(g, base) * section_tangent(system, triv.section, s);
}

ConfigPoint bundle_curve(const SystemModel& system, const Trivialization& triv, const ShapePoint& s,
                         const Vec& sdot, const Vec& sddot, const GroupElement& g, const Vec& xi,
                         const Vec& xidot, double t) {
  const ShapePoint st = shape_retract(s, t * sdot + 0.5 * t * t * sddot);
  const GroupElement gt = compose(group_exp(LieAlgebraVec{g.kind, t * xi + 0.5 * t * t * xidot}), g);
  return system.act(gt, section_point(triv, st));
}

}  // namespace geoflat
