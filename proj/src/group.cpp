#include "geoflat/group.hpp"

#include <cmath>

namespace geoflat {

namespace {

void require_kind(const GroupElement& a, const GroupElement& b) {
  if (a.kind != b.kind) throw ModelError("group kind mismatch");
}

}  // namespace

int group_dim(GroupKind kind) {
  switch (kind) {
    case GroupKind::R2: return 2;
    case GroupKind::SE2: return 3;
    case GroupKind::R3xS1: return 4;
  }
  return 0;
}

std::string to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::R2: return "R2";
    case GroupKind::SE2: return "SE2";
    case GroupKind::R3xS1: return "R3xS1";
  }
  return "?";
}

GroupKind group_kind_from_string(const std::string& s) {
  if (s == "R2") return GroupKind::R2;
  if (s == "SE2") return GroupKind::SE2;
  if (s == "R3xS1") return GroupKind::R3xS1;
  throw FormatError("unknown group kind '" + s + "'");
}

std::vector<bool> group_angle_mask(GroupKind kind) {
  switch (kind) {
    case GroupKind::R2: return {false, false};
    case GroupKind::SE2: return {false, false, true};
    case GroupKind::R3xS1: return {false, false, false, true};
  }
  return {};
}

GroupElement GroupElement::identity(GroupKind kind) {
  return GroupElement{kind, Vec::Zero(group_dim(kind))};
}

GroupElement make_group_element(GroupKind kind, Vec data) {
  if (data.size() != group_dim(kind)) {
    throw ModelError("group " + to_string(kind) + " expects " + std::to_string(group_dim(kind)) +
                     " coordinates");
  }
  const auto mask = group_angle_mask(kind);
  for (int i = 0; i < data.size(); ++i) {
    if (mask[i]) data[i] = wrap_angle(data[i]);
  }
  return GroupElement{kind, std::move(data)};
}

GroupElement compose(const GroupElement& a, const GroupElement& b) {
  require_kind(a, b);
  if (a.kind == GroupKind::SE2) {
    const double c = std::cos(a.data[2]), s = std::sin(a.data[2]);
    Vec out(3);
    out << c * b.data[0] - s * b.data[1] + a.data[0],
           s * b.data[0] + c * b.data[1] + a.data[1],
           a.data[2] + b.data[2];
    return make_group_element(a.kind, out);
  }
  return make_group_element(a.kind, a.data + b.data);
}

GroupElement inverse(const GroupElement& g) {
  if (g.kind == GroupKind::SE2) {
    const double c = std::cos(g.data[2]), s = std::sin(g.data[2]);
    Vec out(3);
    out << -(c * g.data[0] + s * g.data[1]),
           -(-s * g.data[0] + c * g.data[1]),
           -g.data[2];
    return make_group_element(g.kind, out);
  }
  return make_group_element(g.kind, -g.data);
}

GroupElement group_exp(const LieAlgebraVec& xi) {
  if (xi.comps.size() != group_dim(xi.kind)) throw ModelError("Lie algebra vector has wrong size");
  if (xi.kind != GroupKind::SE2) return make_group_element(xi.kind, xi.comps);
  const double w = xi.comps[2];
  double a, b;  // V(w) = [[a, -b], [b, a]]
  if (std::abs(w) < 1e-6) {
    a = 1.0 - w * w / 6.0;
    b = w / 2.0 - w * w * w / 24.0;
  } else {
    a = std::sin(w) / w;
    b = (1.0 - std::cos(w)) / w;
  }
  Vec out(3);
  out << a * xi.comps[0] - b * xi.comps[1], b * xi.comps[0] + a * xi.comps[1], w;
  return make_group_element(xi.kind, out);
}

Vec spatial_velocity(const GroupElement& g, const Vec& gdot) {
  if (g.kind != GroupKind::SE2) return gdot;
  const double w = gdot[2];
  Vec xi(3);
  xi << gdot[0] + w * g.data[1], gdot[1] - w * g.data[0], w;
  return xi;
}

Vec spatial_acceleration(const GroupElement& g, const Vec& gdot, const Vec& gddot) {
  if (g.kind != GroupKind::SE2) return gddot;
  const double w = gdot[2], wdot = gddot[2];
  Vec xidot(3);
  xidot << gddot[0] + wdot * g.data[1] + w * gdot[1],
           gddot[1] - wdot * g.data[0] - w * gdot[0],
           wdot;
  return xidot;
}

Vec group_difference(const GroupElement& a, const GroupElement& b) {
  require_kind(a, b);
  Vec d = a.data - b.data;
  const auto mask = group_angle_mask(a.kind);
  for (int i = 0; i < d.size(); ++i) {
    if (mask[i]) d[i] = wrap_angle(d[i]);
  }
  return d;
}

double group_distance(const GroupElement& a, const GroupElement& b) {
  return group_difference(a, b).norm();
}

Vec unwrap_near(GroupKind kind, Vec data, const Vec& reference) {
  const auto mask = group_angle_mask(kind);
  for (int i = 0; i < data.size(); ++i) {
    if (mask[i]) data[i] = reference[i] + wrap_angle(data[i] - reference[i]);
  }
  return data;
}

}  // namespace geoflat
