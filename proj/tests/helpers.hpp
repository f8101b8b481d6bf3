#pragma once

#include "geoflat/bundle.hpp"
#include "geoflat/model.hpp"
#include "geoflat/so3.hpp"
#include "geoflat/systems.hpp"

#include <random>

namespace testing {

using namespace geoflat;

// A unit-mass planar body with identity metric, constant potential and full
// actuation. Useful as the trivial case of most operations.
class FreeBody final : public SystemModel {
 public:
  FreeBody()
      : SystemModel("free_body", make_coordinate_chart("free_xy_theta", {false, false, true}), GroupKind::R2,
                    ShapeKind::circle, {}) {
    auto chart = this->chart();
    SectionMap section{"free", std::nullopt, [chart](const ShapePoint& s) {
                         Vec c(3);
                         c << 0.0, 0.0, s.coords[0];
                         return make_point(chart, c);
                       }};
    set_atlas(Atlas{{Trivialization{section, [](const ConfigPoint& q) {
                                      return make_group_element(GroupKind::R2, q.coords.head(2));
                                    }}},
                    0.6});
  }
  Mat metric(const ConfigPoint&) const override { return Mat::Identity(3, 3); }
  double potential(const ConfigPoint&) const override { return 4.0; }
  Mat control_codistribution(const ConfigPoint&) const override { return Mat::Identity(3, 3); }
  ConfigPoint act(const GroupElement& g, const ConfigPoint& q) const override {
    Vec c = q.coords;
    c.head(2) += g.data;
    return point(c);
  }
  Mat action_pushforward(const GroupElement&, const ConfigPoint&) const override { return Mat::Identity(3, 3); }
  ShapePoint project(const ConfigPoint& q) const override { return make_shape(ShapeKind::circle, q.coords.tail(1)); }
  Vec generator(const Vec& xi, const ConfigPoint&) const override { return Eigen::Vector3d(xi[0], xi[1], 0.0); }
  ShapePoint nominal_shape() const override { return make_shape(ShapeKind::circle, Vec::Zero(1)); }
  ConfigPoint random_point(std::mt19937_64& rng) const override {
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    return point(Eigen::Vector3d(u(rng), u(rng), u(rng)));
  }
};

inline Vec random_vec(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

inline Eigen::Matrix3d rotation(const ConfigPoint& q) {
  return Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(q.coords.data() + 3);
}

inline Vec se3(const Eigen::Vector3d& x, const Eigen::Matrix3d& R) {
  Vec c(12);
  c.head(3) = x;
  Eigen::Map<Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(c.data() + 3) = R;
  return c;
}

inline ShapePoint angle(double a) {
  Vec v(1);
  v[0] = a;
  return make_shape(ShapeKind::circle, v);
}

inline ShapePoint unit3(const Eigen::Vector3d& v) { return make_shape(ShapeKind::sphere, v.normalized()); }

/// Random configuration whose shape stays 0.1 away from every excluded pole
/// of the given trivialization.
inline ConfigPoint random_point_in(const SystemModel& system, const Trivialization& triv, std::mt19937_64& rng) {
  for (;;) {
    ConfigPoint q = system.random_point(rng);
    if (triv.section.contains(system.project(q), 0.1)) return q;
  }
}

}  // namespace testing
