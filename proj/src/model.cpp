#include "geoflat/model.hpp"

#include "geoflat/geometry.hpp"

#include <cmath>
#include <limits>

namespace geoflat {

int shape_dim(ShapeKind kind) { return kind == ShapeKind::circle ? 1 : 2; }

ShapePoint make_shape(ShapeKind kind, Vec coords) {
  if (kind == ShapeKind::circle) {
    if (coords.size() != 1) throw ChartError("circle shape expects one angle");
    coords[0] = wrap_angle(coords[0]);
  } else {
    if (coords.size() != 3) throw ChartError("sphere shape expects a 3-vector");
    if (std::abs(coords.norm() - 1.0) > 1e-10) throw ChartError("sphere shape must be a unit vector");
  }
  return ShapePoint{kind, std::move(coords)};
}

Mat shape_tangent_basis(const ShapePoint& s) {
  if (s.kind == ShapeKind::circle) return Mat::Identity(1, 1);
  const Eigen::Vector3d n = s.coords;
  const Eigen::Vector3d a = std::abs(n.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  const Eigen::Vector3d t1 = (a - a.dot(n) * n).normalized();
  const Eigen::Vector3d t2 = n.cross(t1);
  Mat T(3, 2);
  T.col(0) = t1;
  T.col(1) = t2;
  return T;
}

ShapePoint shape_retract(const ShapePoint& s, const Vec& delta) {
  if (s.kind == ShapeKind::circle) return make_shape(s.kind, s.coords + delta);
  Vec p = s.coords + shape_tangent_basis(s) * delta;
  p.normalize();
  return ShapePoint{s.kind, p};
}

Vec shape_local(const ShapePoint& base, const ShapePoint& s) {
  if (base.kind != s.kind) throw ChartError("shape kind mismatch");
  if (base.kind == ShapeKind::circle) {
    Vec d(1);
    d[0] = wrap_angle(s.coords[0] - base.coords[0]);
    return d;
  }
  return shape_tangent_basis(base).transpose() * s.coords;
}

double shape_distance(const ShapePoint& a, const ShapePoint& b) {
  if (a.kind == ShapeKind::circle) return std::abs(wrap_angle(a.coords[0] - b.coords[0]));
  const Eigen::Vector3d x = a.coords, y = b.coords;
  return std::atan2(x.cross(y).norm(), x.dot(y));
}

std::vector<ShapePoint> shape_spread(ShapeKind kind, int n) {
  std::vector<ShapePoint> out;
  out.reserve(n);
  if (kind == ShapeKind::circle) {
    for (int k = 0; k < n; ++k) {
      Vec a(1);
      a[0] = -kPi + 2.0 * kPi * k / n;
      out.push_back(make_shape(kind, a));
    }
    return out;
  }
  // Fibonacci lattice.
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < n; ++k) {
    const double z = 1.0 - (2.0 * k + 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    Vec p(3);
    p << r * std::cos(golden * k), r * std::sin(golden * k), z;
    p.normalize();
    out.push_back(ShapePoint{kind, p});
  }
  return out;
}

ShapePoint random_shape(ShapeKind kind, std::mt19937_64& rng) {
  if (kind == ShapeKind::circle) {
    std::uniform_real_distribution<double> u(-kPi, kPi);
    Vec a(1);
    a[0] = u(rng);
    return make_shape(kind, a);
  }
  std::normal_distribution<double> n(0.0, 1.0);
  Vec p(3);
  do {
    p << n(rng), n(rng), n(rng);
  } while (p.norm() < 1e-6);
  p.normalize();
  return ShapePoint{kind, p};
}

bool SectionMap::contains(const ShapePoint& s, double margin) const {
  if (!excluded_pole) return true;
  return (Eigen::Vector3d(s.coords) - *excluded_pole).norm() > margin;
}

std::size_t Atlas::select(const ShapePoint& s, std::optional<std::size_t> current) const {
  if (charts.size() <= 1 || s.kind != ShapeKind::sphere) return 0;
  const Eigen::Vector3d n = s.coords;
  auto pole_dot = [&](std::size_t i) {
    const auto& pole = charts[i].section.excluded_pole;
    return pole ? n.dot(*pole) : -std::numeric_limits<double>::infinity();
  };
  if (current && *current < charts.size() && pole_dot(*current) < hysteresis) return *current;
  std::size_t best = 0;
  for (std::size_t i = 1; i < charts.size(); ++i) {
    if (pole_dot(i) < pole_dot(best)) best = i;
  }
  return best;
}

// ---------------------------------------------------------------------------

SystemModel::SystemModel(std::string name, ChartPtr chart, GroupKind group, ShapeKind shape, Params params)
    : name_(std::move(name)), chart_(std::move(chart)), group_(group), shape_(shape), params_(std::move(params)) {
  if (!chart_) throw ModelError("system without chart");
}

double SystemModel::param(const std::string& key) const {
  const auto it = params_.find(key);
  if (it == params_.end()) throw ModelError("system '" + name_ + "' has no parameter '" + key + "'");
  return it->second;
}

const Trivialization& SystemModel::trivialization(std::size_t i) const {
  if (i >= atlas_.charts.size()) throw ModelError("system '" + name_ + "' has no trivialization " + std::to_string(i));
  return atlas_.charts[i];
}

Vec SystemModel::potential_differential(const ConfigPoint& q) const {
  constexpr double h = 1e-4;
  Vec dP(dim());
  for (int j = 0; j < dim(); ++j) {
    const Vec e = Vec::Unit(dim(), j);
    dP[j] = (-potential(retract(q, 2 * h * e)) + 8.0 * potential(retract(q, h * e)) -
             8.0 * potential(retract(q, -h * e)) + potential(retract(q, -2 * h * e))) /
            (12.0 * h);
  }
  return dP;
}

Vec SystemModel::connection(const ConfigPoint& q, const Vec& u, const Vec& w) const {
  if (chart_->frame_kind != FrameKind::coordinate) {
    throw ModelError("body-frame system '" + name_ + "' must supply its own connection");
  }
  // M^{-1} of the first-kind contraction
  //   1/2 [(d_u M) w + (d_w M) u - (u^T d_l M w)_l].
  const int n = dim();
  const Mat M = metric(q);
  std::optional<std::vector<Mat>> analytic = metric_partials(q);
  const std::vector<Mat> dM = analytic ? std::move(*analytic) : metric_partials_fd(*this, q);
  Mat du = Mat::Zero(n, n), dw = Mat::Zero(n, n);
  Vec grad(n);
  for (int l = 0; l < n; ++l) {
    du += u[l] * dM[l];
    dw += w[l] * dM[l];
    grad[l] = u.dot(dM[l] * w);
  }
  const Vec first = 0.5 * (du * w + dw * u - grad);
  Eigen::LLT<Mat> llt(M);
  if (llt.info() != Eigen::Success) throw ModelError("metric of '" + name_ + "' is not positive definite");
  return llt.solve(first);
}

ConfigPoint SystemModel::retract(const ConfigPoint& q, const Vec& delta) const {
  if (chart_->frame_kind != FrameKind::coordinate) {
    throw ModelError("body-frame system '" + name_ + "' must supply retract");
  }
  return point(q.coords + delta);
}

Vec SystemModel::local_coordinates(const ConfigPoint& base, const ConfigPoint& q) const {
  if (chart_->frame_kind != FrameKind::coordinate) {
    throw ModelError("body-frame system '" + name_ + "' must supply local_coordinates");
  }
  Vec d = q.coords - base.coords;
  for (int i = 0; i < d.size(); ++i) {
    if (chart_->wrap_mask[i]) d[i] = wrap_angle(d[i]);
  }
  return d;
}

Vec SystemModel::local_velocity(const ConfigPoint&, const Vec&, const Vec& qdot) const { return qdot; }

Vec SystemModel::second_order_correction(const Vec& qdot) const { return Vec::Zero(qdot.size()); }

Mat SystemModel::projection_differential(const ConfigPoint& q) const {
  constexpr double h = 1e-4;
  const ShapePoint s0 = project(q);
  Mat D(shape_dim(), dim());
  for (int j = 0; j < dim(); ++j) {
    const Vec e = Vec::Unit(dim(), j);
    auto at = [&](double t) { return shape_local(s0, project(retract(q, t * e))); };
    D.col(j) = (-at(2 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2 * h)) / (12.0 * h);
  }
  return D;
}

Vec SystemModel::generator_derivative(const Vec& xi, const ConfigPoint& q, const Vec& direction) const {
  constexpr double h = 1e-4;
  auto at = [&](double t) { return generator(xi, retract(q, t * direction)); };
  return (-at(2 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2 * h)) / (12.0 * h);
}

GroupElement SystemModel::random_group_element(std::mt19937_64& rng, double scale) const {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto mask = group_angle_mask(group_);
  Vec data(group_dim());
  for (int i = 0; i < data.size(); ++i) data[i] = mask[i] ? kPi * u(rng) : scale * u(rng);
  return make_group_element(group_, data);
}

}  // namespace geoflat
