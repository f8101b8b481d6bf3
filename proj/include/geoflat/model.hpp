#pragma once

// SystemModel: everything the algorithms need to know about one mechanical
// system on a principal bundle. Tangent vectors are always expressed in the
// chart's declared frame (coordinate vector fields, or body-frame
// linear/angular components for SE(3)).

#include "geoflat/core.hpp"
#include "geoflat/group.hpp"

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace geoflat {

// ---------------------------------------------------------------------------
// Shape space

enum class ShapeKind { circle, sphere };

int shape_dim(ShapeKind kind);

struct ShapePoint {
  ShapeKind kind = ShapeKind::circle;
  Vec coords;  // circle: wrapped angle; sphere: unit 3-vector
};

/// Wraps circle coordinates; sphere coordinates must be unit within 1e-10.
ShapePoint make_shape(ShapeKind kind, Vec coords);

/// Ambient basis of the tangent space at s (coords.size() x dim).
Mat shape_tangent_basis(const ShapePoint& s);

/// Moves s along delta, expressed in shape_tangent_basis(s).
ShapePoint shape_retract(const ShapePoint& s, const Vec& delta);

/// Local coordinates of s around base, in shape_tangent_basis(base).
Vec shape_local(const ShapePoint& base, const ShapePoint& s);

double shape_distance(const ShapePoint& a, const ShapePoint& b);

/// Evenly spread points of the shape space (grid seeds for Newton).
std::vector<ShapePoint> shape_spread(ShapeKind kind, int n);

ShapePoint random_shape(ShapeKind kind, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Sections, trivializations, atlases

struct SectionMap {
  std::string name;
  /// Sphere sections may exclude one pole; circle sections are global.
  std::optional<Eigen::Vector3d> excluded_pole;
  std::function<ConfigPoint(const ShapePoint&)> eval;

  /// True if s is farther than `margin` from the excluded pole.
  bool contains(const ShapePoint& s, double margin = 1e-6) const;
};

struct Trivialization {
  SectionMap section;
  /// Equivariant group part; q = act(group_part(q), section(project(q))).
  std::function<GroupElement(const ConfigPoint&)> group_part;
};

/// Overlapping local trivializations with a hysteresis switch rule: stay on
/// the current chart while s . pole < hysteresis, otherwise switch to the
/// chart whose excluded pole is farthest from s.
struct Atlas {
  std::vector<Trivialization> charts;
  double hysteresis = 0.6;

  std::size_t select(const ShapePoint& s, std::optional<std::size_t> current) const;
};

// ---------------------------------------------------------------------------

using Params = std::map<std::string, double>;

class SystemModel {
 public:
  SystemModel(std::string name, ChartPtr chart, GroupKind group, ShapeKind shape, Params params);
  virtual ~SystemModel() = default;

  SystemModel(const SystemModel&) = delete;
  SystemModel& operator=(const SystemModel&) = delete;

  const std::string& name() const { return name_; }
  const ChartPtr& chart() const { return chart_; }
  int dim() const { return chart_->dim; }
  GroupKind group_kind() const { return group_; }
  int group_dim() const { return geoflat::group_dim(group_); }
  ShapeKind shape_kind() const { return shape_; }
  int shape_dim() const { return geoflat::shape_dim(shape_); }
  const Params& params() const { return params_; }
  double param(const std::string& key) const;

  ConfigPoint point(Vec coords) const { return make_point(chart_, std::move(coords)); }

  // --- Riemannian data -----------------------------------------------------

  virtual Mat metric(const ConfigPoint& q) const = 0;
  /// dM/dq^k for coordinate charts, when available in closed form.
  virtual std::optional<std::vector<Mat>> metric_partials(const ConfigPoint&) const { return std::nullopt; }
  virtual double potential(const ConfigPoint& q) const = 0;
  /// dP in the chart frame. Defaults to central differences along retract.
  virtual Vec potential_differential(const ConfigPoint& q) const;
  /// Columns are the covectors spanning F at q.
  virtual Mat control_codistribution(const ConfigPoint& q) const = 0;
  /// nabla_u w for fields with constant frame components u, w at q.
  /// Coordinate charts: Gamma^k_ij u^i w^j.
  virtual Vec connection(const ConfigPoint& q, const Vec& u, const Vec& w) const;

  // --- motion in the frame -------------------------------------------------

  /// Point reached from q along the frame vector delta (first order exact).
  virtual ConfigPoint retract(const ConfigPoint& q, const Vec& delta) const;
  /// Inverse of retract around base.
  virtual Vec local_coordinates(const ConfigPoint& base, const ConfigPoint& q) const;
  /// d/dt of delta when q(t) = retract(base, delta(t)) moves with frame velocity qdot.
  virtual Vec local_velocity(const ConfigPoint& base, const Vec& delta, const Vec& qdot) const;
  /// c''(0) - qddot for a curve c(t) = local_coordinates(q(0), q(t)); zero in
  /// coordinate charts.
  virtual Vec second_order_correction(const Vec& qdot) const;

  // --- bundle structure ----------------------------------------------------

  virtual ConfigPoint act(const GroupElement& g, const ConfigPoint& q) const = 0;
  /// Matrix of T Phi_g at q acting on frame components.
  virtual Mat action_pushforward(const GroupElement& g, const ConfigPoint& q) const = 0;
  virtual ShapePoint project(const ConfigPoint& q) const = 0;
  /// T pi at q: frame components -> shape_tangent_basis(project(q)) components.
  virtual Mat projection_differential(const ConfigPoint& q) const;
  /// Infinitesimal generator xi_Q(q) in frame components.
  virtual Vec generator(const Vec& xi, const ConfigPoint& q) const = 0;
  /// Derivative of the components of xi_Q along `direction` at q.
  virtual Vec generator_derivative(const Vec& xi, const ConfigPoint& q, const Vec& direction) const;
  /// A smooth frame for UQ near q, when known in closed form.
  virtual std::optional<Mat> unactuated_frame(const ConfigPoint&) const { return std::nullopt; }
  /// Closed-form root of the implicit dynamics nearest `guess`, if known.
  virtual std::optional<ShapePoint> closed_form_shape(const Trivialization&, const GroupElement&,
                                                      const Vec& /*xi*/, const Vec& /*xidot*/,
                                                      const ShapePoint& /*guess*/) const {
    return std::nullopt;
  }

  /// Shape at which the system can hover (first Newton seed).
  virtual ShapePoint nominal_shape() const = 0;
  virtual ConfigPoint random_point(std::mt19937_64& rng) const = 0;
  /// Random element with translation parts in [-scale, scale].
  virtual GroupElement random_group_element(std::mt19937_64& rng, double scale) const;

  const Atlas& atlas() const { return atlas_; }
  const std::vector<Trivialization>& trivializations() const { return atlas_.charts; }
  const Trivialization& trivialization(std::size_t i = 0) const;

 protected:
  void set_atlas(Atlas atlas) { atlas_ = std::move(atlas); }

 private:
  std::string name_;
  ChartPtr chart_;
  GroupKind group_;
  ShapeKind shape_;
  Params params_;
  Atlas atlas_;
};

using SystemPtr = std::shared_ptr<const SystemModel>;

}  // namespace geoflat
