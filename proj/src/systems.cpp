#include "geoflat/systems.hpp"

#include "geoflat/so3.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace geoflat {

namespace {

using Eigen::Matrix3d;
using Eigen::Vector2d;
using Eigen::Vector3d;

void require_positive(const Params& p) {
  for (const auto& [key, value] : p) {
    if (!(value > 0.0)) throw ModelError("parameter '" + key + "' must be positive");
  }
}

Vector2d unit(double a) { return {std::cos(a), std::sin(a)}; }
Vector2d unit_perp(double a) { return {-std::sin(a), std::cos(a)}; }

// ---------------------------------------------------------------------------
// Planar rocket: Q = SE(2) with coordinates (x1, x2, theta), G = R^2, S = S^1.

class Rocket final : public SystemModel {
 public:
  Rocket(double m, double J, double r, double g, RocketOptions opts)
      : SystemModel("rocket", make_coordinate_chart("rocket_xy_theta", {false, false, true}), GroupKind::R2,
                    ShapeKind::circle, {{"m", m}, {"J", J}, {"r", r}, {"g_grav", g}}),
        m_(m), J_(J), r_(r), g_(g), columns_(opts.force_columns) {
    require_positive(params());
    if (!(opts.section_scale > 0.0)) throw ModelError("section_scale must be positive");
    if (columns_ != 1 && columns_ != 2) throw ModelError("force_columns must be 1 or 2");
    const double k = opts.section_scale * J / (m * r);
    auto chart = this->chart();
    SectionMap section{"rocket", std::nullopt, [chart, k](const ShapePoint& s) {
                         const double th = s.coords[0];
                         Vec c(3);
                         c << k * std::sin(th), -k * std::cos(th), th;
                         return make_point(chart, c);
                       }};
    Trivialization triv{section, [k](const ConfigPoint& q) {
                          Vec g(2);
                          g << q.coords[0] - k * std::sin(q.coords[2]), q.coords[1] + k * std::cos(q.coords[2]);
                          return make_group_element(GroupKind::R2, g);
                        }};
    set_atlas(Atlas{{triv}, 0.6});
  }

  Mat metric(const ConfigPoint&) const override { return Eigen::Vector3d(m_, m_, J_).asDiagonal(); }

  std::optional<std::vector<Mat>> metric_partials(const ConfigPoint&) const override {
    return std::vector<Mat>(3, Mat::Zero(3, 3));
  }

  double potential(const ConfigPoint& q) const override { return m_ * g_ * q.coords[1]; }

  Vec potential_differential(const ConfigPoint&) const override { return Eigen::Vector3d(0.0, m_ * g_, 0.0); }

  Mat control_codistribution(const ConfigPoint& q) const override {
    const double c = std::cos(q.coords[2]), s = std::sin(q.coords[2]);
    Mat F(3, 2);
    F << c, -s,
         s, c,
         r_, 0.0;
    return F.leftCols(columns_);
  }

  ConfigPoint act(const GroupElement& g, const ConfigPoint& q) const override {
    Vec c = q.coords;
    c[0] += g.data[0];
    c[1] += g.data[1];
    return point(c);
  }

  Mat action_pushforward(const GroupElement&, const ConfigPoint&) const override { return Mat::Identity(3, 3); }

  ShapePoint project(const ConfigPoint& q) const override {
    return make_shape(ShapeKind::circle, q.coords.tail(1));
  }

  Mat projection_differential(const ConfigPoint&) const override {
    Mat D(1, 3);
    D << 0.0, 0.0, 1.0;
    return D;
  }

  Vec generator(const Vec& xi, const ConfigPoint&) const override { return Eigen::Vector3d(xi[0], xi[1], 0.0); }

  Vec generator_derivative(const Vec&, const ConfigPoint&, const Vec&) const override { return Vec::Zero(3); }

  std::optional<Mat> unactuated_frame(const ConfigPoint& q) const override {
    if (columns_ != 2) return std::nullopt;
    const double th = q.coords[2];
    return Mat(Eigen::Vector3d(-r_ * std::cos(th), -r_ * std::sin(th), 1.0));
  }

  ShapePoint nominal_shape() const override { return make_shape(ShapeKind::circle, Vec::Zero(1)); }

  ConfigPoint random_point(std::mt19937_64& rng) const override {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec c(3);
    c << 5.0 * u(rng), 5.0 * u(rng), kPi * u(rng);
    return point(c);
  }

 private:
  double m_, J_, r_, g_;
  int columns_;
};

// ---------------------------------------------------------------------------
// Planar aerial manipulator: Q = SE(2) x T^1, coordinates (x1, x2, theta, phi).
// End effector at x; gripper link centre at x - l_g/2 e(theta); joint at
// x - l_g e(theta); vehicle centre of mass at joint - l_q e(theta + phi).
// Thrust acts on the vehicle along -e(theta + phi).

class Manipulator final : public SystemModel {
 public:
  Manipulator(double m_g, double m_q, double l_g, double l_q, double g, double J_q)
      : SystemModel("manipulator", make_coordinate_chart("manipulator_xy_theta_phi", {false, false, true, true}),
                    GroupKind::SE2, ShapeKind::circle,
                    {{"m_g", m_g}, {"m_q", m_q}, {"l_g", l_g}, {"l_q", l_q}, {"J_q", J_q}, {"g_grav", g}}),
        m_g_(m_g), m_q_(m_q), l_g_(l_g), l_q_(l_q), g_(g), inertia_q_(J_q),
        inertia_g_(m_g * l_g * l_g / 12.0) {
    require_positive(params());
    const double k = l_q * m_q / (m_g + m_q);
    auto chart = this->chart();
    SectionMap section{"manipulator", std::nullopt, [chart, k](const ShapePoint& s) {
                         const double phi = s.coords[0];
                         Vec c(4);
                         c << k * std::cos(phi), k * std::sin(phi), 0.0, phi;
                         return make_point(chart, c);
                       }};
    const double c4 = -k;
    Trivialization triv{section, [c4](const ConfigPoint& q) {
                          const double psi = q.coords[2] + q.coords[3];
                          Vec g(3);
                          g << q.coords[0] + c4 * std::cos(psi), q.coords[1] + c4 * std::sin(psi), q.coords[2];
                          return make_group_element(GroupKind::SE2, g);
                        }};
    set_atlas(Atlas{{triv}, 0.6});
  }

  Mat metric(const ConfigPoint& q) const override {
    const auto [Jg, Jq] = jacobians(q);
    Mat M = m_g_ * Jg.transpose() * Jg + m_q_ * Jq.transpose() * Jq;
    M(2, 2) += inertia_g_;
    M.bottomRightCorner(2, 2).array() += inertia_q_;
    return M;
  }

  std::optional<std::vector<Mat>> metric_partials(const ConfigPoint& q) const override {
    const auto [Jg, Jq] = jacobians(q);
    const double th = q.coords[2], psi = q.coords[2] + q.coords[3];
    // e'' = -e, so differentiating the -l e'(.) columns gives +l e(.).
    Mat dJg_th = Mat::Zero(2, 4);
    dJg_th.col(2) = 0.5 * l_g_ * unit(th);
    Mat dJq_th = Mat::Zero(2, 4);
    dJq_th.col(2) = l_g_ * unit(th) + l_q_ * unit(psi);
    dJq_th.col(3) = l_q_ * unit(psi);
    Mat dJq_phi = Mat::Zero(2, 4);
    dJq_phi.col(2) = l_q_ * unit(psi);
    dJq_phi.col(3) = l_q_ * unit(psi);
    auto sym = [](const Mat& dJ, const Mat& J) { return Mat(dJ.transpose() * J + J.transpose() * dJ); };
    std::vector<Mat> dM(4, Mat::Zero(4, 4));
    dM[2] = m_g_ * sym(dJg_th, Jg) + m_q_ * sym(dJq_th, Jq);
    dM[3] = m_q_ * sym(dJq_phi, Jq);
    return dM;
  }

  double potential(const ConfigPoint& q) const override {
    const double th = q.coords[2], psi = q.coords[2] + q.coords[3];
    const double y_g = q.coords[1] - 0.5 * l_g_ * std::sin(th);
    const double y_q = q.coords[1] - l_g_ * std::sin(th) - l_q_ * std::sin(psi);
    return g_ * (m_g_ * y_g + m_q_ * y_q);
  }

  Vec potential_differential(const ConfigPoint& q) const override {
    const auto [Jg, Jq] = jacobians(q);
    return g_ * (m_g_ * Jg.row(1) + m_q_ * Jq.row(1)).transpose();
  }

  Mat control_codistribution(const ConfigPoint& q) const override {
    const auto [Jg, Jq] = jacobians(q);
    const double psi = q.coords[2] + q.coords[3];
    Mat F = Mat::Zero(4, 3);
    F.col(0) = Jq.transpose() * (-unit(psi));  // thrust
    F(2, 1) = 1.0;                               // vehicle body torque acts on psi
    F(3, 1) = 1.0;
    F(3, 2) = 1.0;                               // joint torque
    return F;
  }

  ConfigPoint act(const GroupElement& g, const ConfigPoint& q) const override {
    const double c = std::cos(g.data[2]), s = std::sin(g.data[2]);
    Vec out(4);
    out << c * q.coords[0] - s * q.coords[1] + g.data[0],
           s * q.coords[0] + c * q.coords[1] + g.data[1],
           q.coords[2] + g.data[2],
           q.coords[3];
    return point(out);
  }

  Mat action_pushforward(const GroupElement& g, const ConfigPoint&) const override {
    Mat T = Mat::Identity(4, 4);
    const double c = std::cos(g.data[2]), s = std::sin(g.data[2]);
    T(0, 0) = c;
    T(0, 1) = -s;
    T(1, 0) = s;
    T(1, 1) = c;
    return T;
  }

  ShapePoint project(const ConfigPoint& q) const override {
    return make_shape(ShapeKind::circle, q.coords.tail(1));
  }

  Mat projection_differential(const ConfigPoint&) const override {
    Mat D(1, 4);
    D << 0.0, 0.0, 0.0, 1.0;
    return D;
  }

  Vec generator(const Vec& xi, const ConfigPoint& q) const override {
    Vec v(4);
    v << xi[0] - xi[2] * q.coords[1], xi[1] + xi[2] * q.coords[0], xi[2], 0.0;
    return v;
  }

  Vec generator_derivative(const Vec& xi, const ConfigPoint&, const Vec& d) const override {
    Vec v(4);
    v << -xi[2] * d[1], xi[2] * d[0], 0.0, 0.0;
    return v;
  }

  std::optional<Mat> unactuated_frame(const ConfigPoint& q) const override {
    const double psi = q.coords[2] + q.coords[3];
    Vec X(4);
    X << -std::sin(psi), std::cos(psi), 0.0, 0.0;
    return Mat(X);
  }

  ShapePoint nominal_shape() const override {
    Vec phi(1);
    phi[0] = -kPi / 2.0;
    return make_shape(ShapeKind::circle, phi);
  }

  ConfigPoint random_point(std::mt19937_64& rng) const override {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec c(4);
    c << 5.0 * u(rng), 5.0 * u(rng), kPi * u(rng), kPi * u(rng);
    return point(c);
  }

 private:
  // Position Jacobians (2 x 4) of the gripper centre and the vehicle centre.
  std::pair<Mat, Mat> jacobians(const ConfigPoint& q) const {
    const double th = q.coords[2], psi = q.coords[2] + q.coords[3];
    Mat Jg = Mat::Zero(2, 4);
    Jg.leftCols(2).setIdentity();
    Jg.col(2) = -0.5 * l_g_ * unit_perp(th);
    Mat Jq = Mat::Zero(2, 4);
    Jq.leftCols(2).setIdentity();
    Jq.col(2) = -l_g_ * unit_perp(th) - l_q_ * unit_perp(psi);
    Jq.col(3) = -l_q_ * unit_perp(psi);
    return {Jg, Jq};
  }

  double m_g_, m_q_, l_g_, l_q_, g_, inertia_q_, inertia_g_;
};

// ---------------------------------------------------------------------------
// Quadrotor: Q = SE(3) in the body frame, coordinates (x, R row-major),
// G = R^3 x S^1 acting by (R, x) -> (R rot_z(g4), x + g123), S = S^2.

Matrix3d rotation_of(const ConfigPoint& q) {
  return Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(q.coords.data() + 3);
}

Vec se3_coords(const Vector3d& x, const Matrix3d& R) {
  Vec c(12);
  c.head(3) = x;
  Eigen::Map<Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(c.data() + 3) = R;
  return c;
}

// s3 + 1 and s3 - 1 lose all precision near the excluded pole; on the unit
// sphere they equal rho^2 / (1 - s3) and -rho^2 / (1 + s3).
Matrix3d section_north(const Vector3d& s) {
  const double rho2 = s.x() * s.x() + s.y() * s.y();
  const double d = s.z() < 0.0 ? rho2 / (1.0 - s.z()) : s.z() + 1.0;
  Matrix3d R;
  R << 1.0 - s.x() * s.x() / d, -s.x() * s.y() / d, s.x(),
       -s.x() * s.y() / d, 1.0 - s.y() * s.y() / d, s.y(),
       -s.x(), -s.y(), s.z();
  return R;
}

Matrix3d section_south(const Vector3d& s) {
  const double rho2 = s.x() * s.x() + s.y() * s.y();
  const double d = s.z() > 0.0 ? -rho2 / (1.0 + s.z()) : s.z() - 1.0;
  Matrix3d R;
  R << 1.0 + s.x() * s.x() / d, -s.x() * s.y() / d, s.x(),
       s.x() * s.y() / d, -1.0 - s.y() * s.y() / d, s.y(),
       s.x(), -s.y(), s.z();
  return R;
}

class Quadrotor final : public SystemModel {
 public:
  Quadrotor(double m, double J_xx, double J_zz, double g)
      : SystemModel("quadrotor", make_se3_body_chart("quadrotor_se3_body"), GroupKind::R3xS1, ShapeKind::sphere,
                    {{"m", m}, {"J_xx", J_xx}, {"J_zz", J_zz}, {"g_grav", g}}),
        m_(m), g_(g), inertia_(J_xx, J_xx, J_zz) {
    require_positive(params());
    auto chart = this->chart();
    auto make_triv = [chart](std::string name, Vector3d pole, Matrix3d (*sec)(const Vector3d&)) {
      SectionMap section{std::move(name), pole, [chart, sec](const ShapePoint& s) {
                           return make_point(chart, se3_coords(Vector3d::Zero(), sec(Vector3d(s.coords))));
                         }};
      Trivialization triv{section, [sec](const ConfigPoint& q) {
                            const Matrix3d R = rotation_of(q);
                            const Matrix3d rel = sec(R.col(2)).transpose() * R;
                            Vec g(4);
                            g << q.coords.head(3), std::atan2(rel(1, 0), rel(0, 0));
                            return make_group_element(GroupKind::R3xS1, g);
                          }};
      return triv;
    };
    set_atlas(Atlas{{make_triv("north", -Vector3d::UnitZ(), &section_north),
                     make_triv("south", Vector3d::UnitZ(), &section_south)},
                    0.6});
  }

  Mat metric(const ConfigPoint&) const override {
    Vec d(6);
    d << m_, m_, m_, inertia_;
    return d.asDiagonal();
  }

  double potential(const ConfigPoint& q) const override { return m_ * g_ * q.coords[2]; }

  Vec potential_differential(const ConfigPoint& q) const override {
    Vec dP = Vec::Zero(6);
    dP.head(3) = m_ * g_ * rotation_of(q).row(2).transpose();
    return dP;
  }

  Mat control_codistribution(const ConfigPoint&) const override {
    Mat F = Mat::Zero(6, 4);
    F(2, 0) = 1.0;
    F.bottomRightCorner(3, 3).setIdentity();
    return F;
  }

  // Levi-Civita connection of the left-invariant metric on left-invariant
  // fields u = (v_u, w_u), w = (v_w, w_w).
  Vec connection(const ConfigPoint&, const Vec& u, const Vec& w) const override {
    const Vector3d vw = w.head(3);
    const Vector3d wu = u.tail(3), ww = w.tail(3);
    Vec out(6);
    out.head(3) = wu.cross(vw);
    out.tail(3) = 0.5 * (wu.cross(inertia_.cwiseProduct(ww)) + ww.cross(inertia_.cwiseProduct(wu)))
                          .cwiseQuotient(inertia_) +
                  0.5 * wu.cross(ww);
    return out;
  }

  ConfigPoint retract(const ConfigPoint& q, const Vec& delta) const override {
    const Matrix3d R = rotation_of(q);
    return point(se3_coords(q.coords.head<3>() + R * delta.head<3>(), so3::orthonormalize(R * so3::exp(delta.tail<3>()))));
  }

  Vec local_coordinates(const ConfigPoint& base, const ConfigPoint& q) const override {
    const Matrix3d R0 = rotation_of(base);
    Vec d(6);
    d.head(3) = R0.transpose() * (q.coords.head<3>() - base.coords.head<3>());
    d.tail(3) = so3::log(R0.transpose() * rotation_of(q));
    return d;
  }

  Vec local_velocity(const ConfigPoint&, const Vec& delta, const Vec& qdot) const override {
    Vec d(6);
    d.head(3) = so3::exp(delta.tail<3>()) * qdot.head<3>();
    d.tail(3) = so3::dexp_inv(delta.tail<3>()) * qdot.tail<3>();
    return d;
  }

  Vec second_order_correction(const Vec& qdot) const override {
    Vec c = Vec::Zero(6);
    c.head(3) = Vector3d(qdot.tail<3>()).cross(Vector3d(qdot.head<3>()));
    return c;
  }

  ConfigPoint act(const GroupElement& g, const ConfigPoint& q) const override {
    return point(se3_coords(q.coords.head<3>() + g.data.head<3>(), rotation_of(q) * so3::rot_z(g.data[3])));
  }

  Mat action_pushforward(const GroupElement& g, const ConfigPoint&) const override {
    const Matrix3d Rt = so3::rot_z(g.data[3]).transpose();
    Mat T = Mat::Zero(6, 6);
    T.topLeftCorner(3, 3) = Rt;
    T.bottomRightCorner(3, 3) = Rt;
    return T;
  }

  ShapePoint project(const ConfigPoint& q) const override {
    Vec s = rotation_of(q).col(2);
    s.normalize();
    return ShapePoint{ShapeKind::sphere, s};
  }

  // sdot = R (w x e3) for body angular velocity w.
  Mat projection_differential(const ConfigPoint& q) const override {
    const ShapePoint s = project(q);
    Mat D = Mat::Zero(2, 6);
    D.rightCols(3) = -shape_tangent_basis(s).transpose() * rotation_of(q) * so3::hat(Vector3d::UnitZ());
    return D;
  }

  Vec generator(const Vec& xi, const ConfigPoint& q) const override {
    Vec v = Vec::Zero(6);
    v.head(3) = rotation_of(q).transpose() * xi.head<3>();
    v[5] = xi[3];
    return v;
  }

  Vec generator_derivative(const Vec& xi, const ConfigPoint& q, const Vec& d) const override {
    Vec v = Vec::Zero(6);
    v.head(3) = -Vector3d(d.tail<3>()).cross(rotation_of(q).transpose() * xi.head<3>());
    return v;
  }

  std::optional<Mat> unactuated_frame(const ConfigPoint&) const override {
    Mat X = Mat::Zero(6, 2);
    X(0, 0) = 1.0;
    X(1, 1) = 1.0;
    return X;
  }

  // Thrust axis along the net specific force a + g e3.
  std::optional<ShapePoint> closed_form_shape(const Trivialization&, const GroupElement&, const Vec&,
                                              const Vec& xidot, const ShapePoint& guess) const override {
    Vector3d n = xidot.head<3>() + g_ * Vector3d::UnitZ();
    const double norm = n.norm();
    if (norm < 1e-12) return std::nullopt;
    n /= norm;
    if (n.dot(Vector3d(guess.coords)) < 0.0) n = -n;
    return ShapePoint{ShapeKind::sphere, n};
  }

  ShapePoint nominal_shape() const override { return ShapePoint{ShapeKind::sphere, Vector3d::UnitZ()}; }

  ConfigPoint random_point(std::mt19937_64& rng) const override {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Quaterniond quat(n(rng), n(rng), n(rng), n(rng));
    quat.normalize();
    const Vector3d x(5.0 * u(rng), 5.0 * u(rng), 5.0 * u(rng));
    return point(se3_coords(x, quat.toRotationMatrix()));
  }

 private:
  double m_, g_;
  Vector3d inertia_;
};

double take(Params& p, const std::string& key) {
  const double v = p.at(key);
  p.erase(key);
  return v;
}

}  // namespace

SystemPtr make_rocket(double m, double J, double r, double g_grav, RocketOptions options) {
  return std::make_shared<Rocket>(m, J, r, g_grav, options);
}

SystemPtr make_manipulator(double m_g, double m_q, double l_g, double l_q, double g_grav, double J_q) {
  return std::make_shared<Manipulator>(m_g, m_q, l_g, l_q, g_grav, J_q);
}

SystemPtr make_quadrotor(double m, double J_xx, double J_zz, double g_grav) {
  return std::make_shared<Quadrotor>(m, J_xx, J_zz, g_grav);
}

Params default_params(const std::string& system) {
  if (system == "rocket") {
    return {{"m", 1.0}, {"J", 0.2}, {"r", 0.5}, {"g_grav", 9.81}, {"section_scale", 1.0}, {"force_columns", 2.0}};
  }
  if (system == "manipulator") {
    return {{"m_g", 1.0}, {"m_q", 0.3}, {"l_g", 0.2}, {"l_q", 0.4}, {"J_q", 0.01}, {"g_grav", 9.81}};
  }
  if (system == "quadrotor") return {{"m", 1.0}, {"J_xx", 0.01}, {"J_zz", 0.02}, {"g_grav", 9.81}};
  throw FormatError("unknown system '" + system + "'");
}

SystemPtr make_system(const std::string& system, const Params& params) {
  Params p = default_params(system);
  for (const auto& [key, value] : params) {
    if (!p.count(key)) throw FormatError("unknown parameter '" + key + "' for system '" + system + "'");
    if (!std::isfinite(value)) throw FormatError("parameter '" + key + "' is not finite");
    p[key] = value;
  }
  if (system == "rocket") {
    RocketOptions opts;
    opts.section_scale = take(p, "section_scale");
    const double cols = take(p, "force_columns");
    if (cols != 1.0 && cols != 2.0) throw FormatError("force_columns must be 1 or 2");
    opts.force_columns = static_cast<int>(cols);
    return make_rocket(p.at("m"), p.at("J"), p.at("r"), p.at("g_grav"), opts);
  }
  if (system == "manipulator") {
    return make_manipulator(p.at("m_g"), p.at("m_q"), p.at("l_g"), p.at("l_q"), p.at("g_grav"), p.at("J_q"));
  }
  return make_quadrotor(p.at("m"), p.at("J_xx"), p.at("J_zz"), p.at("g_grav"));
}

SystemPtr load_model_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("model file must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "system" && key != "params") throw FormatError("unknown key '" + key + "' in model file");
  }
  if (!j.contains("system") || !j["system"].is_string()) throw FormatError("model file needs a string 'system'");
  Params params;
  if (j.contains("params")) {
    if (!j["params"].is_object()) throw FormatError("'params' must be an object");
    for (const auto& [key, value] : j["params"].items()) {
      if (!value.is_number()) throw FormatError("parameter '" + key + "' must be a number");
      params[key] = value.get<double>();
    }
  }
  try {
    return make_system(j["system"].get<std::string>(), params);
  } catch (const ModelError& e) {
    throw FormatError(e.what());
  }
}

SystemPtr load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_model_text(ss.str());
}

}  // namespace geoflat
