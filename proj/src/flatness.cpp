#include "geoflat/flatness.hpp"

#include "geoflat/bundle.hpp"
#include "geoflat/flatmap.hpp"
#include "geoflat/geometry.hpp"
#include "geoflat/linalg.hpp"
#include "geoflat/parallel.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <mutex>
#include <random>

namespace geoflat {

namespace {

template <class F>
Vec five_point(F&& f, double h) {
  return (-f(2 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2 * h)) / (12.0 * h);
}

template <class F>
Vec five_point_second(F&& f, double h) {
  return (-f(2 * h) + 16.0 * f(h) - 30.0 * f(0.0) + 16.0 * f(-h) - f(-2 * h)) / (12.0 * h * h);
}

// Samples a shape that a section can evaluate comfortably.
ShapePoint sample_shape(const SectionMap& section, ShapeKind kind, std::mt19937_64& rng) {
  for (;;) {
    ShapePoint s = random_shape(kind, rng);
    if (section.contains(s, 1e-3)) return s;
  }
}

Vec random_ball(std::mt19937_64& rng, int n, double radius) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec v(n);
  do {
    for (int i = 0; i < n; ++i) v[i] = normal(rng);
  } while (v.norm() < 1e-12);
  v.normalize();
  return radius * std::pow(unit(rng), 1.0 / n) * v;
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) { return splitmix(seed ^ splitmix(index)); }

}  // namespace

int generic_control_rank(const SystemModel& system) {
  std::mt19937_64 rng(12345);
  int rank = 0;
  for (int k = 0; k < 4; ++k) {
    rank = std::max(rank, numerical_rank(system.control_codistribution(system.random_point(rng))));
  }
  return rank;
}

DistributionSample unactuated_basis(const SystemModel& system, const ConfigPoint& q) {
  const Mat F = system.control_codistribution(q);
  if (F.rows() != system.dim()) throw ModelError("control codistribution has wrong size");
  if (numerical_rank(F) < generic_control_rank(system)) {
    throw ModelError("control codistribution of '" + system.name() + "' loses rank at this point");
  }
  return DistributionSample{q, nullspace(F.transpose())};
}

std::function<Mat(const ConfigPoint&)> unactuated_frame_field(const SystemModel& system, const ConfigPoint& q) {
  if (system.unactuated_frame(q)) {
    return [&system](const ConfigPoint& p) { return *system.unactuated_frame(p); };
  }
  const Mat reference = unactuated_basis(system, q).basis;
  return [&system, reference](const ConfigPoint& p) {
    const Mat N = nullspace(system.control_codistribution(p).transpose());
    if (N.cols() != reference.cols()) throw ModelError("unactuated subbundle changes rank");
    return polar_orthonormalize(N * (N.transpose() * reference));
  };
}

DistributionSample underactuation_distribution(const SystemModel& system, const ConfigPoint& q) {
  const auto field = unactuated_frame_field(system, q);
  const Mat X = field(q);
  const int n = system.dim();
  const int u = static_cast<int>(X.cols());
  Mat cols(n, u * (n + 1));
  cols.leftCols(u) = X;
  for (int j = 0; j < n; ++j) {
    const Vec Y = Vec::Unit(n, j);
    for (int i = 0; i < u; ++i) {
      cols.col(u + j * u + i) =
          covariant_derivative(system, q, Y, [&](const ConfigPoint& p) -> Vec { return field(p).col(i); });
    }
  }
  return DistributionSample{q, orthonormal_basis(cols, 1e-9)};
}

bool check_dim_condition(const SystemModel& system) { return system.group_dim() == generic_control_rank(system); }

double orthogonality_residual_at(const SystemModel& system, const SectionMap& section, const ShapePoint& s) {
  const ConfigPoint q = section_point(Trivialization{section, {}}, s);
  const Mat T = section_tangent(system, section, s);
  const Mat D = underactuation_distribution(system, q).basis;
  const Mat M = metric_at(system, q);
  // Metric-orthonormal basis of Delta: D L^{-T} with D^T M D = L L^T.
  const Eigen::LLT<Mat> llt(D.transpose() * M * D);
  const Mat Dm = llt.matrixL().solve(D.transpose()).transpose();
  double worst = 0.0;
  for (int a = 0; a < T.cols(); ++a) {
    const Vec t = T.col(a);
    const double norm = std::sqrt(t.dot(M * t));
    worst = std::max(worst, (Dm.transpose() * M * t).norm() / norm);
  }
  return worst;
}

double check_orthogonality(const SystemModel& system, const SectionMap& section, int n_samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int k = 0; k < n_samples; ++k) {
    worst = std::max(worst, orthogonality_residual_at(system, section, sample_shape(section, system.shape_kind(), rng)));
  }
  return worst;
}

double delta_equivariance_residual(const SystemModel& system, const GroupElement& g, const ConfigPoint& q) {
  const Mat A = system.action_pushforward(g, q) * underactuation_distribution(system, q).basis;
  const Mat B = underactuation_distribution(system, system.act(g, q)).basis;
  return subspace_distance(A, B);
}

double check_delta_equivariance(const SystemModel& system, int n_samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int k = 0; k < n_samples; ++k) {
    const ConfigPoint q = system.random_point(rng);
    const GroupElement g = system.random_group_element(rng, 10.0);
    worst = std::max(worst, delta_equivariance_residual(system, g, q));
  }
  return worst;
}

Vec implicit_dynamics_value(const SystemModel& system, const Trivialization& triv, const ShapePoint& s,
                            const GroupElement& g, const Vec& xi, const Vec& xidot) {
  if (xi.size() != system.group_dim() || xidot.size() != system.group_dim()) {
    throw ModelError("Lie algebra vector has wrong size");
  }
  const ConfigPoint q = untrivialize(system, triv, s, g);
  const Mat X = unactuated_frame_field(system, q)(q);
  const Vec V = system.generator(xi, q);
  const Vec accel = system.generator(xidot, q) + system.generator_derivative(xi, q, V) + system.connection(q, V, V);
  return X.transpose() * (system.metric(q) * accel + system.potential_differential(q));
}

ImplicitDynamicsEval implicit_dynamics(const SystemModel& system, const Trivialization& triv, const ShapePoint& s,
                                       const GroupElement& g, const Vec& xi, const Vec& xidot) {
  ImplicitDynamicsEval out;
  out.value = implicit_dynamics_value(system, triv, s, g, xi, xidot);
  constexpr double h = 1e-6;
  const int n = shape_dim(s.kind);
  out.jacobian_shape.resize(out.value.size(), n);
  for (int a = 0; a < n; ++a) {
    const Vec e = Vec::Unit(n, a);
    out.jacobian_shape.col(a) = (implicit_dynamics_value(system, triv, shape_retract(s, h * e), g, xi, xidot) -
                                 implicit_dynamics_value(system, triv, shape_retract(s, -h * e), g, xi, xidot)) /
                                (2.0 * h);
  }
  return out;
}

Vec implicit_dynamics_general(const SystemModel& system, const ConfigPoint& q, const Vec& qdot, const Vec& qddot) {
  const Mat X = unactuated_frame_field(system, q)(q);
  const Vec lhs = qddot + system.connection(q, qdot, qdot);
  return X.transpose() * (system.metric(q) * lhs + system.potential_differential(q));
}

Vec implicit_dynamics_full(const SystemModel& system, const Trivialization& triv, const ShapePoint& s,
                           const Vec& sdot, const Vec& sddot, const GroupElement& g, const Vec& xi,
                           const Vec& xidot, double h) {
  const ConfigPoint q0 = bundle_curve(system, triv, s, sdot, sddot, g, xi, xidot, 0.0);
  auto c = [&](double t) {
    return system.local_coordinates(q0, bundle_curve(system, triv, s, sdot, sddot, g, xi, xidot, t));
  };
  const Vec qdot = five_point(c, h);
  const Vec qddot = five_point_second(c, h) - system.second_order_correction(qdot);
  return implicit_dynamics_general(system, q0, qdot, qddot);
}

RegularityEval regularity_at(const SystemModel& system, const Trivialization& triv, const ShapePoint& s,
                             const GroupElement& g, const Vec& xi, const Vec& xidot) {
  const ImplicitDynamicsEval ev = implicit_dynamics(system, triv, s, g, xi, xidot);
  const Mat& J = ev.jacobian_shape;
  if (J.rows() != J.cols()) throw ModelError("implicit dynamics Jacobian is not square (dim UQ != dim S)");
  const ConfigPoint q = untrivialize(system, triv, s, g);
  const Mat M = system.metric(q);
  const double frame_norm = unactuated_frame_field(system, q)(q).norm();
  RegularityEval r;
  r.scale = M.norm() * frame_norm *
            (1.0 + xidot.norm() + xi.squaredNorm() + grad_potential(system, q).comps.norm());
  r.det = J.determinant();
  Eigen::JacobiSVD<Mat> svd(J);
  const Vec sv = svd.singularValues();
  r.condition = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : std::numeric_limits<double>::infinity();
  r.singular = std::abs(r.det) <= 1e-8 * std::pow(r.scale, static_cast<double>(J.rows())) || r.condition > 1e10;
  return r;
}

RegularityReport check_regularity(const SystemModel& system, const Trivialization& triv, int n_samples,
                                  std::uint64_t seed) {
  struct Outcome {
    std::vector<SingularTuple> singular;
    int roots = 0;
    bool skipped = false;
  };
  std::vector<Outcome> outcomes(n_samples);
  parallel_for(static_cast<std::size_t>(n_samples), [&](std::size_t i) {
    std::mt19937_64 rng(mix_seed(seed, i));
    const GroupElement g = system.random_group_element(rng, 10.0);
    const Vec xi = random_ball(rng, system.group_dim(), 10.0);
    const Vec xidot = random_ball(rng, system.group_dim(), 10.0);
    Outcome& out = outcomes[i];
    for (const ShapePoint& s : shape_roots(system, triv, g, xi, xidot, 8)) {
      if (!triv.section.contains(s, 1e-3)) continue;
      ++out.roots;
      const RegularityEval r = regularity_at(system, triv, s, g, xi, xidot);
      if (r.singular) out.singular.push_back(SingularTuple{s, g, xi, xidot, r.det});
    }
    out.skipped = out.roots == 0;
  });
  RegularityReport report;
  report.samples = n_samples;
  for (auto& o : outcomes) {
    report.roots += o.roots;
    report.skipped += o.skipped ? 1 : 0;
    for (auto& t : o.singular) report.singular.push_back(std::move(t));
  }
  const int regular = report.roots - static_cast<int>(report.singular.size());
  report.generic_fraction = report.roots > 0 ? static_cast<double>(regular) / report.roots : 0.0;
  report.generic_rank = regular > 0 ? system.shape_dim() : 0;
  return report;
}

}  // namespace geoflat
