#include "geoflat/geometry.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace geoflat {

namespace {

void require_at(const ConfigPoint& q, const TangentVec& v) {
  require_same_chart(q, v.at);
  if (v.comps.size() != q.chart->dim) throw ChartError("vector has wrong number of components");
}

}  // namespace

Mat metric_at(const SystemModel& system, const ConfigPoint& q) {
  Mat M = system.metric(q);
  if (M.rows() != system.dim() || M.cols() != system.dim()) throw ModelError("metric has wrong size");
  const double norm = M.norm();
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, norm)) {
    throw ModelError("metric of '" + system.name() + "' is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(M, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 1e-12 * norm)) {
    throw ModelError("metric of '" + system.name() + "' is not positive definite");
  }
  return M;
}

TangentVec sharp(const SystemModel& system, const CotangentVec& f) {
  require_same_chart(f.at, f.at);
  if (f.comps.size() != system.dim()) throw ChartError("covector has wrong number of components");
  const Mat M = metric_at(system, f.at);
  return TangentVec{f.at, M.llt().solve(f.comps)};
}

CotangentVec flat_iso(const SystemModel& system, const TangentVec& v) {
  if (v.comps.size() != system.dim()) throw ChartError("vector has wrong number of components");
  return CotangentVec{v.at, metric_at(system, v.at) * v.comps};
}

TangentVec grad_potential(const SystemModel& system, const ConfigPoint& q) {
  return sharp(system, CotangentVec{q, system.potential_differential(q)});
}

std::vector<Mat> metric_partials_fd(const SystemModel& system, const ConfigPoint& q) {
  const int n = system.dim();
  const double h = 1e-6 * std::max(1.0, q.coords.norm());
  std::vector<Mat> dM(n);
  for (int k = 0; k < n; ++k) {
    const Vec e = Vec::Unit(n, k);
    dM[k] = (system.metric(system.retract(q, h * e)) - system.metric(system.retract(q, -h * e))) / (2.0 * h);
  }
  return dM;
}

Christoffel christoffel_from_partials(const Mat& M, const std::vector<Mat>& dM) {
  const int n = static_cast<int>(M.rows());
  // First-kind symbols: L(l; i, j) = 1/2 (d_i M_lj + d_j M_li - d_l M_ij).
  std::vector<Mat> first(n, Mat::Zero(n, n));
  for (int l = 0; l < n; ++l) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        first[l](i, j) = 0.5 * (dM[i](l, j) + dM[j](l, i) - dM[l](i, j));
      }
    }
  }
  const Mat Minv = M.llt().solve(Mat::Identity(n, n));
  Christoffel gamma(n, Mat::Zero(n, n));
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) gamma[k] += Minv(k, l) * first[l];
  }
  return gamma;
}

Christoffel christoffel_at(const SystemModel& system, const ConfigPoint& q) {
  if (system.chart()->frame_kind != FrameKind::coordinate) {
    throw ModelError("Christoffel symbols require a coordinate chart");
  }
  const Mat M = metric_at(system, q);
  if (auto dM = system.metric_partials(q)) return christoffel_from_partials(M, *dM);
  return christoffel_from_partials(M, metric_partials_fd(system, q));
}

Christoffel christoffel_fd(const SystemModel& system, const ConfigPoint& q) {
  if (system.chart()->frame_kind != FrameKind::coordinate) {
    throw ModelError("Christoffel symbols require a coordinate chart");
  }
  return christoffel_from_partials(metric_at(system, q), metric_partials_fd(system, q));
}

Vec covariant_derivative(const SystemModel& system, const ConfigPoint& q, const Vec& Y,
                         const std::function<Vec(const ConfigPoint&)>& field) {
  constexpr double h = 1e-5;
  auto at = [&](double t) { return field(system.retract(q, t * Y)); };
  const Vec dX = (-at(2 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2 * h)) / (12.0 * h);
  return dX + system.connection(q, Y, field(q));
}

TangentVec dynamics_residual(const SystemModel& system, const ConfigPoint& q, const TangentVec& qdot,
                             const TangentVec& qddot) {
  require_at(q, qdot);
  require_at(q, qddot);
  const Vec r = qddot.comps + system.connection(q, qdot.comps, qdot.comps) + grad_potential(system, q).comps;
  return TangentVec{q, r};
}

Vec forced_acceleration(const SystemModel& system, const ConfigPoint& q, const Vec& qdot, const Vec& force_coeffs) {
  const Mat M = metric_at(system, q);
  const Mat F = system.control_codistribution(q);
  if (force_coeffs.size() != F.cols()) throw ModelError("force coefficient count does not match F");
  const Vec rhs = F * force_coeffs - system.potential_differential(q);
  return M.llt().solve(rhs) - system.connection(q, qdot, qdot);
}

double kinetic_energy(const SystemModel& system, const ConfigPoint& q, const Vec& qdot) {
  return 0.5 * qdot.dot(metric_at(system, q) * qdot);
}

double total_energy(const SystemModel& system, const ConfigPoint& q, const Vec& qdot) {
  return kinetic_energy(system, q, qdot) + system.potential(q);
}

}  // namespace geoflat
