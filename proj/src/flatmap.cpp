#include "geoflat/flatmap.hpp"

#include "geoflat/bundle.hpp"
#include "geoflat/flatness.hpp"
#include "geoflat/geometry.hpp"

#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace geoflat {

namespace {

double inverse_condition(const Mat& J) {
  Eigen::JacobiSVD<Mat> svd(J);
  const Vec sv = svd.singularValues();
  return sv[0] > 0.0 ? sv[sv.size() - 1] / sv[0] : 0.0;
}

// One Newton step direction, or nullopt if the Jacobian is numerically singular.
std::optional<Vec> newton_direction(const ImplicitDynamicsEval& ev) {
  const Mat& J = ev.jacobian_shape;
  if (J.rows() != J.cols()) throw ModelError("implicit dynamics Jacobian is not square (dim UQ != dim S)");
  if (!(inverse_condition(J) > 1e-14)) return std::nullopt;
  return Vec(-J.fullPivLu().solve(ev.value));
}

struct Kinematics {
  Vec xi;
  Vec xidot;
};

Kinematics flat_kinematics(const FlatPoint& y) {
  if (y.derivs.size() < 2) throw ModelError("flat point needs derivatives up to order 2");
  return {spatial_velocity(y.value, y.derivs[0]), spatial_acceleration(y.value, y.derivs[0], y.derivs[1])};
}

}  // namespace

GroupElement flat_output(const SystemModel& system, const Trivialization& triv, const ConfigPoint& q) {
  return trivialize(system, triv, q).second;
}

ShapeSolution solve_shape(const SystemModel& system, const Trivialization& triv, const GroupElement& g,
                          const Vec& xi, const Vec& xidot, const ShapePoint& guess, const ShapeSolveOptions& options) {
  ShapeSolution sol;
  sol.s = guess;
  if (options.use_closed_form) {
    if (auto closed = system.closed_form_shape(triv, g, xi, xidot, guess)) {
      sol.s = *closed;
      sol.closed_form = true;
    }
  }
  auto residual_at = [&](const ShapePoint& s) {
    return implicit_dynamics_value(system, triv, s, g, xi, xidot).norm();
  };
  ShapePoint best = sol.s;
  double best_residual = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (int it = 0; it <= options.max_iter; ++it) {
    const ImplicitDynamicsEval ev = implicit_dynamics(system, triv, sol.s, g, xi, xidot);
    const double r = ev.value.norm();
    if (r < best_residual) {
      best_residual = r;
      best = sol.s;
    }
    sol.iterations = it;
    if (r < options.tol) {
      converged = true;
      break;
    }
    const auto step = newton_direction(ev);
    if (!step) break;
    Vec delta = *step;
    if (delta.norm() > options.max_step) delta *= options.max_step / delta.norm();
    double alpha = 1.0;
    ShapePoint trial = shape_retract(sol.s, delta);
    while (!triv.section.contains(trial, kPoleMargin) || residual_at(trial) >= (1.0 - 1e-4 * alpha) * r) {
      alpha *= 0.5;
      if (alpha < 1e-6) break;
      trial = shape_retract(sol.s, alpha * delta);
    }
    if (alpha < 1e-6) break;
    sol.s = trial;
  }
  if (!converged) {
    throw ConvergenceError("shape solve did not converge (|E| = " + std::to_string(best_residual) + ")",
                           best.coords, best_residual);
  }
  // Polish to the noise floor so that time differences of the root stay smooth.
  for (int k = 0; k < 2; ++k) {
    const ImplicitDynamicsEval ev = implicit_dynamics(system, triv, sol.s, g, xi, xidot);
    const auto step = newton_direction(ev);
    if (!step) break;
    const ShapePoint trial = shape_retract(sol.s, *step);
    if (triv.section.contains(trial, kPoleMargin) && residual_at(trial) <= ev.value.norm()) sol.s = trial;
  }
  sol.residual = residual_at(sol.s);
  const RegularityEval reg = regularity_at(system, triv, sol.s, g, xi, xidot);
  sol.condition = reg.condition;
  if (options.reject_singular && reg.singular) {
    throw SingularError("implicit dynamics are singular at this tuple (det dE/ds = " + std::to_string(reg.det) +
                        ", e.g. free fall)");
  }
  return sol;
}

ShapeSolution solve_shape_cold(const SystemModel& system, const Trivialization& triv, const GroupElement& g,
                               const Vec& xi, const Vec& xidot, int n_seeds) {
  std::vector<ShapePoint> seeds;
  const ShapePoint nominal = system.nominal_shape();
  if (triv.section.contains(nominal, 1e-3)) seeds.push_back(nominal);
  std::vector<std::pair<double, ShapePoint>> spread;
  for (ShapePoint& s : shape_spread(system.shape_kind(), n_seeds)) {
    if (!triv.section.contains(s, 1e-3)) continue;
    const double r = implicit_dynamics_value(system, triv, s, g, xi, xidot).norm();
    spread.emplace_back(r, std::move(s));
  }
  std::stable_sort(spread.begin(), spread.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& entry : spread) seeds.push_back(std::move(entry.second));

  Vec best;
  double best_residual = std::numeric_limits<double>::infinity();
  for (const ShapePoint& seed : seeds) {
    try {
      return solve_shape(system, triv, g, xi, xidot, seed);
    } catch (const ConvergenceError& e) {
      if (e.residual() < best_residual) {
        best_residual = e.residual();
        best = e.best_iterate();
      }
    }
  }
  throw ConvergenceError("no shape seed converged", best, best_residual);
}

std::vector<ShapePoint> shape_roots(const SystemModel& system, const Trivialization& triv, const GroupElement& g,
                                    const Vec& xi, const Vec& xidot, int n_seeds) {
  std::vector<ShapePoint> seeds{system.nominal_shape()};
  for (ShapePoint& s : shape_spread(system.shape_kind(), n_seeds)) seeds.push_back(std::move(s));
  ShapeSolveOptions options;
  options.use_closed_form = false;
  options.reject_singular = false;
  std::vector<ShapePoint> roots;
  for (const ShapePoint& seed : seeds) {
    if (!triv.section.contains(seed, 1e-3)) continue;
    try {
      ShapeSolution sol = solve_shape(system, triv, g, xi, xidot, seed, options);
      const bool seen = std::any_of(roots.begin(), roots.end(),
                                    [&](const ShapePoint& r) { return shape_distance(r, sol.s) < 1e-6; });
      if (!seen) roots.push_back(std::move(sol.s));
    } catch (const ConvergenceError&) {
    }
  }
  return roots;
}

Reconstruction reconstruct(const SystemModel& system, const Trivialization& triv, const FlatPoint& y,
                           const std::optional<ShapePoint>& guess) {
  const Kinematics k = flat_kinematics(y);
  const ShapeSolution sol = guess ? solve_shape(system, triv, y.value, k.xi, k.xidot, *guess)
                                  : solve_shape_cold(system, triv, y.value, k.xi, k.xidot);
  return Reconstruction{untrivialize(system, triv, sol.s, y.value), sol.s, k.xi, k.xidot};
}

FlatPoint taylor_shift(const FlatPoint& y, double tau) {
  const int order = static_cast<int>(y.derivs.size());
  FlatPoint out;
  // d^j/dt^j y(t + tau) = sum_{k >= j} y^(k) tau^(k-j) / (k-j)!
  auto shifted = [&](int j, const Vec& base) {
    Vec v = base;
    double factor = 1.0;
    for (int k = j + 1; k <= order; ++k) {
      factor *= tau / (k - j);
      v += factor * y.derivs[k - 1];
    }
    return v;
  };
  out.value = make_group_element(y.value.kind, shifted(0, y.value.data));
  for (int j = 1; j <= order; ++j) out.derivs.push_back(shifted(j, y.derivs[j - 1]));
  return out;
}

Reconstructor::Reconstructor(SystemPtr system, std::size_t chart, double dt_fd, double tol)
    : system_(std::move(system)), chart_(chart), active_(chart), dt_fd_(dt_fd), tol_(tol) {
  if (!system_) throw ModelError("reconstructor without system");
  system_->trivialization(chart_);
  if (!(dt_fd_ > 0.0) || !(tol_ > 0.0)) throw ModelError("dt_fd and tol must be positive");
}

Reconstruction Reconstructor::solve_at(const FlatPoint& y, const std::optional<ShapePoint>& guess,
                                       std::size_t active) const {
  const SystemModel& sys = *system_;
  const Trivialization& planned = sys.trivialization(chart_);
  Reconstruction r;
  if (guess) {
    try {
      r = reconstruct(sys, planned, y, guess);
    } catch (const ConvergenceError&) {
      r = reconstruct(sys, planned, y);
    }
  } else {
    r = reconstruct(sys, planned, y);
  }
  if (active != chart_) {
    // Re-express the flat output in the active chart: g_B = g_A phi_B(sigma_A(s)).
    const Trivialization& other = sys.trivialization(active);
    const GroupElement g_b = compose(y.value, other.group_part(section_point(planned, r.s)));
    r.q = untrivialize(sys, other, r.s, g_b);
  }
  return r;
}

Reconstruction Reconstructor::configuration(const FlatPoint& y) {
  Reconstruction r = solve_at(y, last_shape_, active_);
  const std::size_t next = system_->atlas().select(r.s, active_);
  if (next != active_) {
    const Reconstruction other = solve_at(y, r.s, next);
    const double jump = system_->local_coordinates(r.q, other.q).norm();
    events_.push_back(SwitchEvent{0.0, active_, next, jump});
    active_ = next;
    r = other;
  }
  last_shape_ = r.s;
  return r;
}

ReconstructedSample Reconstructor::sample(double t, const FlatPoint& y) {
  if (y.derivs.size() < 4) throw ModelError("full reconstruction needs flat derivatives up to order 4");
  const std::size_t events_before = events_.size();
  const Reconstruction center = configuration(y);
  for (std::size_t i = events_before; i < events_.size(); ++i) events_[i].t = t;
  const SystemModel& sys = *system_;
  const double h = dt_fd_;
  auto c = [&](double tau) -> Vec {
    if (tau == 0.0) return Vec::Zero(sys.dim());
    return sys.local_coordinates(center.q, solve_at(taylor_shift(y, tau), center.s, active_).q);
  };
  const Vec c_m2 = c(-2 * h), c_m1 = c(-h), c_p1 = c(h), c_p2 = c(2 * h);
  ReconstructedSample out;
  out.t = t;
  out.q = center.q;
  out.s = center.s;
  out.chart = active_;
  out.qdot = (-c_p2 + 8.0 * c_p1 - 8.0 * c_m1 + c_m2) / (12.0 * h);
  out.qddot = (-c_p2 + 16.0 * c_p1 + 16.0 * c_m1 - c_m2) / (12.0 * h * h) - sys.second_order_correction(out.qdot);
  const Vec r = dynamics_residual(sys, out.q, TangentVec{out.q, out.qdot}, TangentVec{out.q, out.qddot}).comps;
  const Mat S = metric_at(sys, out.q).llt().solve(sys.control_codistribution(out.q));
  out.force_coeffs = S.colPivHouseholderQr().solve(r);
  out.residual = (S * out.force_coeffs - r).norm();
  if (out.residual > tol_ * (1.0 + r.norm())) {
    throw InfeasibleError("reconstructed state is not dynamically feasible at t = " + std::to_string(t) +
                          " (residual " + std::to_string(out.residual) + ")");
  }
  return out;
}

ReconstructedSample reconstruct_full(const SystemPtr& system, std::size_t chart, const FlatPoint& y, double dt_fd) {
  Reconstructor r(system, chart, dt_fd);
  return r.sample(0.0, y);
}

}  // namespace geoflat
