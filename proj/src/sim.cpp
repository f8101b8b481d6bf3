#include "geoflat/sim.hpp"

#include "geoflat/bundle.hpp"
#include "geoflat/geometry.hpp"

#include <chrono>
#include <cmath>

namespace geoflat {

namespace {

int step_count(double span, double dt) {
  if (!(dt > 0.0)) throw ModelError("time step must be positive");
  if (!(span >= dt * (1.0 - 1e-9))) throw ModelError("horizon must be at least one time step");
  return static_cast<int>(std::llround(span / dt));
}

}  // namespace

std::pair<ConfigPoint, Vec> rk4_step(const SystemModel& system, const ConfigPoint& q, const Vec& qdot,
                                     const InputFn& input, double t, double dt) {
  const int n = system.dim();
  struct Deriv {
    Vec d_delta, d_v;
  };
  auto f = [&](const Vec& delta, const Vec& v, double time) {
    const ConfigPoint p = system.retract(q, delta);
    return Deriv{system.local_velocity(q, delta, v), forced_acceleration(system, p, v, input(time))};
  };
  const Vec zero = Vec::Zero(n);
  const Deriv k1 = f(zero, qdot, t);
  const Deriv k2 = f(0.5 * dt * k1.d_delta, qdot + 0.5 * dt * k1.d_v, t + 0.5 * dt);
  const Deriv k3 = f(0.5 * dt * k2.d_delta, qdot + 0.5 * dt * k2.d_v, t + 0.5 * dt);
  const Deriv k4 = f(dt * k3.d_delta, qdot + dt * k3.d_v, t + dt);
  const Vec delta = dt / 6.0 * (k1.d_delta + 2.0 * k2.d_delta + 2.0 * k3.d_delta + k4.d_delta);
  const Vec v = qdot + dt / 6.0 * (k1.d_v + 2.0 * k2.d_v + 2.0 * k3.d_v + k4.d_v);
  return {system.retract(q, delta), v};
}

StateTrajectory integrate(const SystemModel& system, const ConfigPoint& q0, const Vec& qdot0, const InputFn& input,
                          double dt, double T) {
  const int steps = step_count(T, dt);
  if (qdot0.size() != system.dim()) throw ChartError("initial velocity has wrong size");
  StateTrajectory out;
  ConfigPoint q = q0;
  Vec v = qdot0;
  for (int k = 0; k <= steps; ++k) {
    const double t = k * dt;
    out.times.push_back(t);
    out.q.push_back(q);
    out.qdot.push_back(v);
    out.inputs.push_back(input(t));
    if (k == steps) break;
    std::tie(q, v) = rk4_step(system, q, v, input, t, dt);
  }
  return out;
}

std::vector<ReconstructedSample> reconstruct_trajectory(const SystemPtr& system, const FlatTrajectory& traj,
                                                        double dt, std::size_t chart,
                                                        std::vector<SwitchEvent>* events) {
  const double t0 = traj.t_begin();
  const int steps = step_count(traj.t_end() - t0, dt);
  Reconstructor rec(system, chart);
  std::vector<ReconstructedSample> out;
  out.reserve(steps + 1);
  for (int k = 0; k <= steps; ++k) {
    const double t = std::min(t0 + k * dt, traj.t_end());
    out.push_back(rec.sample(t, traj.eval(t, 4)));
  }
  if (events) *events = rec.switch_events();
  return out;
}

RoundtripReport roundtrip_verify(const SystemPtr& system, const FlatTrajectory& traj, const RoundtripOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const SystemModel& sys = *system;
  if (traj.kind() != sys.group_kind()) throw ModelError("trajectory group does not match the system");
  const double t0 = traj.t_begin();
  const double dt = options.dt;
  const int steps = step_count(traj.t_end() - t0, dt);

  // Inputs on the half-step grid used by RK4.
  Reconstructor rec(system, options.chart, options.dt_fd);
  std::vector<ReconstructedSample> half;
  half.reserve(2 * steps + 1);
  for (int k = 0; k <= 2 * steps; ++k) {
    const double t = std::min(t0 + 0.5 * k * dt, traj.t_end());
    half.push_back(rec.sample(t, traj.eval(t, 4)));
  }
  auto input = [&](double t) -> const Vec& {
    const long k = std::lround((t - t0) / (0.5 * dt));
    return half.at(static_cast<std::size_t>(std::clamp<long>(k, 0, 2 * steps))).force_coeffs;
  };

  RoundtripReport report;
  report.switch_events = rec.switch_events();
  for (const auto& e : report.switch_events) report.max_switch_error = std::max(report.max_switch_error, e.continuity_error);
  const Trivialization& triv = sys.trivialization(options.chart);
  ConfigPoint q = half.front().q;
  Vec v = half.front().qdot;
  for (int k = 0; k <= steps; ++k) {
    const double t = t0 + k * dt;
    const ReconstructedSample& ref = half[2 * k];
    report.max_residual = std::max(report.max_residual, ref.residual);
    RoundtripSample s;
    s.t = t;
    s.q = q;
    s.qdot = v;
    s.force_coeffs = ref.force_coeffs;
    s.flat = flat_output(sys, triv, q);
    s.s = sys.project(q);
    s.chart = ref.chart;
    s.flat_error = group_distance(s.flat, traj.eval(std::min(t, traj.t_end()), 0).value);
    report.max_flat_error = std::max(report.max_flat_error, s.flat_error);
    report.samples.push_back(std::move(s));
    if (k == steps) break;
    std::tie(q, v) = rk4_step(sys, q, v, input, t, dt);
  }
  report.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace geoflat
