#pragma once

// Forward simulation of the forced geodesic equation and the flat round trip.

#include "geoflat/flatmap.hpp"
#include "geoflat/planner.hpp"

#include <functional>
#include <string>
#include <vector>

namespace geoflat {

struct StateTrajectory {
  std::vector<double> times;
  std::vector<ConfigPoint> q;
  std::vector<Vec> qdot;
  std::vector<Vec> inputs;
};

using InputFn = std::function<Vec(double)>;

/// One RK4 step of the first-order form, taken in the local coordinates
/// delta around q (delta(0) = 0) and mapped back with retract.
std::pair<ConfigPoint, Vec> rk4_step(const SystemModel& system, const ConfigPoint& q, const Vec& qdot,
                                     const InputFn& input, double t, double dt);

/// Fixed-step RK4 over [0, T]; the number of steps is round(T / dt).
StateTrajectory integrate(const SystemModel& system, const ConfigPoint& q0, const Vec& qdot0, const InputFn& input,
                          double dt, double T);

struct RoundtripOptions {
  double dt = 1e-3;
  double dt_fd = 1e-4;
  /// Trivialization the flat output is expressed in.
  std::size_t chart = 0;
};

struct RoundtripSample {
  double t = 0.0;
  ConfigPoint q;
  Vec qdot;
  Vec force_coeffs;
  GroupElement flat;
  ShapePoint s;
  std::size_t chart = 0;
  double flat_error = 0.0;
};

struct RoundtripReport {
  double max_flat_error = 0.0;
  double max_residual = 0.0;
  double max_switch_error = 0.0;
  std::vector<SwitchEvent> switch_events;
  std::vector<RoundtripSample> samples;
  double runtime_s = 0.0;
};

/// Reconstructs the initial state and the inputs from the flat trajectory,
/// integrates open loop and compares flat_output(q_sim(t)) with the plan.
RoundtripReport roundtrip_verify(const SystemPtr& system, const FlatTrajectory& traj,
                                 const RoundtripOptions& options = {});

/// Reconstruction only, sampled every dt (inclusive of both ends).
std::vector<ReconstructedSample> reconstruct_trajectory(const SystemPtr& system, const FlatTrajectory& traj,
                                                        double dt, std::size_t chart,
                                                        std::vector<SwitchEvent>* events = nullptr);

}  // namespace geoflat
