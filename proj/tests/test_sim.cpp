#include "helpers.hpp"

#include "geoflat/bundle.hpp"
#include "geoflat/geometry.hpp"
#include "geoflat/sim.hpp"

#include <doctest.h>

using namespace geoflat;
using namespace testing;

namespace {

FlatTrajectory constant_plan(GroupKind kind, const Vec& v) {
  return min_snap({{0.0, make_group_element(kind, v)}, {2.0, make_group_element(kind, v)}});
}

double energy_drift(const SystemModel& sys, const ConfigPoint& q0, const Vec& v0) {
  const Vec zero = Vec::Zero(sys.control_codistribution(q0).cols());
  const StateTrajectory traj = integrate(sys, q0, v0, [&](double) { return zero; }, 1e-3, 2.0);
  const double e0 = total_energy(sys, q0, v0);
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.q.size(); ++i) {
    worst = std::max(worst, std::abs(total_energy(sys, traj.q[i], traj.qdot[i]) - e0));
  }
  return worst;
}

}  // namespace

TEST_CASE("free motion is a straight line") {
  FreeBody body;
  const ConfigPoint q0 = body.point(Eigen::Vector3d(1.0, 0.0, 0.2));
  const Vec v0 = Eigen::Vector3d(0.5, -1.0, 0.25);
  const StateTrajectory traj = integrate(body, q0, v0, [](double) { return Vec(Vec::Zero(3)); }, 0.01, 2.0);
  CHECK(traj.times.size() == traj.q.size());
  CHECK(traj.times.size() == 201);
  CHECK((traj.q.back().coords - Eigen::Vector3d(2.0, -2.0, 0.7)).norm() < 1e-9);
  CHECK((traj.qdot.back() - v0).norm() < 1e-9);
}

TEST_CASE("rocket hover is an equilibrium") {
  const auto rocket = make_rocket(1.3);
  const ConfigPoint q0 = rocket->point(Eigen::Vector3d(0.5, 2.0, 0.0));
  const StateTrajectory traj =
      integrate(*rocket, q0, Vec::Zero(3), [](double) { return Vec(Eigen::Vector2d(0.0, 1.3 * 9.81)); }, 1e-3, 2.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.q.size(); ++i) {
    worst = std::max(worst, (traj.q[i].coords - q0.coords).norm() + traj.qdot[i].norm());
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("energy is conserved without inputs") {
  std::mt19937_64 rng(71);
  for (const SystemPtr& sys : {make_rocket(), make_manipulator(), make_quadrotor()}) {
    const ConfigPoint q0 = sys->random_point(rng);
    CHECK(energy_drift(*sys, q0, random_vec(rng, sys->dim(), 1.0)) < 1e-6);
  }
}

TEST_CASE("quadrotor rotation stays orthonormal") {
  const auto quad = make_quadrotor();
  std::mt19937_64 rng(72);
  Vec v0(6);
  v0 << 0.3, -0.2, 0.5, 2.0, -1.5, 3.0;
  const StateTrajectory traj = integrate(*quad, quad->random_point(rng), v0,
                                         [](double) { return Vec(Eigen::Vector4d(9.81, 0.0, 0.01, 0.0)); }, 1e-3, 2.0);
  double worst = 0.0;
  for (const ConfigPoint& q : traj.q) worst = std::max(worst, so3::orthogonality_error(rotation(q)));
  CHECK(worst < 1e-10);
}

TEST_CASE("integrator order") {
  const auto quad = make_quadrotor();
  const ConfigPoint q0 = quad->point(se3(Eigen::Vector3d::Zero(), Eigen::Matrix3d::Identity()));
  Vec v0 = Vec::Zero(6);
  v0 << 0.2, 0.0, 0.1, 1.5, -1.0, 2.0;
  const InputFn hover = [](double) { return Vec(Eigen::Vector4d(9.81, 0.0, 0.0, 0.0)); };
  const ConfigPoint ref = integrate(*quad, q0, v0, hover, 1e-4, 1.0).q.back();
  auto error = [&](double dt) { return quad->local_coordinates(ref, integrate(*quad, q0, v0, hover, dt, 1.0).q.back()).norm(); };
  const double ratio = error(0.02) / error(0.01);
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("simulation commutes with the symmetry") {
  std::mt19937_64 rng(73);
  for (const SystemPtr& sys : {make_rocket(), make_manipulator(), make_quadrotor()}) {
    const ConfigPoint q0 = sys->random_point(rng);
    const Vec v0 = random_vec(rng, sys->dim(), 0.5);
    const int m = static_cast<int>(sys->control_codistribution(q0).cols());
    const Vec u0 = random_vec(rng, m, 1.0);
    const InputFn input = [u0](double t) { return Vec(u0 * std::cos(t)); };
    // Translations, plus the yaw about the thrust axis for the quadrotor.
    Vec gd = Vec::Zero(sys->group_dim());
    gd[0] = 1.5;
    gd[1] = -0.7;
    if (sys->group_kind() == GroupKind::R3xS1) gd[3] = 0.9;
    const GroupElement g = make_group_element(sys->group_kind(), gd);
    // Force coefficients follow the equivariance of F: F(g q) C = T^-T F(q).
    const ConfigPoint gq0 = act(*sys, g, q0);
    const Mat T = sys->action_pushforward(g, q0);
    const Mat C = sys->control_codistribution(gq0).completeOrthogonalDecomposition().solve(
        T.transpose().inverse() * sys->control_codistribution(q0));
    const InputFn moved = [&](double t) { return Vec(C * input(t)); };
    const StateTrajectory a = integrate(*sys, q0, v0, input, 1e-3, 1.0);
    const StateTrajectory b = integrate(*sys, gq0, T * v0, moved, 1e-3, 1.0);
    CHECK(sys->local_coordinates(act(*sys, g, a.q.back()), b.q.back()).norm() < 1e-8);
  }
}

TEST_CASE("hover round trips") {
  for (const SystemPtr& sys : {make_rocket(), make_manipulator(), make_quadrotor()}) {
    Vec v = Vec::Zero(sys->group_dim());
    v[0] = 0.4;
    const RoundtripReport report = roundtrip_verify(sys, constant_plan(sys->group_kind(), v));
    CHECK(report.max_flat_error < 1e-8);
  }
}

TEST_CASE("rocket translation round trip") {
  const auto rocket = make_rocket();
  const FlatTrajectory traj = min_snap({{0.0, make_group_element(GroupKind::R2, Eigen::Vector2d(0, 0))},
                                        {2.0, make_group_element(GroupKind::R2, Eigen::Vector2d(2, 0))}});
  const RoundtripReport report = roundtrip_verify(rocket, traj);
  CHECK(report.max_flat_error < 1e-4);
  CHECK(report.max_residual < 1e-6);
  CHECK(report.samples.size() == 2001);

  double previous = std::numeric_limits<double>::infinity();
  for (double dt : {8e-3, 4e-3, 2e-3}) {
    RoundtripOptions opts;
    opts.dt = dt;
    opts.dt_fd = dt / 10.0;
    const double err = roundtrip_verify(rocket, traj, opts).max_flat_error;
    CHECK(err < previous);
    previous = err;
  }
}

TEST_CASE("quadrotor round trip across the equator") {
  const auto quad = make_quadrotor();
  const FlatTrajectory traj = min_snap({{0.0, make_group_element(GroupKind::R3xS1, Eigen::Vector4d(0, 0, 0, 0))},
                                        {1.0, make_group_element(GroupKind::R3xS1, Eigen::Vector4d(2, 0, -4, 0))}});
  const RoundtripReport report = roundtrip_verify(quad, traj);
  CHECK(report.max_flat_error < 1e-4);
  REQUIRE_FALSE(report.switch_events.empty());
  CHECK(report.max_switch_error < 1e-6);
}
