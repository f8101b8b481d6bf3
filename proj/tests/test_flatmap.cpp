#include "helpers.hpp"

#include "geoflat/bundle.hpp"
#include "geoflat/flatmap.hpp"
#include "geoflat/flatness.hpp"
#include "geoflat/geometry.hpp"
#include "geoflat/planner.hpp"
#include "geoflat/sim.hpp"

#include <doctest.h>

using namespace geoflat;
using namespace testing;

namespace {

FlatPoint constant_point(GroupKind kind, const Vec& value, int order = 4) {
  FlatPoint y{make_group_element(kind, value), {}};
  for (int k = 0; k < order; ++k) y.derivs.push_back(Vec::Zero(value.size()));
  return y;
}

FlatPoint random_flat_point(const SystemModel& sys, std::mt19937_64& rng, double scale) {
  FlatPoint y{sys.random_group_element(rng, 5.0), {}};
  for (int k = 0; k < 4; ++k) y.derivs.push_back(random_vec(rng, sys.group_dim(), scale));
  return y;
}

}  // namespace

TEST_CASE("flat output examples") {
  const auto quad = make_quadrotor();
  const ConfigPoint level = quad->point(se3(Eigen::Vector3d(1, 2, 3), so3::rot_z(0.4)));
  const GroupElement y = flat_output(*quad, quad->trivialization(), level);
  CHECK((y.data - Eigen::Vector4d(1, 2, 3, 0.4)).norm() < 1e-14);

  const auto manip = make_manipulator();
  const double c4 = -0.4 * 0.3 / 1.3;
  std::mt19937_64 rng(51);
  for (int k = 0; k < 1000; ++k) {
    const ConfigPoint q = manip->random_point(rng);
    const double psi = q.coords[2] + q.coords[3];
    const Eigen::Vector3d expected(q.coords[0] + c4 * std::cos(psi), q.coords[1] + c4 * std::sin(psi), q.coords[2]);
    CHECK(group_distance(flat_output(*manip, manip->trivialization(), q),
                         make_group_element(GroupKind::SE2, expected)) < 1e-12);
  }
}

TEST_CASE("flat output is equivariant") {
  std::mt19937_64 rng(52);
  for (const SystemPtr& sys : {make_rocket(), make_manipulator(), make_quadrotor()}) {
    for (const Trivialization& triv : sys->trivializations()) {
      double worst = 0.0;
      for (int k = 0; k < 1000; ++k) {
        const ConfigPoint q = random_point_in(*sys, triv, rng);
        const GroupElement g = sys->random_group_element(rng, 5.0);
        worst = std::max(worst, group_distance(flat_output(*sys, triv, act(*sys, g, q)),
                                               compose(g, flat_output(*sys, triv, q))));
      }
      CHECK(worst < 1e-10);
    }
  }
}

TEST_CASE("shape solve") {
  const auto rocket = make_rocket();
  const Trivialization& triv = rocket->trivialization();
  const GroupElement e = GroupElement::identity(GroupKind::R2);
  SUBCASE("rocket hovers upright") {
    const ShapeSolution sol = solve_shape(*rocket, triv, e, Vec::Zero(2), Vec::Zero(2), angle(0.3));
    CHECK(std::abs(sol.s.coords[0]) < 1e-10);
  }
  SUBCASE("rocket tilts against the lateral acceleration") {
    std::mt19937_64 rng(53);
    for (int k = 0; k < 100; ++k) {
      const Vec a = random_vec(rng, 2, 5.0);
      const ShapeSolution sol = solve_shape_cold(*rocket, triv, e, Vec::Zero(2), a);
      const double expected = std::atan2(-a[0], a[1] + 9.81);
      CHECK(std::abs(wrap_angle(sol.s.coords[0] - expected)) < 1e-9);
    }
  }
  SUBCASE("rocket free fall is singular") {
    CHECK_THROWS_AS(solve_shape(*rocket, triv, e, Vec::Zero(2), Eigen::Vector2d(0.0, -9.81), angle(0.2)),
                    SingularError);
  }
  SUBCASE("quadrotor closed form agrees with Newton") {
    const auto quad = make_quadrotor();
    std::mt19937_64 rng(54);
    ShapeSolveOptions newton_only;
    newton_only.use_closed_form = false;
    for (int k = 0; k < 100; ++k) {
      const Vec xi = random_vec(rng, 4, 3.0), a = random_vec(rng, 4, 4.0);
      const GroupElement g = quad->random_group_element(rng, 5.0);
      const Eigen::Vector3d axis = (Eigen::Vector3d(a[0], a[1], a[2]) + 9.81 * Eigen::Vector3d::UnitZ()).normalized();
      const ShapePoint guess = unit3(Eigen::Vector3d::UnitZ());
      const ShapeSolution closed = solve_shape(*quad, quad->trivialization(), g, xi, a, guess);
      const ShapeSolution newton = solve_shape(*quad, quad->trivialization(), g, xi, a, guess, newton_only);
      CHECK(closed.closed_form);
      CHECK((Eigen::Vector3d(closed.s.coords) - axis).norm() < 1e-10);
      CHECK((Eigen::Vector3d(newton.s.coords) - axis).norm() < 1e-9);
    }
  }
  SUBCASE("manipulator roots are regular and found from every seed count") {
    const auto manip = make_manipulator();
    std::mt19937_64 rng(55);
    for (int k = 0; k < 50; ++k) {
      const GroupElement g = manip->random_group_element(rng, 5.0);
      const Vec xi = random_vec(rng, 3, 2.0), a = random_vec(rng, 3, 3.0);
      const ShapeSolution sol = solve_shape_cold(*manip, manip->trivialization(), g, xi, a);
      CHECK(implicit_dynamics_value(*manip, manip->trivialization(), sol.s, g, xi, a).norm() < 1e-9);
      CHECK_FALSE(shape_roots(*manip, manip->trivialization(), g, xi, a, 8).empty());
    }
  }
}

TEST_CASE("reconstruction of constant flat outputs") {
  const auto rocket = make_rocket(1.0, 0.2, 0.5);
  const Reconstruction r = reconstruct(*rocket, rocket->trivialization(),
                                       constant_point(GroupKind::R2, Eigen::Vector2d(1.0, 2.0)));
  CHECK((r.q.coords - Eigen::Vector3d(1.0, 2.0 - 0.4, 0.0)).norm() < 1e-10);

  const auto quad = make_quadrotor();
  const Reconstruction h = reconstruct(*quad, quad->trivialization(),
                                       constant_point(GroupKind::R3xS1, Eigen::Vector4d(1.0, 2.0, 3.0, 0.5)));
  CHECK((h.q.coords.head(3) - Eigen::Vector3d(1, 2, 3)).norm() < 1e-12);
  CHECK((rotation(h.q) - so3::rot_z(0.5)).norm() < 1e-10);
}

TEST_CASE("hover inputs") {
  const auto rocket = make_rocket(1.3, 0.2, 0.5, 9.81);
  const ReconstructedSample r = reconstruct_full(rocket, 0, constant_point(GroupKind::R2, Eigen::Vector2d(0.3, 1.0)));
  CHECK((r.force_coeffs - Eigen::Vector2d(0.0, 1.3 * 9.81)).norm() < 1e-10);
  CHECK(r.qdot.norm() < 1e-10);

  const auto quad = make_quadrotor(0.8);
  const ReconstructedSample h =
      reconstruct_full(quad, 0, constant_point(GroupKind::R3xS1, Eigen::Vector4d(0.0, 1.0, 2.0, -0.3)));
  CHECK((h.force_coeffs - Eigen::Vector4d(0.8 * 9.81, 0, 0, 0)).norm() < 1e-10);
}

TEST_CASE("flat output of the reconstruction returns the flat point") {
  std::mt19937_64 rng(56);
  for (const SystemPtr& sys : {make_rocket(), make_manipulator(), make_quadrotor()}) {
    for (int k = 0; k < 100; ++k) {
      const FlatPoint y = random_flat_point(*sys, rng, 2.0);
      const Reconstruction r = reconstruct(*sys, sys->trivialization(), y);
      CHECK(group_distance(flat_output(*sys, sys->trivialization(), r.q), y.value) < 1e-9);
    }
  }
}

TEST_CASE("reconstructed inputs explain the motion") {
  std::mt19937_64 rng(57);
  for (const SystemPtr& sys : {make_rocket(), make_manipulator(), make_quadrotor()}) {
    for (int k = 0; k < 20; ++k) {
      const ReconstructedSample r = reconstruct_full(sys, 0, random_flat_point(*sys, rng, 1.0));
      CHECK(r.residual < 1e-6);
      const Vec accel = forced_acceleration(*sys, r.q, r.qdot, r.force_coeffs);
      CHECK((accel - r.qddot).norm() < 1e-5 * (1.0 + r.qddot.norm()));
    }
  }
}

TEST_CASE("taylor shift") {
  FlatPoint y{make_group_element(GroupKind::R2, Eigen::Vector2d(1.0, -1.0)),
              {Eigen::Vector2d(2.0, 0.0), Eigen::Vector2d(0.0, 6.0), Eigen::Vector2d(6.0, 0.0), Eigen::Vector2d(0, 24)}};
  const FlatPoint z = taylor_shift(y, 0.5);
  const double t = 0.5;
  CHECK(z.value.data[0] == doctest::Approx(1.0 + 2 * t + t * t * t));
  CHECK(z.value.data[1] == doctest::Approx(-1.0 + 3 * t * t + t * t * t * t));
  CHECK(z.derivs[0][0] == doctest::Approx(2.0 + 3 * t * t));
  CHECK(z.derivs[3][1] == doctest::Approx(24.0));
}

TEST_CASE("reconstruction recovers simulated configurations") {
  // Drive each planar system open loop with a smooth input, then rebuild the
  // configuration from the flat output of the simulation.
  for (const SystemPtr& sys : {make_rocket(), make_manipulator()}) {
    const Trivialization& triv = sys->trivialization();
    const FlatPoint rest = constant_point(sys->group_kind(), Vec::Zero(sys->group_dim()));
    const ReconstructedSample hover = reconstruct_full(sys, 0, rest);
    const Vec u0 = hover.force_coeffs;
    const InputFn input = [u0](double t) {
      Vec u = u0;
      u[0] += 0.3 * std::sin(2.0 * t);
      u[1] += 0.05 * std::cos(3.0 * t);
      return u;
    };
    const double dt = 1e-3;
    const StateTrajectory traj = integrate(*sys, hover.q, hover.qdot, input, dt, 0.6);
    const auto y_at = [&](std::size_t i) { return flat_output(*sys, triv, traj.q[i]).data; };
    double worst = 0.0;
    for (std::size_t i = 100; i + 100 < traj.q.size(); i += 50) {
      const Vec yp1 = unwrap_near(sys->group_kind(), y_at(i + 2), y_at(i));
      const Vec ym1 = unwrap_near(sys->group_kind(), y_at(i - 2), y_at(i));
      const Vec yp2 = unwrap_near(sys->group_kind(), y_at(i + 4), y_at(i));
      const Vec ym2 = unwrap_near(sys->group_kind(), y_at(i - 4), y_at(i));
      const Vec y0 = y_at(i);
      const double h = 2 * dt;
      FlatPoint y{make_group_element(sys->group_kind(), y0), {}};
      y.derivs.push_back((ym2 - 8 * ym1 + 8 * yp1 - yp2) / (12 * h));
      y.derivs.push_back((-ym2 + 16 * ym1 - 30 * y0 + 16 * yp1 - yp2) / (12 * h * h));
      const Reconstruction r = reconstruct(*sys, triv, y, sys->project(traj.q[i]));
      worst = std::max(worst, sys->local_coordinates(traj.q[i], r.q).norm());
    }
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("shape branch is continuous along a plan") {
  const auto manip = make_manipulator();
  std::vector<Waypoint> wps{{0.0, make_group_element(GroupKind::SE2, Eigen::Vector3d(0, 0, 0))},
                            {1.0, make_group_element(GroupKind::SE2, Eigen::Vector3d(0.5, 0.3, 0.4))},
                            {2.0, make_group_element(GroupKind::SE2, Eigen::Vector3d(1.0, 0.0, 0.0))}};
  const FlatTrajectory traj = min_snap(wps);
  const std::vector<ReconstructedSample> samples = reconstruct_trajectory(manip, traj, 0.01, 0);
  double max_jump = 0.0, max_residual = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    max_jump = std::max(max_jump, shape_distance(samples[i].s, samples[i - 1].s));
  }
  for (const auto& s : samples) max_residual = std::max(max_residual, s.residual);
  CHECK(max_jump < 0.05);
  CHECK(max_residual < 1e-6);
}

TEST_CASE("chart switching across the equator") {
  const auto quad = make_quadrotor();
  std::vector<Waypoint> wps{{0.0, make_group_element(GroupKind::R3xS1, Eigen::Vector4d(0, 0, 0, 0))},
                            {1.0, make_group_element(GroupKind::R3xS1, Eigen::Vector4d(2, 0, -4, 0))}};
  const FlatTrajectory traj = min_snap(wps);
  std::vector<SwitchEvent> events;
  const std::vector<ReconstructedSample> samples = reconstruct_trajectory(quad, traj, 1e-3, 0, &events);
  REQUIRE_FALSE(events.empty());
  for (const SwitchEvent& e : events) CHECK(e.continuity_error < 1e-6);
  bool used_south = false;
  // Consecutive states differ by no more than the velocity allows.
  double worst = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    used_south = used_south || samples[i].chart == 1;
    if (i == 0) continue;
    const double jump = quad->local_coordinates(samples[i - 1].q, samples[i].q).norm();
    const double speed = std::max(samples[i - 1].qdot.norm(), samples[i].qdot.norm());
    worst = std::max(worst, jump / (1e-3 * speed + 1e-12));
  }
  CHECK(used_south);
  CHECK(worst < 1.1);
}
