#include "helpers.hpp"

#include "geoflat/bundle.hpp"
#include "geoflat/group.hpp"

#include <doctest.h>

using namespace geoflat;
using namespace testing;

namespace {

std::vector<SystemPtr> all_systems() { return {make_rocket(), make_manipulator(), make_quadrotor()}; }

double config_distance(const SystemModel& sys, const ConfigPoint& a, const ConfigPoint& b) {
  return sys.local_coordinates(a, b).norm();
}

}  // namespace

TEST_CASE("group action") {
  const auto rocket = make_rocket();
  Vec c(3);
  c << 1.0, 2.0, 0.3;
  const ConfigPoint q = rocket->point(c);
  const ConfigPoint moved = act(*rocket, make_group_element(GroupKind::R2, Eigen::Vector2d(0.5, -1.0)), q);
  CHECK((moved.coords - Eigen::Vector3d(1.5, 1.0, 0.3)).norm() < 1e-15);

  std::mt19937_64 rng(21);
  for (const auto& sys : all_systems()) {
    const ConfigPoint p = sys->random_point(rng);
    CHECK(config_distance(*sys, act(*sys, GroupElement::identity(sys->group_kind()), p), p) < 1e-14);
    for (int k = 0; k < 50; ++k) {
      const GroupElement g = sys->random_group_element(rng, 3.0), h = sys->random_group_element(rng, 3.0);
      const ConfigPoint lhs = act(*sys, g, act(*sys, h, p));
      const ConfigPoint rhs = act(*sys, compose(g, h), p);
      CHECK(config_distance(*sys, lhs, rhs) < 1e-12);
    }
  }

  const auto quad = make_quadrotor();
  const ConfigPoint hover = quad->point(se3(Eigen::Vector3d::Zero(), Eigen::Matrix3d::Identity()));
  Vec quarter(4);
  quarter << 0.0, 0.0, 0.0, kPi / 2.0;
  const GroupElement g = make_group_element(GroupKind::R3xS1, quarter);
  const ConfigPoint twice = act(*quad, g, act(*quad, g, hover));
  CHECK((rotation(twice) - so3::rot_z(kPi)).norm() < 1e-14);
}

TEST_CASE("projection") {
  const auto rocket = make_rocket();
  Vec c(3);
  c << 3.0, -2.0, 0.7;
  CHECK(project(*rocket, rocket->point(c)).coords[0] == doctest::Approx(0.7));

  const auto quad = make_quadrotor();
  CHECK((project(*quad, quad->point(se3(Eigen::Vector3d(1, 2, 3), Eigen::Matrix3d::Identity()))).coords -
         Eigen::Vector3d::UnitZ())
            .norm() < 1e-15);

  std::mt19937_64 rng(22);
  for (const auto& sys : all_systems()) {
    for (int k = 0; k < 100; ++k) {
      const ConfigPoint q = sys->random_point(rng);
      const GroupElement g = sys->random_group_element(rng, 10.0);
      CHECK(shape_distance(project(*sys, act(*sys, g, q)), project(*sys, q)) < 1e-12);
    }
  }
}

TEST_CASE("trivialization examples") {
  const auto rocket = make_rocket(1.0, 0.2, 0.5);
  const auto [s, g] = trivialize(*rocket, rocket->trivialization(), rocket->point(Vec::Zero(3)));
  CHECK(std::abs(s.coords[0]) < 1e-15);
  CHECK((g.data - Eigen::Vector2d(0.0, 0.2 / 0.5)).norm() < 1e-15);

  const auto manip = make_manipulator();
  const double c4 = -0.4 * 0.3 / 1.3;
  const auto [sm, gm] = trivialize(*manip, manip->trivialization(), manip->point(Vec::Zero(4)));
  CHECK(std::abs(sm.coords[0]) < 1e-15);
  CHECK((gm.data - Eigen::Vector3d(c4, 0.0, 0.0)).norm() < 1e-15);
}

TEST_CASE("trivialization round trips") {
  std::mt19937_64 rng(23);
  for (const auto& sys : all_systems()) {
    for (const Trivialization& triv : sys->trivializations()) {
      double worst = 0.0;
      for (int k = 0; k < 1000; ++k) {
        const ConfigPoint q = random_point_in(*sys, triv, rng);
        const auto [s, g] = trivialize(*sys, triv, q);
        worst = std::max(worst, config_distance(*sys, untrivialize(*sys, triv, s, g), q));
      }
      CHECK(worst < 1e-10);
    }
  }
}

TEST_CASE("section and group part properties") {
  std::mt19937_64 rng(24);
  for (const auto& sys : all_systems()) {
    for (const Trivialization& triv : sys->trivializations()) {
      double section_err = 0.0, equiv_err = 0.0;
      for (int k = 0; k < 1000; ++k) {
        ShapePoint s = random_shape(sys->shape_kind(), rng);
        if (!triv.section.contains(s, 0.1)) continue;
        section_err = std::max(section_err, shape_distance(project(*sys, section_point(triv, s)), s));
        const ConfigPoint q = random_point_in(*sys, triv, rng);
        const GroupElement g = sys->random_group_element(rng, 5.0);
        const GroupElement lhs = triv.group_part(act(*sys, g, q));
        equiv_err = std::max(equiv_err, group_distance(lhs, compose(g, triv.group_part(q))));
      }
      CHECK(section_err < 1e-10);
      CHECK(equiv_err < 1e-10);
    }
  }
}

TEST_CASE("excluded poles are outside the local sections") {
  const auto quad = make_quadrotor();
  Eigen::Matrix3d flip = Eigen::Vector3d(1.0, -1.0, -1.0).asDiagonal();
  const ConfigPoint upside_down = quad->point(se3(Eigen::Vector3d::Zero(), flip));
  CHECK_THROWS_AS(trivialize(*quad, quad->trivialization(0), upside_down), DomainError);
  CHECK_NOTHROW(trivialize(*quad, quad->trivialization(1), upside_down));
  const ConfigPoint level = quad->point(se3(Eigen::Vector3d::Zero(), Eigen::Matrix3d::Identity()));
  CHECK_THROWS_AS(trivialize(*quad, quad->trivialization(1), level), DomainError);
}

TEST_CASE("velocity split") {
  const auto rocket = make_rocket(1.0, 0.2, 0.5);
  const ConfigPoint q0 = rocket->point(Vec::Zero(3));
  const VelocitySplit a = velocity_split(*rocket, rocket->trivialization(), q0, Eigen::Vector3d(1.0, 0.0, 0.0));
  CHECK((a.xi.comps - Eigen::Vector2d(1.0, 0.0)).norm() < 1e-9);
  CHECK(std::abs(a.sdot[0]) < 1e-12);
  // Pure shape motion along the section tangent leaves the group part fixed.
  const VelocitySplit b = velocity_split(*rocket, rocket->trivialization(), q0, Eigen::Vector3d(0.4, 0.0, 1.0));
  CHECK(b.xi.comps.norm() < 1e-9);
  CHECK(b.sdot[0] == doctest::Approx(1.0));

  const auto quad = make_quadrotor();
  const ConfigPoint hover = quad->point(se3(Eigen::Vector3d::Zero(), Eigen::Matrix3d::Identity()));
  Vec w = Vec::Zero(6);
  w[5] = 0.7;
  const VelocitySplit c = velocity_split(*quad, quad->trivialization(), hover, w);
  CHECK(c.sdot.norm() < 1e-12);
  CHECK(c.xi.comps[3] == doctest::Approx(0.7));
  CHECK(c.xi.comps.head(3).norm() < 1e-9);

  std::mt19937_64 rng(25);
  for (const auto& sys : all_systems()) {
    const Trivialization& triv = sys->trivialization();
    for (int k = 0; k < 100; ++k) {
      const ConfigPoint q = random_point_in(*sys, triv, rng);
      const Vec qdot = random_vec(rng, sys->dim(), 2.0);
      const VelocitySplit split = velocity_split(*sys, triv, q, qdot);
      const Vec rebuilt = vertical_basis(*sys, q) * split.xi.comps + horizontal_basis(*sys, triv, q) * split.sdot;
      CHECK((rebuilt - qdot).norm() < 1e-8);
    }
  }
}

TEST_CASE("infinitesimal generators") {
  const auto rocket = make_rocket();
  std::mt19937_64 rng(26);
  const ConfigPoint q = rocket->random_point(rng);
  LieAlgebraVec e1{GroupKind::R2, Eigen::Vector2d(1.0, 0.0)};
  CHECK((infinitesimal_generator(*rocket, e1, q).comps - Eigen::Vector3d(1, 0, 0)).norm() == 0.0);

  const auto manip = make_manipulator();
  Vec c(4);
  c << 0.5, -0.8, 0.2, 0.9;
  const ConfigPoint p = manip->point(c);
  LieAlgebraVec e3{GroupKind::SE2, Eigen::Vector3d(0.0, 0.0, 1.0)};
  CHECK((infinitesimal_generator(*manip, e3, p).comps - Eigen::Vector4d(0.8, 0.5, 1.0, 0.0)).norm() < 1e-15);
  CHECK(infinitesimal_generator(*manip, LieAlgebraVec{GroupKind::SE2, Vec::Zero(3)}, p).comps.norm() == 0.0);

  for (const auto& sys : all_systems()) {
    for (int k = 0; k < 30; ++k) {
      const ConfigPoint x = sys->random_point(rng);
      const LieAlgebraVec xi{sys->group_kind(), random_vec(rng, sys->group_dim())};
      const double t = 1e-6;
      const auto flow = [&](double tt) {
        return act(*sys, group_exp(LieAlgebraVec{xi.kind, tt * xi.comps}), x);
      };
      const Vec fd = (sys->local_coordinates(x, flow(t)) - sys->local_coordinates(x, flow(-t))) / (2 * t);
      CHECK((fd - infinitesimal_generator(*sys, xi, x).comps).norm() < 1e-7);
    }
  }
}

TEST_CASE("horizontal directions leave the group part fixed") {
  std::mt19937_64 rng(27);
  for (const auto& sys : all_systems()) {
    const Trivialization& triv = sys->trivialization();
    for (int k = 0; k < 30; ++k) {
      const ConfigPoint q = random_point_in(*sys, triv, rng);
      const Mat H = horizontal_basis(*sys, triv, q);
      for (int j = 0; j < H.cols(); ++j) {
        const double h = 1e-5;
        const Vec d = group_difference(triv.group_part(sys->retract(q, h * H.col(j))),
                                       triv.group_part(sys->retract(q, -h * H.col(j)))) /
                      (2 * h);
        CHECK(d.norm() < 1e-8);
      }
    }
  }
}
