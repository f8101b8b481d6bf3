#pragma once

// Built-in systems: planar rocket, planar aerial manipulator and quadrotor.
//
// Parameters (SI units):
//   rocket       m [kg], J [kg m^2], r [m], g_grav [m/s^2]
//                section_scale (1 = orthogonal section), force_columns (1 or 2)
//   manipulator  m_g, m_q [kg], l_g, l_q [m], J_q [kg m^2], g_grav
//   quadrotor    m [kg], J_xx, J_zz [kg m^2], g_grav

#include "geoflat/model.hpp"

#include <string>

namespace geoflat {

struct RocketOptions {
  /// Multiplies the section offset J/(m r); anything but 1 breaks orthogonality.
  double section_scale = 1.0;
  /// 2 = thrust + lateral force; 1 drops the lateral column (dim G != rank F).
  int force_columns = 2;
};

SystemPtr make_rocket(double m = 1.0, double J = 0.2, double r = 0.5, double g_grav = 9.81,
                      RocketOptions options = {});

/// Two planar bodies: a gripper link of mass m_g and length l_g (uniform rod,
/// end effector at its tip) and a vehicle of mass m_q and inertia J_q whose
/// centre of mass sits l_q beyond the joint along its thrust axis.
/// Coordinates (x1, x2, theta, phi): end-effector pose and joint angle.
SystemPtr make_manipulator(double m_g = 1.0, double m_q = 0.3, double l_g = 0.2, double l_q = 0.4,
                           double g_grav = 9.81, double J_q = 0.01);

/// Body-frame SE(3) model with the two-section atlas (north chart excludes
/// -e3, south chart excludes +e3).
SystemPtr make_quadrotor(double m = 1.0, double J_xx = 0.01, double J_zz = 0.02, double g_grav = 9.81);

/// Builds a system by name; missing parameters take their defaults, unknown
/// names throw FormatError.
SystemPtr make_system(const std::string& system, const Params& params);

/// {"system": "rocket"|"manipulator"|"quadrotor", "params": {name: value}}.
/// Unknown keys are rejected with FormatError.
SystemPtr load_model_text(const std::string& text);
SystemPtr load_model_file(const std::string& path);

/// Parameter names (with defaults) accepted for a system.
Params default_params(const std::string& system);

}  // namespace geoflat
