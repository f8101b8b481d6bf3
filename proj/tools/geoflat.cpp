// geoflat: verify flatness conditions, plan flat trajectories, reconstruct
// states and inputs, and simulate the round trip.
//
// Exit codes: 0 success, 1 a checked condition failed, 2 malformed input.

#include "geoflat/bundle.hpp"
#include "geoflat/flatness.hpp"
#include "geoflat/flatmap.hpp"
#include "geoflat/io.hpp"
#include "geoflat/planner.hpp"
#include "geoflat/sim.hpp"
#include "geoflat/systems.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace geoflat;
using nlohmann::ordered_json;

constexpr double kConditionTol = 1e-9;

struct ConditionFailure : Error {
  using Error::Error;
};

std::vector<std::string> coordinate_names(const SystemModel& system) {
  if (system.name() == "rocket") return {"x1", "x2", "theta"};
  if (system.name() == "manipulator") return {"x1", "x2", "theta", "phi"};
  return {"x1", "x2", "x3", "R11", "R12", "R13", "R21", "R22", "R23", "R31", "R32", "R33"};
}

std::vector<std::string> velocity_names(const SystemModel& system) {
  if (system.name() == "quadrotor") return {"v1", "v2", "v3", "w1", "w2", "w3"};
  std::vector<std::string> out;
  for (const auto& n : coordinate_names(system)) out.push_back(n + "_dot");
  return out;
}

std::vector<std::string> indexed(const std::string& prefix, int n) {
  std::vector<std::string> out;
  for (int i = 1; i <= n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

int force_count(const SystemModel& system) {
  const ConfigPoint q = section_point(system.trivialization(0), system.nominal_shape());
  return static_cast<int>(system.control_codistribution(q).cols());
}

void append(std::vector<double>& row, const Vec& v) {
  for (int i = 0; i < v.size(); ++i) row.push_back(v[i]);
}

void emit(const std::optional<std::string>& path, const std::string& content) {
  if (path) {
    atomic_write(*path, content);
  } else {
    std::cout << content;
  }
}

// --- verify -----------------------------------------------------------------

int cmd_verify(const std::string& model_path, int samples, std::uint64_t seed, const std::optional<std::string>& out) {
  const SystemPtr system = load_model_file(model_path);
  ordered_json conditions = ordered_json::array();
  bool all = true;
  auto record = [&](const std::string& name, bool pass, std::optional<double> residual, ordered_json extra = {}) {
    ordered_json c = {{"condition", name}, {"pass", pass}};
    if (residual) c["residual"] = *residual;
    for (auto& [k, v] : extra.items()) c[k] = v;
    conditions.push_back(c);
    all = all && pass;
  };

  const int rank = generic_control_rank(*system);
  const bool dim_ok = system->group_dim() == rank;
  record("dim_condition", dim_ok, std::nullopt, {{"dim_G", system->group_dim()}, {"rank_F", rank}});

  const double equiv = check_delta_equivariance(*system, samples, seed);
  record("delta_equivariance", equiv < kConditionTol, equiv);

  for (const Trivialization& triv : system->trivializations()) {
    const double orth = check_orthogonality(*system, triv.section, samples, seed);
    record("orthogonality[" + triv.section.name + "]", orth < kConditionTol, orth);
  }

  for (const Trivialization& triv : system->trivializations()) {
    const std::string name = "regularity[" + triv.section.name + "]";
    if (!dim_ok) {
      record(name, false, std::nullopt, {{"note", "not applicable: dim G != rank F"}});
      continue;
    }
    const RegularityReport rep = check_regularity(*system, triv, samples, seed);
    record(name, rep.roots > 0 && rep.generic_fraction == 1.0, std::nullopt,
           {{"roots", rep.roots},
            {"skipped_samples", rep.skipped},
            {"generic_rank", rep.generic_rank},
            {"generic_fraction", rep.generic_fraction},
            {"singular_samples", static_cast<int>(rep.singular.size())}});
  }

  const ordered_json report = {{"system", system->name()},
                               {"samples", samples},
                               {"seed", seed},
                               {"conditions", conditions},
                               {"pass", all}};
  emit(out, report.dump(2) + "\n");
  return all ? 0 : 1;
}

// --- plan ---------------------------------------------------------------------

int cmd_plan(const std::string& model_path, const std::string& waypoint_path, const std::optional<std::string>& out) {
  const SystemPtr system = load_model_file(model_path);
  const FlatTrajectory traj = plan_from_json_text(read_text_file(waypoint_path), system->group_kind());
  emit(out, trajectory_to_json(traj));
  return 0;
}

// --- reconstruct --------------------------------------------------------------

int cmd_reconstruct(const std::string& model_path, const std::string& traj_path, double dt,
                    const std::optional<std::string>& out, const std::optional<std::string>& plot) {
  const SystemPtr system = load_model_file(model_path);
  const FlatTrajectory traj = trajectory_from_json(read_text_file(traj_path));
  if (traj.kind() != system->group_kind()) throw FormatError("trajectory group does not match the model");
  if (!(dt > 0.0)) throw FormatError("--dt must be positive");

  Reconstructor rec(system, 0);
  const int steps = static_cast<int>(std::llround((traj.t_end() - traj.t_begin()) / dt));
  CsvTable table;
  table.header = {"t"};
  for (const auto& n : coordinate_names(*system)) table.header.push_back(n);
  for (const auto& n : velocity_names(*system)) table.header.push_back(n);
  for (const auto& n : indexed("f", force_count(*system))) table.header.push_back(n);
  const int sdim = system->shape_kind() == ShapeKind::circle ? 1 : 3;
  for (const auto& n : indexed("s", sdim)) table.header.push_back(n);
  for (const auto& n : indexed("y", system->group_dim())) table.header.push_back(n);
  table.header.push_back("chart");
  table.header.push_back("residual");

  std::vector<double> times;
  std::vector<std::vector<double>> ys, ss, fs;
  for (int k = 0; k <= std::max(steps, 0); ++k) {
    const double t = std::min(traj.t_begin() + k * dt, traj.t_end());
    const FlatPoint y = traj.eval(t, 4);
    ReconstructedSample smp;
    try {
      smp = rec.sample(t, y);
    } catch (const SingularError& e) {
      throw ConditionFailure("singular tuple at t = " + format_number(t) + ": " + e.what());
    } catch (const ConvergenceError& e) {
      throw ConditionFailure("shape solve failed at t = " + format_number(t) + ": " + e.what());
    } catch (const InfeasibleError& e) {
      throw ConditionFailure(e.what());
    }
    std::vector<double> row{t};
    append(row, smp.q.coords);
    append(row, smp.qdot);
    append(row, smp.force_coeffs);
    append(row, smp.s.coords);
    append(row, y.value.data);
    row.push_back(static_cast<double>(smp.chart));
    row.push_back(smp.residual);
    table.rows.push_back(row);
    times.push_back(t);
    ys.push_back(std::vector<double>(y.value.data.data(), y.value.data.data() + y.value.data.size()));
    ss.push_back(std::vector<double>(smp.s.coords.data(), smp.s.coords.data() + smp.s.coords.size()));
    fs.push_back(std::vector<double>(smp.force_coeffs.data(), smp.force_coeffs.data() + smp.force_coeffs.size()));
  }
  if (plot) {
    auto panel = [&](const std::string& title, const std::vector<std::vector<double>>& data, const std::string& p) {
      PlotPanel out{title, {}};
      for (std::size_t c = 0; !data.empty() && c < data.front().size(); ++c) {
        PlotSeries s{p + std::to_string(c + 1), {}};
        for (const auto& row : data) s.y.push_back(row[c]);
        out.series.push_back(std::move(s));
      }
      return out;
    };
    atomic_write(*plot, svg_plot(times, {panel("flat output", ys, "y"), panel("shape", ss, "s"),
                                         panel("force coefficients", fs, "f")},
                                 "t [s]"));
  }
  emit(out, table.str());
  for (const SwitchEvent& e : rec.switch_events()) {
    std::cerr << "chart switch at t = " << format_number(e.t) << ": " << e.from << " -> " << e.to
              << " (continuity error " << format_number(e.continuity_error) << ")\n";
  }
  return 0;
}

// --- simulate -----------------------------------------------------------------

int cmd_simulate(const std::string& model_path, const std::string& traj_path, double dt, double tol,
                 const std::optional<std::string>& out, const std::optional<std::string>& csv,
                 const std::optional<std::string>& plot) {
  const SystemPtr system = load_model_file(model_path);
  const FlatTrajectory traj = trajectory_from_json(read_text_file(traj_path));
  if (traj.kind() != system->group_kind()) throw FormatError("trajectory group does not match the model");
  if (!(dt > 0.0) || !(tol > 0.0)) throw FormatError("--dt and --tol must be positive");

  RoundtripOptions options;
  options.dt = dt;
  RoundtripReport rep;
  try {
    rep = roundtrip_verify(system, traj, options);
  } catch (const SingularError& e) {
    throw ConditionFailure(e.what());
  } catch (const ConvergenceError& e) {
    throw ConditionFailure(e.what());
  } catch (const InfeasibleError& e) {
    throw ConditionFailure(e.what());
  }
  const bool pass = rep.max_flat_error < tol;
  ordered_json events = ordered_json::array();
  for (const SwitchEvent& e : rep.switch_events) {
    events.push_back({{"t", e.t}, {"from", e.from}, {"to", e.to}, {"continuity_error", e.continuity_error}});
  }
  const ordered_json report = {{"system", system->name()},
                               {"dt", dt},
                               {"tol", tol},
                               {"max_flat_error", rep.max_flat_error},
                               {"max_residual", rep.max_residual},
                               {"max_switch_error", rep.max_switch_error},
                               {"switch_events", events},
                               {"pass", pass}};
  if (csv || plot) {
    CsvTable table;
    table.header = {"t"};
    for (const auto& n : coordinate_names(*system)) table.header.push_back(n);
    for (const auto& n : velocity_names(*system)) table.header.push_back(n);
    for (const auto& n : indexed("f", force_count(*system))) table.header.push_back(n);
    table.header.push_back("flat_error");
    std::vector<double> times;
    PlotPanel err{"flat error", {{"|y_sim - y_plan|", {}}}};
    PlotPanel flat{"simulated flat output", {}};
    for (int c = 0; c < system->group_dim(); ++c) flat.series.push_back({"y" + std::to_string(c + 1), {}});
    for (const RoundtripSample& s : rep.samples) {
      std::vector<double> row{s.t};
      append(row, s.q.coords);
      append(row, s.qdot);
      append(row, s.force_coeffs);
      row.push_back(s.flat_error);
      table.rows.push_back(row);
      times.push_back(s.t);
      err.series[0].y.push_back(s.flat_error);
      for (int c = 0; c < system->group_dim(); ++c) flat.series[c].y.push_back(s.flat.data[c]);
    }
    if (csv) atomic_write(*csv, table.str());
    if (plot) atomic_write(*plot, svg_plot(times, {flat, err}, "t [s]"));
  }
  emit(out, report.dump(2) + "\n");
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometric flat outputs for mechanical systems on principal bundles"};
  app.require_subcommand(1);

  std::string model, second;
  int samples = 200;
  std::uint64_t seed = 1;
  double dt = 1e-3, tol = 1e-3;
  std::optional<std::string> out, plot, csv;

  auto* verify = app.add_subcommand("verify", "check the flatness conditions for a model");
  verify->add_option("model", model, "model JSON file")->required();
  verify->add_option("--samples", samples, "samples per sweep")->check(CLI::PositiveNumber);
  verify->add_option("--seed", seed, "random seed");
  verify->add_option("--out", out, "report path (default: stdout)");

  auto* plan = app.add_subcommand("plan", "plan a minimum-snap flat trajectory through waypoints");
  plan->add_option("model", model, "model JSON file")->required();
  plan->add_option("waypoints", second, "waypoint JSON file")->required();
  plan->add_option("--out", out, "trajectory path (default: stdout)");

  auto* reconstruct = app.add_subcommand("reconstruct", "recover states and inputs from a flat trajectory");
  reconstruct->add_option("model", model, "model JSON file")->required();
  reconstruct->add_option("trajectory", second, "trajectory JSON file")->required();
  reconstruct->add_option("--dt", dt, "sample spacing [s]");
  reconstruct->add_option("--out", out, "CSV path (default: stdout)");
  reconstruct->add_option("--plot", plot, "SVG plot path");

  auto* simulate = app.add_subcommand("simulate", "reconstruct, integrate open loop and compare flat outputs");
  simulate->add_option("model", model, "model JSON file")->required();
  simulate->add_option("trajectory", second, "trajectory JSON file")->required();
  simulate->add_option("--dt", dt, "integration step [s]");
  simulate->add_option("--tol", tol, "pass threshold on the flat error");
  simulate->add_option("--out", out, "report path (default: stdout)");
  simulate->add_option("--csv", csv, "CSV time series path");
  simulate->add_option("--plot", plot, "SVG plot path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*verify) return cmd_verify(model, samples, seed, out);
    if (*plan) return cmd_plan(model, second, out);
    if (*reconstruct) return cmd_reconstruct(model, second, dt, out, plot);
    return cmd_simulate(model, second, dt, tol, out, csv, plot);
  } catch (const ConditionFailure& e) {
    std::cerr << "geoflat: " << e.what() << "\n";
    return 1;
  } catch (const FormatError& e) {
    std::cerr << "geoflat: " << e.what() << "\n";
    return 2;
  } catch (const PlannerError& e) {
    std::cerr << "geoflat: " << e.what() << "\n";
    return 2;
  } catch (const ModelError& e) {
    std::cerr << "geoflat: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "geoflat: " << e.what() << "\n";
    return 1;
  }
}
