#include "geoflat/planner.hpp"

#include <json.hpp>

#include <Eigen/LU>

#include <algorithm>
#include <cmath>

namespace geoflat {

namespace {

using nlohmann::json;

constexpr int kSnapOrder = 4;

double falling(int j, int k) {
  double out = 1.0;
  for (int i = 0; i < k; ++i) out *= j - i;
  return out;
}

// Row vector r with r.c = p^(k)(tau) for p(tau) = sum c_j tau^j.
Vec derivative_row(int degree, int k, double tau) {
  Vec r = Vec::Zero(degree + 1);
  for (int j = k; j <= degree; ++j) r[j] = falling(j, k) * std::pow(tau, j - k);
  return r;
}

// Integral over [0, 1] of (p'''')^2 as c^T H c.
Mat snap_hessian(int degree) {
  Mat H = Mat::Zero(degree + 1, degree + 1);
  for (int i = kSnapOrder; i <= degree; ++i) {
    for (int j = kSnapOrder; j <= degree; ++j) {
      H(i, j) = falling(i, kSnapOrder) * falling(j, kSnapOrder) / (i + j - 2 * kSnapOrder + 1);
    }
  }
  return H;
}

Vec solve_component(const std::vector<double>& times, const std::vector<double>& values, int degree,
                    const Boundary& boundary, int component) {
  const int nseg = static_cast<int>(times.size()) - 1;
  const int nc = degree + 1;
  const int n = nseg * nc;
  std::vector<Vec> rows;
  std::vector<double> rhs;
  auto add = [&](int seg, const Vec& r, double value, int seg2 = -1, const Vec& r2 = Vec()) {
    Vec row = Vec::Zero(n);
    row.segment(seg * nc, nc) = r;
    if (seg2 >= 0) row.segment(seg2 * nc, nc) -= r2;
    rows.push_back(row);
    rhs.push_back(value);
  };
  for (int i = 0; i < nseg; ++i) {
    add(i, derivative_row(degree, 0, 0.0), values[i]);
    add(i, derivative_row(degree, 0, 1.0), values[i + 1]);
  }
  for (int i = 0; i + 1 < nseg; ++i) {
    const double Ti = times[i + 1] - times[i], Tj = times[i + 2] - times[i + 1];
    for (int k = 1; k <= kSnapOrder; ++k) {
      add(i, derivative_row(degree, k, 1.0) / std::pow(Ti, k), 0.0, i + 1,
          derivative_row(degree, k, 0.0) / std::pow(Tj, k));
    }
  }
  const double T0 = times[1] - times[0], Tn = times[nseg] - times[nseg - 1];
  const int pinned = boundary.kind == Boundary::Kind::rest ? 3 : 4;
  for (int k = 1; k <= pinned; ++k) {
    double a = 0.0, b = 0.0;
    if (boundary.kind == Boundary::Kind::specified) {
      a = boundary.start[k - 1][component];
      b = boundary.end[k - 1][component];
    }
    add(0, derivative_row(degree, k, 0.0), a * std::pow(T0, k));
    add(nseg - 1, derivative_row(degree, k, 1.0), b * std::pow(Tn, k));
  }
  const int m = static_cast<int>(rows.size());
  const Mat H = snap_hessian(degree);
  Mat K = Mat::Zero(n + m, n + m);
  Vec b = Vec::Zero(n + m);
  for (int i = 0; i < nseg; ++i) {
    const double T = times[i + 1] - times[i];
    K.block(i * nc, i * nc, nc, nc) = 2.0 * H / std::pow(T, 2 * kSnapOrder - 1);
  }
  for (int r = 0; r < m; ++r) {
    K.block(n + r, 0, 1, n) = rows[r].transpose();
    K.block(0, n + r, n, 1) = rows[r];
    b[n + r] = rhs[r];
  }
  Eigen::FullPivLU<Mat> lu(K);
  lu.setThreshold(1e-13);
  if (lu.rank() < n + m) throw PlannerError("minimum-snap KKT system is singular");
  return lu.solve(b).head(n);
}

Vec vector_from_json(const json& j, int expected, const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) != expected) {
    throw FormatError(std::string(what) + " must be an array of " + std::to_string(expected) + " numbers");
  }
  Vec v(expected);
  for (int i = 0; i < expected; ++i) {
    if (!j[i].is_number()) throw FormatError(std::string(what) + " must contain numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

}  // namespace

FlatTrajectory::FlatTrajectory(GroupKind kind, std::vector<Segment> segments)
    : kind_(kind), segments_(std::move(segments)) {
  if (segments_.empty()) throw PlannerError("trajectory has no segments");
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Segment& s = segments_[i];
    if (!(s.t1 > s.t0)) throw PlannerError("segment times must be strictly increasing");
    if (i > 0 && s.t0 != segments_[i - 1].t1) throw PlannerError("segments must be contiguous");
    if (s.coeffs.rows() != group_dim(kind_) || s.coeffs.cols() < 1 || s.coeffs.cols() > 10) {
      throw PlannerError("segment coefficients have wrong shape");
    }
  }
}

std::size_t FlatTrajectory::segment_index(double t) const {
  if (t <= segments_.front().t0) return 0;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (t < segments_[i].t1) return i;
  }
  return segments_.size() - 1;
}

Vec FlatTrajectory::segment_eval(std::size_t i, double t, int derivative) const {
  const Segment& s = segments_[i];
  const double T = s.t1 - s.t0;
  const double tau = (t - s.t0) / T;
  const int degree = static_cast<int>(s.coeffs.cols()) - 1;
  return s.coeffs * derivative_row(degree, derivative, tau) / std::pow(T, derivative);
}

Vec FlatTrajectory::eval_raw(double t, int derivative) const {
  return segment_eval(segment_index(t), t, derivative);
}

FlatPoint FlatTrajectory::eval_extended(double t, int order) const {
  if (order < 0 || order > 4) throw PlannerError("derivative order must be in [0, 4]");
  const std::size_t i = segment_index(t);
  FlatPoint p;
  p.value = make_group_element(kind_, segment_eval(i, t, 0));
  for (int k = 1; k <= order; ++k) p.derivs.push_back(segment_eval(i, t, k));
  return p;
}

FlatPoint FlatTrajectory::eval(double t, int order) const {
  const double slack = 1e-12 * std::max(1.0, std::abs(t));
  if (!(t >= t_begin() - slack && t <= t_end() + slack)) {
    throw PlannerError("time " + std::to_string(t) + " outside the trajectory range");
  }
  return eval_extended(std::clamp(t, t_begin(), t_end()), order);
}

double FlatTrajectory::knot_mismatch() const {
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < segments_.size(); ++i) {
    const double t = segments_[i].t1;
    for (int k = 0; k <= kSnapOrder; ++k) {
      worst = std::max(worst, (segment_eval(i, t, k) - segment_eval(i + 1, t, k)).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

double FlatTrajectory::snap_cost() const {
  double cost = 0.0;
  for (const Segment& s : segments_) {
    const int degree = static_cast<int>(s.coeffs.cols()) - 1;
    if (degree < kSnapOrder) continue;
    const Mat H = snap_hessian(degree);
    const double scale = std::pow(s.t1 - s.t0, -(2 * kSnapOrder - 1));
    for (int c = 0; c < s.coeffs.rows(); ++c) {
      const Vec coeff = s.coeffs.row(c).transpose();
      cost += scale * coeff.dot(H * coeff);
    }
  }
  return cost;
}

FlatTrajectory min_snap(const std::vector<Waypoint>& waypoints, const Boundary& boundary) {
  if (waypoints.size() < 2) throw PlannerError("minimum-snap planning needs at least two waypoints");
  const GroupKind kind = waypoints.front().g.kind;
  const int dim = group_dim(kind);
  std::vector<double> times;
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    const Waypoint& w = waypoints[i];
    if (w.g.kind != kind || w.g.data.size() != dim) throw PlannerError("waypoints mix group kinds");
    if (!std::isfinite(w.t)) throw PlannerError("waypoint time is not finite");
    if (i > 0 && !(w.t > waypoints[i - 1].t)) {
      throw PlannerError("waypoint times must be strictly increasing (duplicate or decreasing time at index " +
                         std::to_string(i) + ")");
    }
    times.push_back(w.t);
  }
  if (boundary.kind == Boundary::Kind::specified) {
    auto check = [&](const std::vector<Vec>& d) {
      if (d.size() != 4) throw PlannerError("specified boundary needs derivatives of orders 1..4");
      for (const Vec& v : d) {
        if (v.size() != dim) throw PlannerError("boundary derivative has wrong size");
      }
    };
    check(boundary.start);
    check(boundary.end);
  }
  // Angles live on the universal cover: continue each waypoint onto the
  // branch nearest its predecessor.
  std::vector<Vec> unwrapped{waypoints.front().g.data};
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    unwrapped.push_back(unwrap_near(kind, waypoints[i].g.data, unwrapped.back()));
  }
  const int degree = boundary.kind == Boundary::Kind::rest ? 7 : 9;
  const int nseg = static_cast<int>(waypoints.size()) - 1;
  std::vector<Segment> segments(nseg);
  for (int i = 0; i < nseg; ++i) {
    segments[i].t0 = times[i];
    segments[i].t1 = times[i + 1];
    segments[i].coeffs = Mat::Zero(dim, degree + 1);
  }
  for (int c = 0; c < dim; ++c) {
    std::vector<double> values;
    for (const Vec& u : unwrapped) values.push_back(u[c]);
    const Vec sol = solve_component(times, values, degree, boundary, c);
    for (int i = 0; i < nseg; ++i) segments[i].coeffs.row(c) = sol.segment(i * (degree + 1), degree + 1).transpose();
  }
  return FlatTrajectory(kind, std::move(segments));
}

FlatTrajectory plan_from_json_text(const std::string& text, GroupKind kind) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("waypoint file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("waypoint file must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "times" && key != "points" && key != "boundary" && key != "start" && key != "end") {
      throw FormatError("unknown key '" + key + "' in waypoint file");
    }
  }
  if (!j.contains("times") || !j["times"].is_array()) throw FormatError("waypoint file needs a 'times' array");
  if (!j.contains("points") || !j["points"].is_array()) throw FormatError("waypoint file needs a 'points' array");
  if (j["times"].size() != j["points"].size()) throw FormatError("'times' and 'points' differ in length");
  const int dim = group_dim(kind);
  std::vector<Waypoint> waypoints;
  for (std::size_t i = 0; i < j["times"].size(); ++i) {
    if (!j["times"][i].is_number()) throw FormatError("'times' must contain numbers");
    waypoints.push_back(
        Waypoint{j["times"][i].get<double>(), make_group_element(kind, vector_from_json(j["points"][i], dim, "point"))});
  }
  Boundary boundary;
  const std::string kind_name = j.value("boundary", std::string("rest"));
  if (kind_name == "specified") {
    boundary.kind = Boundary::Kind::specified;
    for (const char* key : {"start", "end"}) {
      if (!j.contains(key) || !j[key].is_array() || j[key].size() != 4) {
        throw FormatError(std::string("specified boundary needs '") + key + "' with 4 derivative vectors");
      }
      auto& target = std::string(key) == "start" ? boundary.start : boundary.end;
      for (const auto& v : j[key]) target.push_back(vector_from_json(v, dim, "boundary derivative"));
    }
  } else if (kind_name != "rest") {
    throw FormatError("boundary must be 'rest' or 'specified'");
  } else if (j.contains("start") || j.contains("end")) {
    throw FormatError("'start'/'end' are only valid with a specified boundary");
  }
  return min_snap(waypoints, boundary);
}

std::string trajectory_to_json(const FlatTrajectory& traj) {
  json segments = json::array();
  for (const Segment& s : traj.segments()) {
    json coeffs = json::array();
    for (int c = 0; c < s.coeffs.rows(); ++c) {
      json row = json::array();
      for (int k = 0; k < s.coeffs.cols(); ++k) row.push_back(s.coeffs(c, k));
      coeffs.push_back(row);
    }
    segments.push_back({{"t0", s.t0}, {"t1", s.t1}, {"coeffs", coeffs}});
  }
  const json j = {{"group", to_string(traj.kind())}, {"segments", segments}};
  return j.dump(2) + "\n";
}

FlatTrajectory trajectory_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("trajectory file is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("group") || !j["group"].is_string() || !j.contains("segments") ||
      !j["segments"].is_array()) {
    throw FormatError("trajectory file needs 'group' and 'segments'");
  }
  for (const auto& [key, value] : j.items()) {
    if (key != "group" && key != "segments") throw FormatError("unknown key '" + key + "' in trajectory file");
  }
  const GroupKind kind = group_kind_from_string(j["group"].get<std::string>());
  const int dim = group_dim(kind);
  std::vector<Segment> segments;
  for (const auto& s : j["segments"]) {
    if (!s.is_object() || !s.contains("t0") || !s.contains("t1") || !s.contains("coeffs") ||
        !s["t0"].is_number() || !s["t1"].is_number() || !s["coeffs"].is_array() ||
        static_cast<int>(s["coeffs"].size()) != dim || s["coeffs"][0].size() == 0) {
      throw FormatError("malformed trajectory segment");
    }
    Segment seg;
    seg.t0 = s["t0"].get<double>();
    seg.t1 = s["t1"].get<double>();
    const int nc = static_cast<int>(s["coeffs"][0].size());
    seg.coeffs.resize(dim, nc);
    for (int c = 0; c < dim; ++c) seg.coeffs.row(c) = vector_from_json(s["coeffs"][c], nc, "coefficient row").transpose();
    segments.push_back(std::move(seg));
  }
  try {
    return FlatTrajectory(kind, std::move(segments));
  } catch (const PlannerError& e) {
    throw FormatError(e.what());
  }
}

}  // namespace geoflat
