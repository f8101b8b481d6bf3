#pragma once

// Minimum-snap piecewise polynomials in the flat output space.

#include "geoflat/flatmap.hpp"
#include "geoflat/group.hpp"

#include <string>
#include <vector>

namespace geoflat {

struct Waypoint {
  double t = 0.0;
  GroupElement g;
};

/// "rest": derivatives 1..3 vanish at both ends (degree 7 segments).
/// "specified": derivatives 1..4 given at both ends (degree 9 segments).
struct Boundary {
  enum class Kind { rest, specified };
  Kind kind = Kind::rest;
  /// start[k] / end[k] is the (k+1)-th derivative, k = 0..3 (specified only).
  std::vector<Vec> start;
  std::vector<Vec> end;
};

struct Segment {
  double t0 = 0.0;
  double t1 = 0.0;
  /// coeffs(c, k): coefficient of tau^k for component c, tau = (t - t0) / (t1 - t0).
  Mat coeffs;
};

class FlatTrajectory {
 public:
  FlatTrajectory(GroupKind kind, std::vector<Segment> segments);

  GroupKind kind() const { return kind_; }
  const std::vector<Segment>& segments() const { return segments_; }
  double t_begin() const { return segments_.front().t0; }
  double t_end() const { return segments_.back().t1; }

  /// Value (angles wrapped) and derivatives 1..order (order <= 4). Throws
  /// PlannerError outside [t_begin, t_end].
  FlatPoint eval(double t, int order = 4) const;
  /// Same, extrapolating the first/last segment outside the time range.
  FlatPoint eval_extended(double t, int order = 4) const;

  /// Unwrapped component values (no angle wrapping).
  Vec eval_raw(double t, int derivative = 0) const;

  /// Largest jump of derivatives 0..4 across interior knots.
  double knot_mismatch() const;

  /// Sum over components of the integral of the squared 4th derivative.
  double snap_cost() const;

 private:
  std::size_t segment_index(double t) const;
  Vec segment_eval(std::size_t i, double t, int derivative) const;

  GroupKind kind_;
  std::vector<Segment> segments_;
};

FlatTrajectory min_snap(const std::vector<Waypoint>& waypoints, const Boundary& boundary = {});

/// {"times": [...], "points": [[...], ...], "boundary": "rest"}. With
/// "boundary": "specified", "start" and "end" hold arrays of derivative
/// vectors of orders 1..4.
FlatTrajectory plan_from_json_text(const std::string& text, GroupKind kind);

std::string trajectory_to_json(const FlatTrajectory& traj);
FlatTrajectory trajectory_from_json(const std::string& text);

}  // namespace geoflat
