#pragma once

// The flatness pipeline: y = phi(q), the inverse shape solve E(s) = 0, and
// reconstruction of (q, qdot, f) from the flat output and its derivatives.

#include "geoflat/model.hpp"

#include <optional>
#include <vector>

namespace geoflat {

/// A flat-output sample: the group value and time derivatives of its
/// coordinates (angles unwrapped). derivs[k] is the (k+1)-th derivative.
struct FlatPoint {
  GroupElement value;
  std::vector<Vec> derivs;
};

GroupElement flat_output(const SystemModel& system, const Trivialization& triv, const ConfigPoint& q);

struct ShapeSolveOptions {
  double tol = 1e-11;
  int max_iter = 50;
  /// Use the system's closed-form root as the starting point when offered.
  bool use_closed_form = true;
  /// Throw SingularError when the Jacobian at the root is singular.
  bool reject_singular = true;
  /// Largest Newton step in shape coordinates (keeps the branch near the guess).
  double max_step = 0.5;
};

struct ShapeSolution {
  ShapePoint s;
  double residual = 0.0;
  int iterations = 0;
  double condition = 1.0;
  bool closed_form = false;
};

/// Damped Newton on E(s) = 0 from `guess`. Errors: SingularError at a
/// singular root (for example free fall), ConvergenceError with the best
/// iterate otherwise.
ShapeSolution solve_shape(const SystemModel& system, const Trivialization& triv, const GroupElement& g,
                          const Vec& xi, const Vec& xidot, const ShapePoint& guess,
                          const ShapeSolveOptions& options = {});

/// Cold start: the nominal shape first, then n_seeds spread shapes ordered
/// by |E|. Returns the first converged root.
ShapeSolution solve_shape_cold(const SystemModel& system, const Trivialization& triv, const GroupElement& g,
                               const Vec& xi, const Vec& xidot, int n_seeds = 8);

/// Distinct roots reached from the nominal shape and n_seeds spread seeds,
/// singular or not (closed forms are not used).
std::vector<ShapePoint> shape_roots(const SystemModel& system, const Trivialization& triv, const GroupElement& g,
                                    const Vec& xi, const Vec& xidot, int n_seeds);

struct Reconstruction {
  ConfigPoint q;
  ShapePoint s;
  Vec xi;
  Vec xidot;
};

/// q = Phi_g(sigma(s)) with s solved from (g, xi, xidot); needs derivs to
/// order 2. Seeds Newton from `guess` when given, else cold-starts.
Reconstruction reconstruct(const SystemModel& system, const Trivialization& triv, const FlatPoint& y,
                           const std::optional<ShapePoint>& guess = std::nullopt);

/// Sample of a reconstructed trajectory with input recovery diagnostics.
struct ReconstructedSample {
  double t = 0.0;
  ConfigPoint q;
  Vec qdot;
  Vec qddot;
  /// Coefficients on the columns of F.
  Vec force_coeffs;
  /// Norm of the part of the dynamics residual outside span F#.
  double residual = 0.0;
  ShapePoint s;
  std::size_t chart = 0;
};

struct SwitchEvent {
  double t = 0.0;
  std::size_t from = 0;
  std::size_t to = 0;
  /// Distance between the states obtained through the two trivializations.
  double continuity_error = 0.0;
};

/// Stateful reconstruction along a trajectory: warm-starts Newton from the
/// previous shape and follows the system's atlas with hysteresis. The flat
/// output is expressed in the trivialization `chart`.
class Reconstructor {
 public:
  explicit Reconstructor(SystemPtr system, std::size_t chart = 0, double dt_fd = 1e-4, double tol = 1e-6);

  /// Configuration at one instant (derivs to order 2).
  Reconstruction configuration(const FlatPoint& y);

  /// Full state and inputs at time t (derivs to order 4): qdot and qddot by
  /// 5-point differences over offsets {0, +-dt_fd, +-2 dt_fd} of the
  /// reconstruction of the local Taylor expansion of y. Throws
  /// InfeasibleError when the residual exceeds tol (1 + |residual vector|).
  ReconstructedSample sample(double t, const FlatPoint& y);

  const std::vector<SwitchEvent>& switch_events() const { return events_; }
  std::size_t active_chart() const { return active_; }
  const SystemModel& system() const { return *system_; }

 private:
  Reconstruction solve_at(const FlatPoint& y, const std::optional<ShapePoint>& guess, std::size_t active) const;

  SystemPtr system_;
  std::size_t chart_;
  std::size_t active_;
  double dt_fd_;
  double tol_;
  std::optional<ShapePoint> last_shape_;
  std::vector<SwitchEvent> events_;
};

/// One-shot full reconstruction (cold start, no atlas switching).
ReconstructedSample reconstruct_full(const SystemPtr& system, std::size_t chart, const FlatPoint& y,
                                     double dt_fd = 1e-4);

/// Taylor shift of a flat point by tau using its derivatives.
FlatPoint taylor_shift(const FlatPoint& y, double tau);

}  // namespace geoflat
