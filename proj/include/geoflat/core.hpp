#pragma once

// Basic value types shared by every module: charts, configuration points,
// (co)tangent vectors and the exception hierarchy.

#include <Eigen/Dense>

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace geoflat {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle into [-pi, pi).
double wrap_angle(double a);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid model data: nonpositive parameters, indefinite metric, rank drops.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Points or vectors that do not belong to the expected chart.
class ChartError : public Error {
 public:
  using Error::Error;
};

/// A shape outside the domain of a local section (chart switch required).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The implicit dynamics lose rank at the requested tuple.
class SingularError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, Vec best_iterate, double residual)
      : Error(what), best_iterate_(std::move(best_iterate)), residual_(residual) {}
  const Vec& best_iterate() const { return best_iterate_; }
  double residual() const { return residual_; }

 private:
  Vec best_iterate_;
  double residual_;
};

/// A reconstructed state whose dynamics residual leaves the span of F#.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class PlannerError : public Error {
 public:
  using Error::Error;
};

/// Malformed input files.
class FormatError : public Error {
 public:
  using Error::Error;
};

enum class FrameKind { coordinate, body_frame };

/// Local description of the configuration manifold.  `dim` is the manifold
/// dimension (number of frame components of a tangent vector); `coord_size`
/// is the number of stored coordinates, which differs from `dim` only for
/// the SE(3) body-frame chart (position + row-major rotation).
struct Chart {
  std::string name;
  int dim = 0;
  int coord_size = 0;
  FrameKind frame_kind = FrameKind::coordinate;
  std::vector<bool> wrap_mask;
};

using ChartPtr = std::shared_ptr<const Chart>;

ChartPtr make_coordinate_chart(std::string name, std::vector<bool> wrap_mask);
ChartPtr make_se3_body_chart(std::string name);

struct ConfigPoint {
  ChartPtr chart;
  Vec coords;
};

/// Builds a point, wrapping angle-like coordinates and validating sizes.
/// SE(3) points must carry a rotation with R^T R = I, det R = 1 (1e-9).
ConfigPoint make_point(const ChartPtr& chart, Vec coords);

struct TangentVec {
  ConfigPoint at;
  Vec comps;
};

struct CotangentVec {
  ConfigPoint at;
  Vec comps;
};

/// Throws ChartError unless both points live in the same chart.
void require_same_chart(const ConfigPoint& a, const ConfigPoint& b);

}  // namespace geoflat
