#include "geoflat/core.hpp"

#include "geoflat/so3.hpp"

#include <cmath>

namespace geoflat {

double wrap_angle(double a) {
  double w = a - 2.0 * kPi * std::floor((a + kPi) / (2.0 * kPi));
  // floor() rounding can leave w == pi for inputs just below an odd multiple.
  if (w >= kPi) w -= 2.0 * kPi;
  return w;
}

ChartPtr make_coordinate_chart(std::string name, std::vector<bool> wrap_mask) {
  if (wrap_mask.empty()) throw ModelError("chart '" + name + "' must have dim >= 1");
  auto chart = std::make_shared<Chart>();
  chart->name = std::move(name);
  chart->dim = static_cast<int>(wrap_mask.size());
  chart->coord_size = chart->dim;
  chart->frame_kind = FrameKind::coordinate;
  chart->wrap_mask = std::move(wrap_mask);
  return chart;
}

ChartPtr make_se3_body_chart(std::string name) {
  auto chart = std::make_shared<Chart>();
  chart->name = std::move(name);
  chart->dim = 6;
  chart->coord_size = 12;
  chart->frame_kind = FrameKind::body_frame;
  chart->wrap_mask.assign(12, false);
  return chart;
}

ConfigPoint make_point(const ChartPtr& chart, Vec coords) {
  if (!chart) throw ChartError("point without chart");
  if (coords.size() != chart->coord_size) {
    throw ChartError("chart '" + chart->name + "' expects " + std::to_string(chart->coord_size) +
                     " coordinates, got " + std::to_string(coords.size()));
  }
  if (!coords.allFinite()) throw ChartError("non-finite coordinates in chart '" + chart->name + "'");
  for (int i = 0; i < coords.size(); ++i) {
    if (chart->wrap_mask[i]) coords[i] = wrap_angle(coords[i]);
  }
  if (chart->frame_kind == FrameKind::body_frame) {
    const Eigen::Matrix3d R = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(coords.data() + 3);
    if (so3::orthogonality_error(R) > 1e-9) {
      throw ChartError("rotation block is not in SO(3) within 1e-9");
    }
  }
  return ConfigPoint{chart, std::move(coords)};
}

void require_same_chart(const ConfigPoint& a, const ConfigPoint& b) {
  if (!a.chart || !b.chart || (a.chart != b.chart && a.chart->name != b.chart->name)) {
    throw ChartError("chart mismatch: '" + (a.chart ? a.chart->name : std::string("?")) + "' vs '" +
                     (b.chart ? b.chart->name : std::string("?")) + "'");
  }
}

}  // namespace geoflat
