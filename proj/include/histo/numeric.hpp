#ifndef HISTO_NUMERIC_HPP
#define HISTO_NUMERIC_HPP

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <vector>

namespace histo {

/// Linear-interpolation percentile (pct in [0, 100]) of a non-empty sample.
inline double percentile(std::vector<double> values, double pct) {
  std::sort(values.begin(), values.end());
  const double pos = pct / 100.0 * double(values.size() - 1);
  const auto lo = std::size_t(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - double(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

inline double percentile(const Eigen::Ref<const Eigen::ArrayXd>& values, double pct) {
  return percentile(std::vector<double>(values.data(), values.data() + values.size()), pct);
}

inline double radians_to_degrees(double rad) { return rad * 180.0 / M_PI; }

/// Angle between two non-zero 3-vectors, in degrees.
inline double angle_degrees(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double c = a.normalized().dot(b.normalized());
  return radians_to_degrees(std::acos(std::clamp(c, -1.0, 1.0)));
}

}  // namespace histo

#endif  // HISTO_NUMERIC_HPP
