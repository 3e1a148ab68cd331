#include "histo/descriptors.hpp"
#include "histo/error.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

namespace histo {
namespace {

struct Sample {
  int x0, y0;     // top-left integer corner relative to the centre
  double fx, fy;  // fractional offsets in [0, 1)
};

// Offsets are snapped to a 1e-9 grid so that points lying on integer positions
// (e.g. the four axis points) interpolate exactly.
std::vector<Sample> circle_samples(double radius, int neighbors) {
  std::vector<Sample> out;
  out.reserve(std::size_t(neighbors));
  for (int i = 0; i < neighbors; ++i) {
    const double t = 2.0 * M_PI * i / neighbors;
    const double dx = std::round(radius * std::cos(t) * 1e9) / 1e9;
    const double dy = std::round(-radius * std::sin(t) * 1e9) / 1e9;
    const double x0 = std::floor(dx);
    const double y0 = std::floor(dy);
    out.push_back({int(x0), int(y0), dx - x0, dy - y0});
  }
  return out;
}

bool is_uniform(std::uint32_t pattern, int bits) {
  const std::uint32_t mask = bits == 32 ? 0xffffffffu : ((1u << bits) - 1u);
  const std::uint32_t rotated = ((pattern >> 1) | (pattern << (bits - 1))) & mask;
  return std::popcount(pattern ^ rotated) <= 2;
}

}  // namespace

Eigen::VectorXd lbp_descriptor(const Plane& channel, const DescriptorParams& params) {
  params.validate();
  const int p = params.lbp_neighbors;
  const int margin = int(std::ceil(params.lbp_radius));
  const Eigen::Index h = channel.rows();
  const Eigen::Index w = channel.cols();
  if (h < 2 * margin + 1 || w < 2 * margin + 1) {
    throw Error(ErrorKind::ImageTooSmall, "LBP needs at least " + std::to_string(2 * margin + 1) +
                                              " pixels per side");
  }

  const auto samples = circle_samples(params.lbp_radius, p);
  Eigen::VectorXd hist = Eigen::VectorXd::Zero(p + 2);

  for (Eigen::Index y = margin; y < h - margin; ++y) {
    for (Eigen::Index x = margin; x < w - margin; ++x) {
      const double centre = channel(y, x);
      std::uint32_t pattern = 0;
      for (int i = 0; i < p; ++i) {
        const auto& s = samples[std::size_t(i)];
        const Eigen::Index yy = y + s.y0;
        const Eigen::Index xx = x + s.x0;
        double v = (1.0 - s.fx) * (1.0 - s.fy) * channel(yy, xx);
        if (s.fx > 0.0) v += s.fx * (1.0 - s.fy) * channel(yy, xx + 1);
        if (s.fy > 0.0) v += (1.0 - s.fx) * s.fy * channel(yy + 1, xx);
        if (s.fx > 0.0 && s.fy > 0.0) v += s.fx * s.fy * channel(yy + 1, xx + 1);
        if (v >= centre) pattern |= 1u << i;
      }
      const int bin = is_uniform(pattern, p) ? std::popcount(pattern) : p + 1;
      hist[bin] += 1.0;
    }
  }
  return hist / hist.sum();
}

}  // namespace histo
