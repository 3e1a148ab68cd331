#include "histo/descriptors.hpp"
#include "histo/error.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>

namespace histo {
namespace {

using ComplexPlane = Eigen::Array<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// In-place separable 2-D transform: rows, then columns.
void fft2(ComplexPlane& a, bool inverse) {
  Eigen::FFT<double> fft;
  Eigen::VectorXcd in, out;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    in = a.row(r).transpose().matrix();
    inverse ? fft.inv(out, in) : fft.fwd(out, in);
    a.row(r) = out.transpose().array();
  }
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    in = a.col(c).matrix();
    inverse ? fft.inv(out, in) : fft.fwd(out, in);
    a.col(c) = out.array();
  }
}

double signed_frequency(Eigen::Index k, Eigen::Index n) {
  return double(k <= n / 2 ? k : k - n) / double(n);
}

double wrap_angle(double t) {
  while (t > M_PI) t -= 2.0 * M_PI;
  while (t < -M_PI) t += 2.0 * M_PI;
  return t;
}

}  // namespace

Eigen::VectorXd gist_descriptor(const Plane& channel, const DescriptorParams& params) {
  params.validate();
  const int grid = params.gist_grid;
  const Eigen::Index h = channel.rows();
  const Eigen::Index w = channel.cols();
  if (h < grid || w < grid) {
    throw Error(ErrorKind::ImageTooSmall, "GIST needs at least one pixel per grid cell");
  }

  ComplexPlane spectrum = channel.cast<std::complex<double>>();
  fft2(spectrum, false);

  Plane radius(h, w), theta(h, w);
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      const double fx = signed_frequency(x, w);
      const double fy = signed_frequency(y, h);
      radius(y, x) = std::hypot(fx, fy);
      theta(y, x) = std::atan2(fy, fx);
    }
  }

  // Log-Gabor-style transfer functions in the classic GIST parameterisation: centre
  // frequency 0.3 / 1.85^s cycles/pixel, angular spread tied to the orientation count.
  const int n_or = params.gist_orientations;
  const double angular = 2.0 * M_PI * 16.0 * n_or * n_or / (32.0 * 32.0);
  const int cells = grid * grid;
  Eigen::VectorXd out(Eigen::Index(params.gist_filters()) * cells);

  ComplexPlane filtered(h, w);
  for (int s = 0; s < params.gist_scales; ++s) {
    const double fc = 0.3 / std::pow(1.85, s);
    for (int o = 0; o < n_or; ++o) {
      const double orientation = M_PI * o / n_or;
      for (Eigen::Index y = 0; y < h; ++y) {
        for (Eigen::Index x = 0; x < w; ++x) {
          const double dt = wrap_angle(theta(y, x) - orientation);
          const double rr = radius(y, x) / fc - 1.0;
          const double gain = std::exp(-3.5 * rr * rr - angular * dt * dt);
          filtered(y, x) = spectrum(y, x) * gain;
        }
      }
      filtered(0, 0) = 0.0;  // zero-mean filter
      fft2(filtered, true);
      const Plane magnitude = filtered.abs();

      const int filter = s * n_or + o;
      for (int gy = 0; gy < grid; ++gy) {
        const Eigen::Index y0 = gy * h / grid, y1 = (gy + 1) * h / grid;
        for (int gx = 0; gx < grid; ++gx) {
          const Eigen::Index x0 = gx * w / grid, x1 = (gx + 1) * w / grid;
          out[filter * cells + gy * grid + gx] = magnitude.block(y0, x0, y1 - y0, x1 - x0).mean();
        }
      }
    }
  }
  return out;
}

}  // namespace histo
