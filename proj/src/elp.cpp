#include "histo/descriptors.hpp"
#include "histo/error.hpp"

#include <array>
#include <cmath>
#include <complex>

namespace histo {
namespace {

using Profile = Eigen::VectorXd;

// The four directional projections of a w x w window, each of length w:
//   0: column means, 1: anti-diagonal means (row + col), 2: row means,
//   3: diagonal means (col - row). Diagonal profiles (length 2w - 1) keep their centre w entries.
// Means rather than sums keep the profile of a flat window flat in every direction.
std::array<Profile, 4> window_projections(const Plane& img, Eigen::Index y0, Eigen::Index x0, int w) {
  const auto win = img.block(y0, x0, w, w);
  std::array<Profile, 4> out;
  out[1].resize(w);
  out[3].resize(w);
  out[0] = win.colwise().mean().transpose().matrix();
  out[2] = win.rowwise().mean().matrix();

  Eigen::VectorXd anti = Eigen::VectorXd::Zero(2 * w - 1);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(2 * w - 1);
  for (int r = 0; r < w; ++r) {
    for (int c = 0; c < w; ++c) {
      anti[r + c] += win(r, c);
      diag[c - r + w - 1] += win(r, c);
    }
  }
  const int offset = (w - 1) / 2;
  for (int t = 0; t < w; ++t) {
    const double len = w - std::abs(offset + t - (w - 1));
    out[1][t] = anti[offset + t] / len;
    out[3][t] = diag[offset + t] / len;
  }
  return out;
}

void check_size(const Plane& channel, int w, const char* name) {
  if (channel.rows() < w || channel.cols() < w) {
    throw Error(ErrorKind::ImageTooSmall,
                std::string(name) + " needs at least " + std::to_string(w) + "x" + std::to_string(w));
  }
}

template <typename Visit>
void for_each_window(const Plane& channel, int w, int stride, Visit&& visit) {
  for (Eigen::Index y = 0; y + w <= channel.rows(); y += stride)
    for (Eigen::Index x = 0; x + w <= channel.cols(); x += stride) visit(window_projections(channel, y, x, w));
}

}  // namespace

Eigen::VectorXd elp_descriptor(const Plane& channel, const DescriptorParams& params) {
  params.validate();
  const int w = params.elp_window;
  check_size(channel, w, "ELP");
  const Eigen::Index bins = Eigen::Index(1) << (w - 1);
  Eigen::VectorXd hist = Eigen::VectorXd::Zero(4 * bins);

  for_each_window(channel, w, params.elp_stride, [&](const std::array<Profile, 4>& proj) {
    for (int d = 0; d < 4; ++d) {
      unsigned code = 0;
      for (int k = 0; k + 1 < w; ++k) {
        code = (code << 1) | (proj[std::size_t(d)][k + 1] - proj[std::size_t(d)][k] >= 0.0 ? 1u : 0u);
      }
      hist[d * bins + code] += 1.0;
    }
  });

  for (int d = 0; d < 4; ++d) {
    auto block = hist.segment(d * bins, bins);
    const double total = block.sum();
    if (total > 0.0) block /= total;
  }
  return hist;
}

Eigen::VectorXd felp_descriptor(const Plane& channel, const DescriptorParams& params) {
  params.validate();
  const int w = params.elp_window;
  check_size(channel, w, "F-ELP");
  const int freqs = w - 1;

  // DFT twiddles for frequency bins 1..w-1.
  Eigen::MatrixXcd dft(freqs, w);
  for (int f = 1; f <= freqs; ++f)
    for (int n = 0; n < w; ++n) dft(f - 1, n) = std::polar(1.0, -2.0 * M_PI * f * n / w);

  Eigen::VectorXd acc = Eigen::VectorXd::Zero(4 * freqs);
  long windows = 0;
  for_each_window(channel, w, params.elp_stride, [&](const std::array<Profile, 4>& proj) {
    for (int d = 0; d < 4; ++d) {
      const Profile& profile = proj[std::size_t(d)];
      Eigen::VectorXd mag = (dft * profile.cast<std::complex<double>>()).cwiseAbs();
      // Rounding floor: a flat profile has no energy outside DC.
      const double floor = 1e-12 * profile.cwiseAbs().sum();
      mag = (mag.array() <= floor).select(0.0, mag);
      acc.segment(d * freqs, freqs) += mag;
    }
    ++windows;
  });

  acc /= double(windows);
  const double norm = acc.norm();
  if (norm > 0.0) acc /= norm;
  return acc;
}

}  // namespace histo
