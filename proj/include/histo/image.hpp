#ifndef HISTO_IMAGE_HPP
#define HISTO_IMAGE_HPP

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace histo {

/// One image channel, indexed (row, col).
using Plane = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Interleaved, row-major pixel container. Intensities are real-valued;
/// images loaded from 8-bit files carry values in [0, 255].
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, int channels);
  RasterImage(int width, int height, int channels, Eigen::ArrayXd data);

  /// Stacks equally sized planes as channels.
  static RasterImage from_planes(const std::vector<Plane>& planes);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  Eigen::Index pixel_count() const { return Eigen::Index(width_) * height_; }

  double& at(int x, int y, int c) { return data_[index(x, y, c)]; }
  double at(int x, int y, int c) const { return data_[index(x, y, c)]; }

  const Eigen::ArrayXd& data() const { return data_; }
  Eigen::ArrayXd& data() { return data_; }

  Plane channel(int c) const;
  void set_channel(int c, const Plane& plane);

 private:
  Eigen::Index index(int x, int y, int c) const {
    return (Eigen::Index(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  Eigen::ArrayXd data_;
};

/// Per-pixel optical densities, one column per pixel in row-major pixel order.
struct OpticalDensityImage {
  int width = 0;
  int height = 0;
  Eigen::Matrix3Xd od;
};

inline constexpr double kDefaultReferenceWhite = 255.0;

RasterImage load_image(const std::string& path);

/// Writes 1- or 3-channel images as 8-bit PNG; values are rounded and clamped to [0, 255].
void save_png(const RasterImage& img, const std::string& path);

/// ITU-R BT.601 luma.
RasterImage to_greyscale(const RasterImage& img);

/// od_c = -log10((I_c + 1) / (reference_white + 1)), clamped at 0 for inputs above the reference.
OpticalDensityImage to_optical_density(const RasterImage& img,
                                       double reference_white = kDefaultReferenceWhite);

/// Inverse of to_optical_density: I = (ref + 1) * 10^-od - 1.
RasterImage from_optical_density(const OpticalDensityImage& od,
                                 double reference_white = kDefaultReferenceWhite);

}  // namespace histo

#endif  // HISTO_IMAGE_HPP
