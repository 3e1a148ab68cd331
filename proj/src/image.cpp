#include "histo/image.hpp"

#include "histo/error.hpp"

#include <algorithm>
#include <cmath>

namespace histo {

RasterImage::RasterImage(int width, int height, int channels)
    : RasterImage(width, height, channels,
                  Eigen::ArrayXd::Zero(Eigen::Index(std::max(width, 0)) * std::max(height, 0) *
                                      std::max(channels, 0))) {}

RasterImage::RasterImage(int width, int height, int channels, Eigen::ArrayXd data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  if (width < 1 || height < 1) {
    throw Error(ErrorKind::InvalidArgument, "image dimensions must be positive");
  }
  if (channels < 1 || channels > 3) {
    throw Error(ErrorKind::Channel, "channel count must be 1, 2 or 3, got " + std::to_string(channels));
  }
  if (data_.size() != Eigen::Index(width) * height * channels) {
    throw Error(ErrorKind::InvalidArgument, "pixel buffer length does not match dimensions");
  }
}

RasterImage RasterImage::from_planes(const std::vector<Plane>& planes) {
  if (planes.empty()) throw Error(ErrorKind::Channel, "no planes");
  const auto rows = planes.front().rows();
  const auto cols = planes.front().cols();
  RasterImage img(int(cols), int(rows), int(planes.size()));
  for (std::size_t c = 0; c < planes.size(); ++c) {
    if (planes[c].rows() != rows || planes[c].cols() != cols) {
      throw Error(ErrorKind::InvalidArgument, "plane sizes differ");
    }
    img.set_channel(int(c), planes[c]);
  }
  return img;
}

Plane RasterImage::channel(int c) const {
  if (c < 0 || c >= channels_) throw Error(ErrorKind::Channel, "channel index out of range");
  Plane p(height_, width_);
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x) p(y, x) = at(x, y, c);
  return p;
}

void RasterImage::set_channel(int c, const Plane& plane) {
  if (c < 0 || c >= channels_) throw Error(ErrorKind::Channel, "channel index out of range");
  if (plane.rows() != height_ || plane.cols() != width_) {
    throw Error(ErrorKind::InvalidArgument, "plane size does not match image");
  }
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x) at(x, y, c) = plane(y, x);
}

RasterImage to_greyscale(const RasterImage& img) {
  if (img.channels() != 3) {
    throw Error(ErrorKind::Channel, "greyscale conversion needs 3 channels, got " +
                                        std::to_string(img.channels()));
  }
  const Eigen::Index n = img.pixel_count();
  Eigen::Map<const Eigen::Array<double, 3, Eigen::Dynamic>> rgb(img.data().data(), 3, n);
  Eigen::ArrayXd grey = (0.299 * rgb.row(0) + 0.587 * rgb.row(1) + 0.114 * rgb.row(2)).transpose();
  return RasterImage(img.width(), img.height(), 1, std::move(grey));
}

OpticalDensityImage to_optical_density(const RasterImage& img, double reference_white) {
  if (img.channels() != 3) {
    throw Error(ErrorKind::Channel, "optical density needs 3 channels, got " +
                                        std::to_string(img.channels()));
  }
  const Eigen::Index n = img.pixel_count();
  Eigen::Map<const Eigen::Array<double, 3, Eigen::Dynamic>> rgb(img.data().data(), 3, n);
  OpticalDensityImage out{img.width(), img.height(), Eigen::Matrix3Xd(3, n)};
  out.od = (-((rgb + 1.0) / (reference_white + 1.0)).log10()).max(0.0).matrix();
  return out;
}

RasterImage from_optical_density(const OpticalDensityImage& od, double reference_white) {
  const Eigen::Index n = od.od.cols();
  Eigen::Array<double, 3, Eigen::Dynamic> rgb =
      (reference_white + 1.0) * Eigen::pow(10.0, -od.od.array()) - 1.0;
  Eigen::ArrayXd data = Eigen::Map<const Eigen::ArrayXd>(rgb.data(), 3 * n);
  return RasterImage(od.width, od.height, 3, std::move(data));
}

}  // namespace histo
