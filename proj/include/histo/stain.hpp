#ifndef HISTO_STAIN_HPP
#define HISTO_STAIN_HPP

#include "histo/image.hpp"

#include <Eigen/Dense>

#include <vector>

namespace histo {

/// Unit optical-density directions of the hematoxylin and eosin stains.
struct StainBasis {
  Eigen::Vector3d h_vector;
  Eigen::Vector3d e_vector;

  /// Checks unit length, non-negativity and a minimum separation of one degree.
  bool valid() const;
};

/// Hematoxylin reference direction used to label the two wedge extremes.
Eigen::Vector3d reference_hematoxylin();

struct StainSeparationParams {
  double od_threshold = 0.15;    ///< pixels with ||od|| <= this are treated as background
  double angle_percentile = 1.0; ///< robust wedge extreme, in percent
  int min_tissue_pixels = 100;

  void validate() const;
};

struct StainConcentrationImage {
  int width = 0;
  int height = 0;
  Eigen::ArrayXd h_channel;
  Eigen::ArrayXd e_channel;
};

/// Per-channel rescale divisors (99th-percentile concentrations).
struct ChannelScale {
  double h = 0.0;
  double e = 0.0;
};

/// Wedge-finding estimate of the stain basis from a cloud of OD vectors (one per column).
StainBasis estimate_stain_basis(const Eigen::Ref<const Eigen::Matrix3Xd>& od_pixels,
                                const StainSeparationParams& params = {});

/// Least-squares deconvolution onto the basis; concentrations below 1e-9 (including all
/// negative ones) are set to zero.
StainConcentrationImage separate_stains(const OpticalDensityImage& od_img, const StainBasis& basis);

/// Concentrations for a single OD vector, before clamping.
Eigen::Vector2d unmix(const Eigen::Vector3d& od, const StainBasis& basis);

ChannelScale channel_scale(const std::vector<const StainConcentrationImage*>& images);

/// Maps each concentration channel to [0, 255] by its own 99th percentile.
RasterImage concentrations_to_channels(const StainConcentrationImage& conc);
RasterImage concentrations_to_channels(const StainConcentrationImage& conc, const ChannelScale& scale);

struct GroupSeparation {
  StainBasis basis;
  ChannelScale scale;
  std::vector<RasterImage> images;  ///< 2-channel (H, E) image per input patch
};

/// Estimates one basis from the pooled pixels of all patches and separates each patch with it.
GroupSeparation separate_group_detailed(const std::vector<RasterImage>& patches,
                                        const StainSeparationParams& params = {});

std::vector<RasterImage> separate_group(const std::vector<RasterImage>& patches,
                                        const StainSeparationParams& params = {});

/// Single-image pipeline; equivalent to a group of one.
RasterImage separate_image(const RasterImage& img, const StainSeparationParams& params = {});

}  // namespace histo

#endif  // HISTO_STAIN_HPP
