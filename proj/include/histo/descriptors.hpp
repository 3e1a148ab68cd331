#ifndef HISTO_DESCRIPTORS_HPP
#define HISTO_DESCRIPTORS_HPP

#include "histo/image.hpp"
#include "histo/stain.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>

namespace histo {

enum class DescriptorKind { ELP, GIST, FELP, LBP };

/// Which colour channels a descriptor is computed on: greyscale (1), H&E stains (2) or RGB (3).
enum class ChannelMode { Greyscale, HE, RGB };

inline constexpr DescriptorKind kAllDescriptorKinds[] = {DescriptorKind::ELP, DescriptorKind::GIST,
                                                         DescriptorKind::FELP, DescriptorKind::LBP};
inline constexpr ChannelMode kAllChannelModes[] = {ChannelMode::Greyscale, ChannelMode::HE,
                                                   ChannelMode::RGB};

int channel_count(ChannelMode mode);

std::string_view to_token(DescriptorKind kind);  // elp, gist, felp, lbp
std::string_view to_token(ChannelMode mode);     // grey, he, rgb
std::optional<DescriptorKind> parse_descriptor_kind(std::string_view token);
std::optional<ChannelMode> parse_channel_mode(std::string_view token);

struct DescriptorParams {
  int elp_window = 9;
  int elp_stride = 3;
  double lbp_radius = 2.0;
  int lbp_neighbors = 16;
  int gist_grid = 4;
  int gist_scales = 4;
  int gist_orientations = 8;

  int gist_filters() const { return gist_scales * gist_orientations; }
  void validate() const;
};

/// Feature count for one channel; the defaults give ELP 1024, GIST 512, F-ELP 32, LBP 18.
Eigen::Index per_channel_length(DescriptorKind kind, const DescriptorParams& params = {});
Eigen::Index descriptor_length(DescriptorKind kind, ChannelMode mode,
                               const DescriptorParams& params = {});

struct Descriptor {
  DescriptorKind kind = DescriptorKind::LBP;
  ChannelMode mode = ChannelMode::Greyscale;
  Eigen::VectorXd values;
};

/// Rotation-invariant uniform LBP histogram with P + 2 bins, L1-normalised.
Eigen::VectorXd lbp_descriptor(const Plane& channel, const DescriptorParams& params = {});

/// Gabor-energy GIST: filters x grid cells, filter-major.
Eigen::VectorXd gist_descriptor(const Plane& channel, const DescriptorParams& params = {});

/// Encoded local projections: four 2^(w-1)-bin code histograms, each L1-normalised.
Eigen::VectorXd elp_descriptor(const Plane& channel, const DescriptorParams& params = {});

/// Window-averaged projection spectra (frequency bins 1..w-1 per direction), L2-normalised.
Eigen::VectorXd felp_descriptor(const Plane& channel, const DescriptorParams& params = {});

Eigen::VectorXd channel_descriptor(DescriptorKind kind, const Plane& channel,
                                   const DescriptorParams& params = {});

/// The image channels a descriptor of `mode` is computed on. 3-channel input is required,
/// except that HE also accepts a precomputed 2-channel stain image and Greyscale a 1-channel image.
RasterImage mode_channels(const RasterImage& img, ChannelMode mode,
                          const StainSeparationParams& stain_params = {});

/// Per-channel descriptors concatenated in channel order.
Descriptor extract(const RasterImage& img, DescriptorKind kind, ChannelMode mode,
                   const DescriptorParams& params = {}, const StainSeparationParams& stain_params = {});

/// Same as extract, for an image already reduced to the mode's channels.
Descriptor describe_channels(const RasterImage& channels, DescriptorKind kind, ChannelMode mode,
                             const DescriptorParams& params = {});

}  // namespace histo

#endif  // HISTO_DESCRIPTORS_HPP
