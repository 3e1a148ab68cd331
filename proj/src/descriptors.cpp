#include "histo/descriptors.hpp"

#include "histo/error.hpp"

namespace histo {

int channel_count(ChannelMode mode) {
  switch (mode) {
    case ChannelMode::Greyscale: return 1;
    case ChannelMode::HE: return 2;
    case ChannelMode::RGB: return 3;
  }
  return 0;
}

std::string_view to_token(DescriptorKind kind) {
  switch (kind) {
    case DescriptorKind::ELP: return "elp";
    case DescriptorKind::GIST: return "gist";
    case DescriptorKind::FELP: return "felp";
    case DescriptorKind::LBP: return "lbp";
  }
  return "";
}

std::string_view to_token(ChannelMode mode) {
  switch (mode) {
    case ChannelMode::Greyscale: return "grey";
    case ChannelMode::HE: return "he";
    case ChannelMode::RGB: return "rgb";
  }
  return "";
}

std::optional<DescriptorKind> parse_descriptor_kind(std::string_view token) {
  for (auto k : kAllDescriptorKinds)
    if (to_token(k) == token) return k;
  if (token == "f-elp") return DescriptorKind::FELP;
  return std::nullopt;
}

std::optional<ChannelMode> parse_channel_mode(std::string_view token) {
  for (auto m : kAllChannelModes)
    if (to_token(m) == token) return m;
  if (token == "greyscale" || token == "gray") return ChannelMode::Greyscale;
  return std::nullopt;
}

void DescriptorParams::validate() const {
  if (elp_window < 3 || elp_window % 2 == 0 || elp_window > 17) {
    throw Error(ErrorKind::InvalidArgument, "elp_window must be odd and in [3, 17]");
  }
  if (elp_stride < 1) throw Error(ErrorKind::InvalidArgument, "elp_stride must be >= 1");
  if (!(lbp_radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "lbp_radius must be positive");
  if (lbp_neighbors < 4 || lbp_neighbors > 32) {
    throw Error(ErrorKind::InvalidArgument, "lbp_neighbors must be in [4, 32]");
  }
  if (gist_grid < 1) throw Error(ErrorKind::InvalidArgument, "gist_grid must be >= 1");
  if (gist_scales < 1 || gist_orientations < 1) {
    throw Error(ErrorKind::InvalidArgument, "gist filter bank must be non-empty");
  }
}

Eigen::Index per_channel_length(DescriptorKind kind, const DescriptorParams& params) {
  switch (kind) {
    case DescriptorKind::ELP: return 4 * (Eigen::Index(1) << (params.elp_window - 1));
    case DescriptorKind::GIST:
      return Eigen::Index(params.gist_filters()) * params.gist_grid * params.gist_grid;
    case DescriptorKind::FELP: return 4 * Eigen::Index(params.elp_window - 1);
    case DescriptorKind::LBP: return params.lbp_neighbors + 2;
  }
  return 0;
}

Eigen::Index descriptor_length(DescriptorKind kind, ChannelMode mode, const DescriptorParams& params) {
  return per_channel_length(kind, params) * channel_count(mode);
}

Eigen::VectorXd channel_descriptor(DescriptorKind kind, const Plane& channel,
                                   const DescriptorParams& params) {
  switch (kind) {
    case DescriptorKind::ELP: return elp_descriptor(channel, params);
    case DescriptorKind::GIST: return gist_descriptor(channel, params);
    case DescriptorKind::FELP: return felp_descriptor(channel, params);
    case DescriptorKind::LBP: return lbp_descriptor(channel, params);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown descriptor kind");
}

RasterImage mode_channels(const RasterImage& img, ChannelMode mode,
                          const StainSeparationParams& stain_params) {
  switch (mode) {
    case ChannelMode::Greyscale:
      return img.channels() == 1 ? img : to_greyscale(img);
    case ChannelMode::HE:
      return img.channels() == 2 ? img : separate_image(img, stain_params);
    case ChannelMode::RGB:
      if (img.channels() != 3) {
        throw Error(ErrorKind::Channel, "RGB mode needs a 3-channel image");
      }
      return img;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown channel mode");
}

Descriptor describe_channels(const RasterImage& channels, DescriptorKind kind, ChannelMode mode,
                             const DescriptorParams& params) {
  params.validate();
  const int n = channel_count(mode);
  if (channels.channels() != n) {
    throw Error(ErrorKind::Channel, std::string(to_token(mode)) + " mode needs " + std::to_string(n) +
                                        " channels, got " + std::to_string(channels.channels()));
  }
  const Eigen::Index block = per_channel_length(kind, params);
  Descriptor d{kind, mode, Eigen::VectorXd(block * n)};
  for (int c = 0; c < n; ++c) {
    d.values.segment(block * c, block) = channel_descriptor(kind, channels.channel(c), params);
  }
  return d;
}

Descriptor extract(const RasterImage& img, DescriptorKind kind, ChannelMode mode,
                   const DescriptorParams& params, const StainSeparationParams& stain_params) {
  return describe_channels(mode_channels(img, mode, stain_params), kind, mode, params);
}

}  // namespace histo
