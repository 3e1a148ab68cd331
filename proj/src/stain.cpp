#include "histo/stain.hpp"

#include "histo/error.hpp"
#include "histo/numeric.hpp"

#include <cmath>

namespace histo {
namespace {

constexpr double kMinSeparationDegrees = 1.0;
constexpr double kRescalePercentile = 99.0;
// Concentrations below this are rounding residue of the unmixing, not stain.
constexpr double kConcentrationFloor = 1e-9;

}  // namespace

Eigen::Vector3d reference_hematoxylin() { return Eigen::Vector3d(0.650, 0.704, 0.286).normalized(); }

bool StainBasis::valid() const {
  auto unit_nonneg = [](const Eigen::Vector3d& v) {
    return std::abs(v.norm() - 1.0) <= 1e-9 && (v.array() >= 0.0).all();
  };
  return unit_nonneg(h_vector) && unit_nonneg(e_vector) &&
         angle_degrees(h_vector, e_vector) >= kMinSeparationDegrees;
}

void StainSeparationParams::validate() const {
  if (!(od_threshold > 0.0 && od_threshold < 3.0)) {
    throw Error(ErrorKind::InvalidArgument, "od_threshold must lie in (0, 3)");
  }
  if (!(angle_percentile > 0.0 && angle_percentile < 50.0)) {
    throw Error(ErrorKind::InvalidArgument, "angle_percentile must lie in (0, 50)");
  }
  if (min_tissue_pixels < 1) throw Error(ErrorKind::InvalidArgument, "min_tissue_pixels must be >= 1");
}

StainBasis estimate_stain_basis(const Eigen::Ref<const Eigen::Matrix3Xd>& od_pixels,
                                const StainSeparationParams& params) {
  params.validate();

  const Eigen::ArrayXd norms = od_pixels.colwise().norm().transpose().array();
  const Eigen::Index n_tissue = (norms > params.od_threshold).count();
  if (n_tissue < params.min_tissue_pixels) {
    throw Error(ErrorKind::InsufficientTissue,
                std::to_string(n_tissue) + " pixels above OD threshold, need " +
                    std::to_string(params.min_tissue_pixels));
  }
  Eigen::Matrix3Xd tissue(3, n_tissue);
  for (Eigen::Index i = 0, j = 0; i < od_pixels.cols(); ++i) {
    if (norms[i] > params.od_threshold) tissue.col(j++) = od_pixels.col(i);
  }

  const Eigen::Vector3d mean = tissue.rowwise().mean();
  const Eigen::Matrix3Xd centered = tissue.colwise() - mean;
  const Eigen::Matrix3d cov = centered * centered.transpose() / double(n_tissue);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  // Eigenvalues ascend; the top-2 plane is spanned by columns 1 and 2.
  const Eigen::Vector3d normal = eig.eigenvectors().col(0).normalized();

  // In-plane frame anchored on the projected mean keeps every angle well inside (-pi/2, pi/2).
  Eigen::Vector3d u = mean - mean.dot(normal) * normal;
  if (u.norm() < 1e-12) throw Error(ErrorKind::DegenerateWedge, "mean OD is normal to the stain plane");
  u.normalize();
  const Eigen::Vector3d w = normal.cross(u).normalized();

  Eigen::ArrayXd angles(n_tissue);
  for (Eigen::Index i = 0; i < n_tissue; ++i) {
    angles[i] = std::atan2(tissue.col(i).dot(w), tissue.col(i).dot(u));
  }
  const double lo = percentile(angles, params.angle_percentile);
  const double hi = percentile(angles, 100.0 - params.angle_percentile);

  auto extreme = [&](double phi) -> Eigen::Vector3d {
    Eigen::Vector3d v = std::cos(phi) * u + std::sin(phi) * w;
    v = v.cwiseMax(0.0);
    const double norm = v.norm();
    if (norm < 1e-12) throw Error(ErrorKind::DegenerateWedge, "wedge extreme leaves the positive octant");
    return v / norm;
  };
  const Eigen::Vector3d a = extreme(lo);
  const Eigen::Vector3d b = extreme(hi);
  const double separation = angle_degrees(a, b);
  if (separation < kMinSeparationDegrees) {
    throw Error(ErrorKind::DegenerateWedge,
                "wedge extremes only " + std::to_string(separation) + " degrees apart");
  }

  const Eigen::Vector3d ref = reference_hematoxylin();
  if (angle_degrees(a, ref) <= angle_degrees(b, ref)) return {a, b};
  return {b, a};
}

namespace {

Eigen::Matrix<double, 2, 3> unmixing_matrix(const StainBasis& basis) {
  Eigen::Matrix<double, 3, 2> m;
  m.col(0) = basis.h_vector;
  m.col(1) = basis.e_vector;
  return (m.transpose() * m).inverse() * m.transpose();
}

}  // namespace

Eigen::Vector2d unmix(const Eigen::Vector3d& od, const StainBasis& basis) {
  return unmixing_matrix(basis) * od;
}

StainConcentrationImage separate_stains(const OpticalDensityImage& od_img, const StainBasis& basis) {
  if (!basis.valid()) throw Error(ErrorKind::InvalidArgument, "invalid stain basis");
  Eigen::Matrix2Xd c = unmixing_matrix(basis) * od_img.od;
  c = (c.array() < kConcentrationFloor).select(0.0, c);
  StainConcentrationImage out;
  out.width = od_img.width;
  out.height = od_img.height;
  out.h_channel = c.row(0).transpose().array();
  out.e_channel = c.row(1).transpose().array();
  return out;
}

namespace {

double scale_for(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  const double p = percentile(values, kRescalePercentile);
  if (p > 0.0) return p;
  // Sparse channels: fewer than 1% non-zero pixels.
  return *std::max_element(values.begin(), values.end());
}

Plane rescale(const Eigen::ArrayXd& values, double scale, int width, int height) {
  Eigen::ArrayXd scaled = Eigen::ArrayXd::Zero(values.size());
  if (scale > 0.0) scaled = (values / scale * 255.0).min(255.0);
  return Eigen::Map<const Plane>(scaled.data(), height, width);
}

}  // namespace

ChannelScale channel_scale(const std::vector<const StainConcentrationImage*>& images) {
  std::vector<double> h, e;
  for (const auto* img : images) {
    h.insert(h.end(), img->h_channel.begin(), img->h_channel.end());
    e.insert(e.end(), img->e_channel.begin(), img->e_channel.end());
  }
  return {scale_for(h), scale_for(e)};
}

RasterImage concentrations_to_channels(const StainConcentrationImage& conc, const ChannelScale& scale) {
  return RasterImage::from_planes({rescale(conc.h_channel, scale.h, conc.width, conc.height),
                                   rescale(conc.e_channel, scale.e, conc.width, conc.height)});
}

RasterImage concentrations_to_channels(const StainConcentrationImage& conc) {
  return concentrations_to_channels(conc, channel_scale({&conc}));
}

GroupSeparation separate_group_detailed(const std::vector<RasterImage>& patches,
                                        const StainSeparationParams& params) {
  if (patches.empty()) throw Error(ErrorKind::EmptyInput, "no patches to separate");
  std::vector<OpticalDensityImage> ods;
  ods.reserve(patches.size());
  Eigen::Index total = 0;
  for (const auto& p : patches) {
    ods.push_back(to_optical_density(p));
    total += ods.back().od.cols();
  }
  Eigen::Matrix3Xd pooled(3, total);
  Eigen::Index offset = 0;
  for (const auto& od : ods) {
    pooled.middleCols(offset, od.od.cols()) = od.od;
    offset += od.od.cols();
  }

  GroupSeparation out;
  out.basis = estimate_stain_basis(pooled, params);

  std::vector<StainConcentrationImage> concs;
  concs.reserve(ods.size());
  for (const auto& od : ods) concs.push_back(separate_stains(od, out.basis));
  std::vector<const StainConcentrationImage*> refs;
  for (const auto& c : concs) refs.push_back(&c);
  out.scale = channel_scale(refs);

  out.images.reserve(concs.size());
  for (const auto& c : concs) out.images.push_back(concentrations_to_channels(c, out.scale));
  return out;
}

std::vector<RasterImage> separate_group(const std::vector<RasterImage>& patches,
                                        const StainSeparationParams& params) {
  return separate_group_detailed(patches, params).images;
}

RasterImage separate_image(const RasterImage& img, const StainSeparationParams& params) {
  return std::move(separate_group_detailed({img}, params).images.front());
}

}  // namespace histo
