#include "histo/synthetic.hpp"

#include "histo/error.hpp"
#include "histo/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

namespace fs = std::filesystem;

namespace histo::synthetic {
namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (double(rng() >> 11) * 0x1.0p-53);
}

Eigen::Vector3d tilt(const Eigen::Vector3d& v, double max_degrees, std::mt19937_64& rng) {
  for (;;) {
    Eigen::Vector3d axis(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
    axis = (axis - axis.dot(v) * v);
    if (axis.norm() < 1e-6) continue;
    axis.normalize();
    const double angle = uniform(rng, 0.0, max_degrees) * M_PI / 180.0;
    const Eigen::Vector3d out = std::cos(angle) * v + std::sin(angle) * axis;
    if ((out.array() >= 0.0).all()) return out.normalized();
  }
}

void add_blob(Plane& field, double cx, double cy, double sigma, double amplitude) {
  const int r = int(std::ceil(3.0 * sigma));
  for (int y = std::max(0, int(cy) - r); y <= std::min(int(field.rows()) - 1, int(cy) + r); ++y) {
    for (int x = std::max(0, int(cx) - r); x <= std::min(int(field.cols()) - 1, int(cx) + r); ++x) {
      const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      field(y, x) += amplitude * std::exp(-d2 / (2.0 * sigma * sigma));
    }
  }
}

}  // namespace

StainBasis reference_basis() {
  return {Eigen::Vector3d(0.65, 0.70, 0.29).normalized(), Eigen::Vector3d(0.07, 0.99, 0.11).normalized()};
}

StainBasis random_basis(std::mt19937_64& rng, double max_tilt_degrees) {
  const StainBasis ref = reference_basis();
  for (;;) {
    StainBasis b{tilt(ref.h_vector, max_tilt_degrees, rng), tilt(ref.e_vector, max_tilt_degrees, rng)};
    if (angle_degrees(b.h_vector, b.e_vector) >= 20.0) return b;
  }
}

RasterImage render(const StainBasis& basis, const Plane& h_conc, const Plane& e_conc) {
  const int h = int(h_conc.rows()), w = int(h_conc.cols());
  RasterImage img(w, h, 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Eigen::Vector3d od = h_conc(y, x) * basis.h_vector + e_conc(y, x) * basis.e_vector;
      for (int c = 0; c < 3; ++c) {
        img.at(x, y, c) = (kDefaultReferenceWhite + 1.0) * std::pow(10.0, -od[c]) - 1.0;
      }
    }
  }
  return img;
}

Phantom tissue_phantom(int width, int height, const StainBasis& basis, std::mt19937_64& rng) {
  Plane hc = Plane::Zero(height, width);
  Plane ec = Plane::Zero(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double u = uniform(rng, 0.0, 1.0);
      if (u < 0.3) {  // nucleus
        hc(y, x) = uniform(rng, 0.3, 1.2);
        ec(y, x) = uniform(rng, 0.0, 0.03);
      } else if (u < 0.7) {  // stroma
        hc(y, x) = uniform(rng, 0.0, 0.03);
        ec(y, x) = uniform(rng, 0.2, 1.0);
      } else if (u < 0.95) {  // overlap
        hc(y, x) = uniform(rng, 0.1, 0.8);
        ec(y, x) = uniform(rng, 0.1, 0.8);
      }  // else background: no stain
    }
  }
  return {render(basis, hc, ec), hc, ec, basis};
}

Phantom textured_patch(int size, int texture_class, const StainBasis& basis, std::mt19937_64& rng) {
  Plane hc = Plane::Zero(size, size);
  Plane ec = Plane::Zero(size, size);
  if (texture_class == 0) {
    const int blobs = 10 + int(rng() % 4);
    for (int i = 0; i < blobs; ++i) {
      add_blob(hc, uniform(rng, 0, size), uniform(rng, 0, size), uniform(rng, 4.0, 6.0), uniform(rng, 0.5, 0.8));
    }
    ec.setConstant(0.35);
    for (int i = 0; i < 6; ++i) {
      add_blob(ec, uniform(rng, 0, size), uniform(rng, 0, size), uniform(rng, 10.0, 14.0), uniform(rng, 0.1, 0.25));
    }
  } else {
    const int blobs = size * size / 30 + int(rng() % 20);
    for (int i = 0; i < blobs; ++i) {
      add_blob(hc, uniform(rng, 0, size), uniform(rng, 0, size), uniform(rng, 0.5, 0.9), uniform(rng, 0.6, 1.0));
    }
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) ec(y, x) = uniform(rng, 0.1, 0.9);
  }
  hc = hc.min(1.5);
  return {render(basis, hc, ec), hc, ec, basis};
}

int write_fixture(const std::string& root, const FixtureSpec& spec) {
  if (spec.patients < 1 || spec.patches_per_class < 1 || spec.patch_size < 16) {
    throw Error(ErrorKind::InvalidArgument, "fixture needs >= 1 patient, >= 1 patch per class, size >= 16");
  }
  std::mt19937_64 rng(spec.seed);
  int written = 0;
  for (int p = 0; p < spec.patients; ++p) {
    const std::string patient = std::to_string(90001 + p);
    const StainBasis basis = random_basis(rng);
    const int n = 2 * spec.patches_per_class;

    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) labels[std::size_t(i)] = i < spec.patches_per_class ? 0 : 1;
    std::vector<int> textures = labels;
    if (spec.permuted_labels) {
      for (std::size_t i = labels.size(); i > 1; --i) std::swap(labels[i - 1], labels[rng() % i]);
    }

    for (int i = 0; i < n; ++i) {
      const int label = labels[std::size_t(i)];
      const auto patch = textured_patch(spec.patch_size, textures[std::size_t(i)], basis, rng);
      const fs::path dir = fs::path(root) / patient / std::to_string(label);
      fs::create_directories(dir);
      const std::string name = patient + "_idx5_x" + std::to_string(i * spec.patch_size) + "_y0_class" +
                               std::to_string(label) + ".png";
      save_png(patch.image, (dir / name).string());
      ++written;
    }
  }
  return written;
}

}  // namespace histo::synthetic
