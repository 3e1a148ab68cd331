#ifndef HISTO_SYNTHETIC_HPP
#define HISTO_SYNTHETIC_HPP

#include "histo/image.hpp"
#include "histo/stain.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace histo::synthetic {

/// Published Ruifrok-style H and E optical-density directions, normalised.
StainBasis reference_basis();

/// Reference basis with each vector tilted by up to `max_tilt_degrees` in a random direction,
/// kept non-negative and at least 20 degrees apart.
StainBasis random_basis(std::mt19937_64& rng, double max_tilt_degrees = 8.0);

/// Beer-Lambert forward model: I = (ref + 1) 10^-(c_h h + c_e e) - 1, real-valued.
RasterImage render(const StainBasis& basis, const Plane& h_conc, const Plane& e_conc);

struct Phantom {
  RasterImage image;
  Plane h_conc;
  Plane e_conc;
  StainBasis basis;
};

/// Tissue-like concentration fields: hematoxylin-dominant nuclei on an eosin-dominant stroma,
/// with mixed regions and a little white background.
Phantom tissue_phantom(int width, int height, const StainBasis& basis, std::mt19937_64& rng);

/// Texture class 0: large smooth nuclei; class 1: dense fine-grained nuclei on noisy stroma.
Phantom textured_patch(int size, int texture_class, const StainBasis& basis, std::mt19937_64& rng);

struct FixtureSpec {
  int patients = 4;
  int patches_per_class = 5;  ///< per patient
  int patch_size = 64;
  bool permuted_labels = false;  ///< labels drawn independently of texture (balanced per patient)
  std::uint64_t seed = 7;
};

/// Writes an IDC-layout tree `<patient>/<label>/<patient>_idx5_x<X>_y<Y>_class<label>.png`.
/// Each patient gets its own stain basis. Returns the number of patches written.
int write_fixture(const std::string& root, const FixtureSpec& spec = {});

}  // namespace histo::synthetic

#endif  // HISTO_SYNTHETIC_HPP
