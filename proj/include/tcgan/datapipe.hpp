#ifndef TCGAN_DATAPIPE_HPP
#define TCGAN_DATAPIPE_HPP

#include "tcgan/image.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace tcgan {

namespace fs = std::filesystem;

/// Sorted *.png / *.jpg / *.jpeg files directly inside `dir`.
std::vector<fs::path> list_images(const fs::path& dir);

/// Unpaired shadow (X) / non-shadow (Y) image lists. Layout on disk:
/// root/shadow, root/nonshadow and, for paired benchmarks, root/mask.
struct UnpairedDataset {
  std::vector<fs::path> shadow_paths;
  std::vector<fs::path> nonshadow_paths;
  std::vector<fs::path> mask_paths;  // empty unless root/mask exists
  std::uint64_t seed = 0;

  /// Throws DataError when either list is empty or a path appears in both.
  static UnpairedDataset open(const fs::path& root, std::uint64_t seed = 0);
  void validate() const;
};

struct AugmentConfig {
  int pre_crop = 72;
  int crop = 64;
  bool flip = false;  // horizontal flip with probability 1/2
};

/// Bicubic resize to pre_crop x pre_crop, then a uniform random crop x crop window.
ImageTensor augment(const ImageTensor& image, const AugmentConfig& cfg, std::mt19937_64& rng);

/// One shadow input plus two real non-shadow samples from distinct indices.
struct TrainBatch {
  ImageTensor x;
  ImageTensor y1;
  ImageTensor y2;
  std::size_t x_index = 0;
  std::size_t y1_index = 0;
  std::size_t y2_index = 0;
};

/// Draws the three indices (x uniform; y1, y2 uniform without replacement).
struct BatchIndices {
  std::size_t x = 0;
  std::size_t y1 = 0;
  std::size_t y2 = 0;
};
BatchIndices draw_indices(std::size_t n_shadow, std::size_t n_nonshadow, std::mt19937_64& rng);

/// Throws DataError when fewer than two non-shadow images are available.
TrainBatch next_batch(const UnpairedDataset& ds, const AugmentConfig& cfg, std::mt19937_64& rng);

struct SynthSpec {
  int n_shadow = 200;
  int n_nonshadow = 200;
  int image_size = 64;
  double attenuation_lo = 0.4;
  double attenuation_hi = 0.7;
  double coverage_lo = 0.1;  // target shadow area as a fraction of the image
  double coverage_hi = 0.35;
  double edge_blur_sigma = 1.5;
  int max_shapes = 3;  // textured objects per base scene
  std::uint64_t seed = 0;

  void validate() const;
};

/// RGB scene in linear [0, 1], planar {3, H*W} (row = channel).
using LinearImage = Eigen::Array<double, 3, Eigen::Dynamic, Eigen::RowMajor>;

LinearImage render_base_scene(int size, int max_shapes, std::mt19937_64& rng);
/// Soft shadow mask in [0, 1], one row of H*W values.
Eigen::ArrayXd render_shadow_mask(const SynthSpec& spec, std::mt19937_64& rng);
/// base * (1 - (1 - a) * m), per pixel and channel.
LinearImage apply_shadow(const LinearImage& base, const Eigen::ArrayXd& mask, double attenuation);
/// Quantises a linear image to the 8-bit grid and normalises to [-1, 1].
ImageTensor to_image(const LinearImage& img, int size);

struct SynthTriplet {
  ImageTensor shadow;
  ImageTensor ground_truth;
  MaskTensor mask;           // binary: 1 wherever the shadow changes the image
  Eigen::ArrayXd soft_mask;  // the blurred mask actually applied
  double attenuation = 1.0;
};

struct SynthCorpus {
  std::vector<SynthTriplet> shadow;
  std::vector<ImageTensor> nonshadow;
};

/// Fully determined by spec.seed. Non-shadow scenes are independent draws,
/// never the base of any shadow image.
SynthCorpus synthesize_corpus(const SynthSpec& spec);

/// Writes shadow/, nonshadow/, gt/, mask/ and manifest.jsonl under `root`.
void write_corpus(const SynthCorpus& corpus, const fs::path& root);

}  // namespace tcgan

#endif  // TCGAN_DATAPIPE_HPP
