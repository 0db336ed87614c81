#ifndef TCGAN_INFERENCE_HPP
#define TCGAN_INFERENCE_HPP

#include "tcgan/image.hpp"
#include "tcgan/networks.hpp"

#include <filesystem>

namespace tcgan {

struct RemovalResult {
  ImageTensor selected;
  int selected_branch = 1;
  double prob1 = 0.0;
  double prob2 = 0.0;
  ImageTensor y1;
  ImageTensor y2;
};

/// Branch with the higher non-shadow probability; ties go to branch 1.
inline int select_branch(double prob1, double prob2) { return prob1 >= prob2 ? 1 : 2; }

/// Residual predicted by one generator.
ResidualTensor predict_residual(const Generator<float>& g, const ImageTensor& x);

/// Runs both generators, scores both candidates with the classifier and keeps
/// the more probable non-shadow one. Sides of x must be multiples of 8.
RemovalResult remove_shadow(const GeneratorPair& gp, const Msm<float>& msm, const ImageTensor& x);

/// Single-branch variant: clamp(x + g(x)).
ImageTensor remove_shadow_fixed(const Generator<float>& g, const ImageTensor& x);

/// Per-channel min-max heatmaps of the first k channels of a {1, C, h, w}
/// feature map, tiled five per row with a viridis-like colour ramp. A
/// constant channel renders as a uniform mid-gray tile.
ImageTensor feature_grid(const Tensor<float>& features, int k);

struct FeatureDump {
  std::filesystem::path grid1;
  std::filesystem::path grid2;
  std::filesystem::path raw1;
  std::filesystem::path raw2;
};

/// Writes ste{1,2}_grid.png and ste{1,2}_features.npy ({k, h, w} float32)
/// for both encoders.
FeatureDump dump_ste_features(const GeneratorPair& gp, const ImageTensor& x, int k,
                              const std::filesystem::path& out_dir);

/// Minimal NumPy .npy (v1.0, little-endian float32) writer.
void write_npy(const std::filesystem::path& path, const float* data, const std::vector<int>& shape);

}  // namespace tcgan

#endif  // TCGAN_INFERENCE_HPP
