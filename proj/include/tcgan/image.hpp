#ifndef TCGAN_IMAGE_HPP
#define TCGAN_IMAGE_HPP

#include "tcgan/autodiff.hpp"
#include "tcgan/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace tcgan {

/// RGB image, channels-first, values in [-1, 1] (8-bit v maps to v/127.5 - 1).
class ImageTensor {
 public:
  ImageTensor() = default;
  /// Validates shape {1, 3, H, W}, finiteness and range.
  explicit ImageTensor(Tensor<float> t);
  static ImageTensor constant(int height, int width, float value);

  const Tensor<float>& tensor() const { return t_; }
  int height() const { return t_.shape.h; }
  int width() const { return t_.shape.w; }
  bool empty() const { return t_.empty(); }

  template <typename Scalar>
  Var<Scalar> as_var() const {
    return Var<Scalar>::constant(t_.cast<Scalar>());
  }

  friend bool operator==(const ImageTensor& a, const ImageTensor& b) {
    return a.t_.shape == b.t_.shape && (a.t_.data == b.t_.data).all();
  }

 private:
  Tensor<float> t_;
};

/// Signed additive correction with values in [-2, 2].
class ResidualTensor {
 public:
  ResidualTensor() = default;
  explicit ResidualTensor(Tensor<float> t);
  static ResidualTensor constant(int height, int width, float value);

  const Tensor<float>& tensor() const { return t_; }
  int height() const { return t_.shape.h; }
  int width() const { return t_.shape.w; }

  template <typename Scalar>
  Var<Scalar> as_var() const {
    return Var<Scalar>::constant(t_.cast<Scalar>());
  }

 private:
  Tensor<float> t_;
};

/// Single-channel mask in [0, 1]; 1 marks shadow.
class MaskTensor {
 public:
  MaskTensor() = default;
  explicit MaskTensor(Tensor<float> t);

  const Tensor<float>& tensor() const { return t_; }
  int height() const { return t_.shape.h; }
  int width() const { return t_.shape.w; }
  bool is_binary() const;

 private:
  Tensor<float> t_;
};

/// Reads an 8-bit PNG/JPEG (grayscale is expanded to RGB). Throws DataError.
ImageTensor load_image(const std::filesystem::path& path);

/// Writes an 8-bit RGB PNG, rounding half away from zero. Throws DataError.
void save_image(const ImageTensor& image, const std::filesystem::path& path);

/// Reads a mask; pixels above `threshold` (0-255) become 1, others 0.
MaskTensor load_mask(const std::filesystem::path& path, int threshold = 127);
void save_mask(const MaskTensor& mask, const std::filesystem::path& path);

/// Quantisation helpers shared by I/O and the metrics (0-255 scale).
std::uint8_t to_byte(float value);
inline float from_byte(std::uint8_t v) { return float(v) / 127.5f - 1.0f; }

/// clamp(x + r, -1, 1)
ImageTensor compose_shadow_free(const ImageTensor& x, const ResidualTensor& r);

/// Bicubic resize, clamped back into [-1, 1].
ImageTensor resize_bicubic(const ImageTensor& image, int height, int width);

/// Crops an `height` x `width` window with top-left corner (top, left).
ImageTensor crop(const ImageTensor& image, int top, int left, int height, int width);

/// Stacks same-sized images into one {N, 3, H, W} tensor.
template <typename Scalar>
Var<Scalar> stack(const std::vector<ImageTensor>& images);

}  // namespace tcgan

#endif  // TCGAN_IMAGE_HPP
