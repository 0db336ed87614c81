#ifndef TCGAN_TENSOR_HPP
#define TCGAN_TENSOR_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tcgan {

/// Dense NCHW shape. Images use n == 1.
struct Shape {
  int n = 1;
  int c = 0;
  int h = 0;
  int w = 0;

  Eigen::Index size() const { return Eigen::Index(n) * c * h * w; }
  Eigen::Index plane() const { return Eigen::Index(h) * w; }
  Eigen::Index sample() const { return Eigen::Index(c) * h * w; }

  friend bool operator==(const Shape&, const Shape&) = default;
};

inline std::string to_string(const Shape& s) {
  return std::to_string(s.n) + "x" + std::to_string(s.c) + "x" + std::to_string(s.h) + "x" +
         std::to_string(s.w);
}

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Contiguous NCHW tensor; x is the fastest-varying index.
template <typename Scalar>
struct Tensor {
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Shape shape;
  Array data;

  Tensor() = default;
  explicit Tensor(const Shape& s) : shape(s), data(Array::Zero(s.size())) {}
  Tensor(const Shape& s, Array d) : shape(s), data(std::move(d)) {
    if (data.size() != shape.size()) {
      throw std::invalid_argument("tensor data size does not match shape " + to_string(shape));
    }
  }

  static Tensor constant(const Shape& s, Scalar v) { return Tensor(s, Array::Constant(s.size(), v)); }

  bool empty() const { return data.size() == 0; }

  Scalar& at(int n, int c, int y, int x) {
    return data[((Eigen::Index(n) * shape.c + c) * shape.h + y) * shape.w + x];
  }
  Scalar at(int n, int c, int y, int x) const {
    return data[((Eigen::Index(n) * shape.c + c) * shape.h + y) * shape.w + x];
  }

  /// Sample `n` viewed as a [channels, h*w] row-major matrix.
  Eigen::Map<RowMatrix<Scalar>> sample_matrix(int n) {
    return {data.data() + n * shape.sample(), shape.c, shape.plane()};
  }
  Eigen::Map<const RowMatrix<Scalar>> sample_matrix(int n) const {
    return {data.data() + n * shape.sample(), shape.c, shape.plane()};
  }

  template <typename Other>
  Tensor<Other> cast() const {
    return Tensor<Other>(shape, data.template cast<Other>());
  }
};

}  // namespace tcgan

#endif  // TCGAN_TENSOR_HPP
