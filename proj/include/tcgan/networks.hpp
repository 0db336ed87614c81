#ifndef TCGAN_NETWORKS_HPP
#define TCGAN_NETWORKS_HPP

// Generator (shadow transform encoder + shadow residual decoder),
// patch discriminator and the model-selection classifier. All networks are
// templated on the scalar type so the same definitions serve float training
// and double-precision gradient checks.

#include "tcgan/autodiff.hpp"
#include "tcgan/nn.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace tcgan {

template <typename Scalar>
struct NamedParam {
  std::string name;
  Var<Scalar> var;
};

template <typename Scalar>
using ParamList = std::vector<NamedParam<Scalar>>;

template <typename Scalar>
void append(ParamList<Scalar>& dst, const ParamList<Scalar>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

/// Draws i.i.d. N(0, stddev^2) values. Samples are drawn in double so float
/// and double networks built from the same seed hold the same weights.
template <typename Scalar>
Tensor<Scalar> gaussian_tensor(const Shape& shape, std::mt19937_64& rng, double stddev) {
  std::normal_distribution<double> normal(0.0, stddev);
  Tensor<Scalar> t(shape);
  for (Eigen::Index i = 0; i < t.data.size(); ++i) t.data[i] = Scalar(normal(rng));
  return t;
}

/// Weight initialiser: conv weights ~ N(0, stddev^2), biases 0, norm scale 1, norm offset 0.
class ParamInit {
 public:
  ParamInit(std::uint64_t seed, double stddev) : rng_(seed), stddev_(stddev) {}

  template <typename Scalar>
  Var<Scalar> weight(const Shape& shape) {
    return Var<Scalar>::parameter(gaussian_tensor<Scalar>(shape, rng_, stddev_));
  }
  template <typename Scalar>
  Var<Scalar> constant(int channels, double value) {
    return Var<Scalar>::parameter(Tensor<Scalar>::constant(Shape{1, channels, 1, 1}, Scalar(value)));
  }

 private:
  std::mt19937_64 rng_;
  double stddev_;
};

template <typename Scalar>
struct Conv {
  Var<Scalar> weight;
  Var<Scalar> bias;

  static Conv make(ParamInit& init, int in, int out, int kernel) {
    return {init.weight<Scalar>(Shape{out, in, kernel, kernel}), init.constant<Scalar>(out, 0.0)};
  }
  /// Transposed-convolution weights are laid out {in, out, k, k}.
  static Conv make_transposed(ParamInit& init, int in, int out, int kernel) {
    return {init.weight<Scalar>(Shape{in, out, kernel, kernel}), init.constant<Scalar>(out, 0.0)};
  }
  void collect(ParamList<Scalar>& out, const std::string& name) const {
    out.push_back({name + ".weight", weight});
    out.push_back({name + ".bias", bias});
  }
};

template <typename Scalar>
struct Norm {
  Var<Scalar> gamma;
  Var<Scalar> beta;

  static Norm make(ParamInit& init, int channels) {
    return {init.constant<Scalar>(channels, 1.0), init.constant<Scalar>(channels, 0.0)};
  }
  Var<Scalar> operator()(const Var<Scalar>& x) const { return ops::instance_norm(x, gamma, beta); }
  void collect(ParamList<Scalar>& out, const std::string& name) const {
    out.push_back({name + ".gamma", gamma});
    out.push_back({name + ".beta", beta});
  }
};

struct GeneratorArch {
  int base_channels = 64;
  int residual_blocks = 9;
};

struct DiscriminatorArch {
  int base_channels = 64;
};

/// Shadow transform encoder: three stride-2 3x3 stages (base, 2*base, 4*base
/// channels) with instance norm + ReLU, then residual blocks at 4*base.
/// Reflection padding throughout.
template <typename Scalar>
class Encoder {
 public:
  Encoder() = default;
  Encoder(const GeneratorArch& arch, ParamInit& init) {
    int in = 3;
    for (int i = 0; i < 3; ++i) {
      const int out = arch.base_channels << i;
      down_.push_back(Conv<Scalar>::make(init, in, out, 3));
      down_norm_.push_back(Norm<Scalar>::make(init, out));
      in = out;
    }
    for (int b = 0; b < arch.residual_blocks; ++b) {
      Block block{Conv<Scalar>::make(init, in, in, 3), Norm<Scalar>::make(init, in),
                  Conv<Scalar>::make(init, in, in, 3), Norm<Scalar>::make(init, in)};
      blocks_.push_back(std::move(block));
    }
  }

  Var<Scalar> forward(const Var<Scalar>& x) const {
    const Shape s = x.shape();
    if (s.c != 3 || s.h <= 0 || s.w <= 0 || s.h % 8 != 0 || s.w % 8 != 0) {
      throw ShapeError("encoder input must be 3 channels with sides divisible by 8, got " + to_string(s));
    }
    Var<Scalar> h = x;
    for (std::size_t i = 0; i < down_.size(); ++i) {
      h = ops::conv2d(ops::reflect_pad(h, 1), down_[i].weight, down_[i].bias, 2, 0);
      h = ops::relu(down_norm_[i](h));
    }
    for (const auto& b : blocks_) {
      Var<Scalar> y = ops::conv2d(ops::reflect_pad(h, 1), b.conv1.weight, b.conv1.bias, 1, 0);
      y = ops::relu(b.norm1(y));
      y = ops::conv2d(ops::reflect_pad(y, 1), b.conv2.weight, b.conv2.bias, 1, 0);
      h = ops::add(h, b.norm2(y));
    }
    return h;
  }

  ParamList<Scalar> params(const std::string& prefix) const {
    ParamList<Scalar> out;
    for (std::size_t i = 0; i < down_.size(); ++i) {
      down_[i].collect(out, prefix + ".down" + std::to_string(i));
      down_norm_[i].collect(out, prefix + ".down" + std::to_string(i) + ".norm");
    }
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const std::string name = prefix + ".block" + std::to_string(b);
      blocks_[b].conv1.collect(out, name + ".conv1");
      blocks_[b].norm1.collect(out, name + ".norm1");
      blocks_[b].conv2.collect(out, name + ".conv2");
      blocks_[b].norm2.collect(out, name + ".norm2");
    }
    return out;
  }

 private:
  struct Block {
    Conv<Scalar> conv1;
    Norm<Scalar> norm1;
    Conv<Scalar> conv2;
    Norm<Scalar> norm2;
  };
  std::vector<Conv<Scalar>> down_;
  std::vector<Norm<Scalar>> down_norm_;
  std::vector<Block> blocks_;
};

/// Shadow residual decoder: three stride-2 transposed 3x3 stages
/// (4*base -> 2*base -> base -> 3); the last emits 2 * tanh(.) in [-2, 2].
template <typename Scalar>
class Decoder {
 public:
  Decoder() = default;
  Decoder(const GeneratorArch& arch, ParamInit& init) {
    int in = arch.base_channels * 4;
    for (int i = 0; i < 3; ++i) {
      const int out = i < 2 ? in / 2 : 3;
      up_.push_back(Conv<Scalar>::make_transposed(init, in, out, 3));
      if (i < 2) up_norm_.push_back(Norm<Scalar>::make(init, out));
      in = out;
    }
  }

  Var<Scalar> forward(const Var<Scalar>& features) const {
    Var<Scalar> h = features;
    for (std::size_t i = 0; i < up_.size(); ++i) {
      h = ops::conv_transpose2d(h, up_[i].weight, up_[i].bias, 2, 1, 1);
      if (i < up_norm_.size()) h = ops::relu(up_norm_[i](h));
    }
    return ops::scale(ops::tanh(h), Scalar(2));
  }

  ParamList<Scalar> params(const std::string& prefix) const {
    ParamList<Scalar> out;
    for (std::size_t i = 0; i < up_.size(); ++i) {
      up_[i].collect(out, prefix + ".up" + std::to_string(i));
      if (i < up_norm_.size()) up_norm_[i].collect(out, prefix + ".up" + std::to_string(i) + ".norm");
    }
    return out;
  }

 private:
  std::vector<Conv<Scalar>> up_;
  std::vector<Norm<Scalar>> up_norm_;
};

/// Residual generator: residual(x) = decoder(encoder(x)).
template <typename Scalar>
class Generator {
 public:
  Generator() = default;
  Generator(const GeneratorArch& arch, std::uint64_t seed, double init_std = 0.02) : arch_(arch) {
    ParamInit init(seed, init_std);
    encoder_ = Encoder<Scalar>(arch, init);
    decoder_ = Decoder<Scalar>(arch, init);
  }

  Var<Scalar> features(const Var<Scalar>& x) const { return encoder_.forward(x); }
  Var<Scalar> forward(const Var<Scalar>& x) const { return decoder_.forward(encoder_.forward(x)); }

  ParamList<Scalar> params(const std::string& prefix = "g") const {
    ParamList<Scalar> out = encoder_.params(prefix + ".ste");
    append(out, decoder_.params(prefix + ".srd"));
    return out;
  }
  const GeneratorArch& arch() const { return arch_; }

 private:
  GeneratorArch arch_;
  Encoder<Scalar> encoder_;
  Decoder<Scalar> decoder_;
};

/// Patch discriminator: four stride-2 4x4 stages (base..8*base), instance norm
/// on stages 2-4, leaky ReLU 0.2 after each, then a 3x3 one-channel head.
/// Output is a raw score map of H/16 x W/16.
template <typename Scalar>
class Discriminator {
 public:
  Discriminator() = default;
  Discriminator(const DiscriminatorArch& arch, std::uint64_t seed, double init_std = 0.02) : arch_(arch) {
    ParamInit init(seed, init_std);
    int in = 3;
    for (int i = 0; i < 4; ++i) {
      const int out = arch.base_channels << i;
      body_.push_back(Conv<Scalar>::make(init, in, out, 4));
      if (i > 0) norm_.push_back(Norm<Scalar>::make(init, out));
      in = out;
    }
    head_ = Conv<Scalar>::make(init, in, 1, 3);
  }

  Var<Scalar> forward(const Var<Scalar>& img) const {
    const Shape s = img.shape();
    if (s.c != 3 || s.h < 16 || s.w < 16 || s.h % 16 != 0 || s.w % 16 != 0) {
      throw ShapeError("discriminator input must be 3 channels with sides divisible by 16, got " + to_string(s));
    }
    Var<Scalar> h = img;
    for (std::size_t i = 0; i < body_.size(); ++i) {
      h = ops::conv2d(h, body_[i].weight, body_[i].bias, 2, 1);
      if (i > 0) h = norm_[i - 1](h);
      h = ops::leaky_relu(h, Scalar(0.2));
    }
    return ops::conv2d(h, head_.weight, head_.bias, 1, 1);
  }

  ParamList<Scalar> params(const std::string& prefix = "d") const {
    ParamList<Scalar> out;
    for (std::size_t i = 0; i < body_.size(); ++i) {
      body_[i].collect(out, prefix + ".conv" + std::to_string(i));
      if (i > 0) norm_[i - 1].collect(out, prefix + ".conv" + std::to_string(i) + ".norm");
    }
    head_.collect(out, prefix + ".head");
    return out;
  }
  const DiscriminatorArch& arch() const { return arch_; }

 private:
  DiscriminatorArch arch_;
  std::vector<Conv<Scalar>> body_;
  std::vector<Norm<Scalar>> norm_;
  Conv<Scalar> head_;
};

/// Model-selection classifier: the discriminator body with instance norm +
/// ReLU, global average pooling and one affine unit. probability() is the
/// chance that the input is a real non-shadow image.
template <typename Scalar>
class Msm {
 public:
  Msm() = default;
  Msm(const DiscriminatorArch& arch, std::uint64_t seed, double init_std = 0.02) : arch_(arch) {
    ParamInit init(seed, init_std);
    int in = 3;
    for (int i = 0; i < 4; ++i) {
      const int out = arch.base_channels << i;
      body_.push_back(Conv<Scalar>::make(init, in, out, 4));
      if (i > 0) norm_.push_back(Norm<Scalar>::make(init, out));
      in = out;
    }
    fc_ = Conv<Scalar>::make(init, in, 1, 1);
  }

  /// {N, 1, 1, 1} pre-sigmoid scores.
  Var<Scalar> logit(const Var<Scalar>& img) const {
    const Shape s = img.shape();
    if (s.c != 3 || s.h < 16 || s.w < 16) {
      throw ShapeError("classifier input must be 3 channels and at least 16x16, got " + to_string(s));
    }
    Var<Scalar> h = img;
    for (std::size_t i = 0; i < body_.size(); ++i) {
      h = ops::conv2d(h, body_[i].weight, body_[i].bias, 2, 1);
      if (i > 0) h = norm_[i - 1](h);
      h = ops::relu(h);
    }
    return ops::conv2d(ops::global_avg_pool(h), fc_.weight, fc_.bias, 1, 0);
  }

  Var<Scalar> probability(const Var<Scalar>& img) const { return ops::sigmoid(logit(img)); }

  ParamList<Scalar> params(const std::string& prefix = "msm") const {
    ParamList<Scalar> out;
    for (std::size_t i = 0; i < body_.size(); ++i) {
      body_[i].collect(out, prefix + ".conv" + std::to_string(i));
      if (i > 0) norm_[i - 1].collect(out, prefix + ".conv" + std::to_string(i) + ".norm");
    }
    fc_.collect(out, prefix + ".fc");
    return out;
  }
  const DiscriminatorArch& arch() const { return arch_; }

 private:
  DiscriminatorArch arch_;
  std::vector<Conv<Scalar>> body_;
  std::vector<Norm<Scalar>> norm_;
  Conv<Scalar> fc_;
};

/// The two residual generators with their (distinct) initialisation seeds.
struct GeneratorPair {
  Generator<float> g1;
  Generator<float> g2;
  std::uint64_t seed1 = 1;
  std::uint64_t seed2 = 2;

  GeneratorPair() = default;
  /// seed1 == seed2 is permitted only when `allow_identical` is set (test-only configuration).
  GeneratorPair(const GeneratorArch& arch, std::uint64_t s1, std::uint64_t s2, double init_std = 0.02,
                bool allow_identical = false);

  ParamList<float> params() const;
};

struct DiscriminatorPair {
  Discriminator<float> d1;
  Discriminator<float> d2;

  DiscriminatorPair() = default;
  DiscriminatorPair(const DiscriminatorArch& arch, std::uint64_t s1, std::uint64_t s2, double init_std = 0.02);

  ParamList<float> params() const;
};

/// True when any two same-named parameters hold different values.
template <typename Scalar>
bool params_differ(const ParamList<Scalar>& a, const ParamList<Scalar>& b) {
  if (a.size() != b.size()) return true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a[i].var.value();
    const auto& y = b[i].var.value();
    if (!(x.shape == y.shape) || (x.data != y.data).any()) return true;
  }
  return false;
}

}  // namespace tcgan

#endif  // TCGAN_NETWORKS_HPP
