#include "tcgan/metrics.hpp"

#include "tcgan/errors.hpp"
#include "tcgan/networks.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tcgan {

Eigen::VectorXd feature_mean(const Eigen::MatrixXd& f) { return f.colwise().mean().transpose(); }

Eigen::MatrixXd feature_covariance(const Eigen::MatrixXd& f) {
  if (f.rows() < 2) throw ShapeError("covariance needs at least two samples");
  const Eigen::MatrixXd centered = f.rowwise() - f.colwise().mean();
  return centered.transpose() * centered / double(f.rows() - 1);
}

double frechet_distance(const Eigen::VectorXd& mu_a, const Eigen::MatrixXd& cov_a, const Eigen::VectorXd& mu_b,
                        const Eigen::MatrixXd& cov_b) {
  if (mu_a.size() != mu_b.size() || cov_a.rows() != mu_a.size() || cov_b.rows() != mu_b.size()) {
    throw ShapeError("frechet_distance: dimension mismatch");
  }
  const Eigen::VectorXd eig = Eigen::EigenSolver<Eigen::MatrixXd>(cov_a * cov_b, false).eigenvalues().real();
  const double lambda_max = std::max(eig.maxCoeff(), 0.0);
  double sqrt_trace = 0.0;
  for (Eigen::Index i = 0; i < eig.size(); ++i) {
    const double l = eig[i];
    if (l >= 0.0) {
      sqrt_trace += std::sqrt(l);
    } else if (l < -1e-8 * lambda_max) {
      throw DivergenceError("covariance product has a significantly negative eigenvalue");
    }
  }
  const double d = (mu_a - mu_b).squaredNorm() + cov_a.trace() + cov_b.trace() - 2.0 * sqrt_trace;
  return std::max(d, 0.0);
}

double fid(const FeatureSet& a, const FeatureSet& b) {
  if (a.dim() != b.dim()) throw ShapeError("fid: feature dimensions differ");
  if (a.size() < 2 || b.size() < 2) throw ShapeError("fid: each set needs at least two samples");
  if (!a.features.allFinite() || !b.features.allFinite()) throw DataError("fid: non-finite features");
  Eigen::MatrixXd ca = feature_covariance(a.features);
  Eigen::MatrixXd cb = feature_covariance(b.features);
  if (a.dim() > std::min(a.size(), b.size())) {
    ca.diagonal().array() += 1e-10;
    cb.diagonal().array() += 1e-10;
  }
  return frechet_distance(feature_mean(a.features), ca, feature_mean(b.features), cb);
}

double mmd2_unbiased(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double m = double(a.rows());
  const double n = double(b.rows());
  if (a.rows() < 2 || b.rows() < 2) throw ShapeError("mmd2_unbiased: each set needs at least two samples");
  const double d = double(a.cols());
  auto kernel = [d](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) -> Eigen::MatrixXd {
    return ((x * y.transpose()).array() / d + 1.0).cube().matrix();
  };
  const Eigen::MatrixXd kaa = kernel(a, a);
  const Eigen::MatrixXd kbb = kernel(b, b);
  const Eigen::MatrixXd kab = kernel(a, b);
  const double within_a = (kaa.sum() - kaa.trace()) / (m * (m - 1.0));
  const double within_b = (kbb.sum() - kbb.trace()) / (n * (n - 1.0));
  return within_a + within_b - 2.0 * kab.sum() / (m * n);
}

KidResult kid(const FeatureSet& a, const FeatureSet& b, int subset_size, int n_subsets, std::mt19937_64& rng) {
  if (a.dim() != b.dim()) throw ShapeError("kid: feature dimensions differ");
  if (subset_size < 2 || subset_size > std::min(a.size(), b.size()) || n_subsets < 1) {
    throw ShapeError("kid: subset size " + std::to_string(subset_size) + " invalid for sets of " +
                     std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  auto draw = [&](const Eigen::MatrixXd& f) {
    std::vector<Eigen::Index> idx(f.rows());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(subset_size);
    std::sort(idx.begin(), idx.end());
    Eigen::MatrixXd out(subset_size, f.cols());
    for (int i = 0; i < subset_size; ++i) out.row(i) = f.row(idx[i]);
    return out;
  };
  Eigen::VectorXd values(n_subsets);
  for (int s = 0; s < n_subsets; ++s) {
    const Eigen::MatrixXd sa = draw(a.features);
    const Eigen::MatrixXd sb = draw(b.features);
    values[s] = mmd2_unbiased(sa, sb);
  }
  KidResult r;
  r.mean = values.mean();
  r.std = std::sqrt((values.array() - r.mean).square().mean());
  return r;
}

std::string to_string(Region r) {
  switch (r) {
    case Region::Shadow:
      return "S";
    case Region::NonShadow:
      return "N";
    case Region::All:
      return "A";
  }
  return "?";
}

std::string to_string(ColorSpace s) { return s == ColorSpace::Lab ? "lab" : "rgb"; }

ColorSpace parse_color_space(const std::string& s) {
  if (s == "lab") return ColorSpace::Lab;
  if (s == "rgb") return ColorSpace::Rgb;
  throw ConfigError("unknown colour space '" + s + "' (expected lab or rgb)");
}

Eigen::Vector3d srgb_to_lab(double r, double g, double b) {
  auto linear = [](double v) {
    v /= 255.0;
    return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
  };
  const Eigen::Vector3d rgb(linear(r), linear(g), linear(b));
  Eigen::Matrix3d m;
  m << 0.4124564, 0.3575761, 0.1804375,  //
      0.2126729, 0.7151522, 0.0721750,   //
      0.0193339, 0.1191920, 0.9503041;
  const Eigen::Vector3d xyz = m * rgb;
  const Eigen::Vector3d white(0.95047, 1.0, 1.08883);
  auto f = [](double t) {
    constexpr double delta = 6.0 / 29.0;
    return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
  };
  const double fx = f(xyz[0] / white[0]);
  const double fy = f(xyz[1] / white[1]);
  const double fz = f(xyz[2] / white[2]);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

double masked_rmse(const ImageTensor& pred, const ImageTensor& ref, const MaskTensor& mask, Region region,
                   ColorSpace space) {
  const Shape& s = pred.tensor().shape;
  if (!(s == ref.tensor().shape)) throw ShapeError("masked_rmse: prediction and reference differ in shape");
  if (mask.height() != s.h || mask.width() != s.w) throw ShapeError("masked_rmse: mask shape mismatch");
  if (!mask.is_binary()) throw ShapeError("masked_rmse: mask must be binary");

  double sum = 0.0;
  std::size_t count = 0;
  for (int y = 0; y < s.h; ++y) {
    for (int x = 0; x < s.w; ++x) {
      const bool shadow = mask.tensor().at(0, 0, y, x) > 0.5f;
      if ((region == Region::Shadow && !shadow) || (region == Region::NonShadow && shadow)) continue;
      Eigen::Vector3d p, q;
      for (int c = 0; c < 3; ++c) {
        p[c] = to_byte(pred.tensor().at(0, c, y, x));
        q[c] = to_byte(ref.tensor().at(0, c, y, x));
      }
      if (space == ColorSpace::Lab) {
        p = srgb_to_lab(p[0], p[1], p[2]);
        q = srgb_to_lab(q[0], q[1], q[2]);
      }
      sum += (p - q).squaredNorm();
      ++count;
    }
  }
  if (count == 0) throw ShapeError("masked_rmse: region " + to_string(region) + " is empty");
  return std::sqrt(sum / (3.0 * double(count)));
}

double rmse_n_i(const ImageTensor& pred, const ImageTensor& input_shadow, const MaskTensor& mask, ColorSpace space) {
  return masked_rmse(pred, input_shadow, mask, Region::NonShadow, space);
}

struct RandomProjectionExtractor::Impl {
  std::vector<Conv<float>> stages;
};

namespace {
constexpr int kExtractorSize = 64;
constexpr int kExtractorWidths[3] = {16, 24, 24};
}  // namespace

RandomProjectionExtractor::RandomProjectionExtractor(std::uint64_t seed) : seed_(seed) {
  auto impl = std::make_shared<Impl>();
  std::mt19937_64 rng(seed);
  int in = 3;
  for (int width : kExtractorWidths) {
    const double he = std::sqrt(2.0 / double(in * 16));
    Conv<float> c{Var<float>::constant(gaussian_tensor<float>(Shape{width, in, 4, 4}, rng, he)),
                  Var<float>::constant(Tensor<float>(Shape{1, width, 1, 1}))};
    impl->stages.push_back(std::move(c));
    in = width;
  }
  impl_ = std::move(impl);
}

std::string RandomProjectionExtractor::id() const {
  return "randconv-v1(seed=" + std::to_string(seed_) + ",input=64,widths=16-24-24,stat=mean)";
}

Eigen::VectorXd RandomProjectionExtractor::embed(const ImageTensor& image) const {
  Var<float> h = resize_bicubic(image, kExtractorSize, kExtractorSize).as_var<float>();
  std::vector<float> values;
  for (const auto& stage : impl_->stages) {
    h = ops::relu(ops::conv2d(h, stage.weight, stage.bias, 2, 1));
    const Tensor<float> pooled = ops::global_avg_pool(h).value();
    values.insert(values.end(), pooled.data.data(), pooled.data.data() + pooled.data.size());
  }
  return Eigen::Map<const Eigen::VectorXf>(values.data(), Eigen::Index(values.size())).cast<double>();
}

FeatureSet extract_features(const std::vector<ImageTensor>& images, const FeatureExtractor& extractor) {
  if (images.empty()) throw DataError("extract_features: empty image set");
  FeatureSet out;
  out.extractor_id = extractor.id();
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Eigen::VectorXd v = extractor.embed(images[i]);
    if (i == 0) out.features.resize(Eigen::Index(images.size()), v.size());
    if (v.size() != out.features.cols()) throw DataError("extractor returned inconsistent dimensions");
    out.features.row(Eigen::Index(i)) = v.transpose();
  }
  return out;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  if (fid) j["fid"] = *fid;
  if (kid_mean) {
    j["kid_mean"] = *kid_mean;
    j["kid_std"] = kid_std.value_or(0.0);
    j["kid_subset_size"] = kid_subset_size;
    j["kid_subsets"] = kid_subsets;
  }
  if (!rmse.empty()) {
    nlohmann::ordered_json r;
    for (const char* key : {"S", "N", "A", "N-I"}) {
      auto it = rmse.find(key);
      if (it != rmse.end()) r[key] = it->second;
    }
    j["rmse"] = r;
    j["color_space"] = to_string(color_space);
  }
  if (fid || kid_mean) j["extractor_id"] = extractor_id;
  j["n_pred"] = n_pred;
  j["n_ref"] = n_ref;
  return j.dump(2);
}

}  // namespace tcgan
