#ifndef TCGAN_METRICS_HPP
#define TCGAN_METRICS_HPP

#include "tcgan/image.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace tcgan {

/// n x d feature matrix, one row per image.
struct FeatureSet {
  Eigen::MatrixXd features;
  std::string extractor_id;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
};

/// Sample mean and unbiased (1/(n-1)) covariance.
Eigen::VectorXd feature_mean(const Eigen::MatrixXd& f);
Eigen::MatrixXd feature_covariance(const Eigen::MatrixXd& f);

/// Frechet distance between two Gaussians. The trace of (cov_a cov_b)^{1/2}
/// is the sum of square roots of the eigenvalues of cov_a cov_b; negative
/// eigenvalues down to -1e-8 * lambda_max are treated as 0.
double frechet_distance(const Eigen::VectorXd& mu_a, const Eigen::MatrixXd& cov_a, const Eigen::VectorXd& mu_b,
                        const Eigen::MatrixXd& cov_b);

/// FID between two feature sets. Adds 1e-10 I to both covariances when d > n.
double fid(const FeatureSet& a, const FeatureSet& b);

/// k(u, v) = (u.v / d + 1)^3
inline double polynomial_kernel(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double t = u.dot(v) / double(u.size()) + 1.0;
  return t * t * t;
}

/// Unbiased MMD^2 with the cubic polynomial kernel (diagonal excluded within sets).
double mmd2_unbiased(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct KidResult {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over subsets
};

/// Mean and spread of mmd2_unbiased over n_subsets random subsets of
/// subset_size rows drawn without replacement from each set.
KidResult kid(const FeatureSet& a, const FeatureSet& b, int subset_size, int n_subsets, std::mt19937_64& rng);

enum class Region { Shadow, NonShadow, All };
enum class ColorSpace { Rgb, Lab };

std::string to_string(Region r);
std::string to_string(ColorSpace s);
ColorSpace parse_color_space(const std::string& s);

/// sRGB bytes (0-255) to CIE L*a*b* under D65.
Eigen::Vector3d srgb_to_lab(double r, double g, double b);

/// RMSE over pixels of `region` (shadow: mask == 1) in the requested colour
/// space on the 0-255 scale, pooled over channels. Throws ShapeError on shape
/// mismatch, a non-binary mask or an empty region.
double masked_rmse(const ImageTensor& pred, const ImageTensor& ref, const MaskTensor& mask, Region region,
                   ColorSpace space);

/// Non-shadow-area RMSE between the output and the input shadow image.
double rmse_n_i(const ImageTensor& pred, const ImageTensor& input_shadow, const MaskTensor& mask, ColorSpace space);

/// Deterministic image embedding.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual std::string id() const = 0;
  virtual Eigen::VectorXd embed(const ImageTensor& image) const = 0;
};

/// Built-in default: images resized to 64x64 and passed through three fixed
/// random stride-2 convolutions (16, 24, 24 channels; He-scaled, seeded) with
/// ReLU. The embedding concatenates the per-channel spatial means of every
/// stage (64 dimensions).
class RandomProjectionExtractor : public FeatureExtractor {
 public:
  explicit RandomProjectionExtractor(std::uint64_t seed = 20231);
  std::string id() const override;
  Eigen::VectorXd embed(const ImageTensor& image) const override;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  std::uint64_t seed_;
};

FeatureSet extract_features(const std::vector<ImageTensor>& images, const FeatureExtractor& extractor);

struct EvalReport {
  std::optional<double> fid;
  std::optional<double> kid_mean;
  std::optional<double> kid_std;
  std::map<std::string, double> rmse;  // keys among S, N, A, N-I
  ColorSpace color_space = ColorSpace::Lab;
  std::string extractor_id;
  int kid_subset_size = 0;
  int kid_subsets = 0;
  std::size_t n_pred = 0;
  std::size_t n_ref = 0;

  std::string to_json() const;
};

}  // namespace tcgan

#endif  // TCGAN_METRICS_HPP
