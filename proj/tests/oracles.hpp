#ifndef TCGAN_TESTS_ORACLES_HPP
#define TCGAN_TESTS_ORACLES_HPP

// Independent reference computations. Each one is written as a plain scalar
// loop or through a different decomposition than the library uses.

#include "tcgan/image.hpp"
#include "tcgan/tensor.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>

namespace tcgan::oracle {

inline double target_consistency(const Tensor<float>& x, const Tensor<float>& r1, const Tensor<float>& r2) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.data.size(); ++i) {
    const double a = double(x.data[i]) + double(r1.data[i]);
    const double b = double(x.data[i]) + double(r2.data[i]);
    sum += std::abs(a - b);
  }
  return sum / double(x.data.size());
}

inline double identity(const Tensor<float>& r) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < r.data.size(); ++i) sum += std::abs(double(r.data[i]));
  return sum / double(r.data.size());
}

inline double lsgan_generator(const Tensor<double>& fake) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < fake.data.size(); ++i) sum += (fake.data[i] - 1.0) * (fake.data[i] - 1.0);
  return sum / double(fake.data.size());
}

inline double lsgan_discriminator(const Tensor<double>& real, const Tensor<double>& fake) {
  double r = 0.0, f = 0.0;
  for (Eigen::Index i = 0; i < real.data.size(); ++i) r += (real.data[i] - 1.0) * (real.data[i] - 1.0);
  for (Eigen::Index i = 0; i < fake.data.size(); ++i) f += fake.data[i] * fake.data[i];
  return 0.5 * r / double(real.data.size()) + 0.5 * f / double(fake.data.size());
}

inline double combine(double l1, double l2, double l3, double gan1, double gan2, double tc, double idt1,
                      double idt2) {
  return l1 * gan1 + l1 * gan2 + l2 * tc + l3 * idt1 + l3 * idt2;
}

/// FID with the matrix square root taken as (A^{1/2} B A^{1/2})^{1/2} via
/// two symmetric eigendecompositions.
inline double fid(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  auto stats = [](const Eigen::MatrixXd& f, Eigen::VectorXd& mu, Eigen::MatrixXd& cov) {
    const double n = double(f.rows());
    mu = Eigen::VectorXd::Zero(f.cols());
    for (Eigen::Index i = 0; i < f.rows(); ++i) mu += f.row(i).transpose();
    mu /= n;
    cov = Eigen::MatrixXd::Zero(f.cols(), f.cols());
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
      const Eigen::VectorXd d = f.row(i).transpose() - mu;
      cov += d * d.transpose();
    }
    cov /= (n - 1.0);
  };
  Eigen::VectorXd mu_a, mu_b;
  Eigen::MatrixXd ca, cb;
  stats(a, mu_a, ca);
  stats(b, mu_b, cb);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(ca);
  const Eigen::MatrixXd root_a =
      ea.eigenvectors() * ea.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * ea.eigenvectors().transpose();
  const Eigen::MatrixXd inner = root_a * cb * root_a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ei(0.5 * (inner + inner.transpose()));
  const double tr_root = ei.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return (mu_a - mu_b).squaredNorm() + ca.trace() + cb.trace() - 2.0 * tr_root;
}

inline double poly_kernel(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  double dot = 0.0;
  for (Eigen::Index k = 0; k < u.size(); ++k) dot += u[k] * v[k];
  const double t = dot / double(u.size()) + 1.0;
  return t * t * t;
}

/// Unbiased MMD^2 by explicit loops over all index pairs.
inline double mmd2(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::Index m = a.rows(), n = b.rows();
  double aa = 0.0, bb = 0.0, ab = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      if (i != j) aa += poly_kernel(a.row(i).transpose(), a.row(j).transpose());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) bb += poly_kernel(b.row(i).transpose(), b.row(j).transpose());
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) ab += poly_kernel(a.row(i).transpose(), b.row(j).transpose());
  return aa / double(m * (m - 1)) + bb / double(n * (n - 1)) - 2.0 * ab / double(m * n);
}

/// RGB masked RMSE on the byte scale. region: 'S', 'N' or 'A'.
inline double masked_rmse_rgb(const ImageTensor& pred, const ImageTensor& ref, const MaskTensor& mask, char region) {
  double sum = 0.0;
  std::size_t count = 0;
  for (int y = 0; y < pred.height(); ++y) {
    for (int x = 0; x < pred.width(); ++x) {
      const bool in_shadow = mask.tensor().at(0, 0, y, x) == 1.0f;
      if (region == 'S' && !in_shadow) continue;
      if (region == 'N' && in_shadow) continue;
      for (int c = 0; c < 3; ++c) {
        const double p = std::round((double(pred.tensor().at(0, c, y, x)) + 1.0) * 127.5);
        const double q = std::round((double(ref.tensor().at(0, c, y, x)) + 1.0) * 127.5);
        sum += (p - q) * (p - q);
        ++count;
      }
    }
  }
  return std::sqrt(sum / double(count));
}

}  // namespace tcgan::oracle

#endif  // TCGAN_TESTS_ORACLES_HPP
