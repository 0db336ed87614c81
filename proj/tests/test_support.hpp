#ifndef TCGAN_TESTS_TEST_SUPPORT_HPP
#define TCGAN_TESTS_TEST_SUPPORT_HPP

// Shared test helpers: random tensors, scratch directories and a central
// finite-difference gradient oracle that never touches the backward pass.

#include "tcgan/autodiff.hpp"
#include "tcgan/image.hpp"
#include "tcgan/networks.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>

namespace tcgan::testing {

inline Tensor<double> uniform_tensor(const Shape& s, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor<double> t(s);
  for (Eigen::Index i = 0; i < t.data.size(); ++i) t.data[i] = u(rng);
  return t;
}

inline ImageTensor random_image(int h, int w, std::mt19937_64& rng) {
  return ImageTensor(uniform_tensor(Shape{1, 3, h, w}, rng, -1.0, 1.0).cast<float>());
}

/// Image whose values sit exactly on the 8-bit grid.
inline ImageTensor random_byte_image(int h, int w, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> byte(0, 255);
  Tensor<float> t(Shape{1, 3, h, w});
  for (Eigen::Index i = 0; i < t.data.size(); ++i) t.data[i] = from_byte(std::uint8_t(byte(rng)));
  return ImageTensor(std::move(t));
}

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tcgan_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

struct GradCheck {
  int checked = 0;
  int passed = 0;
  double worst = 0.0;

  double pass_rate() const { return checked == 0 ? 1.0 : double(passed) / double(checked); }
  void merge(const GradCheck& o) {
    checked += o.checked;
    passed += o.passed;
    worst = std::max(worst, o.worst);
  }
};

/// |a - n| / max(|a|, |n|, floor); the floor keeps exactly-zero gradients
/// from producing 0/0.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Compares `analytic` (the gradient of `objective` w.r.t. `target`) with
/// central differences at `coords` randomly sampled coordinates.
inline GradCheck finite_difference_check(const Var<double>& target, const Tensor<double>& analytic,
                                         const std::function<double()>& objective, int coords, std::mt19937_64& rng,
                                         double step = 1e-5, double tol = 1e-4) {
  GradCheck out;
  auto& values = target.mutable_value().data;
  const Eigen::Index n = values.size();
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  for (int k = 0; k < std::min<Eigen::Index>(coords, n); ++k) {
    const Eigen::Index i = coords >= n ? k : pick(rng);
    const double saved = values[i];
    values[i] = saved + step;
    const double up = objective();
    values[i] = saved - step;
    const double down = objective();
    values[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double a = analytic.empty() ? 0.0 : analytic.data[i];
    const double err = relative_error(a, numeric);
    ++out.checked;
    if (err <= tol) ++out.passed;
    out.worst = std::max(out.worst, err);
  }
  return out;
}

/// Moves norm scales/offsets and biases off their initial constants so that
/// gradient checks run at a generic point rather than on ReLU kinks.
inline void jitter_params(const ParamList<double>& params, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (const auto& p : params) {
    if (p.var.shape().n != 1 || p.var.shape().h != 1) continue;
    auto& v = p.var.mutable_value().data;
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] += u(rng);
  }
}

/// Gradient check of `objective(input)` w.r.t. every parameter tensor and the input.
inline GradCheck check_network(const ParamList<double>& params, const Var<double>& input,
                        const std::function<Var<double>(const Var<double>&)>& objective, int coords,
                        std::mt19937_64& rng) {
  for (const auto& p : params) p.var.zero_grad();
  input.zero_grad();
  backward(objective(input));
  auto value = [&]() { return objective(input).item(); };
  GradCheck total;
  for (const auto& p : params) {
    const Tensor<double> analytic = p.var.grad();
    total.merge(finite_difference_check(p.var, analytic, value, coords, rng));
  }
  const Tensor<double> analytic = input.grad();
  total.merge(finite_difference_check(input, analytic, value, coords, rng));
  return total;
}

/// Jittered gradient check of `head(net(x))` on a random size x size input.
template <typename Net>
GradCheck network_grad_check(const Net& net, int size, std::uint64_t seed,
                             const std::function<Var<double>(const Var<double>&)>& head) {
  std::mt19937_64 rng(seed);
  jitter_params(net.params(), rng);
  const Var<double> x = Var<double>::parameter(uniform_tensor(Shape{1, 3, size, size}, rng, -1, 1));
  return check_network(net.params(), x, head, 20, rng);
}

}  // namespace tcgan::testing

#endif  // TCGAN_TESTS_TEST_SUPPORT_HPP
