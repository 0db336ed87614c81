#ifndef TCGAN_OPTIM_HPP
#define TCGAN_OPTIM_HPP

#include "tcgan/networks.hpp"

#include <cmath>
#include <vector>

namespace tcgan {

/// Adam with bias correction. Parameters that received no gradient since the
/// last zero_grad() are left untouched.
template <typename Scalar>
class Adam {
 public:
  Adam() = default;
  Adam(ParamList<Scalar> params, double lr, double beta1, double beta2, double eps = 1e-8)
      : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& p : params_) {
      m_.emplace_back(p.var.shape());
      v_.emplace_back(p.var.shape());
    }
  }

  void zero_grad() {
    for (const auto& p : params_) p.var.zero_grad();
  }

  void step() {
    ++steps_;
    const double c1 = 1.0 - std::pow(beta1_, double(steps_));
    const double c2 = 1.0 - std::pow(beta2_, double(steps_));
    const Scalar step_size = Scalar(lr_ / c1);
    const Scalar inv_sqrt_c2 = Scalar(1.0 / std::sqrt(c2));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      const auto& g = params_[i].var.grad();
      if (g.empty()) continue;
      auto& m = m_[i].data;
      auto& v = v_[i].data;
      m = Scalar(beta1_) * m + Scalar(1.0 - beta1_) * g.data;
      v = Scalar(beta2_) * v + Scalar(1.0 - beta2_) * g.data.square();
      params_[i].var.mutable_value().data -= step_size * m / (v.sqrt() * inv_sqrt_c2 + Scalar(eps_));
    }
  }

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }
  long steps() const { return steps_; }
  void set_steps(long s) { steps_ = s; }

  const ParamList<Scalar>& params() const { return params_; }
  std::vector<Tensor<Scalar>>& first_moments() { return m_; }
  std::vector<Tensor<Scalar>>& second_moments() { return v_; }
  const std::vector<Tensor<Scalar>>& first_moments() const { return m_; }
  const std::vector<Tensor<Scalar>>& second_moments() const { return v_; }

 private:
  ParamList<Scalar> params_;
  std::vector<Tensor<Scalar>> m_;
  std::vector<Tensor<Scalar>> v_;
  double lr_ = 2e-4;
  double beta1_ = 0.5;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long steps_ = 0;
};

}  // namespace tcgan

#endif  // TCGAN_OPTIM_HPP
