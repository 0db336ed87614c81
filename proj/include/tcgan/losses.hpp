#ifndef TCGAN_LOSSES_HPP
#define TCGAN_LOSSES_HPP

// Objective terms. All expectations are mean-reduced.

#include "tcgan/autodiff.hpp"
#include "tcgan/image.hpp"

#include <string>

namespace tcgan {

struct LossWeights {
  double lambda1 = 1.0;   // adversarial
  double lambda2 = 40.0;  // target consistency
  double lambda3 = 5.0;   // identity
};

struct LossBundle {
  double gan1 = 0.0;
  double gan2 = 0.0;
  double tc = 0.0;
  double idt1 = 0.0;
  double idt2 = 0.0;
  double total = 0.0;

  friend bool operator==(const LossBundle&, const LossBundle&) = default;
};

/// total = l1 * (gan1 + gan2) + l2 * tc + l3 * (idt1 + idt2). Throws
/// DivergenceError naming the first non-finite component.
LossBundle combine(const LossWeights& w, double gan1, double gan2, double tc, double idt1, double idt2);

namespace losses {

/// mean |(x + r1) - (x + r2)|. The x terms cancel, so it is evaluated as
/// mean |r1 - r2|, which keeps it exactly independent of x.
template <typename Scalar>
Var<Scalar> target_consistency(const Var<Scalar>& x, const Var<Scalar>& r1, const Var<Scalar>& r2) {
  ops::detail::require_same_shape(x.shape(), r1.shape(), "target_consistency");
  return ops::mean(ops::abs(ops::sub(r1, r2)));
}

/// mean |residual| on a real non-shadow input.
template <typename Scalar>
Var<Scalar> identity(const Var<Scalar>& residual) {
  return ops::mean(ops::abs(residual));
}

/// mean (fake - 1)^2
template <typename Scalar>
Var<Scalar> lsgan_generator(const Var<Scalar>& fake_scores) {
  return ops::mean(ops::square(ops::add_scalar(fake_scores, Scalar(-1))));
}

/// 0.5 mean (real - 1)^2 + 0.5 mean fake^2
template <typename Scalar>
Var<Scalar> lsgan_discriminator(const Var<Scalar>& real_scores, const Var<Scalar>& fake_scores) {
  auto real_term = ops::mean(ops::square(ops::add_scalar(real_scores, Scalar(-1))));
  auto fake_term = ops::mean(ops::square(fake_scores));
  return ops::scale(ops::add(real_term, fake_term), Scalar(0.5));
}

/// Mean binary cross-entropy on logits, computed in the overflow-safe form
/// max(z, 0) - z * y + log(1 + exp(-|z|)).
template <typename Scalar>
Var<Scalar> bce_with_logits(const Var<Scalar>& logits, const Tensor<Scalar>& labels) {
  ops::detail::require_same_shape(logits.shape(), labels.shape, "bce_with_logits");
  const auto& z = logits.value().data;
  const Eigen::Index count = z.size();
  Tensor<Scalar> out(Shape{1, 1, 1, 1});
  out.data[0] = (z.max(Scalar(0)) - z * labels.data + (Scalar(1) + (-z.abs()).exp()).log()).sum() / Scalar(count);
  return Var<Scalar>::from_op(std::move(out), {logits}, [logits, labels, count](const auto& g) {
    const auto& zz = logits.value().data;
    auto p = (Scalar(1) + (-zz).exp()).inverse();
    logits.grad_buffer() += (p - labels.data) * (g[0] / Scalar(count));
  });
}

}  // namespace losses

/// Convenience overloads on the domain types, evaluated in double.
double target_consistency(const ImageTensor& x, const ResidualTensor& r1, const ResidualTensor& r2);
double identity_loss(const ResidualTensor& residual_on_nonshadow);
double lsgan_generator_loss(const Tensor<double>& fake_scores);
double lsgan_discriminator_loss(const Tensor<double>& real_scores, const Tensor<double>& fake_scores);

}  // namespace tcgan

#endif  // TCGAN_LOSSES_HPP
