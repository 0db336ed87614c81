#include "tcgan/losses.hpp"

#include "tcgan/errors.hpp"

#include <array>
#include <cmath>
#include <utility>

namespace tcgan {

LossBundle combine(const LossWeights& w, double gan1, double gan2, double tc, double idt1, double idt2) {
  const std::array<std::pair<const char*, double>, 5> terms{
      {{"gan1", gan1}, {"gan2", gan2}, {"tc", tc}, {"idt1", idt1}, {"idt2", idt2}}};
  for (const auto& [name, value] : terms) {
    if (!std::isfinite(value)) throw DivergenceError(std::string("non-finite loss term: ") + name);
  }
  LossBundle b{gan1, gan2, tc, idt1, idt2, 0.0};
  b.total = w.lambda1 * (gan1 + gan2) + w.lambda2 * tc + w.lambda3 * (idt1 + idt2);
  return b;
}

double target_consistency(const ImageTensor& x, const ResidualTensor& r1, const ResidualTensor& r2) {
  return losses::target_consistency(x.as_var<double>(), r1.as_var<double>(), r2.as_var<double>()).item();
}

double identity_loss(const ResidualTensor& residual_on_nonshadow) {
  return losses::identity(residual_on_nonshadow.as_var<double>()).item();
}

double lsgan_generator_loss(const Tensor<double>& fake_scores) {
  return losses::lsgan_generator(Var<double>::constant(fake_scores)).item();
}

double lsgan_discriminator_loss(const Tensor<double>& real_scores, const Tensor<double>& fake_scores) {
  return losses::lsgan_discriminator(Var<double>::constant(real_scores), Var<double>::constant(fake_scores))
      .item();
}

}  // namespace tcgan
