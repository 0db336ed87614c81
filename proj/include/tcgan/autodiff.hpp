#ifndef TCGAN_AUTODIFF_HPP
#define TCGAN_AUTODIFF_HPP

// Minimal reverse-mode automatic differentiation over dense Eigen-backed
// tensors. A Var is a handle to a graph node; operations on Vars record a
// backward closure only when at least one input requires a gradient.

#include "tcgan/errors.hpp"
#include "tcgan/tensor.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <unordered_set>
#include <utility>
#include <vector>

namespace tcgan {

template <typename Scalar>
struct Node {
  using Array = typename Tensor<Scalar>::Array;

  Tensor<Scalar> value;
  Tensor<Scalar> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(const Array&)> backward;

  /// Gradient accumulator, zero-initialised on first use.
  Array& grad_buffer() {
    if (grad.empty()) grad = Tensor<Scalar>(value.shape);
    return grad.data;
  }
};

template <typename Scalar>
class Var {
 public:
  using Array = typename Tensor<Scalar>::Array;

  Var() = default;

  static Var constant(Tensor<Scalar> value) { return Var(std::move(value), false); }
  static Var parameter(Tensor<Scalar> value) { return Var(std::move(value), true); }

  bool defined() const { return node_ != nullptr; }
  const Tensor<Scalar>& value() const { return node_->value; }
  Tensor<Scalar>& mutable_value() const { return node_->value; }
  const Shape& shape() const { return node_->value.shape; }
  bool requires_grad() const { return node_->requires_grad; }

  /// Accumulated gradient; empty when nothing has flowed into this node.
  const Tensor<Scalar>& grad() const { return node_->grad; }
  Array& grad_buffer() const { return node_->grad_buffer(); }
  void zero_grad() const { node_->grad = Tensor<Scalar>(); }

  Var detach() const { return constant(node_->value); }
  Scalar item() const {
    if (node_->value.data.size() != 1) throw ShapeError("item() on non-scalar " + to_string(shape()));
    return node_->value.data[0];
  }

  const std::shared_ptr<Node<Scalar>>& node() const { return node_; }

  template <typename Fn>
  static Var from_op(Tensor<Scalar> value, std::vector<Var> inputs, Fn&& backward) {
    Var out(std::move(value), false);
    for (const auto& in : inputs) {
      if (in.requires_grad()) {
        out.node_->requires_grad = true;
        break;
      }
    }
    if (out.node_->requires_grad) {
      out.node_->parents.reserve(inputs.size());
      for (const auto& in : inputs) out.node_->parents.push_back(in.node_);
      out.node_->backward = std::forward<Fn>(backward);
    }
    return out;
  }

 private:
  Var(Tensor<Scalar> value, bool requires_grad) : node_(std::make_shared<Node<Scalar>>()) {
    node_->value = std::move(value);
    node_->requires_grad = requires_grad;
  }

  std::shared_ptr<Node<Scalar>> node_;
};

/// Back-propagates from a scalar root. Leaf gradients accumulate; interior
/// node gradients are released once consumed.
template <typename Scalar>
void backward(const Var<Scalar>& root) {
  if (root.value().data.size() != 1) throw ShapeError("backward() requires a scalar root");
  if (!root.requires_grad()) return;

  std::vector<Node<Scalar>*> order;
  std::unordered_set<Node<Scalar>*> visited;
  std::vector<std::pair<Node<Scalar>*, std::size_t>> stack{{root.node().get(), 0}};
  visited.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<Scalar>* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.push_back({parent, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root.grad_buffer().setConstant(Scalar(1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<Scalar>* node = *it;
    if (!node->backward || node->grad.empty()) continue;
    node->backward(node->grad.data);
    node->grad = Tensor<Scalar>();
  }
}

namespace ops {

namespace detail {
inline void require_same_shape(const Shape& a, const Shape& b, const char* op) {
  if (!(a == b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a) + " vs " + to_string(b));
  }
}
}  // namespace detail

template <typename Scalar>
Var<Scalar> add(const Var<Scalar>& a, const Var<Scalar>& b) {
  detail::require_same_shape(a.shape(), b.shape(), "add");
  Tensor<Scalar> out(a.shape(), a.value().data + b.value().data);
  return Var<Scalar>::from_op(std::move(out), {a, b}, [a, b](const auto& g) {
    if (a.requires_grad()) a.grad_buffer() += g;
    if (b.requires_grad()) b.grad_buffer() += g;
  });
}

template <typename Scalar>
Var<Scalar> sub(const Var<Scalar>& a, const Var<Scalar>& b) {
  detail::require_same_shape(a.shape(), b.shape(), "sub");
  Tensor<Scalar> out(a.shape(), a.value().data - b.value().data);
  return Var<Scalar>::from_op(std::move(out), {a, b}, [a, b](const auto& g) {
    if (a.requires_grad()) a.grad_buffer() += g;
    if (b.requires_grad()) b.grad_buffer() -= g;
  });
}

template <typename Scalar>
Var<Scalar> scale(const Var<Scalar>& a, Scalar s) {
  Tensor<Scalar> out(a.shape(), a.value().data * s);
  return Var<Scalar>::from_op(std::move(out), {a}, [a, s](const auto& g) { a.grad_buffer() += g * s; });
}

template <typename Scalar>
Var<Scalar> add_scalar(const Var<Scalar>& a, Scalar s) {
  Tensor<Scalar> out(a.shape(), a.value().data + s);
  return Var<Scalar>::from_op(std::move(out), {a}, [a](const auto& g) { a.grad_buffer() += g; });
}

template <typename Scalar>
Var<Scalar> relu(const Var<Scalar>& a) {
  Tensor<Scalar> out(a.shape(), a.value().data.max(Scalar(0)));
  return Var<Scalar>::from_op(std::move(out), {a}, [a](const auto& g) {
    a.grad_buffer() += (a.value().data > Scalar(0)).select(g, Scalar(0));
  });
}

template <typename Scalar>
Var<Scalar> leaky_relu(const Var<Scalar>& a, Scalar slope) {
  const auto& x = a.value().data;
  Tensor<Scalar> out(a.shape(), (x > Scalar(0)).select(x, x * slope));
  return Var<Scalar>::from_op(std::move(out), {a}, [a, slope](const auto& g) {
    a.grad_buffer() += (a.value().data > Scalar(0)).select(g, g * slope);
  });
}

template <typename Scalar>
Var<Scalar> tanh(const Var<Scalar>& a) {
  Tensor<Scalar> out(a.shape(), a.value().data.tanh());
  auto y = std::make_shared<typename Tensor<Scalar>::Array>(out.data);
  return Var<Scalar>::from_op(std::move(out), {a}, [a, y](const auto& g) {
    a.grad_buffer() += g * (Scalar(1) - y->square());
  });
}

template <typename Scalar>
Var<Scalar> sigmoid(const Var<Scalar>& a) {
  Tensor<Scalar> out(a.shape(), (Scalar(1) + (-a.value().data).exp()).inverse());
  auto y = std::make_shared<typename Tensor<Scalar>::Array>(out.data);
  return Var<Scalar>::from_op(std::move(out), {a}, [a, y](const auto& g) {
    a.grad_buffer() += g * (*y) * (Scalar(1) - *y);
  });
}

/// Element-wise clamp; gradient passes only where the input is inside [lo, hi].
template <typename Scalar>
Var<Scalar> clamp(const Var<Scalar>& a, Scalar lo, Scalar hi) {
  Tensor<Scalar> out(a.shape(), a.value().data.max(lo).min(hi));
  return Var<Scalar>::from_op(std::move(out), {a}, [a, lo, hi](const auto& g) {
    const auto& x = a.value().data;
    a.grad_buffer() += (x >= lo && x <= hi).select(g, Scalar(0));
  });
}

template <typename Scalar>
Var<Scalar> abs(const Var<Scalar>& a) {
  Tensor<Scalar> out(a.shape(), a.value().data.abs());
  return Var<Scalar>::from_op(std::move(out), {a}, [a](const auto& g) {
    const auto& x = a.value().data;
    a.grad_buffer() += g * ((x > Scalar(0)).template cast<Scalar>() - (x < Scalar(0)).template cast<Scalar>());
  });
}

template <typename Scalar>
Var<Scalar> square(const Var<Scalar>& a) {
  Tensor<Scalar> out(a.shape(), a.value().data.square());
  return Var<Scalar>::from_op(std::move(out), {a}, [a](const auto& g) {
    a.grad_buffer() += g * Scalar(2) * a.value().data;
  });
}

template <typename Scalar>
Var<Scalar> mean(const Var<Scalar>& a) {
  const Eigen::Index count = a.value().data.size();
  if (count == 0) throw ShapeError("mean of an empty tensor");
  Tensor<Scalar> out(Shape{1, 1, 1, 1});
  out.data[0] = a.value().data.sum() / Scalar(count);
  return Var<Scalar>::from_op(std::move(out), {a}, [a, count](const auto& g) {
    a.grad_buffer() += g[0] / Scalar(count);
  });
}

}  // namespace ops
}  // namespace tcgan

#endif  // TCGAN_AUTODIFF_HPP
