#ifndef TCGAN_NN_HPP
#define TCGAN_NN_HPP

// Differentiable layer primitives: convolution (im2col + GEMM), transposed
// convolution, reflection padding, instance normalisation and pooling.

#include "tcgan/autodiff.hpp"

#include <cstdlib>
#include <memory>
#include <vector>

namespace tcgan::ops {

namespace detail {

/// Unfolds a [channels, height, width] plane stack into a row-major
/// [channels*kernel*kernel, out_h*out_w] matrix; out-of-range taps read zero.
template <typename Scalar>
void im2col(const Scalar* src, int channels, int height, int width, int kernel, int stride, int pad,
            int out_h, int out_w, Scalar* cols) {
  const Eigen::Index pixels = Eigen::Index(out_h) * out_w;
  for (int c = 0; c < channels; ++c) {
    const Scalar* plane = src + Eigen::Index(c) * height * width;
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        Scalar* row = cols + ((Eigen::Index(c) * kernel + ky) * kernel + kx) * pixels;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride - pad + ky;
          Scalar* dst = row + Eigen::Index(oy) * out_w;
          if (iy < 0 || iy >= height) {
            std::fill(dst, dst + out_w, Scalar(0));
            continue;
          }
          const Scalar* line = plane + Eigen::Index(iy) * width;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * stride - pad + kx;
            dst[ox] = (ix >= 0 && ix < width) ? line[ix] : Scalar(0);
          }
        }
      }
    }
  }
}

/// Adjoint of im2col: scatters-and-adds columns back into the plane stack.
template <typename Scalar>
void col2im(const Scalar* cols, int channels, int height, int width, int kernel, int stride, int pad,
            int out_h, int out_w, Scalar* dst) {
  const Eigen::Index pixels = Eigen::Index(out_h) * out_w;
  for (int c = 0; c < channels; ++c) {
    Scalar* plane = dst + Eigen::Index(c) * height * width;
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        const Scalar* row = cols + ((Eigen::Index(c) * kernel + ky) * kernel + kx) * pixels;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= height) continue;
          Scalar* line = plane + Eigen::Index(iy) * width;
          const Scalar* srow = row + Eigen::Index(oy) * out_w;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < width) line[ix] += srow[ox];
          }
        }
      }
    }
  }
}

/// Reflection index without edge repetition; a length-1 axis replicates.
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i = std::abs(i) % period;
  return i < n ? i : period - i;
}

}  // namespace detail

/// 2-D convolution. weight: {out, in, k, k}; bias: {1, out, 1, 1}; implicit
/// zero padding of `pad` pixels.
template <typename Scalar>
Var<Scalar> conv2d(const Var<Scalar>& x, const Var<Scalar>& weight, const Var<Scalar>& bias, int stride,
                   int pad) {
  const Shape in = x.shape();
  const Shape ws = weight.shape();
  if (ws.c != in.c || ws.h != ws.w) {
    throw ShapeError("conv2d: weight " + to_string(ws) + " incompatible with input " + to_string(in));
  }
  const int k = ws.h;
  const int out_h = (in.h + 2 * pad - k) / stride + 1;
  const int out_w = (in.w + 2 * pad - k) / stride + 1;
  if (in.h + 2 * pad < k || in.w + 2 * pad < k || out_h <= 0 || out_w <= 0) {
    throw ShapeError("conv2d: input " + to_string(in) + " too small for kernel " + std::to_string(k));
  }
  const Shape os{in.n, ws.n, out_h, out_w};
  const Eigen::Index rows = Eigen::Index(in.c) * k * k;
  const Eigen::Index pixels = Eigen::Index(out_h) * out_w;

  Eigen::Map<const RowMatrix<Scalar>> wmat(weight.value().data.data(), ws.n, rows);
  Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> bvec(bias.value().data.data(), ws.n);

  auto cols = std::make_shared<std::vector<RowMatrix<Scalar>>>(in.n);
  Tensor<Scalar> out(os);
  for (int n = 0; n < in.n; ++n) {
    RowMatrix<Scalar>& c = (*cols)[n];
    c.resize(rows, pixels);
    detail::im2col(x.value().data.data() + n * in.sample(), in.c, in.h, in.w, k, stride, pad, out_h, out_w,
                   c.data());
    auto o = out.sample_matrix(n);
    o.noalias() = wmat * c;
    o.colwise() += bvec;
  }

  return Var<Scalar>::from_op(std::move(out), {x, weight, bias}, [=](const auto& g) {
    for (int n = 0; n < in.n; ++n) {
      Eigen::Map<const RowMatrix<Scalar>> gout(g.data() + n * os.sample(), os.c, pixels);
      if (weight.requires_grad()) {
        Eigen::Map<RowMatrix<Scalar>> gw(weight.grad_buffer().data(), ws.n, rows);
        gw.noalias() += gout * (*cols)[n].transpose();
      }
      if (bias.requires_grad()) {
        Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> gb(bias.grad_buffer().data(), ws.n);
        gb += gout.rowwise().sum();
      }
      if (x.requires_grad()) {
        Eigen::Map<const RowMatrix<Scalar>> w(weight.value().data.data(), ws.n, rows);
        RowMatrix<Scalar> gcols = w.transpose() * gout;
        detail::col2im(gcols.data(), in.c, in.h, in.w, k, stride, pad, out_h, out_w,
                       x.grad_buffer().data() + n * in.sample());
      }
    }
  });
}

/// Transposed convolution. weight: {in, out, k, k}; output size
/// (H-1)*stride - 2*pad + k + output_pad.
template <typename Scalar>
Var<Scalar> conv_transpose2d(const Var<Scalar>& x, const Var<Scalar>& weight, const Var<Scalar>& bias,
                             int stride, int pad, int output_pad) {
  const Shape in = x.shape();
  const Shape ws = weight.shape();
  if (ws.n != in.c || ws.h != ws.w) {
    throw ShapeError("conv_transpose2d: weight " + to_string(ws) + " incompatible with input " +
                     to_string(in));
  }
  const int k = ws.h;
  const int out_h = (in.h - 1) * stride - 2 * pad + k + output_pad;
  const int out_w = (in.w - 1) * stride - 2 * pad + k + output_pad;
  if (out_h <= 0 || out_w <= 0) throw ShapeError("conv_transpose2d: empty output");
  const Shape os{in.n, ws.c, out_h, out_w};
  const Eigen::Index rows = Eigen::Index(ws.c) * k * k;
  const Eigen::Index pixels = in.plane();

  Eigen::Map<const RowMatrix<Scalar>> wmat(weight.value().data.data(), ws.n, rows);
  Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> bvec(bias.value().data.data(), ws.c);

  Tensor<Scalar> out(os);
  RowMatrix<Scalar> cols(rows, pixels);
  for (int n = 0; n < in.n; ++n) {
    cols.noalias() = wmat.transpose() * x.value().sample_matrix(n);
    detail::col2im(cols.data(), os.c, out_h, out_w, k, stride, pad, in.h, in.w,
                   out.data.data() + n * os.sample());
    out.sample_matrix(n).colwise() += bvec;
  }

  return Var<Scalar>::from_op(std::move(out), {x, weight, bias}, [=](const auto& g) {
    RowMatrix<Scalar> gcols(rows, pixels);
    for (int n = 0; n < in.n; ++n) {
      detail::im2col(g.data() + n * os.sample(), os.c, out_h, out_w, k, stride, pad, in.h, in.w, gcols.data());
      if (weight.requires_grad()) {
        Eigen::Map<RowMatrix<Scalar>> gw(weight.grad_buffer().data(), ws.n, rows);
        gw.noalias() += x.value().sample_matrix(n) * gcols.transpose();
      }
      if (bias.requires_grad()) {
        Eigen::Map<const RowMatrix<Scalar>> gout(g.data() + n * os.sample(), os.c, os.plane());
        Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> gb(bias.grad_buffer().data(), ws.c);
        gb += gout.rowwise().sum();
      }
      if (x.requires_grad()) {
        Eigen::Map<const RowMatrix<Scalar>> w(weight.value().data.data(), ws.n, rows);
        Eigen::Map<RowMatrix<Scalar>> gx(x.grad_buffer().data() + n * in.sample(), in.c, pixels);
        gx.noalias() += w * gcols;
      }
    }
  });
}

template <typename Scalar>
Var<Scalar> reflect_pad(const Var<Scalar>& x, int pad) {
  const Shape in = x.shape();
  const Shape os{in.n, in.c, in.h + 2 * pad, in.w + 2 * pad};
  std::vector<int> ys(os.h), xs(os.w);
  for (int y = 0; y < os.h; ++y) ys[y] = detail::reflect_index(y - pad, in.h);
  for (int i = 0; i < os.w; ++i) xs[i] = detail::reflect_index(i - pad, in.w);

  Tensor<Scalar> out(os);
  for (int n = 0; n < in.n; ++n)
    for (int c = 0; c < in.c; ++c)
      for (int y = 0; y < os.h; ++y)
        for (int i = 0; i < os.w; ++i) out.at(n, c, y, i) = x.value().at(n, c, ys[y], xs[i]);

  return Var<Scalar>::from_op(std::move(out), {x}, [x, in, os, ys, xs](const auto& g) {
    auto& gx = x.grad_buffer();
    Eigen::Index idx = 0;
    for (int n = 0; n < in.n; ++n)
      for (int c = 0; c < in.c; ++c) {
        Scalar* plane = gx.data() + (Eigen::Index(n) * in.c + c) * in.plane();
        for (int y = 0; y < os.h; ++y)
          for (int i = 0; i < os.w; ++i) plane[Eigen::Index(ys[y]) * in.w + xs[i]] += g[idx++];
      }
  });
}

/// Per-sample, per-channel normalisation with learned affine (gamma, beta
/// shaped {1, C, 1, 1}); no running statistics.
template <typename Scalar>
Var<Scalar> instance_norm(const Var<Scalar>& x, const Var<Scalar>& gamma, const Var<Scalar>& beta,
                          Scalar eps = Scalar(1e-8)) {
  const Shape in = x.shape();
  if (gamma.shape().c != in.c || beta.shape().c != in.c) throw ShapeError("instance_norm: channel mismatch");
  const Eigen::Index plane = in.plane();

  auto xhat = std::make_shared<typename Tensor<Scalar>::Array>(in.size());
  auto inv_std = std::make_shared<typename Tensor<Scalar>::Array>(Eigen::Index(in.n) * in.c);
  Tensor<Scalar> out(in);
  for (int n = 0; n < in.n; ++n) {
    for (int c = 0; c < in.c; ++c) {
      const Eigen::Index off = (Eigen::Index(n) * in.c + c) * plane;
      auto src = x.value().data.segment(off, plane);
      const Scalar mu = src.mean();
      const Scalar var = (src - mu).square().mean();
      const Scalar is = Scalar(1) / std::sqrt(var + eps);
      (*inv_std)[Eigen::Index(n) * in.c + c] = is;
      xhat->segment(off, plane) = (src - mu) * is;
      out.data.segment(off, plane) = xhat->segment(off, plane) * gamma.value().data[c] + beta.value().data[c];
    }
  }

  return Var<Scalar>::from_op(std::move(out), {x, gamma, beta}, [=](const auto& g) {
    for (int n = 0; n < in.n; ++n) {
      for (int c = 0; c < in.c; ++c) {
        const Eigen::Index off = (Eigen::Index(n) * in.c + c) * plane;
        auto gy = g.segment(off, plane);
        auto xh = xhat->segment(off, plane);
        if (gamma.requires_grad()) gamma.grad_buffer()[c] += (gy * xh).sum();
        if (beta.requires_grad()) beta.grad_buffer()[c] += gy.sum();
        if (x.requires_grad()) {
          const Scalar gm = gamma.value().data[c];
          const Scalar mean_g = gy.mean() * gm;
          const Scalar mean_gx = (gy * xh).mean() * gm;
          x.grad_buffer().segment(off, plane) +=
              (gy * gm - mean_g - xh * mean_gx) * (*inv_std)[Eigen::Index(n) * in.c + c];
        }
      }
    }
  });
}

/// {N, C, H, W} -> {N, C, 1, 1}
template <typename Scalar>
Var<Scalar> global_avg_pool(const Var<Scalar>& x) {
  const Shape in = x.shape();
  const Eigen::Index plane = in.plane();
  Tensor<Scalar> out(Shape{in.n, in.c, 1, 1});
  for (Eigen::Index i = 0; i < Eigen::Index(in.n) * in.c; ++i) out.data[i] = x.value().data.segment(i * plane, plane).mean();
  return Var<Scalar>::from_op(std::move(out), {x}, [x, in, plane](const auto& g) {
    auto& gx = x.grad_buffer();
    for (Eigen::Index i = 0; i < Eigen::Index(in.n) * in.c; ++i) gx.segment(i * plane, plane) += g[i] / Scalar(plane);
  });
}

}  // namespace tcgan::ops

#endif  // TCGAN_NN_HPP
