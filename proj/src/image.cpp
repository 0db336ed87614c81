#include "tcgan/image.hpp"

#include "tcgan/errors.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>

namespace tcgan {

namespace {

void require_image_shape(const Shape& s, int channels, const char* what) {
  if (s.n != 1 || s.c != channels || s.h <= 0 || s.w <= 0) {
    throw ShapeError(std::string(what) + " must have shape 1x" + std::to_string(channels) + "xHxW, got " +
                     to_string(s));
  }
}

void require_range(const Tensor<float>& t, float lo, float hi, const char* what) {
  if (!t.data.isFinite().all()) throw ShapeError(std::string(what) + " contains non-finite values");
  if (t.data.size() > 0 && (t.data.minCoeff() < lo || t.data.maxCoeff() > hi)) {
    throw ShapeError(std::string(what) + " values outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

cv::Mat to_mat(const ImageTensor& image) {
  const Tensor<float>& t = image.tensor();
  cv::Mat mat(t.shape.h, t.shape.w, CV_32FC3);
  for (int y = 0; y < t.shape.h; ++y) {
    auto* row = mat.ptr<cv::Vec3f>(y);
    for (int x = 0; x < t.shape.w; ++x)
      for (int c = 0; c < 3; ++c) row[x][c] = t.at(0, c, y, x);
  }
  return mat;
}

ImageTensor from_mat(const cv::Mat& mat) {
  Tensor<float> t(Shape{1, 3, mat.rows, mat.cols});
  for (int y = 0; y < mat.rows; ++y) {
    const auto* row = mat.ptr<cv::Vec3f>(y);
    for (int x = 0; x < mat.cols; ++x)
      for (int c = 0; c < 3; ++c) t.at(0, c, y, x) = std::clamp(row[x][c], -1.0f, 1.0f);
  }
  return ImageTensor(std::move(t));
}

}  // namespace

ImageTensor::ImageTensor(Tensor<float> t) : t_(std::move(t)) {
  require_image_shape(t_.shape, 3, "image");
  require_range(t_, -1.0f, 1.0f, "image");
}

ImageTensor ImageTensor::constant(int height, int width, float value) {
  return ImageTensor(Tensor<float>::constant(Shape{1, 3, height, width}, value));
}

ResidualTensor::ResidualTensor(Tensor<float> t) : t_(std::move(t)) {
  require_image_shape(t_.shape, 3, "residual");
  require_range(t_, -2.0f, 2.0f, "residual");
}

ResidualTensor ResidualTensor::constant(int height, int width, float value) {
  return ResidualTensor(Tensor<float>::constant(Shape{1, 3, height, width}, value));
}

MaskTensor::MaskTensor(Tensor<float> t) : t_(std::move(t)) {
  require_image_shape(t_.shape, 1, "mask");
  require_range(t_, 0.0f, 1.0f, "mask");
}

bool MaskTensor::is_binary() const { return (t_.data == 0.0f || t_.data == 1.0f).all(); }

std::uint8_t to_byte(float value) {
  const double v = (double(value) + 1.0) * 127.5;
  return std::uint8_t(std::clamp(std::round(v), 0.0, 255.0));
}

ImageTensor load_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("image not found: " + path.string());
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw DataError("cannot decode image: " + path.string());
  if (bgr.depth() != CV_8U) throw DataError("not an 8-bit image: " + path.string());
  Tensor<float> t(Shape{1, 3, bgr.rows, bgr.cols});
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x)
      for (int c = 0; c < 3; ++c) t.at(0, c, y, x) = from_byte(row[x][2 - c]);
  }
  return ImageTensor(std::move(t));
}

void save_image(const ImageTensor& image, const std::filesystem::path& path) {
  const Tensor<float>& t = image.tensor();
  cv::Mat bgr(t.shape.h, t.shape.w, CV_8UC3);
  for (int y = 0; y < t.shape.h; ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < t.shape.w; ++x)
      for (int c = 0; c < 3; ++c) row[x][2 - c] = to_byte(t.at(0, c, y, x));
  }
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), bgr);
  } catch (const cv::Exception&) {
    ok = false;
  }
  if (!ok) throw DataError("cannot write image: " + path.string());
}

MaskTensor load_mask(const std::filesystem::path& path, int threshold) {
  if (!std::filesystem::exists(path)) throw DataError("mask not found: " + path.string());
  cv::Mat gray = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
  if (gray.empty()) throw DataError("cannot decode mask: " + path.string());
  Tensor<float> t(Shape{1, 1, gray.rows, gray.cols});
  for (int y = 0; y < gray.rows; ++y) {
    const auto* row = gray.ptr<std::uint8_t>(y);
    for (int x = 0; x < gray.cols; ++x) t.at(0, 0, y, x) = row[x] > threshold ? 1.0f : 0.0f;
  }
  return MaskTensor(std::move(t));
}

void save_mask(const MaskTensor& mask, const std::filesystem::path& path) {
  const Tensor<float>& t = mask.tensor();
  cv::Mat gray(t.shape.h, t.shape.w, CV_8UC1);
  for (int y = 0; y < t.shape.h; ++y) {
    auto* row = gray.ptr<std::uint8_t>(y);
    for (int x = 0; x < t.shape.w; ++x) row[x] = std::uint8_t(std::lround(t.at(0, 0, y, x) * 255.0f));
  }
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), gray);
  } catch (const cv::Exception&) {
    ok = false;
  }
  if (!ok) throw DataError("cannot write mask: " + path.string());
}

ImageTensor compose_shadow_free(const ImageTensor& x, const ResidualTensor& r) {
  if (!(x.tensor().shape == r.tensor().shape)) {
    throw ShapeError("compose_shadow_free: shape mismatch " + to_string(x.tensor().shape) + " vs " +
                     to_string(r.tensor().shape));
  }
  Tensor<float> out(x.tensor().shape, (x.tensor().data + r.tensor().data).max(-1.0f).min(1.0f));
  return ImageTensor(std::move(out));
}

ImageTensor resize_bicubic(const ImageTensor& image, int height, int width) {
  if (height <= 0 || width <= 0) throw ShapeError("resize_bicubic: non-positive target size");
  if (height == image.height() && width == image.width()) return image;
  cv::Mat dst;
  cv::resize(to_mat(image), dst, cv::Size(width, height), 0, 0, cv::INTER_CUBIC);
  return from_mat(dst);
}

ImageTensor crop(const ImageTensor& image, int top, int left, int height, int width) {
  if (top < 0 || left < 0 || top + height > image.height() || left + width > image.width() || height <= 0 ||
      width <= 0) {
    throw ShapeError("crop window outside image");
  }
  Tensor<float> out(Shape{1, 3, height, width});
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) out.at(0, c, y, x) = image.tensor().at(0, c, top + y, left + x);
  return ImageTensor(std::move(out));
}

template <typename Scalar>
Var<Scalar> stack(const std::vector<ImageTensor>& images) {
  if (images.empty()) throw ShapeError("stack of zero images");
  const Shape first = images.front().tensor().shape;
  Tensor<Scalar> out(Shape{int(images.size()), 3, first.h, first.w});
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (!(images[i].tensor().shape == first)) throw ShapeError("stack: images differ in size");
    out.data.segment(Eigen::Index(i) * first.sample(), first.sample()) =
        images[i].tensor().data.template cast<Scalar>();
  }
  return Var<Scalar>::constant(std::move(out));
}

template Var<float> stack<float>(const std::vector<ImageTensor>&);
template Var<double> stack<double>(const std::vector<ImageTensor>&);

}  // namespace tcgan
