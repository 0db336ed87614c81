#include "tcgan/inference.hpp"

#include "tcgan/errors.hpp"

#include <algorithm>
#include <array>
#include <fstream>

namespace tcgan {

ResidualTensor predict_residual(const Generator<float>& g, const ImageTensor& x) {
  Tensor<float> r = g.forward(x.as_var<float>()).value();
  r.data = r.data.max(-2.0f).min(2.0f);
  return ResidualTensor(std::move(r));
}

ImageTensor remove_shadow_fixed(const Generator<float>& g, const ImageTensor& x) {
  return compose_shadow_free(x, predict_residual(g, x));
}

RemovalResult remove_shadow(const GeneratorPair& gp, const Msm<float>& msm, const ImageTensor& x) {
  RemovalResult r;
  r.y1 = remove_shadow_fixed(gp.g1, x);
  r.y2 = remove_shadow_fixed(gp.g2, x);
  r.prob1 = double(msm.probability(r.y1.as_var<float>()).item());
  r.prob2 = double(msm.probability(r.y2.as_var<float>()).item());
  r.selected_branch = select_branch(r.prob1, r.prob2);
  r.selected = r.selected_branch == 1 ? r.y1 : r.y2;
  return r;
}

namespace {

// Five anchors of the viridis ramp (dark purple -> yellow, increasing luminance).
constexpr std::array<std::array<double, 3>, 5> kRamp{{
    {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};

std::array<double, 3> ramp(double t) {
  t = std::clamp(t, 0.0, 1.0) * double(kRamp.size() - 1);
  const std::size_t i = std::min(std::size_t(t), kRamp.size() - 2);
  const double f = t - double(i);
  std::array<double, 3> out{};
  for (int c = 0; c < 3; ++c) out[c] = kRamp[i][c] + f * (kRamp[i + 1][c] - kRamp[i][c]);
  return out;
}

}  // namespace

ImageTensor feature_grid(const Tensor<float>& features, int k) {
  const Shape s = features.shape;
  if (k < 1 || k > s.c) throw ShapeError("feature_grid: k must lie in [1, " + std::to_string(s.c) + "]");
  const int cols = std::min(k, 5);
  const int rows = (k + cols - 1) / cols;
  Tensor<float> grid = Tensor<float>::constant(Shape{1, 3, rows * s.h, cols * s.w}, -1.0f);
  for (int ch = 0; ch < k; ++ch) {
    const auto plane = features.data.segment(Eigen::Index(ch) * s.plane(), s.plane());
    const float lo = plane.minCoeff();
    const float hi = plane.maxCoeff();
    const int oy = (ch / cols) * s.h;
    const int ox = (ch % cols) * s.w;
    for (int y = 0; y < s.h; ++y) {
      for (int x = 0; x < s.w; ++x) {
        std::array<double, 3> rgb{128.0, 128.0, 128.0};
        if (hi > lo) {
          const double byte = std::round(255.0 * (plane[Eigen::Index(y) * s.w + x] - lo) / (hi - lo));
          rgb = ramp(byte / 255.0);
        }
        for (int c = 0; c < 3; ++c) grid.at(0, c, oy + y, ox + x) = from_byte(std::uint8_t(std::lround(rgb[c])));
      }
    }
  }
  return ImageTensor(std::move(grid));
}

void write_npy(const std::filesystem::path& path, const float* data, const std::vector<int>& shape) {
  std::string dims;
  std::size_t count = 1;
  for (int d : shape) {
    dims += std::to_string(d) + ", ";
    count *= std::size_t(d);
  }
  if (shape.size() > 1) dims.erase(dims.size() - 2);
  else if (shape.size() == 1) dims.erase(dims.size() - 1);
  std::string header = "{'descr': '<f4', 'fortran_order': False, 'shape': (" + dims + "), }";
  const std::size_t preamble = 10;
  header.append(64 - (preamble + header.size() + 1) % 64, ' ');
  header.push_back('\n');

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write("\x93NUMPY\x01\x00", 8);
  const std::uint16_t len = std::uint16_t(header.size());
  out.write(reinterpret_cast<const char*>(&len), 2);
  out.write(header.data(), std::streamsize(header.size()));
  out.write(reinterpret_cast<const char*>(data), std::streamsize(count * sizeof(float)));
  if (!out) throw DataError("failed while writing " + path.string());
}

FeatureDump dump_ste_features(const GeneratorPair& gp, const ImageTensor& x, int k,
                              const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  FeatureDump dump;
  int index = 1;
  for (const Generator<float>* g : {&gp.g1, &gp.g2}) {
    const Tensor<float> features = g->features(x.as_var<float>()).value();
    if (k < 1 || k > features.shape.c) {
      throw ShapeError("channel count must lie in [1, " + std::to_string(features.shape.c) + "]");
    }
    const std::string stem = "ste" + std::to_string(index);
    const auto grid_path = out_dir / (stem + "_grid.png");
    const auto raw_path = out_dir / (stem + "_features.npy");
    save_image(feature_grid(features, k), grid_path);
    write_npy(raw_path, features.data.data(), {k, features.shape.h, features.shape.w});
    (index == 1 ? dump.grid1 : dump.grid2) = grid_path;
    (index == 1 ? dump.raw1 : dump.raw2) = raw_path;
    ++index;
  }
  return dump;
}

}  // namespace tcgan
