#include "test_support.hpp"

#include "tcgan/errors.hpp"
#include "tcgan/inference.hpp"
#include "tcgan/trainer.hpp"

#include <doctest.h>
#include <opencv2/imgcodecs.hpp>

#include <fstream>
#include <iterator>

using namespace tcgan;

namespace {

void zero_last_stage(const Generator<float>& g) {
  const auto params = g.params();
  for (std::size_t i = params.size() - 2; i < params.size(); ++i) params[i].var.mutable_value().data.setZero();
}

}  // namespace

TEST_CASE("branch selection") {
  CHECK(select_branch(0.9, 0.4) == 1);
  CHECK(select_branch(0.3, 0.8) == 2);
  CHECK(select_branch(0.5, 0.5) == 1);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(1e-6, 1.0 - 1e-6);
  auto logit = [](double p) { return std::log(p / (1.0 - p)); };
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng);
    CHECK(select_branch(a, b) == select_branch(logit(a), logit(b)));
    CHECK(select_branch(a, b) == select_branch(a * a * a, b * b * b));
  }
}

TEST_CASE("zero-residual generator returns the input") {
  const Generator<float> g(GeneratorArch{8, 1}, 3);
  zero_last_stage(g);
  std::mt19937_64 rng(2);
  const ImageTensor x = testing::random_image(32, 32, rng);
  CHECK(remove_shadow_fixed(g, x) == x);
  CHECK((predict_residual(g, x).tensor().data == 0.0f).all());
}

TEST_CASE("removal output is a valid image and matches the fixed branches") {
  const GeneratorPair gp(GeneratorArch{8, 2}, 1, 2);
  const Msm<float> msm(DiscriminatorArch{8}, 3);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 3; ++i) {
    const ImageTensor x = testing::random_image(32, 48, rng);
    const RemovalResult r = remove_shadow(gp, msm, x);
    CHECK(r.selected.tensor().data.abs().maxCoeff() <= 1.0f);
    CHECK(r.y1 == remove_shadow_fixed(gp.g1, x));
    CHECK(r.y2 == remove_shadow_fixed(gp.g2, x));
    CHECK(r.selected == (r.selected_branch == 1 ? r.y1 : r.y2));
    CHECK(r.selected_branch == select_branch(r.prob1, r.prob2));
    CHECK(r.prob1 == msm_probability(msm, r.y1));
  }
  CHECK_THROWS_AS(remove_shadow(gp, msm, testing::random_image(36, 36, rng)), ShapeError);
}

TEST_CASE("feature grid layout") {
  const GeneratorPair gp(GeneratorArch{}, 1, 2);
  std::mt19937_64 rng(4);
  const ImageTensor x = testing::random_image(256, 256, rng);
  const Tensor<float> f = gp.g1.features(x.as_var<float>()).value();
  const ImageTensor grid = feature_grid(f, 10);
  CHECK(grid.height() == 2 * 32);
  CHECK(grid.width() == 5 * 32);
  CHECK(feature_grid(f, 3).width() == 3 * 32);
  CHECK_THROWS_AS(feature_grid(f, 0), ShapeError);
  CHECK_THROWS_AS(feature_grid(f, 257), ShapeError);
}

TEST_CASE("constant channel renders as mid-gray") {
  Tensor<float> f(Shape{1, 2, 4, 4});
  f.data.head(16).setConstant(3.0f);
  for (int i = 16; i < 32; ++i) f.data[i] = float(i);
  const ImageTensor grid = feature_grid(f, 2);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) CHECK(to_byte(grid.tensor().at(0, c, y, x)) == 128);
  // The ramp runs dark to bright: the minimum of channel 2 is darker than its maximum.
  auto luminance = [&](int y, int x) {
    double s = 0;
    for (int c = 0; c < 3; ++c) s += grid.tensor().at(0, c, y, x);
    return s;
  };
  CHECK(luminance(0, 4) < luminance(3, 7));
}

TEST_CASE("feature dump files") {
  const auto dir = testing::scratch_dir("dump");
  TrainConfig cfg;
  cfg.generator = {8, 1};
  cfg.discriminator = {8};
  cfg.crop = 32;
  cfg.pre_crop = 32;
  TrainState state = TrainState::initialize(cfg);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 3; ++i) {
    TrainBatch b{testing::random_image(32, 32, rng), testing::random_image(32, 32, rng),
                 testing::random_image(32, 32, rng)};
    train_step(state, b);
  }
  const ImageTensor x = testing::random_image(64, 64, rng);
  const FeatureDump d = dump_ste_features(state.generators, x, 10, dir);
  CHECK_THROWS_AS(dump_ste_features(state.generators, x, 33, dir), ShapeError);

  const cv::Mat g1 = cv::imread(d.grid1.string(), cv::IMREAD_COLOR);
  const cv::Mat g2 = cv::imread(d.grid2.string(), cv::IMREAD_COLOR);
  REQUIRE_FALSE(g1.empty());
  CHECK(g1.rows == 16);
  CHECK(g1.cols == 40);
  CHECK(cv::countNonZero(g1.reshape(1) != g2.reshape(1)) > 0);

  std::ifstream in(d.raw1, std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  REQUIRE(bytes.size() > 10);
  CHECK(bytes.substr(0, 6) == "\x93NUMPY");
  const std::size_t header_len = std::uint8_t(bytes[8]) | (std::size_t(std::uint8_t(bytes[9])) << 8);
  CHECK((10 + header_len) % 64 == 0);
  const std::string header = bytes.substr(10, header_len);
  CHECK(header.find("'descr': '<f4'") != std::string::npos);
  CHECK(header.find("'shape': (10, 8, 8)") != std::string::npos);
  CHECK(bytes.size() == 10 + header_len + 10 * 8 * 8 * 4);

  const Tensor<float> f = state.generators.g1.features(x.as_var<float>()).value();
  float first;
  std::memcpy(&first, bytes.data() + 10 + header_len, 4);
  CHECK(first == f.data[0]);
}
