#include "oracles.hpp"
#include "test_support.hpp"

#include "tcgan/datapipe.hpp"
#include "tcgan/errors.hpp"
#include "tcgan/metrics.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>

using namespace tcgan;

namespace {

Eigen::MatrixXd gaussian_rows(int n, int d, std::mt19937_64& rng, double shift = 0.0) {
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd m(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = z(rng) * (1.0 + 0.3 * j) + shift;
  return m;
}

FeatureSet as_set(Eigen::MatrixXd f) { return FeatureSet{std::move(f), "test"}; }

MaskTensor random_mask(int h, int w, std::mt19937_64& rng) {
  Tensor<float> t(Shape{1, 1, h, w});
  std::bernoulli_distribution b(0.4);
  for (Eigen::Index i = 0; i < t.data.size(); ++i) t.data[i] = b(rng) ? 1.0f : 0.0f;
  t.data[0] = 1.0f;
  t.data[1] = 0.0f;
  return MaskTensor(std::move(t));
}

ImageTensor shift_bytes(const ImageTensor& img, int delta) {
  Tensor<float> t = img.tensor();
  for (Eigen::Index i = 0; i < t.data.size(); ++i) t.data[i] = from_byte(std::uint8_t(int(to_byte(t.data[i])) + delta));
  return ImageTensor(std::move(t));
}

}  // namespace

TEST_CASE("fid of a set with itself is zero") {
  std::mt19937_64 rng(1);
  const FeatureSet a = as_set(gaussian_rows(64, 8, rng));
  CHECK(fid(a, a) <= 1e-8);
}

TEST_CASE("fid equal-covariance closed form") {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd r = gaussian_rows(10, 4, rng);
  const Eigen::MatrixXd cov = r.transpose() * r / 9.0 + Eigen::MatrixXd::Identity(4, 4);
  const double d = frechet_distance(Eigen::VectorXd::Zero(4), cov, Eigen::VectorXd::Constant(4, 0.5), cov);
  CHECK(std::abs(d - 1.0) <= 1e-9);
}

TEST_CASE("fid matches the symmetric square-root oracle") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd a = gaussian_rows(64, 8, rng);
    const Eigen::MatrixXd b = gaussian_rows(64, 8, rng, 0.1 * trial);
    const double got = fid(as_set(a), as_set(b));
    const double want = oracle::fid(a, b);
    CHECK(std::abs(got - want) <= 1e-6 * std::abs(want));
    CHECK(std::abs(got - fid(as_set(b), as_set(a))) <= 1e-9 * std::abs(want));
  }
}

TEST_CASE("fid input validation") {
  std::mt19937_64 rng(4);
  CHECK_THROWS_AS(fid(as_set(gaussian_rows(10, 4, rng)), as_set(gaussian_rows(10, 5, rng))), ShapeError);
  CHECK_THROWS_AS(fid(as_set(gaussian_rows(1, 4, rng)), as_set(gaussian_rows(10, 4, rng))), ShapeError);
  // More dimensions than samples: regularised, still finite and non-negative.
  const double d = fid(as_set(gaussian_rows(6, 12, rng)), as_set(gaussian_rows(6, 12, rng)));
  CHECK(std::isfinite(d));
  CHECK(d >= 0.0);
}

TEST_CASE("polynomial kernel") {
  Eigen::VectorXd u(4);
  u << 1, -1, 1, -1;
  CHECK(polynomial_kernel(u, u) == 8.0);
}

TEST_CASE("unbiased mmd tiny case matches brute force") {
  Eigen::MatrixXd a(3, 2), b(3, 2);
  a << 1, 0, 0, 2, -1, 1;
  b << 2, 1, 0, -1, 1, 1;
  CHECK(mmd2_unbiased(a, b) == oracle::mmd2(a, b));

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd x = gaussian_rows(7, 5, rng), y = gaussian_rows(9, 5, rng, 0.2);
    CHECK(mmd2_unbiased(x, y) == doctest::Approx(oracle::mmd2(x, y)).epsilon(1e-12));
  }
}

TEST_CASE("kid with full subsets does not depend on the seed") {
  std::mt19937_64 src(6);
  const FeatureSet a = as_set(gaussian_rows(20, 4, src)), b = as_set(gaussian_rows(20, 4, src, 0.5));
  std::mt19937_64 r1(1), r2(99);
  const KidResult k1 = kid(a, b, 20, 5, r1), k2 = kid(a, b, 20, 5, r2);
  CHECK(k1.mean == doctest::Approx(k2.mean).epsilon(1e-14));
  CHECK(k1.mean == doctest::Approx(mmd2_unbiased(a.features, b.features)).epsilon(1e-14));
  CHECK(k1.std <= 1e-12);
  CHECK_THROWS_AS(kid(a, b, 21, 5, r1), ShapeError);
}

TEST_CASE("kid is unbiased for identical distributions") {
  std::mt19937_64 rng(7);
  const int reps = 400;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < reps; ++i) {
    const double v = mmd2_unbiased(gaussian_rows(10, 3, rng), gaussian_rows(10, 3, rng));
    sum += v;
    sq += v * v;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sq / reps - mean * mean) / reps);
  MESSAGE("mean " << mean << " +- " << se);
  CHECK(std::abs(mean) <= 4.0 * se);

  const FeatureSet a = as_set(gaussian_rows(50, 3, rng)), b = as_set(gaussian_rows(50, 3, rng, 1.0));
  std::mt19937_64 r(3);
  CHECK(kid(a, b, 25, 10, r).mean > 0.0);
}

TEST_CASE("lab conversion reference points") {
  const Eigen::Vector3d white = srgb_to_lab(255, 255, 255);
  CHECK(white[0] == doctest::Approx(100.0).epsilon(1e-4));
  CHECK(std::abs(white[1]) < 1e-2);
  CHECK(std::abs(white[2]) < 1e-2);
  CHECK(srgb_to_lab(0, 0, 0).norm() < 1e-9);
  const Eigen::Vector3d red = srgb_to_lab(255, 0, 0);
  CHECK(red[0] == doctest::Approx(53.24).epsilon(1e-3));
  CHECK(red[1] == doctest::Approx(80.09).epsilon(1e-3));
  CHECK(red[2] == doctest::Approx(67.20).epsilon(1e-3));
}

TEST_CASE("masked rmse examples") {
  std::mt19937_64 rng(8);
  const ImageTensor ref = testing::random_byte_image(16, 16, rng);
  const MaskTensor mask = random_mask(16, 16, rng);
  for (Region r : {Region::Shadow, Region::NonShadow, Region::All}) {
    for (ColorSpace s : {ColorSpace::Rgb, ColorSpace::Lab}) CHECK(masked_rmse(ref, ref, mask, r, s) == 0.0);
  }
  const ImageTensor base = ImageTensor::constant(16, 16, from_byte(100));
  const ImageTensor plus = shift_bytes(base, 10);
  for (Region r : {Region::Shadow, Region::NonShadow, Region::All})
    CHECK(masked_rmse(plus, base, mask, r, ColorSpace::Rgb) == 10.0);
}

TEST_CASE("masked rmse matches the scalar-loop oracle") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const ImageTensor p = testing::random_image(16, 24, rng), q = testing::random_image(16, 24, rng);
    const MaskTensor m = random_mask(16, 24, rng);
    CHECK(std::abs(masked_rmse(p, q, m, Region::Shadow, ColorSpace::Rgb) - oracle::masked_rmse_rgb(p, q, m, 'S')) <= 1e-9);
    CHECK(std::abs(masked_rmse(p, q, m, Region::NonShadow, ColorSpace::Rgb) - oracle::masked_rmse_rgb(p, q, m, 'N')) <= 1e-9);
    CHECK(std::abs(masked_rmse(p, q, m, Region::All, ColorSpace::Rgb) - oracle::masked_rmse_rgb(p, q, m, 'A')) <= 1e-9);
  }
}

TEST_CASE("masked rmse validation") {
  std::mt19937_64 rng(10);
  const ImageTensor p = testing::random_image(8, 8, rng);
  CHECK_THROWS_AS(masked_rmse(p, p, MaskTensor(Tensor<float>(Shape{1, 1, 8, 8})), Region::Shadow, ColorSpace::Rgb),
                  ShapeError);
  CHECK_THROWS_AS(masked_rmse(p, p, MaskTensor(Tensor<float>::constant(Shape{1, 1, 8, 8}, 0.5f)), Region::All,
                              ColorSpace::Rgb),
                  ShapeError);
  CHECK_THROWS_AS(masked_rmse(p, testing::random_image(8, 4, rng), random_mask(8, 8, rng), Region::All, ColorSpace::Rgb),
                  ShapeError);
  CHECK(parse_color_space("lab") == ColorSpace::Lab);
  CHECK_THROWS_AS(parse_color_space("xyz"), ConfigError);
}

TEST_CASE("non-shadow rmse against the input") {
  SynthSpec spec;
  spec.n_shadow = 4;
  spec.n_nonshadow = 2;
  spec.image_size = 32;
  const SynthCorpus corpus = synthesize_corpus(spec);
  for (const auto& t : corpus.shadow) {
    CHECK(rmse_n_i(t.shadow, t.shadow, t.mask, ColorSpace::Lab) == 0.0);
    for (ColorSpace s : {ColorSpace::Rgb, ColorSpace::Lab}) {
      CHECK(rmse_n_i(t.ground_truth, t.shadow, t.mask, s) ==
            masked_rmse(t.ground_truth, t.shadow, t.mask, Region::NonShadow, s));
    }
  }
}

TEST_CASE("default extractor") {
  const RandomProjectionExtractor ex;
  CHECK(ex.id() == RandomProjectionExtractor().id());
  CHECK(ex.id() != RandomProjectionExtractor(7).id());
  std::mt19937_64 rng(11);
  std::vector<ImageTensor> imgs;
  for (int i = 0; i < 4; ++i) imgs.push_back(testing::random_image(48, 48, rng));
  const FeatureSet a = extract_features(imgs, ex);
  CHECK(a.dim() == 64);
  CHECK(a.extractor_id == ex.id());
  CHECK((a.features.array() == extract_features(imgs, ex).features.array()).all());
  std::swap(imgs[0], imgs[3]);
  const FeatureSet b = extract_features(imgs, ex);
  CHECK((b.features.row(0).array() == a.features.row(3).array()).all());
  CHECK((b.features.row(1).array() == a.features.row(1).array()).all());
  CHECK_THROWS_AS(extract_features({}, ex), DataError);
}

TEST_CASE("default extractor separates shadow and non-shadow sets") {
  SynthSpec spec;
  spec.n_shadow = 100;
  spec.n_nonshadow = 200;
  spec.seed = 21;
  const SynthCorpus corpus = synthesize_corpus(spec);
  std::vector<ImageTensor> shadow, ns_a, ns_b, ns_all;
  for (const auto& t : corpus.shadow) shadow.push_back(t.shadow);
  for (std::size_t i = 0; i < corpus.nonshadow.size(); ++i) (i % 2 ? ns_b : ns_a).push_back(corpus.nonshadow[i]);
  const RandomProjectionExtractor ex;
  const double across = fid(extract_features(shadow, ex), extract_features(ns_a, ex));
  const double within = fid(extract_features(ns_b, ex), extract_features(ns_a, ex));
  MESSAGE("shadow vs non-shadow " << across << ", split halves " << within);
  CHECK(across > within);
}

TEST_CASE("eval report json") {
  EvalReport r;
  r.fid = 1.5;
  r.rmse["S"] = 2.0;
  r.rmse["N-I"] = 0.5;
  r.extractor_id = "x";
  r.n_pred = 3;
  r.n_ref = 4;
  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j.at("fid") == 1.5);
  CHECK(j.at("rmse").at("N-I") == 0.5);
  CHECK(j.at("color_space") == "lab");
  CHECK_FALSE(j.contains("kid_mean"));
}
