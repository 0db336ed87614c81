#include "tcgan/datapipe.hpp"

#include "tcgan/errors.hpp"

#include <json.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>

namespace tcgan {

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

UnpairedDataset UnpairedDataset::open(const fs::path& root, std::uint64_t seed) {
  UnpairedDataset ds;
  ds.seed = seed;
  ds.shadow_paths = list_images(root / "shadow");
  ds.nonshadow_paths = list_images(root / "nonshadow");
  if (fs::is_directory(root / "mask")) ds.mask_paths = list_images(root / "mask");
  ds.validate();
  return ds;
}

void UnpairedDataset::validate() const {
  if (shadow_paths.empty()) throw DataError("dataset has no shadow images");
  if (nonshadow_paths.empty()) throw DataError("dataset has no non-shadow images");
  std::set<fs::path> shadow;
  for (const auto& p : shadow_paths) shadow.insert(fs::weakly_canonical(p));
  for (const auto& p : nonshadow_paths) {
    if (shadow.count(fs::weakly_canonical(p))) {
      throw DataError("path listed as both shadow and non-shadow: " + p.string());
    }
  }
}

ImageTensor augment(const ImageTensor& image, const AugmentConfig& cfg, std::mt19937_64& rng) {
  if (cfg.crop <= 0 || cfg.crop > cfg.pre_crop) {
    throw ConfigError("crop size " + std::to_string(cfg.crop) + " must be in (0, pre_crop=" +
                      std::to_string(cfg.pre_crop) + "]");
  }
  ImageTensor resized = resize_bicubic(image, cfg.pre_crop, cfg.pre_crop);
  std::uniform_int_distribution<int> offset(0, cfg.pre_crop - cfg.crop);
  const int top = offset(rng);
  const int left = offset(rng);
  ImageTensor out = crop(resized, top, left, cfg.crop, cfg.crop);
  if (cfg.flip && std::bernoulli_distribution(0.5)(rng)) {
    Tensor<float> t = out.tensor();
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < t.shape.h; ++y)
        for (int x = 0; x < t.shape.w; ++x) t.at(0, c, y, x) = out.tensor().at(0, c, y, t.shape.w - 1 - x);
    out = ImageTensor(std::move(t));
  }
  return out;
}

BatchIndices draw_indices(std::size_t n_shadow, std::size_t n_nonshadow, std::mt19937_64& rng) {
  if (n_shadow == 0) throw DataError("no shadow images to sample from");
  if (n_nonshadow < 2) {
    throw DataError("each step needs two distinct real non-shadow images, but the non-shadow set has " +
                    std::to_string(n_nonshadow));
  }
  BatchIndices idx;
  idx.x = std::uniform_int_distribution<std::size_t>(0, n_shadow - 1)(rng);
  idx.y1 = std::uniform_int_distribution<std::size_t>(0, n_nonshadow - 1)(rng);
  idx.y2 = std::uniform_int_distribution<std::size_t>(0, n_nonshadow - 2)(rng);
  if (idx.y2 >= idx.y1) ++idx.y2;
  return idx;
}

TrainBatch next_batch(const UnpairedDataset& ds, const AugmentConfig& cfg, std::mt19937_64& rng) {
  const BatchIndices idx = draw_indices(ds.shadow_paths.size(), ds.nonshadow_paths.size(), rng);
  TrainBatch b;
  b.x_index = idx.x;
  b.y1_index = idx.y1;
  b.y2_index = idx.y2;
  b.x = augment(load_image(ds.shadow_paths[idx.x]), cfg, rng);
  b.y1 = augment(load_image(ds.nonshadow_paths[idx.y1]), cfg, rng);
  b.y2 = augment(load_image(ds.nonshadow_paths[idx.y2]), cfg, rng);
  return b;
}

void SynthSpec::validate() const {
  if (n_shadow <= 0 || n_nonshadow <= 0) throw ConfigError("synthetic corpus sizes must be positive");
  if (image_size <= 0 || image_size % 8 != 0) throw ConfigError("image_size must be a positive multiple of 8");
  if (!(attenuation_lo > 0.0 && attenuation_lo <= attenuation_hi && attenuation_hi <= 1.0)) {
    throw ConfigError("attenuation range must satisfy 0 < lo <= hi <= 1");
  }
  if (!(coverage_lo > 0.0 && coverage_lo <= coverage_hi && coverage_hi < 1.0)) {
    throw ConfigError("coverage range must satisfy 0 < lo <= hi < 1");
  }
  if (edge_blur_sigma < 0.0) throw ConfigError("edge_blur_sigma must be non-negative");
  if (max_shapes < 0) throw ConfigError("max_shapes must be non-negative");
}

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Eigen::Array3d random_color(std::mt19937_64& rng, double lo, double hi) {
  return {uniform(rng, lo, hi), uniform(rng, lo, hi), uniform(rng, lo, hi)};
}

struct Polygon {
  std::vector<Eigen::Vector2d> vertices;

  bool contains(double x, double y) const {
    bool inside = false;
    for (std::size_t i = 0, j = vertices.size() - 1; i < vertices.size(); j = i++) {
      const auto& a = vertices[i];
      const auto& b = vertices[j];
      if ((a.y() > y) != (b.y() > y) && x < (b.x() - a.x()) * (y - a.y()) / (b.y() - a.y()) + a.x()) {
        inside = !inside;
      }
    }
    return inside;
  }
};

/// Star-shaped polygon around the origin with jittered radii, scaled to `area`.
Polygon random_polygon(std::mt19937_64& rng, double area, const Eigen::Vector2d& center) {
  const int n = std::uniform_int_distribution<int>(4, 7)(rng);
  std::vector<double> angles(n);
  for (auto& a : angles) a = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  std::sort(angles.begin(), angles.end());
  Polygon p;
  for (double a : angles) {
    const double r = uniform(rng, 0.6, 1.0);
    p.vertices.emplace_back(r * std::cos(a), r * std::sin(a));
  }
  double shoelace = 0.0;
  for (int i = 0, j = n - 1; i < n; j = i++) {
    shoelace += p.vertices[j].x() * p.vertices[i].y() - p.vertices[i].x() * p.vertices[j].y();
  }
  const double unit_area = std::max(std::abs(shoelace) / 2.0, 1e-3);
  const double s = std::sqrt(area / unit_area);
  for (auto& v : p.vertices) v = center + v * s;
  return p;
}

}  // namespace

LinearImage render_base_scene(int size, int max_shapes, std::mt19937_64& rng) {
  const Eigen::Index pixels = Eigen::Index(size) * size;
  LinearImage img(3, pixels);

  const Eigen::Array3d c0 = random_color(rng, 0.3, 0.95);
  const Eigen::Array3d c1 = random_color(rng, 0.3, 0.95);
  const double theta = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double t = std::clamp(((x - size / 2.0) * std::cos(theta) + (y - size / 2.0) * std::sin(theta)) / size + 0.5,
                                  0.0, 1.0);
      img.col(Eigen::Index(y) * size + x) = c0 + (c1 - c0) * t;
    }
  }

  const int shapes = max_shapes > 0 ? std::uniform_int_distribution<int>(1, max_shapes)(rng) : 0;
  for (int s = 0; s < shapes; ++s) {
    const bool ellipse = std::bernoulli_distribution(0.5)(rng);
    const double cx = uniform(rng, 0.0, size);
    const double cy = uniform(rng, 0.0, size);
    const double rx = uniform(rng, 0.08, 0.25) * size;
    const double ry = uniform(rng, 0.08, 0.25) * size;
    const Eigen::Array3d color = random_color(rng, 0.2, 0.95);
    const double amplitude = uniform(rng, 0.02, 0.08);
    const double freq = uniform(rng, 0.05, 0.2);
    const double phi = uniform(rng, 0.0, std::numbers::pi);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const double dx = (x + 0.5 - cx) / rx;
        const double dy = (y + 0.5 - cy) / ry;
        const bool inside = ellipse ? dx * dx + dy * dy <= 1.0 : std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0;
        if (!inside) continue;
        const double stripe = amplitude * std::sin(2.0 * std::numbers::pi * freq * (x * std::cos(phi) + y * std::sin(phi)));
        img.col(Eigen::Index(y) * size + x) = color + stripe;
      }
    }
  }

  std::normal_distribution<double> grain(0.0, 0.01);
  for (Eigen::Index i = 0; i < img.size(); ++i) img.data()[i] += grain(rng);
  return img.max(0.0).min(1.0);
}

Eigen::ArrayXd render_shadow_mask(const SynthSpec& spec, std::mt19937_64& rng) {
  const int size = spec.image_size;
  const double area = uniform(rng, spec.coverage_lo, spec.coverage_hi) * size * size;
  const Eigen::Vector2d center(uniform(rng, 0.2, 0.8) * size, uniform(rng, 0.2, 0.8) * size);
  const bool ellipse = std::bernoulli_distribution(0.5)(rng);

  cv::Mat hard(size, size, CV_64F, cv::Scalar(0.0));
  if (ellipse) {
    const double aspect = uniform(rng, 0.5, 1.0);
    const double angle = uniform(rng, 0.0, std::numbers::pi);
    const double a = std::sqrt(area / (std::numbers::pi * aspect));
    const double b = aspect * a;
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const double px = x + 0.5 - center.x();
        const double py = y + 0.5 - center.y();
        const double u = (px * std::cos(angle) + py * std::sin(angle)) / a;
        const double v = (-px * std::sin(angle) + py * std::cos(angle)) / b;
        if (u * u + v * v <= 1.0) hard.at<double>(y, x) = 1.0;
      }
    }
  } else {
    const Polygon poly = random_polygon(rng, area, center);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x)
        if (poly.contains(x + 0.5, y + 0.5)) hard.at<double>(y, x) = 1.0;
  }

  cv::Mat soft = hard;
  if (spec.edge_blur_sigma > 0.0) {
    cv::GaussianBlur(hard, soft, cv::Size(0, 0), spec.edge_blur_sigma, spec.edge_blur_sigma, cv::BORDER_REPLICATE);
  }
  Eigen::ArrayXd mask(Eigen::Index(size) * size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) mask[Eigen::Index(y) * size + x] = std::clamp(soft.at<double>(y, x), 0.0, 1.0);
  return mask;
}

LinearImage apply_shadow(const LinearImage& base, const Eigen::ArrayXd& mask, double attenuation) {
  if (mask.size() != base.cols()) throw ShapeError("apply_shadow: mask size mismatch");
  const Eigen::Array<double, 1, Eigen::Dynamic> factor = (1.0 - (1.0 - attenuation) * mask).transpose();
  return base.rowwise() * factor;
}

ImageTensor to_image(const LinearImage& img, int size) {
  Tensor<float> t(Shape{1, 3, size, size});
  for (int c = 0; c < 3; ++c) {
    for (Eigen::Index i = 0; i < img.cols(); ++i) {
      const double byte = std::clamp(std::round(img(c, i) * 255.0), 0.0, 255.0);
      t.data[c * img.cols() + i] = from_byte(std::uint8_t(byte));
    }
  }
  return ImageTensor(std::move(t));
}

SynthCorpus synthesize_corpus(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const int size = spec.image_size;
  SynthCorpus corpus;
  corpus.shadow.reserve(spec.n_shadow);
  for (int i = 0; i < spec.n_shadow; ++i) {
    const LinearImage base = render_base_scene(size, spec.max_shapes, rng);
    SynthTriplet t;
    t.soft_mask = render_shadow_mask(spec, rng);
    t.attenuation = uniform(rng, spec.attenuation_lo, spec.attenuation_hi);
    t.ground_truth = to_image(base, size);
    t.shadow = to_image(apply_shadow(base, t.soft_mask, t.attenuation), size);
    Tensor<float> m(Shape{1, 1, size, size});
    m.data = (t.soft_mask > 1e-3).cast<float>();
    t.mask = MaskTensor(std::move(m));
    corpus.shadow.push_back(std::move(t));
  }
  corpus.nonshadow.reserve(spec.n_nonshadow);
  for (int i = 0; i < spec.n_nonshadow; ++i) {
    corpus.nonshadow.push_back(to_image(render_base_scene(size, spec.max_shapes, rng), size));
  }
  return corpus;
}

void write_corpus(const SynthCorpus& corpus, const fs::path& root) {
  for (const char* sub : {"shadow", "nonshadow", "gt", "mask"}) fs::create_directories(root / sub);
  auto name = [](std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%05zu.png", i);
    return std::string(buf);
  };
  std::ofstream manifest(root / "manifest.jsonl", std::ios::binary | std::ios::trunc);
  if (!manifest) throw DataError("cannot write manifest under " + root.string());
  for (std::size_t i = 0; i < corpus.shadow.size(); ++i) {
    const auto& t = corpus.shadow[i];
    save_image(t.shadow, root / "shadow" / name(i));
    save_image(t.ground_truth, root / "gt" / name(i));
    save_mask(t.mask, root / "mask" / name(i));
    nlohmann::ordered_json row;
    row["shadow"] = "shadow/" + name(i);
    row["gt"] = "gt/" + name(i);
    row["mask"] = "mask/" + name(i);
    row["attenuation"] = t.attenuation;
    manifest << row.dump() << '\n';
  }
  for (std::size_t i = 0; i < corpus.nonshadow.size(); ++i) save_image(corpus.nonshadow[i], root / "nonshadow" / name(i));
}

}  // namespace tcgan
