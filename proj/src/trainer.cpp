#include "tcgan/trainer.hpp"

#include "tcgan/checkpoint.hpp"
#include "tcgan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace tcgan {

void TrainConfig::validate() const {
  if (!(base_lr > 0.0)) throw ConfigError("base_lr must be positive");
  if (!(momentum1 >= 0.0 && momentum1 < 1.0 && momentum2 >= 0.0 && momentum2 < 1.0)) {
    throw ConfigError("momentum1 and momentum2 must lie in [0, 1)");
  }
  if (epochs_total < 1) throw ConfigError("epochs_total must be at least 1");
  if (epochs_constant < 0 || epochs_constant > epochs_total) {
    throw ConfigError("epochs_constant must lie in [0, epochs_total]");
  }
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(init_std > 0.0)) throw ConfigError("init_std must be positive");
  if (weights.lambda1 < 0.0 || weights.lambda2 < 0.0 || weights.lambda3 < 0.0) {
    throw ConfigError("loss weights must be non-negative");
  }
  if (crop <= 0 || crop % 16 != 0) throw ConfigError("crop must be a positive multiple of 16");
  if (pre_crop < crop) throw ConfigError("pre_crop must be at least crop");
  if (generator.base_channels < 1 || generator.residual_blocks < 0 || discriminator.base_channels < 1 ||
      msm.base_channels < 1) {
    throw ConfigError("network widths must be positive");
  }
  if (checkpoint_every < 1) throw ConfigError("checkpoint_every must be at least 1");
  if (msm_epochs < 1) throw ConfigError("msm_epochs must be at least 1");
  if (!(msm_holdout > 0.0 && msm_holdout < 1.0)) throw ConfigError("msm_holdout must lie in (0, 1)");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t global, std::uint64_t stream) { return splitmix64(splitmix64(global) ^ stream); }

}  // namespace

SeedPlan derive_seeds(const TrainConfig& cfg) {
  SeedPlan s;
  s.g1 = cfg.seed_g1.value_or(stream_seed(cfg.seed_global, 1));
  s.g2 = cfg.seed_g2.value_or(stream_seed(cfg.seed_global, 2));
  s.d1 = stream_seed(cfg.seed_global, 3);
  s.d2 = stream_seed(cfg.seed_global, 4);
  s.data = stream_seed(cfg.seed_global, 5);
  s.msm = stream_seed(cfg.seed_global, 6);
  return s;
}

TrainState TrainState::initialize(const TrainConfig& cfg, bool allow_identical_generators) {
  cfg.validate();
  const SeedPlan seeds = derive_seeds(cfg);
  TrainState s;
  s.cfg = cfg;
  s.generators = GeneratorPair(cfg.generator, seeds.g1, seeds.g2, cfg.init_std, allow_identical_generators);
  s.discriminators = DiscriminatorPair(cfg.discriminator, seeds.d1, seeds.d2, cfg.init_std);
  s.opt_g = Adam<float>(s.generators.params(), cfg.base_lr, cfg.momentum1, cfg.momentum2);
  s.opt_d = Adam<float>(s.discriminators.params(), cfg.base_lr, cfg.momentum1, cfg.momentum2);
  s.rng.seed(seeds.data);
  return s;
}

double lr_schedule(const TrainConfig& cfg, int epoch) {
  if (epoch < 1 || epoch > cfg.epochs_total) {
    throw std::out_of_range("epoch " + std::to_string(epoch) + " outside [1, " + std::to_string(cfg.epochs_total) + "]");
  }
  if (epoch <= cfg.epochs_constant) return cfg.base_lr;
  return cfg.base_lr * double(cfg.epochs_total - epoch) / double(cfg.epochs_total - cfg.epochs_constant);
}

namespace {

void check_finite(double value, const char* term) {
  if (!std::isfinite(value)) throw DivergenceError(std::string("non-finite loss term: ") + term);
}

Var<float> weighted_sum(const std::vector<std::pair<float, Var<float>>>& terms) {
  Var<float> total = ops::scale(terms.front().second, terms.front().first);
  for (std::size_t i = 1; i < terms.size(); ++i) total = ops::add(total, ops::scale(terms[i].second, terms[i].first));
  return total;
}

}  // namespace

LossBundle train_step(TrainState& state, const std::vector<TrainBatch>& batch) {
  if (batch.empty()) throw DataError("empty training batch");
  std::vector<ImageTensor> xs, y1s, y2s;
  for (const auto& b : batch) {
    xs.push_back(b.x);
    y1s.push_back(b.y1);
    y2s.push_back(b.y2);
  }
  const Var<float> x = stack<float>(xs);
  const Var<float> y1 = stack<float>(y1s);
  const Var<float> y2 = stack<float>(y2s);
  const auto& g = state.generators;
  const auto& d = state.discriminators;
  const LossWeights& w = state.cfg.weights;

  // Generator phase: both generators step jointly.
  state.opt_g.zero_grad();
  state.opt_d.zero_grad();
  const Var<float> r1 = g.g1.forward(x);
  const Var<float> r2 = g.g2.forward(x);
  const Var<float> fake1 = ops::clamp(ops::add(x, r1), -1.0f, 1.0f);
  const Var<float> fake2 = ops::clamp(ops::add(x, r2), -1.0f, 1.0f);
  const Var<float> gan1 = losses::lsgan_generator(d.d1.forward(fake1));
  const Var<float> gan2 = losses::lsgan_generator(d.d2.forward(fake2));
  const Var<float> tc = losses::target_consistency(x, r1, r2);
  const Var<float> idt1 = losses::identity(g.g1.forward(y1));
  const Var<float> idt2 = losses::identity(g.g2.forward(y2));

  const LossBundle bundle = combine(w, gan1.item(), gan2.item(), tc.item(), idt1.item(), idt2.item());
  const Var<float> total = weighted_sum({{float(w.lambda1), gan1},
                                         {float(w.lambda1), gan2},
                                         {float(w.lambda2), tc},
                                         {float(w.lambda3), idt1},
                                         {float(w.lambda3), idt2}});
  check_finite(total.item(), "total");
  backward(total);
  state.opt_g.step();

  // Discriminator phase on the pre-update fakes, detached from the generators.
  state.opt_d.zero_grad();
  const Var<float> d_loss1 = losses::lsgan_discriminator(d.d1.forward(y1), d.d1.forward(fake1.detach()));
  const Var<float> d_loss2 = losses::lsgan_discriminator(d.d2.forward(y2), d.d2.forward(fake2.detach()));
  check_finite(d_loss1.item(), "discriminator1");
  check_finite(d_loss2.item(), "discriminator2");
  backward(ops::add(d_loss1, d_loss2));
  state.opt_d.step();
  state.opt_g.zero_grad();
  state.opt_d.zero_grad();

  state.last_d_loss = double(d_loss1.item()) + double(d_loss2.item());
  ++state.iteration;
  return bundle;
}

LossBundle train_step(TrainState& state, const TrainBatch& batch) {
  return train_step(state, std::vector<TrainBatch>{batch});
}

std::vector<TrainBatch> draw_batch(TrainState& state, const UnpairedDataset& ds) {
  std::vector<TrainBatch> out;
  out.reserve(state.cfg.batch_size);
  for (int i = 0; i < state.cfg.batch_size; ++i) out.push_back(next_batch(ds, state.cfg.augment(), state.rng));
  return out;
}

namespace {

std::string epoch_checkpoint_name(int epoch) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "epoch_%04d.ckpt", epoch);
  return buf;
}

}  // namespace

void train(TrainState& state, const UnpairedDataset& ds, const std::filesystem::path& out_dir,
           const TrainCallbacks& callbacks) {
  ds.validate();
  if (ds.nonshadow_paths.size() < 2) {
    throw DataError("each step needs two distinct real non-shadow images, but the non-shadow set has " +
                    std::to_string(ds.nonshadow_paths.size()));
  }
  const TrainConfig& cfg = state.cfg;
  std::ofstream loss_log, lr_log;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const bool fresh = state.iteration == 0;
    loss_log.open(out_dir / "losses.csv", fresh ? std::ios::trunc : std::ios::app);
    lr_log.open(out_dir / "lr.csv", fresh ? std::ios::trunc : std::ios::app);
    if (!loss_log || !lr_log) throw DataError("cannot write logs under " + out_dir.string());
    if (fresh) {
      loss_log << "iter,gan1,gan2,tc,idt1,idt2,total\n";
      lr_log << "epoch,lr\n";
    }
  }

  const long steps_per_epoch = long((ds.shadow_paths.size() + cfg.batch_size - 1) / cfg.batch_size);
  for (int epoch = state.epoch + 1; epoch <= cfg.epochs_total; ++epoch) {
    const double lr = lr_schedule(cfg, epoch);
    state.opt_g.set_lr(lr);
    state.opt_d.set_lr(lr);
    for (long i = 0; i < steps_per_epoch; ++i) {
      const LossBundle b = train_step(state, draw_batch(state, ds));
      if (loss_log.is_open()) {
        char line[256];
        std::snprintf(line, sizeof line, "%ld,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", state.iteration, b.gan1, b.gan2, b.tc,
                      b.idt1, b.idt2, b.total);
        loss_log << line;
      }
      if (callbacks.on_step) callbacks.on_step(state.iteration, epoch, b);
    }
    state.epoch = epoch;
    if (lr_log.is_open()) {
      char line[64];
      std::snprintf(line, sizeof line, "%d,%.9g\n", epoch, lr);
      lr_log << line;
      loss_log.flush();
      lr_log.flush();
    }
    if (callbacks.on_epoch_end) callbacks.on_epoch_end(epoch, lr);
    if (!out_dir.empty() && epoch % cfg.checkpoint_every == 0) {
      save_checkpoint(state, out_dir / epoch_checkpoint_name(epoch));
    }
  }
  if (!out_dir.empty()) save_checkpoint(state, out_dir / "final.ckpt");
}

double msm_probability(const Msm<float>& msm, const ImageTensor& image) {
  return double(msm.probability(image.as_var<float>()).item());
}

MsmTrainResult train_msm(const TrainConfig& cfg, const std::vector<std::filesystem::path>& shadow,
                         const std::vector<std::filesystem::path>& nonshadow) {
  cfg.validate();
  if (shadow.empty() || nonshadow.empty()) throw DataError("classifier training needs shadow and non-shadow images");
  std::mt19937_64 rng(derive_seeds(cfg).msm);

  struct Sample {
    const std::filesystem::path* path;
    float label;
  };
  std::vector<Sample> train_set, heldout;
  auto split = [&](const std::vector<std::filesystem::path>& paths, float label) {
    std::vector<std::size_t> order(paths.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t n_hold = std::size_t(std::lround(cfg.msm_holdout * double(paths.size())));
    if (n_hold < 1 || n_hold >= paths.size()) {
      throw DataError("degenerate classifier split: " + std::to_string(paths.size()) + " images with holdout " +
                      std::to_string(cfg.msm_holdout));
    }
    for (std::size_t i = 0; i < order.size(); ++i) {
      (i < n_hold ? heldout : train_set).push_back({&paths[order[i]], label});
    }
  };
  split(shadow, 0.0f);
  split(nonshadow, 1.0f);

  MsmTrainResult result;
  result.msm = Msm<float>(cfg.msm, derive_seeds(cfg).msm, cfg.init_std);
  Adam<float> opt(result.msm.params(), cfg.base_lr, cfg.momentum1, cfg.momentum2);
  const AugmentConfig aug = cfg.augment();

  double running = 0.0;
  for (int epoch = 0; epoch < cfg.msm_epochs; ++epoch) {
    std::shuffle(train_set.begin(), train_set.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < train_set.size(); start += std::size_t(cfg.batch_size)) {
      const std::size_t end = std::min(train_set.size(), start + std::size_t(cfg.batch_size));
      std::vector<ImageTensor> images;
      Tensor<float> labels(Shape{int(end - start), 1, 1, 1});
      for (std::size_t i = start; i < end; ++i) {
        images.push_back(augment(load_image(*train_set[i].path), aug, rng));
        labels.data[Eigen::Index(i - start)] = train_set[i].label;
      }
      opt.zero_grad();
      const Var<float> loss = losses::bce_with_logits(result.msm.logit(stack<float>(images)), labels);
      check_finite(loss.item(), "classifier");
      backward(loss);
      opt.step();
      epoch_loss += double(loss.item()) * double(end - start);
    }
    running = epoch_loss / double(train_set.size());
  }
  opt.zero_grad();
  result.final_train_loss = running;

  std::size_t correct = 0;
  for (const auto& s : heldout) {
    const ImageTensor img = resize_bicubic(load_image(*s.path), aug.crop, aug.crop);
    const bool predicted_nonshadow = msm_probability(result.msm, img) >= 0.5;
    if (predicted_nonshadow == (s.label > 0.5f)) ++correct;
  }
  result.heldout_count = heldout.size();
  result.heldout_accuracy = double(correct) / double(heldout.size());
  return result;
}

}  // namespace tcgan
