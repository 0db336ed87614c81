#ifndef TCGAN_TRAINER_HPP
#define TCGAN_TRAINER_HPP

#include "tcgan/datapipe.hpp"
#include "tcgan/losses.hpp"
#include "tcgan/networks.hpp"
#include "tcgan/optim.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <vector>

namespace tcgan {

struct TrainConfig {
  double base_lr = 2e-4;
  double momentum1 = 0.5;
  double momentum2 = 0.999;
  int epochs_total = 200;
  int epochs_constant = 100;
  int batch_size = 1;
  double init_std = 0.02;
  LossWeights weights;
  std::uint64_t seed_global = 0;
  std::optional<std::uint64_t> seed_g1;  // derived from seed_global when unset
  std::optional<std::uint64_t> seed_g2;
  int pre_crop = 72;
  int crop = 64;
  bool flip = false;
  GeneratorArch generator;
  DiscriminatorArch discriminator;
  DiscriminatorArch msm;
  int checkpoint_every = 10;
  int msm_epochs = 10;
  double msm_holdout = 0.2;

  /// Throws ConfigError on violated invariants.
  void validate() const;
  AugmentConfig augment() const { return {pre_crop, crop, flip}; }
};

/// Seeds for every random stream, all derived from seed_global unless pinned.
struct SeedPlan {
  std::uint64_t g1 = 0;
  std::uint64_t g2 = 0;
  std::uint64_t d1 = 0;
  std::uint64_t d2 = 0;
  std::uint64_t data = 0;
  std::uint64_t msm = 0;
};
SeedPlan derive_seeds(const TrainConfig& cfg);

/// Owns both network pairs and their optimisers. Move-only: parameters are
/// shared graph leaves, so a copy would alias them.
struct TrainState {
  TrainConfig cfg;
  GeneratorPair generators;
  DiscriminatorPair discriminators;
  Adam<float> opt_g;  // over both generators, which the consistency term couples
  Adam<float> opt_d;  // over both discriminators
  int epoch = 0;       // completed epochs
  long iteration = 0;  // completed steps
  std::mt19937_64 rng;
  double last_d_loss = 0.0;

  /// `allow_identical_generators` admits seed_g1 == seed_g2 (test-only).
  static TrainState initialize(const TrainConfig& cfg, bool allow_identical_generators = false);

  TrainState() = default;
  TrainState(TrainState&&) = default;
  TrainState& operator=(TrainState&&) = default;
  TrainState(const TrainState&) = delete;
  TrainState& operator=(const TrainState&) = delete;
};

/// Constant base_lr through epochs_constant, then linear decay to 0 at epochs_total.
double lr_schedule(const TrainConfig& cfg, int epoch);

/// One generator phase (joint step on both generators) followed by one
/// discriminator phase on detached fakes. Returns the generator-phase losses.
/// Throws DivergenceError naming the first non-finite term; parameters are
/// not updated in that case.
LossBundle train_step(TrainState& state, const std::vector<TrainBatch>& batch);
LossBundle train_step(TrainState& state, const TrainBatch& batch);

/// Draws batch_size batches from the dataset using the state's rng.
std::vector<TrainBatch> draw_batch(TrainState& state, const UnpairedDataset& ds);

struct TrainCallbacks {
  std::function<void(long iteration, int epoch, const LossBundle&)> on_step;
  std::function<void(int epoch, double lr)> on_epoch_end;
};

/// Runs epochs state.epoch+1 .. epochs_total. When `out_dir` is non-empty,
/// appends losses.csv / lr.csv there and writes epoch_NNNN.ckpt every
/// checkpoint_every epochs plus final.ckpt.
void train(TrainState& state, const UnpairedDataset& ds, const std::filesystem::path& out_dir,
           const TrainCallbacks& callbacks = {});

struct MsmTrainResult {
  Msm<float> msm;
  double heldout_accuracy = 0.0;
  std::size_t heldout_count = 0;
  double final_train_loss = 0.0;
};

/// Binary cross-entropy training of the selection classifier (non-shadow = 1)
/// with a held-out split of msm_holdout per class. Throws DataError on a
/// degenerate split.
MsmTrainResult train_msm(const TrainConfig& cfg, const std::vector<std::filesystem::path>& shadow,
                         const std::vector<std::filesystem::path>& nonshadow);

/// Probability that `image` is a real non-shadow image.
double msm_probability(const Msm<float>& msm, const ImageTensor& image);

}  // namespace tcgan

#endif  // TCGAN_TRAINER_HPP
