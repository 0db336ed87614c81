#include "test_support.hpp"

#include "tcgan/checkpoint.hpp"
#include "tcgan/errors.hpp"
#include "tcgan/trainer.hpp"

#include <doctest.h>

#include <fstream>
#include <set>

using namespace tcgan;

namespace {

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.generator = {8, 2};
  cfg.discriminator = {8};
  cfg.msm = {8};
  cfg.pre_crop = 36;
  cfg.crop = 32;
  cfg.epochs_total = 2;
  cfg.epochs_constant = 1;
  cfg.seed_global = 42;
  return cfg;
}

/// Small synthetic corpus written once per test binary run.
const std::filesystem::path& tiny_corpus() {
  static const std::filesystem::path root = [] {
    auto dir = testing::scratch_dir("trainer_corpus");
    SynthSpec spec;
    spec.n_shadow = 6;
    spec.n_nonshadow = 6;
    spec.image_size = 32;
    spec.seed = 5;
    write_corpus(synthesize_corpus(spec), dir);
    return dir;
  }();
  return root;
}

std::vector<Tensor<float>> snapshot(const ParamList<float>& params) {
  std::vector<Tensor<float>> out;
  for (const auto& p : params) out.push_back(p.var.value());
  return out;
}

bool same(const std::vector<Tensor<float>>& a, const ParamList<float>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if ((a[i].data != b[i].var.value().data).any()) return false;
  return true;
}

bool all_changed(const std::vector<Tensor<float>>& a, const ParamList<float>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if ((a[i].data == b[i].var.value().data).all()) return false;
  return true;
}

std::vector<LossBundle> run_steps(TrainState& state, const UnpairedDataset& ds, int n) {
  std::vector<LossBundle> out;
  for (int i = 0; i < n; ++i) out.push_back(train_step(state, draw_batch(state, ds)));
  return out;
}

}  // namespace

TEST_CASE("learning-rate schedule") {
  TrainConfig cfg;
  for (int e : {1, 50, 99, 100}) CHECK(lr_schedule(cfg, e) == 2e-4);
  CHECK(lr_schedule(cfg, 150) == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(lr_schedule(cfg, 200) == 0.0);
  CHECK_THROWS_AS(lr_schedule(cfg, 0), std::out_of_range);
  CHECK_THROWS_AS(lr_schedule(cfg, 201), std::out_of_range);
  double prev = lr_schedule(cfg, 1);
  for (int e = 2; e <= 200; ++e) {
    const double lr = lr_schedule(cfg, e);
    CHECK(lr <= prev);
    CHECK(prev - lr <= 2e-4 / 100.0 + 1e-18);
    prev = lr;
  }
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.crop = 40;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.epochs_constant = 300;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.weights.lambda2 = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("seed derivation") {
  TrainConfig cfg;
  const SeedPlan s = derive_seeds(cfg);
  const std::set<std::uint64_t> all{s.g1, s.g2, s.d1, s.d2, s.data, s.msm};
  CHECK(all.size() == 6);
  cfg.seed_g1 = 7;
  cfg.seed_g2 = 8;
  CHECK(derive_seeds(cfg).g1 == 7);
  CHECK(derive_seeds(cfg).g2 == 8);
  cfg.seed_global = 1;
  CHECK(derive_seeds(cfg).d1 != s.d1);
}

TEST_CASE("identical generators start with zero consistency loss") {
  TrainConfig cfg = tiny_config();
  cfg.seed_g1 = 3;
  cfg.seed_g2 = 3;
  CHECK_THROWS_AS(TrainState::initialize(cfg), ConfigError);
  TrainState state = TrainState::initialize(cfg, true);
  const UnpairedDataset ds = UnpairedDataset::open(tiny_corpus());
  CHECK(train_step(state, draw_batch(state, ds)).tc == 0.0);
}

TEST_CASE("fixed seeds give bit-identical loss sequences") {
  const UnpairedDataset ds = UnpairedDataset::open(tiny_corpus());
  TrainState a = TrainState::initialize(tiny_config());
  TrainState b = TrainState::initialize(tiny_config());
  const auto la = run_steps(a, ds, 10);
  const auto lb = run_steps(b, ds, 10);
  for (int i = 0; i < 10; ++i) CHECK(la[i] == lb[i]);
  CHECK(la[0].tc > 0.0);
}

TEST_CASE("checkpoint resume matches an uninterrupted run") {
  const UnpairedDataset ds = UnpairedDataset::open(tiny_corpus());
  const auto dir = testing::scratch_dir("resume");
  TrainState straight = TrainState::initialize(tiny_config());
  const auto reference = run_steps(straight, ds, 10);

  TrainState first = TrainState::initialize(tiny_config());
  run_steps(first, ds, 5);
  save_checkpoint(first, dir / "mid.ckpt");
  LoadedCheckpoint loaded = load_checkpoint(dir / "mid.ckpt");
  CHECK(loaded.state.iteration == 5);
  CHECK_FALSE(loaded.msm.has_value());
  const auto resumed = run_steps(loaded.state, ds, 5);
  for (int i = 0; i < 5; ++i) CHECK(resumed[i] == reference[5 + i]);
  CHECK(same(snapshot(straight.generators.params()), loaded.state.generators.params()));
  CHECK(same(snapshot(straight.discriminators.params()), loaded.state.discriminators.params()));
}

TEST_CASE("checkpoint format errors") {
  const auto dir = testing::scratch_dir("ckpt_err");
  CHECK_THROWS_AS(load_checkpoint(dir / "none.ckpt"), DataError);
  {
    std::ofstream(dir / "bad.ckpt") << "not-a-checkpoint\n";
  }
  CHECK_THROWS_AS(load_checkpoint(dir / "bad.ckpt"), DataError);

  TrainState state = TrainState::initialize(tiny_config());
  save_checkpoint(state, dir / "ok.ckpt");
  const auto size = std::filesystem::file_size(dir / "ok.ckpt");
  std::filesystem::resize_file(dir / "ok.ckpt", size - 10);
  CHECK_THROWS_AS(load_checkpoint(dir / "ok.ckpt"), DataError);
}

TEST_CASE("phases only move their own parameters") {
  const UnpairedDataset ds = UnpairedDataset::open(tiny_corpus());
  TrainState state = TrainState::initialize(tiny_config());

  std::set<const void*> g_nodes, d_nodes;
  for (const auto& p : state.opt_g.params()) g_nodes.insert(p.var.node().get());
  for (const auto& p : state.opt_d.params()) d_nodes.insert(p.var.node().get());
  CHECK(g_nodes.size() == state.generators.params().size());
  CHECK(d_nodes.size() == state.discriminators.params().size());
  for (const void* n : g_nodes) CHECK(d_nodes.count(n) == 0);

  const auto g0 = snapshot(state.generators.params());
  const auto d0 = snapshot(state.discriminators.params());
  state.opt_g.set_lr(0.0);
  train_step(state, draw_batch(state, ds));
  CHECK(same(g0, state.generators.params()));
  CHECK(all_changed(d0, state.discriminators.params()));

  TrainState other = TrainState::initialize(tiny_config());
  const auto d1 = snapshot(other.discriminators.params());
  const auto g1 = snapshot(other.generators.params());
  other.opt_d.set_lr(0.0);
  train_step(other, draw_batch(other, ds));
  CHECK(same(d1, other.discriminators.params()));
  CHECK(all_changed(g1, other.generators.params()));
}

TEST_CASE("consistency loss reaches both generators") {
  const GeneratorPair pair(GeneratorArch{8, 2}, 1, 2);
  std::mt19937_64 rng(3);
  const Var<float> x = testing::random_image(32, 32, rng).as_var<float>();
  const Var<float> tc = losses::target_consistency(x, pair.g1.forward(x), pair.g2.forward(x));
  REQUIRE(tc.item() > 0.0f);
  backward(tc);
  for (const auto* g : {&pair.g1, &pair.g2}) {
    double norm = 0.0;
    for (const auto& p : g->params())
      if (!p.var.grad().empty()) norm += double(p.var.grad().data.abs().sum());
    CHECK(norm > 0.0);
  }
}

TEST_CASE("generator descends against frozen discriminators") {
  const UnpairedDataset ds = UnpairedDataset::open(tiny_corpus());
  TrainState state = TrainState::initialize(tiny_config());
  const std::vector<TrainBatch> batch = draw_batch(state, ds);
  const auto frozen = snapshot(state.discriminators.params());
  state.opt_d.set_lr(0.0);
  const double initial = train_step(state, batch).total;
  double last = initial;
  for (int i = 0; i < 99; ++i) last = train_step(state, batch).total;
  CHECK(same(frozen, state.discriminators.params()));
  MESSAGE("objective " << initial << " -> " << last);
  CHECK(last < initial);
}

TEST_CASE("divergence is reported before any update") {
  const UnpairedDataset ds = UnpairedDataset::open(tiny_corpus());
  TrainState state = TrainState::initialize(tiny_config());
  auto params = state.generators.params();
  params.back().var.mutable_value().data[0] = std::numeric_limits<float>::quiet_NaN();
  const auto d0 = snapshot(state.discriminators.params());
  CHECK_THROWS_AS(train_step(state, draw_batch(state, ds)), DivergenceError);
  CHECK(same(d0, state.discriminators.params()));
  CHECK(state.iteration == 0);
  CHECK(state.opt_g.steps() == 0);
}

TEST_CASE("train writes logs and checkpoints") {
  const UnpairedDataset ds = UnpairedDataset::open(tiny_corpus());
  const auto out = testing::scratch_dir("train_out");
  TrainConfig cfg = tiny_config();
  cfg.checkpoint_every = 1;
  TrainState state = TrainState::initialize(cfg);
  int epochs_seen = 0;
  train(state, ds, out, {nullptr, [&](int, double) { ++epochs_seen; }});
  CHECK(epochs_seen == 2);
  CHECK(state.iteration == 12);
  CHECK(std::filesystem::exists(out / "epoch_0001.ckpt"));
  CHECK(std::filesystem::exists(out / "epoch_0002.ckpt"));
  CHECK(std::filesystem::exists(out / "final.ckpt"));

  std::ifstream losses(out / "losses.csv");
  std::string line;
  std::getline(losses, line);
  CHECK(line == "iter,gan1,gan2,tc,idt1,idt2,total");
  int rows = 0;
  while (std::getline(losses, line)) ++rows;
  CHECK(rows == 12);

  std::ifstream lr(out / "lr.csv");
  std::getline(lr, line);
  CHECK(line == "epoch,lr");
  std::getline(lr, line);
  CHECK(line == "1,0.0002");
  std::getline(lr, line);
  CHECK(line == "2,0");

  // Resuming a finished run is a no-op apart from rewriting final.ckpt.
  LoadedCheckpoint loaded = load_checkpoint(out / "final.ckpt");
  CHECK(loaded.state.epoch == 2);
  train(loaded.state, ds, out);
  CHECK(loaded.state.iteration == 12);
}

TEST_CASE("train rejects a single non-shadow image") {
  auto root = testing::scratch_dir("one_nonshadow");
  std::filesystem::create_directories(root / "shadow");
  std::filesystem::create_directories(root / "nonshadow");
  save_image(ImageTensor::constant(32, 32, 0.0f), root / "shadow" / "a.png");
  save_image(ImageTensor::constant(32, 32, 0.5f), root / "nonshadow" / "b.png");
  TrainState state = TrainState::initialize(tiny_config());
  CHECK_THROWS_AS(train(state, UnpairedDataset::open(root), {}), DataError);
}

TEST_CASE("classifier training is deterministic and round-trips") {
  const UnpairedDataset ds = UnpairedDataset::open(tiny_corpus());
  TrainConfig cfg = tiny_config();
  cfg.msm_epochs = 2;
  cfg.msm_holdout = 0.34;
  const MsmTrainResult a = train_msm(cfg, ds.shadow_paths, ds.nonshadow_paths);
  const MsmTrainResult b = train_msm(cfg, ds.shadow_paths, ds.nonshadow_paths);
  CHECK_FALSE(params_differ(a.msm.params(), b.msm.params()));
  CHECK(a.heldout_count == 4);
  CHECK(std::isfinite(a.final_train_loss));

  const auto dir = testing::scratch_dir("msm_io");
  save_msm(a.msm, cfg, dir / "msm.bin");
  CHECK_FALSE(params_differ(a.msm.params(), load_msm(dir / "msm.bin").params()));

  TrainState state = TrainState::initialize(cfg);
  save_checkpoint(state, dir / "with_msm.ckpt", &a.msm);
  CHECK_FALSE(params_differ(a.msm.params(), load_msm(dir / "with_msm.ckpt").params()));
  CHECK(load_checkpoint(dir / "with_msm.ckpt").msm.has_value());
  save_checkpoint(state, dir / "plain.ckpt");
  CHECK_THROWS_AS(load_msm(dir / "plain.ckpt"), DataError);

  cfg.msm_holdout = 0.05;
  CHECK_THROWS_AS(train_msm(cfg, ds.shadow_paths, ds.nonshadow_paths), DataError);
}
