#include "cli.hpp"

#include "tcgan/checkpoint.hpp"
#include "tcgan/config.hpp"
#include "tcgan/datapipe.hpp"
#include "tcgan/errors.hpp"
#include "tcgan/inference.hpp"
#include "tcgan/metrics.hpp"
#include "tcgan/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <random>

#ifndef TCGAN_VERSION
#define TCGAN_VERSION "unknown"
#endif

namespace tcgan::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json flat_json(const FlatConfig& kv) {
  json out = json::object();
  for (const auto& [k, v] : kv) out[k] = v;
  return out;
}

json seeds_json(const SeedPlan& s) {
  return {{"g1", s.g1}, {"g2", s.g2}, {"d1", s.d1}, {"d2", s.d2}, {"data", s.data}, {"msm", s.msm}};
}

/// Everything needed to rerun a command; written once at the end of the run.
struct RunManifest {
  std::string command;
  std::vector<std::string> args;
  json config = json::object();
  json seeds = json::object();
  json inputs = json::object();
  std::vector<std::string> outputs;
  std::string started = utc_now();
  std::string status = "ok";

  void write(const fs::path& path) const {
    json j;
    j["command"] = command;
    j["args"] = args;
    j["config"] = config;
    j["seeds"] = seeds;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["code_version"] = TCGAN_VERSION;
    j["started"] = started;
    j["finished"] = utc_now();
    j["status"] = status;
    fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      if (!out) throw DataError("cannot write run manifest " + path.string());
      out << j.dump(2) << '\n';
      if (!out) throw DataError("cannot write run manifest " + path.string());
    }
    fs::rename(tmp, path);
  }
};

/// Manifest location for commands that produce a single file.
fs::path sidecar_manifest(const fs::path& file) { return file.string() + ".manifest.json"; }

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("TCGAN_SEED");
  if (v == nullptr || *v == '\0') return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const unsigned long long parsed = std::strtoull(v, &end, 10);
  if (errno != 0 || *end != '\0' || v[0] == '-') {
    throw ConfigError(std::string("TCGAN_SEED must be a non-negative integer, got '") + v + "'");
  }
  return std::uint64_t(parsed);
}

/// Explicit --seed beats TCGAN_SEED, which beats the config file.
std::uint64_t resolve_seed(std::uint64_t configured, const CLI::Option* flag, std::uint64_t flag_value) {
  if (flag->count() > 0) return flag_value;
  if (auto env = env_seed()) return *env;
  return configured;
}

std::vector<fs::path> input_images(const fs::path& input) {
  if (fs::is_directory(input)) {
    auto files = list_images(input);
    if (files.empty()) throw DataError("no images in " + input.string());
    return files;
  }
  if (!fs::exists(input)) throw DataError("input not found: " + input.string());
  return {input};
}

/// Index a directory by file stem so prediction/reference pairs can differ in extension.
std::map<std::string, fs::path> by_stem(const fs::path& dir) {
  std::map<std::string, fs::path> out;
  for (const auto& p : list_images(dir)) out[p.stem().string()] = p;
  return out;
}

const fs::path& lookup(const std::map<std::string, fs::path>& m, const std::string& stem, const fs::path& dir) {
  auto it = m.find(stem);
  if (it == m.end()) throw DataError("no counterpart for '" + stem + "' in " + dir.string());
  return it->second;
}

void require_multiple_of_8(const ImageTensor& x, const fs::path& path) {
  if (x.height() % 8 != 0 || x.width() % 8 != 0) {
    throw DataError(path.string() + ": sides must be multiples of 8, got " + std::to_string(x.height()) + "x" +
                    std::to_string(x.width()));
  }
}

struct Options {
  // train / train-msm
  std::string config;
  std::string data;
  std::string out;
  std::string resume;
  std::uint64_t seed = 0;
  // infer / dump-features
  std::string checkpoint;
  std::string msm;
  std::string input;
  std::string output;
  std::string branch = "msm";
  bool dump_candidates = false;
  int channels = 10;
  // eval
  std::string pred;
  std::string ref;
  std::string mask;
  std::string metrics = "fid,kid,rmse";
  std::string space = "lab";
  std::string report;
  int kid_subset_size = 100;
  int kid_subsets = 10;
  // synth
  int n_shadow = 200;
  int n_nonshadow = 200;
  int image_size = 64;
};

TrainConfig load_train_config(const Options& o, const CLI::Option* seed_flag) {
  TrainConfig cfg = o.config.empty() ? TrainConfig{} : parse_train_config(o.config);
  cfg.seed_global = resolve_seed(cfg.seed_global, seed_flag, o.seed);
  cfg.validate();
  return cfg;
}

int cmd_train(const Options& o, const CLI::Option* seed_flag, const std::vector<std::string>& args, std::ostream& out) {
  RunManifest manifest;
  manifest.command = "train";
  manifest.args = args;

  TrainState state;
  if (!o.resume.empty()) {
    if (!o.config.empty()) throw ConfigError("--config and --resume are mutually exclusive");
    state = std::move(load_checkpoint(o.resume).state);
    out << "resuming from " << o.resume << " at epoch " << state.epoch << "\n";
  } else {
    state = TrainState::initialize(load_train_config(o, seed_flag));
  }
  const UnpairedDataset ds = UnpairedDataset::open(o.data, state.cfg.seed_global);
  manifest.config = flat_json(to_flat(state.cfg));
  manifest.seeds = seeds_json(derive_seeds(state.cfg));
  manifest.inputs = {{"data", fs::absolute(o.data).string()},
                     {"n_shadow", ds.shadow_paths.size()},
                     {"n_nonshadow", ds.nonshadow_paths.size()},
                     {"resume", o.resume}};

  const fs::path dir = o.out;
  fs::create_directories(dir);
  LossBundle sum;
  long steps = 0;
  const auto t0 = std::chrono::steady_clock::now();
  TrainCallbacks cb;
  cb.on_step = [&](long, int, const LossBundle& b) {
    sum.gan1 += b.gan1;
    sum.gan2 += b.gan2;
    sum.tc += b.tc;
    sum.idt1 += b.idt1;
    sum.idt2 += b.idt2;
    sum.total += b.total;
    ++steps;
  };
  cb.on_epoch_end = [&](int epoch, double lr) {
    const double n = double(std::max<long>(steps, 1));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char line[256];
    std::snprintf(line, sizeof line,
                  "epoch %d/%d lr %.3g  gan %.4f %.4f  tc %.4f  idt %.4f %.4f  total %.4f  d %.4f  [%.0fs]\n", epoch,
                  state.cfg.epochs_total, lr, sum.gan1 / n, sum.gan2 / n, sum.tc / n, sum.idt1 / n, sum.idt2 / n,
                  sum.total / n, state.last_d_loss, secs);
    out << line << std::flush;
    sum = LossBundle{};
    steps = 0;
  };
  try {
    train(state, ds, dir, cb);
  } catch (const DivergenceError& e) {
    manifest.status = std::string("diverged: ") + e.what();
    manifest.write(dir / "run_manifest.json");
    throw;
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name != "run_manifest.json") manifest.outputs.push_back(entry.path().string());
  }
  std::sort(manifest.outputs.begin(), manifest.outputs.end());
  manifest.write(dir / "run_manifest.json");
  out << "wrote " << (dir / "final.ckpt").string() << "\n";
  return kOk;
}

int cmd_train_msm(const Options& o, const CLI::Option* seed_flag, const std::vector<std::string>& args,
                  std::ostream& out) {
  RunManifest manifest;
  manifest.command = "train-msm";
  manifest.args = args;
  const TrainConfig cfg = load_train_config(o, seed_flag);
  const UnpairedDataset ds = UnpairedDataset::open(o.data, cfg.seed_global);
  manifest.config = flat_json(to_flat(cfg));
  manifest.seeds = seeds_json(derive_seeds(cfg));
  manifest.inputs = {{"data", fs::absolute(o.data).string()}};

  const MsmTrainResult r = train_msm(cfg, ds.shadow_paths, ds.nonshadow_paths);
  const fs::path path = o.out;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  save_msm(r.msm, cfg, path);
  manifest.outputs = {path.string()};
  manifest.inputs["heldout_accuracy"] = r.heldout_accuracy;
  manifest.inputs["heldout_count"] = r.heldout_count;
  manifest.write(sidecar_manifest(path));
  char line[160];
  std::snprintf(line, sizeof line, "classifier: held-out accuracy %.4f on %zu images, final train loss %.4f\n",
                r.heldout_accuracy, r.heldout_count, r.final_train_loss);
  out << line << "wrote " << path.string() << "\n";
  return kOk;
}

int cmd_infer(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  RunManifest manifest;
  manifest.command = "infer";
  manifest.args = args;
  const LoadedCheckpoint ckpt = load_checkpoint(o.checkpoint);
  std::optional<Msm<float>> own_msm;
  const Msm<float>* msm = nullptr;
  if (o.branch == "msm") {
    if (!o.msm.empty()) msm = &own_msm.emplace(load_msm(o.msm));
    else if (ckpt.msm) msm = &*ckpt.msm;
    else throw ConfigError("--branch msm needs --msm or a checkpoint that carries a classifier");
  }
  manifest.config = flat_json(to_flat(ckpt.state.cfg));
  manifest.seeds = seeds_json(derive_seeds(ckpt.state.cfg));
  manifest.inputs = {{"checkpoint", fs::absolute(o.checkpoint).string()},
                     {"msm", o.msm},
                     {"input", fs::absolute(o.input).string()},
                     {"branch", o.branch}};

  const fs::path dir = o.output;
  fs::create_directories(dir);
  std::ofstream selection;
  if (msm) {
    selection.open(dir / "selection.csv", std::ios::trunc);
    selection << "image,branch,prob1,prob2\n";
  }
  const auto& gp = ckpt.state.generators;
  // Candidates go to a subdirectory so the output dir stays a clean prediction set.
  const fs::path cand = dir / "candidates";
  if (o.dump_candidates) fs::create_directories(cand);
  for (const auto& path : input_images(o.input)) {
    const ImageTensor x = load_image(path);
    require_multiple_of_8(x, path);
    const std::string stem = path.stem().string();
    ImageTensor result;
    if (msm) {
      const RemovalResult r = remove_shadow(gp, *msm, x);
      result = r.selected;
      char line[128];
      std::snprintf(line, sizeof line, ",%d,%.9g,%.9g\n", r.selected_branch, r.prob1, r.prob2);
      selection << path.filename().string() << line;
      if (o.dump_candidates) {
        save_image(r.y1, cand / (stem + "_y1.png"));
        save_image(r.y2, cand / (stem + "_y2.png"));
      }
    } else {
      result = remove_shadow_fixed(o.branch == "1" ? gp.g1 : gp.g2, x);
      if (o.dump_candidates) {
        save_image(remove_shadow_fixed(gp.g1, x), cand / (stem + "_y1.png"));
        save_image(remove_shadow_fixed(gp.g2, x), cand / (stem + "_y2.png"));
      }
    }
    const fs::path target = dir / (stem + ".png");
    save_image(result, target);
    manifest.outputs.push_back(target.string());
  }
  manifest.write(dir / "run_manifest.json");
  out << "wrote " << manifest.outputs.size() << " images to " << dir.string() << "\n";
  return kOk;
}

int cmd_dump_features(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  RunManifest manifest;
  manifest.command = "dump-features";
  manifest.args = args;
  const LoadedCheckpoint ckpt = load_checkpoint(o.checkpoint);
  const ImageTensor x = load_image(o.input);
  require_multiple_of_8(x, o.input);
  const FeatureDump d = dump_ste_features(ckpt.state.generators, x, o.channels, o.out);
  manifest.config = flat_json(to_flat(ckpt.state.cfg));
  manifest.seeds = seeds_json(derive_seeds(ckpt.state.cfg));
  manifest.inputs = {{"checkpoint", fs::absolute(o.checkpoint).string()},
                     {"input", fs::absolute(o.input).string()},
                     {"channels", o.channels}};
  manifest.outputs = {d.grid1.string(), d.grid2.string(), d.raw1.string(), d.raw2.string()};
  manifest.write(fs::path(o.out) / "run_manifest.json");
  out << "wrote " << d.grid1.string() << " and " << d.grid2.string() << "\n";
  return kOk;
}

int cmd_synth(const Options& o, const CLI::App& sub, const CLI::Option* seed_flag,
              const std::vector<std::string>& args, std::ostream& out) {
  RunManifest manifest;
  manifest.command = "synth";
  manifest.args = args;
  SynthSpec spec = o.config.empty() ? SynthSpec{} : parse_synth_spec(o.config);
  if (sub.count("--n-shadow")) spec.n_shadow = o.n_shadow;
  if (sub.count("--n-nonshadow")) spec.n_nonshadow = o.n_nonshadow;
  if (sub.count("--image-size")) spec.image_size = o.image_size;
  spec.seed = resolve_seed(spec.seed, seed_flag, o.seed);
  spec.validate();

  const fs::path dir = o.out;
  write_corpus(synthesize_corpus(spec), dir);
  manifest.config = flat_json(to_flat(spec));
  manifest.seeds = {{"synth", spec.seed}};
  manifest.outputs = {(dir / "shadow").string(), (dir / "nonshadow").string(), (dir / "gt").string(),
                      (dir / "mask").string(), (dir / "manifest.jsonl").string()};
  manifest.write(dir / "run_manifest.json");
  out << "wrote " << spec.n_shadow << " shadow and " << spec.n_nonshadow << " non-shadow images to " << dir.string()
      << "\n";
  return kOk;
}

int cmd_eval(const Options& o, const CLI::App& sub, const CLI::Option* seed_flag, const std::vector<std::string>& args,
             std::ostream& out) {
  RunManifest manifest;
  manifest.command = "eval";
  manifest.args = args;
  // Flags are folded into the flat config so validation happens in one place.
  FlatConfig kv = o.config.empty() ? FlatConfig{} : read_flat_config(o.config);
  auto set = [&](const char* flag, const char* key, const std::string& value) {
    if (sub.count(flag) == 0) return;
    std::erase_if(kv, [&](const auto& e) { return e.first == key; });
    kv.emplace_back(key, value);
  };
  set("--metrics", "metrics", o.metrics);
  set("--space", "space", o.space);
  set("--kid-subset-size", "kid_subset_size", std::to_string(o.kid_subset_size));
  set("--kid-subsets", "kid_subsets", std::to_string(o.kid_subsets));
  EvalOptions opts = eval_options_from(kv);
  opts.seed = resolve_seed(opts.seed, seed_flag, o.seed);
  const ColorSpace space = parse_color_space(opts.space);
  auto wants = [&](const char* m) { return std::find(opts.metrics.begin(), opts.metrics.end(), m) != opts.metrics.end(); };

  const std::vector<fs::path> pred_paths = list_images(o.pred);
  if (pred_paths.empty()) throw DataError("no images in " + o.pred);
  std::vector<ImageTensor> preds;
  for (const auto& p : pred_paths) preds.push_back(load_image(p));

  EvalReport report;
  report.color_space = space;
  report.n_pred = preds.size();
  if (wants("fid") || wants("kid")) {
    if (o.ref.empty()) throw ConfigError("fid/kid need --ref");
    std::vector<ImageTensor> refs;
    for (const auto& p : list_images(o.ref)) refs.push_back(load_image(p));
    if (refs.empty()) throw DataError("no images in " + o.ref);
    report.n_ref = refs.size();
    const RandomProjectionExtractor extractor;
    const FeatureSet fp = extract_features(preds, extractor);
    const FeatureSet fr = extract_features(refs, extractor);
    report.extractor_id = extractor.id();
    if (wants("fid")) report.fid = fid(fp, fr);
    if (wants("kid")) {
      const int subset = std::min<int>(opts.kid_subset_size, int(std::min(fp.size(), fr.size())));
      std::mt19937_64 rng(opts.seed);
      const KidResult k = kid(fp, fr, subset, opts.kid_subsets, rng);
      report.kid_mean = k.mean;
      report.kid_std = k.std;
      report.kid_subset_size = subset;
      report.kid_subsets = opts.kid_subsets;
    }
  }
  if (wants("rmse")) {
    if (o.mask.empty()) throw ConfigError("rmse needs --mask");
    if (o.ref.empty() && o.input.empty()) throw ConfigError("rmse needs --ref and/or --input");
    const auto masks = by_stem(o.mask);
    const auto refs = o.ref.empty() ? std::map<std::string, fs::path>{} : by_stem(o.ref);
    const auto inputs = o.input.empty() ? std::map<std::string, fs::path>{} : by_stem(o.input);
    std::map<std::string, double> sums;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const std::string stem = pred_paths[i].stem().string();
      const MaskTensor m = load_mask(lookup(masks, stem, o.mask));
      if (!o.ref.empty()) {
        const ImageTensor r = load_image(lookup(refs, stem, o.ref));
        sums["S"] += masked_rmse(preds[i], r, m, Region::Shadow, space);
        sums["N"] += masked_rmse(preds[i], r, m, Region::NonShadow, space);
        sums["A"] += masked_rmse(preds[i], r, m, Region::All, space);
      }
      if (!o.input.empty()) sums["N-I"] += rmse_n_i(preds[i], load_image(lookup(inputs, stem, o.input)), m, space);
    }
    for (const auto& [k, v] : sums) report.rmse[k] = v / double(preds.size());
  }

  const std::string text = report.to_json();
  out << text << "\n";
  if (!o.report.empty()) {
    const fs::path path = o.report;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot write report " + o.report);
    f << text << "\n";
    manifest.outputs = {path.string()};
    manifest.config = flat_json(to_flat(opts));
    manifest.seeds = {{"kid", opts.seed}};
    manifest.inputs = {{"pred", o.pred}, {"ref", o.ref}, {"mask", o.mask}, {"input", o.input}};
    manifest.write(sidecar_manifest(path));
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dual-generator GAN shadow removal: training, inference, evaluation and synthetic data"};
  app.name("tcgan");
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", std::string(TCGAN_VERSION));
  Options o;

  auto add_seed = [&](CLI::App* c, const char* what) {
    return c->add_option("--seed", o.seed, std::string("Seed for ") + what + "; overrides TCGAN_SEED and the config")
        ->default_str("config or TCGAN_SEED");
  };
  auto none = [](CLI::Option* opt) { return opt->default_str("none"); };

  CLI::App* train_cmd = app.add_subcommand("train", "Train both generator/discriminator pairs");
  none(train_cmd->add_option("--config", o.config, "Flat YAML training config; absent keys keep the defaults"));
  train_cmd->add_option("--data", o.data, "Dataset root containing shadow/ and nonshadow/")->required();
  train_cmd->add_option("--out", o.out, "Run directory for logs, checkpoints and run_manifest.json")->required();
  none(train_cmd->add_option("--resume", o.resume, "Checkpoint to continue from (takes its config)"));
  const CLI::Option* train_seed = add_seed(train_cmd, "all training randomness");

  CLI::App* msm_cmd = app.add_subcommand("train-msm", "Pre-train the shadow/non-shadow selection classifier");
  none(msm_cmd->add_option("--config", o.config, "Flat YAML training config"));
  msm_cmd->add_option("--data", o.data, "Dataset root containing shadow/ and nonshadow/")->required();
  msm_cmd->add_option("--out", o.out, "Output classifier file")->required();
  const CLI::Option* msm_seed = add_seed(msm_cmd, "the split, initialisation and augmentation");

  CLI::App* infer_cmd = app.add_subcommand("infer", "Remove shadows from an image or a directory of images");
  infer_cmd->add_option("--checkpoint", o.checkpoint, "Training checkpoint")->required();
  none(infer_cmd->add_option("--msm", o.msm, "Selection classifier (defaults to the one in the checkpoint)"));
  infer_cmd->add_option("--input", o.input, "Image file or directory")->required();
  infer_cmd->add_option("--output", o.output, "Output directory")->required();
  infer_cmd->add_option("--branch", o.branch, "Output branch: 1, 2 or msm")
      ->check(CLI::IsMember({"1", "2", "msm"}));
  infer_cmd->add_flag("--dump-candidates", o.dump_candidates, "Also write both branch outputs to <output>/candidates")->default_str("false");

  CLI::App* eval_cmd = app.add_subcommand("eval", "Score predictions with FID, KID and masked RMSE");
  eval_cmd->add_option("--pred", o.pred, "Directory of predicted images")->required();
  none(eval_cmd->add_option("--ref", o.ref, "Reference directory (non-shadow set or ground truth)"));
  none(eval_cmd->add_option("--mask", o.mask, "Shadow masks, matched to predictions by file stem"));
  none(eval_cmd->add_option("--input", o.input, "Input shadow images for the N-I score"));
  eval_cmd->add_option("--metrics", o.metrics, "Comma-separated subset of fid,kid,rmse");
  eval_cmd->add_option("--space", o.space, "RMSE colour space")->check(CLI::IsMember({"lab", "rgb"}));
  none(eval_cmd->add_option("--report", o.report, "Write the JSON report here as well as to stdout"));
  eval_cmd->add_option("--kid-subset-size", o.kid_subset_size, "KID subset size (clipped to the smaller set)");
  eval_cmd->add_option("--kid-subsets", o.kid_subsets, "Number of KID subsets");
  none(eval_cmd->add_option("--config", o.config, "Flat YAML evaluation options"));
  const CLI::Option* eval_seed = add_seed(eval_cmd, "KID subset sampling");

  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic shadow corpus with hidden ground truth");
  synth_cmd->add_option("--out", o.out, "Corpus root")->required();
  none(synth_cmd->add_option("--config", o.config, "Flat YAML synthesis spec"));
  synth_cmd->add_option("--n-shadow", o.n_shadow, "Number of shadow images");
  synth_cmd->add_option("--n-nonshadow", o.n_nonshadow, "Number of non-shadow images");
  synth_cmd->add_option("--image-size", o.image_size, "Side length in pixels");
  const CLI::Option* synth_seed = add_seed(synth_cmd, "scene, mask and attenuation sampling")->default_str("0");

  CLI::App* dump_cmd = app.add_subcommand("dump-features", "Export encoder feature maps of both generators");
  dump_cmd->add_option("--checkpoint", o.checkpoint, "Training checkpoint")->required();
  dump_cmd->add_option("--input", o.input, "Input image")->required();
  dump_cmd->add_option("--channels", o.channels, "Number of leading channels to export")->check(CLI::PositiveNumber);
  dump_cmd->add_option("--out", o.out, "Output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help("", CLI::AppFormatMode::All) : subs.front()->help());
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << TCGAN_VERSION << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run 'tcgan --help' for usage\n";
    return kUsage;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(o, train_seed, args, out);
    if (msm_cmd->parsed()) return cmd_train_msm(o, msm_seed, args, out);
    if (infer_cmd->parsed()) return cmd_infer(o, args, out);
    if (eval_cmd->parsed()) return cmd_eval(o, *eval_cmd, eval_seed, args, out);
    if (synth_cmd->parsed()) return cmd_synth(o, *synth_cmd, synth_seed, args, out);
    if (dump_cmd->parsed()) return cmd_dump_features(o, args, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DivergenceError& e) {
    err << "error: training diverged: " << e.what() << "\n";
    return kDivergence;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}

}  // namespace tcgan::cli
