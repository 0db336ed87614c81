#include "tcgan/checkpoint.hpp"

#include "tcgan/config.hpp"
#include "tcgan/errors.hpp"

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>

namespace tcgan {

static_assert(std::endian::native == std::endian::little, "checkpoint payload assumes a little-endian host");

namespace {

using json = nlohmann::ordered_json;

struct Entry {
  std::string name;
  const Tensor<float>* tensor;
};

json config_json(const TrainConfig& cfg) {
  json out = json::object();
  for (const auto& [k, v] : to_flat(cfg)) out[k] = v;
  return out;
}

TrainConfig config_from_json(const json& j) {
  FlatConfig kv;
  for (const auto& [k, v] : j.items()) kv.emplace_back(k, v.get<std::string>());
  return train_config_from(kv);
}

void write_archive(const std::filesystem::path& path, json index, const std::vector<Entry>& entries) {
  json tensors = json::array();
  for (const auto& e : entries) {
    const Shape& s = e.tensor->shape;
    tensors.push_back({{"name", e.name}, {"shape", {s.n, s.c, s.h, s.w}}});
  }
  index["tensors"] = std::move(tensors);
  const std::string header = index.dump();

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint: " + path.string());
    out << kCheckpointMagic << '\n';
    const std::uint64_t len = header.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(header.data(), std::streamsize(header.size()));
    for (const auto& e : entries) {
      out.write(reinterpret_cast<const char*>(e.tensor->data.data()), std::streamsize(e.tensor->data.size() * sizeof(float)));
    }
    if (!out) throw DataError("failed while writing checkpoint: " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

struct Archive {
  json index;
  std::map<std::string, Tensor<float>> tensors;

  const Tensor<float>& at(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw DataError("checkpoint is missing tensor '" + name + "'");
    return it->second;
  }
};

Archive read_archive(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("checkpoint not found: " + path.string());
  std::ifstream in(path, std::ios::binary);
  std::string magic;
  std::getline(in, magic);
  if (magic != kCheckpointMagic) {
    throw DataError("not a " + std::string(kCheckpointMagic) + " archive: " + path.string());
  }
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || len > (std::uint64_t(1) << 32)) throw DataError("corrupt checkpoint header: " + path.string());
  std::string header(len, '\0');
  in.read(header.data(), std::streamsize(len));
  Archive a;
  try {
    a.index = json::parse(header);
  } catch (const json::exception& e) {
    throw DataError("corrupt checkpoint index in " + path.string() + ": " + e.what());
  }
  for (const auto& t : a.index.at("tensors")) {
    const auto dims = t.at("shape").get<std::vector<int>>();
    if (dims.size() != 4) throw DataError("corrupt tensor shape in " + path.string());
    Tensor<float> tensor(Shape{dims[0], dims[1], dims[2], dims[3]});
    in.read(reinterpret_cast<char*>(tensor.data.data()), std::streamsize(tensor.data.size() * sizeof(float)));
    if (!in) throw DataError("truncated checkpoint payload: " + path.string());
    a.tensors.emplace(t.at("name").get<std::string>(), std::move(tensor));
  }
  return a;
}

void restore(const ParamList<float>& params, const Archive& a, const std::string& prefix = "") {
  for (const auto& p : params) {
    const Tensor<float>& t = a.at(prefix + p.name);
    if (!(t.shape == p.var.shape())) {
      throw DataError("tensor '" + prefix + p.name + "' has shape " + to_string(t.shape) + ", expected " +
                      to_string(p.var.shape()));
    }
    p.var.mutable_value() = t;
  }
}

void add_params(std::vector<Entry>& entries, const ParamList<float>& params, const std::string& prefix = "") {
  for (const auto& p : params) entries.push_back({prefix + p.name, &p.var.value()});
}

void add_moments(std::vector<Entry>& entries, const Adam<float>& opt, const std::string& prefix) {
  const auto& params = opt.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    entries.push_back({prefix + ".m." + params[i].name, &opt.first_moments()[i]});
    entries.push_back({prefix + ".v." + params[i].name, &opt.second_moments()[i]});
  }
}

void restore_moments(Adam<float>& opt, const Archive& a, const std::string& prefix) {
  const auto& params = opt.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    opt.first_moments()[i] = a.at(prefix + ".m." + params[i].name);
    opt.second_moments()[i] = a.at(prefix + ".v." + params[i].name);
  }
  opt.set_steps(a.index.at(prefix + "_steps").get<long>());
}

}  // namespace

void save_checkpoint(const TrainState& state, const std::filesystem::path& path, const Msm<float>* msm) {
  json index;
  index["kind"] = "train_state";
  index["config"] = config_json(state.cfg);
  index["epoch"] = state.epoch;
  index["iteration"] = state.iteration;
  index["seed_g1"] = state.generators.seed1;
  index["seed_g2"] = state.generators.seed2;
  std::ostringstream rng;
  rng << state.rng;
  index["rng"] = rng.str();
  index["last_d_loss"] = state.last_d_loss;
  index["opt_g_steps"] = state.opt_g.steps();
  index["opt_d_steps"] = state.opt_d.steps();
  index["has_msm"] = msm != nullptr;

  const ParamList<float> gp = state.generators.params();
  const ParamList<float> dp = state.discriminators.params();
  ParamList<float> mp;
  std::vector<Entry> entries;
  add_params(entries, gp);
  add_params(entries, dp);
  if (msm) {
    mp = msm->params();
    add_params(entries, mp);
  }
  add_moments(entries, state.opt_g, "opt_g");
  add_moments(entries, state.opt_d, "opt_d");
  write_archive(path, std::move(index), entries);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  const Archive a = read_archive(path);
  if (a.index.value("kind", "") != "train_state") throw DataError("not a training checkpoint: " + path.string());
  TrainConfig cfg = config_from_json(a.index.at("config"));
  cfg.seed_g1 = a.index.at("seed_g1").get<std::uint64_t>();
  cfg.seed_g2 = a.index.at("seed_g2").get<std::uint64_t>();

  LoadedCheckpoint out;
  out.state = TrainState::initialize(cfg, *cfg.seed_g1 == *cfg.seed_g2);
  TrainState& s = out.state;
  restore(s.generators.params(), a);
  restore(s.discriminators.params(), a);
  restore_moments(s.opt_g, a, "opt_g");
  restore_moments(s.opt_d, a, "opt_d");
  s.epoch = a.index.at("epoch").get<int>();
  s.iteration = a.index.at("iteration").get<long>();
  s.last_d_loss = a.index.at("last_d_loss").get<double>();
  std::istringstream rng(a.index.at("rng").get<std::string>());
  rng >> s.rng;
  if (a.index.value("has_msm", false)) {
    Msm<float> msm(cfg.msm, 0, cfg.init_std);
    restore(msm.params(), a);
    out.msm = std::move(msm);
  }
  return out;
}

void save_msm(const Msm<float>& msm, const TrainConfig& cfg, const std::filesystem::path& path) {
  json index;
  index["kind"] = "msm";
  index["config"] = config_json(cfg);
  const ParamList<float> mp = msm.params();
  std::vector<Entry> entries;
  add_params(entries, mp);
  write_archive(path, std::move(index), entries);
}

Msm<float> load_msm(const std::filesystem::path& path) {
  const Archive a = read_archive(path);
  const std::string kind = a.index.value("kind", "");
  if (kind == "train_state" && !a.index.value("has_msm", false)) {
    throw DataError("checkpoint carries no selection classifier: " + path.string());
  }
  if (kind != "msm" && kind != "train_state") throw DataError("unknown archive kind in " + path.string());
  const TrainConfig cfg = config_from_json(a.index.at("config"));
  Msm<float> msm(cfg.msm, 0, cfg.init_std);
  restore(msm.params(), a);
  return msm;
}

}  // namespace tcgan
