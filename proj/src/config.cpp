#include "tcgan/config.hpp"

#include "tcgan/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cstdio>
#include <functional>
#include <sstream>

namespace tcgan {

namespace {

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw ConfigError("config key '" + key + "' expects a number, got '" + v + "'");
  return out;
}

template <typename Int>
Int parse_integer(const std::string& key, const std::string& v) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "True" || v == "1") return true;
  if (v == "false" || v == "False" || v == "0") return false;
  throw ConfigError("config key '" + key + "' expects true/false, got '" + v + "'");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
struct Field {
  std::string name;
  std::function<void(T&, const std::string&)> set;
  std::function<std::string(const T&)> get;  // empty string: omit
};

template <typename T>
Field<T> real(std::string name, double T::*member) {
  return {name, [name, member](T& t, const std::string& v) { t.*member = parse_double(name, v); },
          [member](const T& t) { return format_double(t.*member); }};
}

template <typename T, typename Get>
Field<T> real_at(std::string name, Get access) {
  return {name, [name, access](T& t, const std::string& v) { access(t) = parse_double(name, v); },
          [access](const T& t) { return format_double(access(const_cast<T&>(t))); }};
}

template <typename T, typename Int>
Field<T> integer(std::string name, Int T::*member) {
  return {name, [name, member](T& t, const std::string& v) { t.*member = parse_integer<Int>(name, v); },
          [member](const T& t) { return std::to_string(t.*member); }};
}

template <typename T, typename Get>
Field<T> integer_at(std::string name, Get access) {
  return {name, [name, access](T& t, const std::string& v) { access(t) = parse_integer<int>(name, v); },
          [access](const T& t) { return std::to_string(access(const_cast<T&>(t))); }};
}

template <typename T>
Field<T> boolean(std::string name, bool T::*member) {
  return {name, [name, member](T& t, const std::string& v) { t.*member = parse_bool(name, v); },
          [member](const T& t) { return std::string(t.*member ? "true" : "false"); }};
}

template <typename T>
Field<T> optional_seed(std::string name, std::optional<std::uint64_t> T::*member) {
  return {name, [name, member](T& t, const std::string& v) { t.*member = parse_integer<std::uint64_t>(name, v); },
          [member](const T& t) { return (t.*member) ? std::to_string(*(t.*member)) : std::string(); }};
}

template <typename T>
T apply(const std::vector<Field<T>>& fields, const FlatConfig& kv, T out) {
  for (const auto& [key, value] : kv) {
    bool known = false;
    for (const auto& f : fields) {
      if (f.name == key) {
        f.set(out, value);
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError("unknown config key '" + key + "'");
  }
  return out;
}

template <typename T>
FlatConfig dump(const std::vector<Field<T>>& fields, const T& t) {
  FlatConfig out;
  for (const auto& f : fields) {
    std::string v = f.get(t);
    if (!v.empty()) out.emplace_back(f.name, std::move(v));
  }
  return out;
}

const std::vector<Field<TrainConfig>>& train_fields() {
  using C = TrainConfig;
  static const std::vector<Field<C>> fields{
      real("base_lr", &C::base_lr),
      real("momentum1", &C::momentum1),
      real("momentum2", &C::momentum2),
      integer("epochs_total", &C::epochs_total),
      integer("epochs_constant", &C::epochs_constant),
      integer("batch_size", &C::batch_size),
      real("init_std", &C::init_std),
      real_at<C>("lambda1", [](C& c) -> double& { return c.weights.lambda1; }),
      real_at<C>("lambda2", [](C& c) -> double& { return c.weights.lambda2; }),
      real_at<C>("lambda3", [](C& c) -> double& { return c.weights.lambda3; }),
      integer("seed_global", &C::seed_global),
      optional_seed("seed_g1", &C::seed_g1),
      optional_seed("seed_g2", &C::seed_g2),
      integer("pre_crop", &C::pre_crop),
      integer("crop", &C::crop),
      boolean("flip", &C::flip),
      integer_at<C>("generator_channels", [](C& c) -> int& { return c.generator.base_channels; }),
      integer_at<C>("residual_blocks", [](C& c) -> int& { return c.generator.residual_blocks; }),
      integer_at<C>("discriminator_channels", [](C& c) -> int& { return c.discriminator.base_channels; }),
      integer_at<C>("msm_channels", [](C& c) -> int& { return c.msm.base_channels; }),
      integer("checkpoint_every", &C::checkpoint_every),
      integer("msm_epochs", &C::msm_epochs),
      real("msm_holdout", &C::msm_holdout),
  };
  return fields;
}

const std::vector<Field<SynthSpec>>& synth_fields() {
  using S = SynthSpec;
  static const std::vector<Field<S>> fields{
      integer("n_shadow", &S::n_shadow),
      integer("n_nonshadow", &S::n_nonshadow),
      integer("image_size", &S::image_size),
      real("attenuation_lo", &S::attenuation_lo),
      real("attenuation_hi", &S::attenuation_hi),
      real("coverage_lo", &S::coverage_lo),
      real("coverage_hi", &S::coverage_hi),
      real("edge_blur_sigma", &S::edge_blur_sigma),
      integer("max_shapes", &S::max_shapes),
      integer("seed", &S::seed),
  };
  return fields;
}

const std::vector<Field<EvalOptions>>& eval_fields() {
  using E = EvalOptions;
  static const std::vector<Field<E>> fields{
      {"metrics",
       [](E& e, const std::string& v) {
         e.metrics.clear();
         std::stringstream ss(v);
         std::string item;
         while (std::getline(ss, item, ',')) {
           if (item != "fid" && item != "kid" && item != "rmse") throw ConfigError("unknown metric '" + item + "'");
           e.metrics.push_back(item);
         }
       },
       [](const E& e) {
         std::string out;
         for (const auto& m : e.metrics) out += (out.empty() ? "" : ",") + m;
         return out;
       }},
      {"space",
       [](E& e, const std::string& v) {
         if (v != "lab" && v != "rgb") throw ConfigError("config key 'space' expects lab or rgb, got '" + v + "'");
         e.space = v;
       },
       [](const E& e) { return e.space; }},
      integer("kid_subset_size", &E::kid_subset_size),
      integer("kid_subsets", &E::kid_subsets),
      integer("seed", &E::seed),
  };
  return fields;
}

}  // namespace

FlatConfig read_flat_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError("cannot parse config " + path.string() + ": " + e.what());
  }
  FlatConfig out;
  if (root.IsNull()) return out;
  if (!root.IsMap()) throw ConfigError("config " + path.string() + " must be a key-value mapping");
  for (const auto& item : root) {
    const std::string key = item.first.as<std::string>();
    if (!item.second.IsScalar()) throw ConfigError("config key '" + key + "' must hold a scalar value");
    out.emplace_back(key, item.second.as<std::string>());
  }
  return out;
}

TrainConfig train_config_from(const FlatConfig& kv) {
  TrainConfig cfg = apply(train_fields(), kv, TrainConfig{});
  cfg.validate();
  return cfg;
}

FlatConfig to_flat(const TrainConfig& cfg) { return dump(train_fields(), cfg); }

TrainConfig parse_train_config(const std::filesystem::path& path) { return train_config_from(read_flat_config(path)); }

SynthSpec synth_spec_from(const FlatConfig& kv) {
  SynthSpec spec = apply(synth_fields(), kv, SynthSpec{});
  spec.validate();
  return spec;
}

FlatConfig to_flat(const SynthSpec& spec) { return dump(synth_fields(), spec); }

SynthSpec parse_synth_spec(const std::filesystem::path& path) { return synth_spec_from(read_flat_config(path)); }

EvalOptions eval_options_from(const FlatConfig& kv) {
  EvalOptions opts = apply(eval_fields(), kv, EvalOptions{});
  if (opts.kid_subset_size < 2 || opts.kid_subsets < 1) throw ConfigError("invalid KID subset parameters");
  return opts;
}

FlatConfig to_flat(const EvalOptions& opts) { return dump(eval_fields(), opts); }

}  // namespace tcgan
