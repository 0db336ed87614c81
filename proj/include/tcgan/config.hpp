#ifndef TCGAN_CONFIG_HPP
#define TCGAN_CONFIG_HPP

// Flat key-value configuration documents (YAML mappings of scalars). Unknown
// keys are rejected; absent keys keep their defaults.

#include "tcgan/datapipe.hpp"
#include "tcgan/trainer.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace tcgan {

using FlatConfig = std::vector<std::pair<std::string, std::string>>;

/// Reads a flat mapping. Throws ConfigError for a missing file, invalid YAML
/// or nested values.
FlatConfig read_flat_config(const std::filesystem::path& path);

TrainConfig train_config_from(const FlatConfig& kv);
FlatConfig to_flat(const TrainConfig& cfg);
TrainConfig parse_train_config(const std::filesystem::path& path);

SynthSpec synth_spec_from(const FlatConfig& kv);
FlatConfig to_flat(const SynthSpec& spec);
SynthSpec parse_synth_spec(const std::filesystem::path& path);

struct EvalOptions {
  std::vector<std::string> metrics{"fid", "kid", "rmse"};
  std::string space = "lab";
  int kid_subset_size = 100;  // clipped to the smaller set
  int kid_subsets = 10;
  std::uint64_t seed = 0;
};
EvalOptions eval_options_from(const FlatConfig& kv);
FlatConfig to_flat(const EvalOptions& opts);

}  // namespace tcgan

#endif  // TCGAN_CONFIG_HPP
