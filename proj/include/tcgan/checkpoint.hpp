#ifndef TCGAN_CHECKPOINT_HPP
#define TCGAN_CHECKPOINT_HPP

// Single-file archives: the header line "tcgan-ckpt-v1", a length-prefixed
// JSON index (config, counters, seeds, rng state, tensor names and shapes),
// then the raw little-endian float32 payload of every tensor in index order.

#include "tcgan/networks.hpp"
#include "tcgan/trainer.hpp"

#include <filesystem>
#include <optional>
#include <string_view>

namespace tcgan {

inline constexpr std::string_view kCheckpointMagic = "tcgan-ckpt-v1";

/// Generators, discriminators, both optimiser states, counters, seeds and the
/// data rng; optionally the selection classifier as a fifth parameter set.
void save_checkpoint(const TrainState& state, const std::filesystem::path& path, const Msm<float>* msm = nullptr);

struct LoadedCheckpoint {
  TrainState state;
  std::optional<Msm<float>> msm;
};

/// Throws DataError on a missing file, a wrong header or a corrupt payload.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

/// Classifier-only archive in the same container format.
void save_msm(const Msm<float>& msm, const TrainConfig& cfg, const std::filesystem::path& path);

/// Accepts a classifier archive or a full checkpoint carrying one.
Msm<float> load_msm(const std::filesystem::path& path);

}  // namespace tcgan

#endif  // TCGAN_CHECKPOINT_HPP
