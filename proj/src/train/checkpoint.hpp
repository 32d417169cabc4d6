#pragma once

#include <cstdint>
#include <filesystem>

#include "nn/model.hpp"

namespace attnfc {

inline constexpr int kCheckpointFormatVersion = 1;

struct CheckpointMeta {
  std::size_t epoch = 0;
  double validation_loss = 0.0;
  std::uint64_t seed = 0;
};

struct LoadedCheckpoint {
  Forecaster model;
  CheckpointMeta meta;
};

// Versioned JSON document: format version, model configuration, metadata and
// every parameter tensor keyed by its visit name. Doubles survive the round
// trip bitwise.
void save_checkpoint(const Forecaster& model, const CheckpointMeta& meta,
                     const std::filesystem::path& file);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& file);

}  // namespace attnfc
