#pragma once

// Binary checkpoint container for a trained model.
//
// Layout (all integers little-endian):
//
//   magic        8 bytes  "RUMORCKP"
//   version      u32      currently 1
//   config_len   u32      byte length of the JSON document that follows
//   config       bytes    UTF-8 JSON: {"model", "train", "loss", "best_epoch",
//                         "best_dev_macro_f1", "veracity_order", "stance_order"}
//   seed         u64      initialization / training seed
//   steps        u64      optimizer steps taken when the snapshot was kept
//   param_count  u32
//   per parameter:
//     name_len   u32
//     name       bytes
//     rows       u32
//     cols       u32
//     payload    rows*cols IEEE-754 binary32 values, row-major
//   checksum     u64      FNV-1a 64 over every byte from param_count up to
//                         the end of the last payload
//
// Parameters appear in model construction order. Nothing may follow the
// checksum.

#include <filesystem>
#include <optional>

#include "rumor/model.hpp"
#include "rumor/training.hpp"

namespace rumor {

inline constexpr char kCheckpointMagic[8] = {'R', 'U', 'M', 'O', 'R', 'C', 'K', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Throws IoError if the file cannot be written.
void save_checkpoint(const TrainedModel& model, const std::filesystem::path& path);

// Throws IoError (unreadable), CheckpointError (bad magic, version,
// truncation, trailing bytes, checksum, malformed echo), ShapeMismatchError
// (a parameter name or shape disagrees with the echoed model config) and,
// when `expected` is given, ConfigError if the echoed model config differs
// from it.
TrainedModel load_checkpoint(const std::filesystem::path& path,
                             const std::optional<ModelConfig>& expected = std::nullopt);

}  // namespace rumor
