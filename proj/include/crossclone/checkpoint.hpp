#pragma once

#include <filesystem>

#include "crossclone/contrastive.hpp"

namespace crossclone {

// Checkpoints are versioned JSON documents holding the full model: encoder
// (vocabulary and embedding table, or imported vectors), projection head or
// classifier parameters, and the training configuration. Doubles survive the
// round trip bit-exactly, so a reloaded model reproduces predictions.
void save_checkpoint(const ContrastiveModel& model, const std::filesystem::path& path);
void save_checkpoint(const BaselineModel& model, const std::filesystem::path& path);

// Reads "variant" without loading the rest, so callers can dispatch.
ModelVariant peek_checkpoint_variant(const std::filesystem::path& path);

ContrastiveModel load_contrastive_checkpoint(const std::filesystem::path& path);
BaselineModel load_baseline_checkpoint(const std::filesystem::path& path);

} // namespace crossclone
