#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "localma/gating_network.hpp"
#include "localma/losses.hpp"
#include "localma/model.hpp"

namespace localma {

inline constexpr int kModelFormatVersion = 1;

struct ModelMeta {
  LossKind loss = LossKind::Squared;
  Task task = Task::Regression;
  int num_classes = 1;
  std::uint64_t seed = 0;
  int iterations = 0;
  double final_loss = 0.0;
  /// Present when covariates were z-scored before training.
  std::optional<Standardizer> standardizer;
};

struct StoredModel {
  GatingNetwork network;
  ModelMeta meta;
};

// JSON text: format_version, dims, logit_clamp, pin_last_logit, loss, per-layer
// row-major weights and biases, and training metadata. Doubles are written as
// shortest round-trip decimals, so load(save(x)) reproduces x bitwise.
void write_model(std::ostream& out, const GatingNetwork& network, const ModelMeta& meta);
void save_model(const std::filesystem::path& path, const GatingNetwork& network,
                const ModelMeta& meta);

/// Throws VersionMismatch for format_version != 1 and CorruptFile for anything
/// unreadable (truncated text, missing fields, inconsistent shapes).
StoredModel read_model(std::istream& in);
StoredModel load_model(const std::filesystem::path& path);

}  // namespace localma
