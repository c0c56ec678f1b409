#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "quiverml/machine.hpp"
#include "quiverml/nearring.hpp"
#include "quiverml/trainer.hpp"
#include "quiverml/uniformize.hpp"

namespace qml {

/// Everything one JSON config file describes.
struct RunConfig {
  nlohmann::json source;  ///< the document as read
  std::shared_ptr<const Quiver> quiver;
  std::string algorithm;
  TrainConfig train;
  Dataset data;
};

/// Parses and validates a config document. Relative data paths resolve
/// against `base_dir`. Throws ConfigError, IoError.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
void write_text(const std::filesystem::path& path, const std::string& text);

nlohmann::json quiver_to_json(const Quiver& q);
std::shared_ptr<const Quiver> quiver_from_json(const nlohmann::json& j);

MetricSignature signature_from_json(const nlohmann::json& j, bool* learnable = nullptr);
nlohmann::json signature_to_json(const MetricSignature& sig);

/// Nested arrays of [re, im] pairs, row by row.
nlohmann::json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const nlohmann::json& j);

/// Rows of numbers: x entries then y entries (real), or, with `complex`,
/// interleaved re/im pairs. Lines starting with '#' and a header line of
/// non-numeric text are skipped.
Dataset read_dataset_csv(const std::filesystem::path& path, int in_dim, int out_dim, bool complex);
/// Rows of inputs only, same layout rules.
std::vector<CVector> read_inputs_csv(const std::filesystem::path& path, int in_dim, bool complex);

struct Checkpoint {
  std::string algorithm;
  MetricSignature signature;
  FramedRep point;
};

nlohmann::json checkpoint_to_json(const Checkpoint& c);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

nlohmann::json coords_to_json(const GrassmannCoords& c);

}  // namespace qml
