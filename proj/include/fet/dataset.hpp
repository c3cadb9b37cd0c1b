#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "fet/inference.hpp"

namespace fet {

/// One evaluation mention with gold types.
struct DatasetRecord {
  std::string id;
  Mention mention;
  std::vector<std::string> types;
};

/// Dataset file: one JSON object per line,
/// {"id", "context", "mention", "span": [begin, end], "types": [...]}.
std::vector<DatasetRecord> load_dataset(const std::filesystem::path& file);
void write_dataset(std::ostream& out, const std::vector<DatasetRecord>& records);
void save_dataset(const std::filesystem::path& file, const std::vector<DatasetRecord>& records);

struct PredictionRecord {
  std::string id;
  TypePrediction prediction;
};

/// Prediction file: {"id", "path", "level_scores": [[path, score], ...], "mode"} per line.
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& file);
void write_predictions(std::ostream& out, const std::vector<PredictionRecord>& records);
void save_predictions(const std::filesystem::path& file, const std::vector<PredictionRecord>& records);

}  // namespace fet
