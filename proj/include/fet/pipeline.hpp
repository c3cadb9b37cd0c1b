#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fet/dataset.hpp"
#include "fet/enrichment.hpp"
#include "fet/entailment_model.hpp"
#include "fet/generation.hpp"
#include "fet/inference.hpp"
#include "fet/io.hpp"
#include "fet/metrics.hpp"
#include "fet/nli_data.hpp"

namespace fet {

struct AblationFlags {
  bool no_topics = false;
  bool flat_inference = false;
  bool ce_loss = false;
  bool include_siblings = false;
};

/// Everything a pipeline run needs. Relative file paths resolve against `base_dir`.
struct PipelineConfig {
  std::filesystem::path base_dir = ".";
  std::uint64_t seed = 13;

  struct Files {
    std::string ontology = "ontology.jsonl";
    std::string enrichment = "enrichment.jsonl";
    std::string corpus_dir = "corpus";
    std::string embeddings;  // optional phrase-embedding table for instance expansion
    std::string background = "background.tsv";
    std::string lm_corpus = "lm_corpus.txt";
    std::string samples = "out/samples.jsonl";
    std::string nli = "out/nli.jsonl";
    std::string model = "out/model.json";
    std::string loss_trace = "out/loss.tsv";
    std::string dataset = "test.jsonl";
    std::string predictions = "out/predictions.jsonl";
    std::string evaluation = "out/evaluation.json";
    std::string error_report = "out/error_report.json";
  } files;

  // Optional remote backends; empty means use the local ones.
  std::string search_endpoint;
  std::string search_index;
  std::string lm_endpoint;
  std::string lm_style = "Wikipedia";
  double lm_smoothing = 0.01;

  EnrichOptions enrich;
  GenerationConfig generation;
  LabelCounts nli;
  ModelOptions model;
  TrainConfig train;
  InferenceOptions inference;
  AblationFlags ablation;
  std::vector<std::string> pipeline_stages = {"generate", "build-nli", "train", "infer", "evaluate", "report"};

  static PipelineConfig from_json(const io::Json& j, const std::filesystem::path& base_dir);
  static PipelineConfig load(const std::filesystem::path& file);
  io::Json to_json() const;

  /// Overrides one key, addressed with dots (e.g. "generation.alpha", "files.model").
  /// The value is parsed as JSON when possible, otherwise taken as a string.
  void set(const std::string& dotted_key, const std::string& value);

  std::filesystem::path resolve(const std::string& file) const;

  /// SHA-256 of the canonical JSON form (base_dir excluded).
  std::string digest() const;
};

struct StageResult {
  std::string stage;
  io::Json summary;  // deterministic counts and means
  std::vector<std::filesystem::path> outputs;
};

StageResult run_enrich(const PipelineConfig& config);
StageResult run_generate(const PipelineConfig& config);
StageResult run_build_nli(const PipelineConfig& config);
StageResult run_train(const PipelineConfig& config);
StageResult run_infer(const PipelineConfig& config);
StageResult run_evaluate(const PipelineConfig& config);
StageResult run_report(const PipelineConfig& config);

/// Dispatches one of: enrich, generate, build-nli, train, infer, evaluate, report.
StageResult run_stage(const std::string& stage, const PipelineConfig& config);
/// Runs `config.pipeline_stages` in order.
std::vector<StageResult> run_pipeline(const PipelineConfig& config);

/// Result of comparing predictions with gold types under an ontology.
struct Evaluation {
  MetricsReport metrics;
  std::size_t mentions = 0;
  std::size_t strict_mentions = 0;  // mentions with at least one mapped gold type
  std::vector<std::string> unmapped_gold;
  std::vector<EvalPair> pairs;
};

/// Predicted set = root-to-node lineage of the predicted path. Gold types
/// missing from the ontology are left out of strict accuracy but kept for
/// the set-overlap metrics.
Evaluation evaluate_predictions(const std::vector<DatasetRecord>& dataset,
                                const std::vector<PredictionRecord>& predictions,
                                const TypeOntology& ontology);

enum class ErrorCategory { IncorrectFineGrained, Debatable, Other };
std::string_view to_string(ErrorCategory category);

struct ErrorBucket {
  std::size_t count = 0;
  std::vector<std::string> exemplars;  // mention ids, first few in input order
};

struct ErrorReport {
  std::size_t errors = 0;
  std::map<ErrorCategory, ErrorBucket> buckets;
  ErrorBucket possible_nesting;
};

/// Classifies one erroneous prediction:
///  - IncorrectFineGrained: the predicted path is a proper ancestor of a gold path;
///  - Debatable: it is a proper descendant of a gold path, or a gold type is
///    absent from the ontology and the node sharing its name is related to the prediction;
///  - Other: anything else.
ErrorCategory classify_error(const TypeSet& gold, const std::string& predicted_path, const TypeOntology& ontology);

/// True when the surface sits strictly inside a longer run of capitalized words.
bool possibly_nested(const Mention& mention);

/// `pairs` and `predictions` must be aligned; `ids` and `mentions` are optional
/// (empty) or aligned as well.
ErrorReport error_report(std::span<const EvalPair> pairs, std::span<const TypePrediction> predictions,
                         const TypeOntology& ontology, std::span<const std::string> ids = {},
                         std::span<const Mention> mentions = {}, std::size_t max_exemplars = 5);

io::Json to_json(const MetricsReport& report);
io::Json to_json(const ErrorReport& report);

}  // namespace fet
