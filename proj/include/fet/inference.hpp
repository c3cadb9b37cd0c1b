#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "fet/entailment_model.hpp"
#include "fet/ontology.hpp"
#include "fet/text.hpp"

namespace fet {

struct Mention {
  std::string context;
  std::string surface;
  std::size_t span_begin = 0;  // byte offsets into context, end exclusive
  std::size_t span_end = 0;

  /// Throws InvalidArgument unless context[span) == surface.
  void validate() const;
};

enum class InferenceMode { CoarseToFine, Flat };

std::string_view to_string(InferenceMode mode);

struct TypePrediction {
  std::string path;
  std::vector<std::pair<std::string, double>> level_scores;
  InferenceMode mode = InferenceMode::CoarseToFine;
};

/// Top-k unigrams/bigrams of the context by tf-idf against `background`,
/// stopwords excluded, ties broken by first occurrence. May return fewer than k.
std::vector<std::string> extract_keywords(std::string_view context, std::size_t k,
                                          const text::BackgroundTable& background,
                                          const std::set<std::string>& excluded = {});

/// Scoring interface consumed by the typing routines.
class EntailmentScorer {
 public:
  virtual ~EntailmentScorer() = default;
  /// Entailment probability of `hypothesis` given `premise` and `topics`.
  virtual double entailment(const std::string& premise, const std::string& hypothesis,
                            const std::vector<std::string>& topics) const = 0;
};

/// Adapts a trained EntailmentModel. With `use_topics` false, topics are ignored.
class ModelScorer final : public EntailmentScorer {
 public:
  explicit ModelScorer(const EntailmentModel& model, bool use_topics = true)
      : model_(model), use_topics_(use_topics) {}
  double entailment(const std::string& premise, const std::string& hypothesis,
                    const std::vector<std::string>& topics) const override;

 private:
  const EntailmentModel& model_;
  bool use_topics_;
};

/// Entailment probability of "<surface> is a <candidate name>" for each candidate, in order.
std::vector<std::pair<std::string, double>> score_children(const EntailmentScorer& scorer,
                                                           const TypeOntology& ontology,
                                                           const Mention& mention,
                                                           const std::vector<std::string>& candidates,
                                                           const std::vector<std::string>& keywords);

struct InferenceOptions {
  double threshold = 0.5;
  std::size_t keywords = 5;
  bool use_topics = true;  // when false no keywords are extracted
};

/// Keywords are extracted from the context with the mention's own words excluded.
/// Top-down typing: pick the best depth-1 type (always accepted), then keep
/// descending into the best child while its score reaches the threshold.
/// Ties go to the earlier child in document order.
TypePrediction type_mention(const EntailmentScorer& scorer, const TypeOntology& ontology,
                            const Mention& mention, const text::BackgroundTable& background,
                            const InferenceOptions& options = {});

/// Scores every ontology node as one flat candidate list and returns the argmax.
TypePrediction type_mention_flat(const EntailmentScorer& scorer, const TypeOntology& ontology,
                                 const Mention& mention, const text::BackgroundTable& background,
                                 const InferenceOptions& options = {});

}  // namespace fet
