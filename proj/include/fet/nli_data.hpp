#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "fet/generation.hpp"
#include "fet/ontology.hpp"

namespace fet {

enum class NliLabel : int { Entailment = 0, Neutral = 1, Contradiction = 2 };
inline constexpr std::size_t kNumLabels = 3;

std::string_view to_string(NliLabel label);
NliLabel parse_label(std::string_view name);

struct NLIExample {
  std::string premise;
  std::string hypothesis;
  std::vector<std::string> topics;
  NliLabel label = NliLabel::Entailment;
  std::string source_type;
  std::string hypothesis_type;
  std::string instance;

  friend bool operator==(const NLIExample&, const NLIExample&) = default;
};

/// "<instance> is a <type>", with "an" before a vowel-initial type name.
std::string render_hypothesis(std::string_view instance, std::string_view type_name);

/// Whose enriched topics a Contradiction example carries.
enum class TopicSource { Hypothesis, Source };

struct LabelCounts {
  std::size_t n_neutral = 1;
  std::size_t n_contradiction = 1;
  TopicSource contradiction_topics = TopicSource::Hypothesis;
};

std::string_view to_string(TopicSource source);
TopicSource parse_topic_source(std::string_view text);

/// One Entailment example per sample, plus up to `n_neutral` ancestors and up
/// to `n_contradiction` contradiction-set types drawn without replacement.
/// Entailment/Neutral examples carry the source type's topics; Contradiction
/// examples carry the topics chosen by `per_sample.contradiction_topics`.
std::vector<NLIExample> build_examples(const std::vector<GeneratedSample>& samples,
                                       const TypeOntology& ontology, const Enrichment& enrichment,
                                       const LabelCounts& per_sample, bool include_siblings,
                                       std::uint64_t rng_seed);

/// NLI dataset file: one JSON object per line with every NLIExample field.
void write_examples(std::ostream& out, const std::vector<NLIExample>& examples);
void save_examples(const std::filesystem::path& file, const std::vector<NLIExample>& examples);
std::vector<NLIExample> load_examples(const std::filesystem::path& file);

}  // namespace fet
