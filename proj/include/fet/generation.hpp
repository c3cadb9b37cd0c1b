#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "fet/ontology.hpp"

namespace fet {

using TokenId = std::uint32_t;
using TokenSet = std::unordered_set<TokenId>;

/// Autoregressive next-token scorer.
class TokenLM {
 public:
  virtual ~TokenLM() = default;

  virtual const std::vector<std::string>& vocabulary() const = 0;

  /// Raw scores for every vocabulary entry given the tokens emitted so far.
  virtual std::vector<double> next_logits(std::span<const TokenId> prefix) const = 0;

  /// Exact lookup; the default implementation scans the vocabulary.
  virtual std::optional<TokenId> token_id(std::string_view token) const;
};

/// Whitespace tokenization against the model's vocabulary (exact match, then
/// lowercase). Returns nullopt if any piece is out of vocabulary or the text is empty.
std::optional<std::vector<TokenId>> tokenize(const TokenLM& lm, std::string_view text);

struct GenerationConfig {
  double tau = 1.0;    // base temperature
  double alpha = 2.0;  // temperature multiplier for not-yet-emitted instance tokens
  double beta = 0.5;   // temperature multiplier for already-emitted tokens
  std::size_t max_tokens = 64;
  std::size_t samples_per_instance = 1;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument unless tau > 0, alpha >= 1, 0 < beta <= 1 and the counts are >= 1.
  void validate() const;
};

struct GeneratedSample {
  std::string text;
  std::vector<std::string> tokens;
  std::string instance;
  std::string type_path;
  double mean_log_prob = 0.0;  // mean log-probability of each sampling decision
  std::uint64_t seed = 0;
};

/// Per-token temperature rescaling of a next-token distribution.
///
/// Logits are first normalized to log-probabilities l. Token i is then
/// weighted by exp(l_i / w_i) with w_i = tau * beta if i was already emitted
/// (`prefix_tokens`), tau * alpha if i belongs to the target instance
/// (`entity_tokens`), and tau otherwise; the result is renormalized.
std::vector<double> rescaled_distribution(std::span<const double> logits,
                                          const TokenSet& entity_tokens,
                                          const TokenSet& prefix_tokens,
                                          const GenerationConfig& config);

/// Samples one sentence from `lm` with rescaled decoding. The instance's
/// tokens are rewarded until one complete occurrence has been emitted.
/// Generation ends at a stop token (not included in the text) or after
/// `config.max_tokens` tokens.
GeneratedSample sample_sentence(const TokenLM& lm, const std::string& instance,
                                const GenerationConfig& config, const TokenSet& stop_tokens,
                                std::uint64_t rng_seed);

/// Keeps samples whose mean_log_prob is strictly above the batch mean (a
/// one-sample batch skips this step), then drops samples that do not contain
/// their instance as a case-insensitive token sequence. Order is preserved.
std::vector<GeneratedSample> filter_samples(const std::vector<GeneratedSample>& samples);

bool sample_contains_instance(const GeneratedSample& sample);

struct PairFailure {
  std::string type_path;
  std::string instance;
  std::string message;
};

struct GenerationReport {
  std::vector<GeneratedSample> samples;
  std::vector<PairFailure> failures;
  std::size_t candidates = 0;  // samples drawn before filtering
};

/// Seed of the j-th candidate for a (type, instance) pair.
std::uint64_t derive_sample_seed(std::uint64_t base, std::string_view type_path,
                                 std::string_view instance, std::size_t j);

/// Draws `samples_per_instance` candidates for every enriched (type, instance)
/// pair, filters each type's batch of candidates, and returns the survivors in ontology order.
GenerationReport generate_training_corpus(const TypeOntology& ontology, const Enrichment& enrichment,
                                          const TokenLM& lm, const GenerationConfig& config,
                                          const TokenSet& stop_tokens);

/// Generated corpus file: one JSON object per line with
/// text, instance, type_path, mean_log_prob, seed.
void write_samples(std::ostream& out, const std::vector<GeneratedSample>& samples);
void save_samples(const std::filesystem::path& file, const std::vector<GeneratedSample>& samples);
std::vector<GeneratedSample> load_samples(const std::filesystem::path& file);

}  // namespace fet
