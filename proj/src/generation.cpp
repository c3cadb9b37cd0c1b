#include "fet/generation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "fet/io.hpp"
#include "fet/text.hpp"

namespace fet {

std::optional<TokenId> TokenLM::token_id(std::string_view token) const {
  const auto& vocab = vocabulary();
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    if (vocab[i] == token) return static_cast<TokenId>(i);
  }
  return std::nullopt;
}

std::optional<std::vector<TokenId>> tokenize(const TokenLM& lm, std::string_view text) {
  std::vector<TokenId> ids;
  for (const auto& piece : text::split_whitespace(text)) {
    auto id = lm.token_id(piece);
    if (!id) id = lm.token_id(text::to_lower(piece));
    if (!id) return std::nullopt;
    ids.push_back(*id);
  }
  if (ids.empty()) return std::nullopt;
  return ids;
}

void GenerationConfig::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidArgument("generation: tau must be > 0");
  if (!(alpha >= 1.0) || !std::isfinite(alpha)) throw InvalidArgument("generation: alpha must be >= 1");
  if (!(beta > 0.0 && beta <= 1.0)) throw InvalidArgument("generation: beta must be in (0, 1]");
  if (max_tokens == 0) throw InvalidArgument("generation: max_tokens must be >= 1");
  if (samples_per_instance == 0) throw InvalidArgument("generation: samples_per_instance must be >= 1");
}

std::vector<double> rescaled_distribution(std::span<const double> logits,
                                          const TokenSet& entity_tokens,
                                          const TokenSet& prefix_tokens,
                                          const GenerationConfig& config) {
  config.validate();
  if (logits.empty()) throw InvalidArgument("rescaled_distribution: empty logits");
  double max_logit = -std::numeric_limits<double>::infinity();
  for (double l : logits) {
    if (!std::isfinite(l)) throw InvalidArgument("rescaled_distribution: non-finite logit");
    max_logit = std::max(max_logit, l);
  }
  double z = 0.0;
  for (double l : logits) z += std::exp(l - max_logit);
  const double log_normalizer = max_logit + std::log(z);

  std::vector<double> scaled(logits.size());
  double max_scaled = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const auto id = static_cast<TokenId>(i);
    double omega = config.tau;
    if (prefix_tokens.contains(id)) {
      omega = config.tau * config.beta;
    } else if (entity_tokens.contains(id)) {
      omega = config.tau * config.alpha;
    }
    scaled[i] = (logits[i] - log_normalizer) / omega;
    max_scaled = std::max(max_scaled, scaled[i]);
  }
  double total = 0.0;
  for (auto& s : scaled) {
    s = std::exp(s - max_scaled);
    total += s;
  }
  for (auto& s : scaled) s /= total;
  return scaled;
}

namespace {

bool ends_with(const std::vector<TokenId>& seq, const std::vector<TokenId>& suffix) {
  return seq.size() >= suffix.size() && std::equal(suffix.rbegin(), suffix.rend(), seq.rbegin());
}

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

GeneratedSample sample_sentence(const TokenLM& lm, const std::string& instance,
                                const GenerationConfig& config, const TokenSet& stop_tokens,
                                std::uint64_t rng_seed) {
  config.validate();
  const auto instance_tokens = tokenize(lm, instance);
  if (!instance_tokens) {
    throw InvalidArgument("instance '" + instance + "' does not tokenize under the model vocabulary");
  }
  const TokenSet instance_set(instance_tokens->begin(), instance_tokens->end());
  const TokenSet no_tokens;
  const auto vocab_size = lm.vocabulary().size();

  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<TokenId> emitted;
  TokenSet emitted_set;
  bool instance_complete = false;
  double log_prob_sum = 0.0;
  std::size_t decisions = 0;

  while (emitted.size() < config.max_tokens) {
    std::vector<double> logits;
    try {
      logits = lm.next_logits(emitted);
    } catch (const std::exception& e) {
      throw BackendError(std::string("language model failed: ") + e.what());
    }
    if (logits.size() != vocab_size) {
      throw BackendError("language model returned " + std::to_string(logits.size()) +
                         " logits for a vocabulary of " + std::to_string(vocab_size));
    }
    const auto probs =
        rescaled_distribution(logits, instance_complete ? no_tokens : instance_set, emitted_set, config);
    const double u = uniform(rng);
    std::size_t chosen = probs.size() - 1;
    double cumulative = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      cumulative += probs[i];
      if (u < cumulative) {
        chosen = i;
        break;
      }
    }
    while (probs[chosen] == 0.0 && chosen > 0) --chosen;
    log_prob_sum += std::log(probs[chosen]);
    ++decisions;

    const auto id = static_cast<TokenId>(chosen);
    if (stop_tokens.contains(id)) break;
    emitted.push_back(id);
    emitted_set.insert(id);
    if (!instance_complete && ends_with(emitted, *instance_tokens)) instance_complete = true;
  }

  GeneratedSample sample;
  const auto& vocab = lm.vocabulary();
  for (auto id : emitted) sample.tokens.push_back(vocab[id]);
  sample.text = text::join(sample.tokens, " ");
  sample.instance = instance;
  sample.mean_log_prob = log_prob_sum / static_cast<double>(decisions);
  sample.seed = rng_seed;
  return sample;
}

bool sample_contains_instance(const GeneratedSample& sample) {
  const auto needle = text::split_whitespace(sample.instance);
  return text::contains_token_sequence(sample.tokens, needle);
}

std::vector<GeneratedSample> filter_samples(const std::vector<GeneratedSample>& samples) {
  if (samples.empty()) throw InvalidArgument("filter_samples: empty batch");
  double mean = 0.0;
  for (const auto& s : samples) mean += s.mean_log_prob;
  mean /= static_cast<double>(samples.size());
  std::vector<GeneratedSample> kept;
  for (const auto& s : samples) {
    if (samples.size() > 1 && !(s.mean_log_prob > mean)) continue;
    if (!sample_contains_instance(s)) continue;
    kept.push_back(s);
  }
  return kept;
}

std::uint64_t derive_sample_seed(std::uint64_t base, std::string_view type_path,
                                 std::string_view instance, std::size_t j) {
  std::uint64_t h = fnv1a(type_path);
  h = fnv1a("\x1f", h);
  h = fnv1a(instance, h);
  return splitmix64(splitmix64(base ^ h) + j);
}

GenerationReport generate_training_corpus(const TypeOntology& ontology, const Enrichment& enrichment,
                                          const TokenLM& lm, const GenerationConfig& config,
                                          const TokenSet& stop_tokens) {
  config.validate();
  enrichment.validate(ontology);
  if (enrichment.instance_count() == 0) {
    throw InvalidArgument("generate_training_corpus: enrichment has no instances");
  }
  GenerationReport report;
  for (const auto& node : ontology.nodes()) {
    std::vector<GeneratedSample> batch;
    for (const auto& instance : enrichment.instances(node.path)) {
      std::vector<GeneratedSample> candidates;
      try {
        for (std::size_t j = 0; j < config.samples_per_instance; ++j) {
          const auto seed = derive_sample_seed(config.seed, node.path, instance, j);
          auto sample = sample_sentence(lm, instance, config, stop_tokens, seed);
          sample.type_path = node.path;
          candidates.push_back(std::move(sample));
        }
      } catch (const std::exception& e) {
        report.failures.push_back({node.path, instance, e.what()});
        continue;
      }
      for (auto& s : candidates) batch.push_back(std::move(s));
    }
    report.candidates += batch.size();
    if (batch.empty()) continue;
    for (auto& s : filter_samples(batch)) report.samples.push_back(std::move(s));
  }
  return report;
}

void write_samples(std::ostream& out, const std::vector<GeneratedSample>& samples) {
  for (const auto& s : samples) {
    io::write_jsonl_record(out, io::Json{{"text", s.text},
                                         {"instance", s.instance},
                                         {"type_path", s.type_path},
                                         {"mean_log_prob", s.mean_log_prob},
                                         {"seed", s.seed}});
  }
}

void save_samples(const std::filesystem::path& file, const std::vector<GeneratedSample>& samples) {
  auto out = io::open_output(file);
  write_samples(out, samples);
}

std::vector<GeneratedSample> load_samples(const std::filesystem::path& file) {
  std::vector<GeneratedSample> samples;
  io::read_jsonl_file(file, [&](const io::Json& rec, std::size_t) {
    GeneratedSample s;
    s.text = rec.at("text").get<std::string>();
    s.tokens = text::split_whitespace(s.text);
    s.instance = rec.at("instance").get<std::string>();
    s.type_path = rec.at("type_path").get<std::string>();
    s.mean_log_prob = rec.at("mean_log_prob").get<double>();
    s.seed = rec.value("seed", std::uint64_t{0});
    samples.push_back(std::move(s));
  });
  return samples;
}

}  // namespace fet
