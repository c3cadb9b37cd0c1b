#include "fet/nli_data.hpp"

#include <algorithm>
#include <cctype>
#include <random>

#include "fet/io.hpp"
#include "fet/text.hpp"

namespace fet {

std::string_view to_string(NliLabel label) {
  switch (label) {
    case NliLabel::Entailment: return "entailment";
    case NliLabel::Neutral: return "neutral";
    case NliLabel::Contradiction: return "contradiction";
  }
  return "unknown";
}

NliLabel parse_label(std::string_view name) {
  const auto lower = text::to_lower(name);
  if (lower == "entailment") return NliLabel::Entailment;
  if (lower == "neutral") return NliLabel::Neutral;
  if (lower == "contradiction") return NliLabel::Contradiction;
  throw ParseError("unknown NLI label '" + std::string(name) + "'");
}

std::string_view to_string(TopicSource source) {
  return source == TopicSource::Hypothesis ? "hypothesis" : "source";
}

TopicSource parse_topic_source(std::string_view text) {
  if (text == "hypothesis") return TopicSource::Hypothesis;
  if (text == "source") return TopicSource::Source;
  throw InvalidArgument("topic source must be 'hypothesis' or 'source', got '" + std::string(text) + "'");
}

std::string render_hypothesis(std::string_view instance, std::string_view type_name) {
  const auto inst = text::trim(instance);
  const auto type = text::trim(type_name);
  if (inst.empty() || type.empty()) throw InvalidArgument("render_hypothesis: empty input");
  const char first = static_cast<char>(std::tolower(static_cast<unsigned char>(type.front())));
  const bool vowel = first == 'a' || first == 'e' || first == 'i' || first == 'o' || first == 'u';
  return inst + (vowel ? " is an " : " is a ") + type;
}

namespace {

// Partial Fisher-Yates: the first `k` entries of a shuffled copy.
std::vector<std::string> draw_without_replacement(std::vector<std::string> pool, std::size_t k,
                                                  std::mt19937_64& rng) {
  k = std::min(k, pool.size());
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace

std::vector<NLIExample> build_examples(const std::vector<GeneratedSample>& samples,
                                       const TypeOntology& ontology, const Enrichment& enrichment,
                                       const LabelCounts& per_sample, bool include_siblings,
                                       std::uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  std::vector<NLIExample> out;
  for (const auto& sample : samples) {
    if (!ontology.contains(sample.type_path)) {
      throw NotFound("sample references unknown type path '" + sample.type_path + "'");
    }
    const auto sets = ontology.contrast_sets(sample.type_path, include_siblings);
    auto emit = [&](const std::string& hyp_type, NliLabel label) {
      NLIExample ex;
      ex.premise = sample.text;
      ex.hypothesis = render_hypothesis(sample.instance, ontology.node(hyp_type).name);
      const bool hypothesis_topics =
          label == NliLabel::Contradiction && per_sample.contradiction_topics == TopicSource::Hypothesis;
      ex.topics = hypothesis_topics ? enrichment.topics(hyp_type) : enrichment.topics(sample.type_path);
      ex.label = label;
      ex.source_type = sample.type_path;
      ex.hypothesis_type = hyp_type;
      ex.instance = sample.instance;
      out.push_back(std::move(ex));
    };
    emit(sample.type_path, NliLabel::Entailment);
    for (const auto& t : draw_without_replacement(sets.neutral, per_sample.n_neutral, rng)) {
      emit(t, NliLabel::Neutral);
    }
    for (const auto& t : draw_without_replacement(sets.contradiction, per_sample.n_contradiction, rng)) {
      emit(t, NliLabel::Contradiction);
    }
  }
  return out;
}

void write_examples(std::ostream& out, const std::vector<NLIExample>& examples) {
  for (const auto& ex : examples) {
    io::write_jsonl_record(out, io::Json{{"premise", ex.premise},
                                         {"hypothesis", ex.hypothesis},
                                         {"topics", ex.topics},
                                         {"label", to_string(ex.label)},
                                         {"source_type", ex.source_type},
                                         {"hypothesis_type", ex.hypothesis_type},
                                         {"instance", ex.instance}});
  }
}

void save_examples(const std::filesystem::path& file, const std::vector<NLIExample>& examples) {
  auto out = io::open_output(file);
  write_examples(out, examples);
}

std::vector<NLIExample> load_examples(const std::filesystem::path& file) {
  std::vector<NLIExample> examples;
  io::read_jsonl_file(file, [&](const io::Json& rec, std::size_t) {
    NLIExample ex;
    ex.premise = rec.at("premise").get<std::string>();
    ex.hypothesis = rec.at("hypothesis").get<std::string>();
    ex.topics = rec.value("topics", std::vector<std::string>{});
    ex.label = parse_label(rec.at("label").get<std::string>());
    ex.source_type = rec.at("source_type").get<std::string>();
    ex.hypothesis_type = rec.at("hypothesis_type").get<std::string>();
    ex.instance = rec.at("instance").get<std::string>();
    examples.push_back(std::move(ex));
  });
  return examples;
}

}  // namespace fet
