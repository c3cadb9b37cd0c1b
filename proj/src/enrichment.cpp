#include "fet/enrichment.hpp"

#include <algorithm>
#include <unordered_set>

#include "fet/text.hpp"

namespace fet {

std::string build_qa_query(std::string_view type_name, std::string_view sentence) {
  if (text::trim(type_name).empty()) throw InvalidArgument("build_qa_query: empty type name");
  if (text::trim(sentence).empty()) throw InvalidArgument("build_qa_query: empty sentence");
  std::string q = "[CLS]What is the instance of ";
  q += type_name;
  q += " in this sentence?[SEP]";
  q += sentence;
  q += "[SEP]";
  return q;
}

std::vector<std::string> split_sentences(std::string_view document) {
  std::vector<std::string> out;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    auto s = text::trim(document.substr(start, end - start));
    if (!s.empty()) out.push_back(std::move(s));
    start = end;
  };
  for (std::size_t i = 0; i < document.size(); ++i) {
    const char c = document[i];
    if (c == '\n') {
      flush(i);
      start = i + 1;
    } else if ((c == '.' || c == '!' || c == '?') &&
               (i + 1 == document.size() || document[i + 1] == ' ' || document[i + 1] == '\n' ||
                document[i + 1] == '\t')) {
      flush(i + 1);
    }
  }
  flush(document.size());
  return out;
}

std::vector<std::string> collect_seeds(const std::string& type_path, const TypeOntology& ontology,
                                       const CorpusRetriever& retriever, const QAExtractor& qa,
                                       std::size_t n, const SeedOptions& options) {
  if (n == 0) throw InvalidArgument("collect_seeds: n must be >= 1");
  const auto& name = ontology.node(type_path).name;

  std::vector<std::string> documents;
  try {
    documents = retriever.retrieve(name, options.documents);
  } catch (const std::exception& e) {
    throw BackendError("retrieval for " + type_path + " failed: " + e.what());
  }

  std::vector<std::string> seeds;
  std::unordered_set<std::string> seen;
  for (const auto& doc : documents) {
    for (const auto& sentence : split_sentences(doc)) {
      if (seeds.size() >= n) return seeds;
      std::optional<std::string> span;
      try {
        span = qa.answer(build_qa_query(name, sentence), sentence);
      } catch (const std::exception& e) {
        throw BackendError("question answering for " + type_path + " failed: " + e.what());
      }
      if (!span) continue;
      auto answer = text::trim(*span);
      if (answer.empty() || sentence.find(answer) == std::string::npos) continue;
      if (text::split_whitespace(answer).size() > options.max_answer_tokens) continue;
      if (seen.insert(text::to_lower(answer)).second) seeds.push_back(std::move(answer));
    }
  }
  return seeds;
}

EnrichmentReport enrich_ontology(const TypeOntology& ontology, const CorpusRetriever& retriever,
                                 const QAExtractor& qa, const InstanceExpander& expander,
                                 const TopicMiner& miner, const EnrichOptions& options) {
  if (options.instances_per_type == 0 || options.topics_per_type == 0 ||
      options.docs_per_type == 0 || options.seeds_per_type == 0) {
    throw InvalidArgument("enrich_ontology: counts must be >= 1");
  }
  EnrichmentReport report;
  for (const auto& node : ontology.nodes()) {
    try {
      const auto docs = retriever.retrieve(node.name, options.docs_per_type);
      std::size_t kept = 0;
      for (const auto& topic : miner.mine(node.name, docs, options.topics_per_type)) {
        if (kept == options.topics_per_type) break;
        if (report.enrichment.add_topic(node.path, topic)) ++kept;
      }
    } catch (const std::exception& e) {
      report.failures.push_back({node.path, "topics", e.what()});
    }

    try {
      const auto seeds = collect_seeds(
          node.path, ontology, retriever, qa,
          std::min(options.seeds_per_type, options.instances_per_type),
          SeedOptions{options.docs_per_type, options.max_answer_tokens});
      if (seeds.empty()) continue;
      std::size_t kept = 0;
      for (const auto& inst : expander.expand(seeds, retriever, options.instances_per_type)) {
        if (kept == options.instances_per_type) break;
        if (report.enrichment.add_instance(node.path, inst)) ++kept;
      }
    } catch (const std::exception& e) {
      report.failures.push_back({node.path, "instances", e.what()});
    }
  }
  return report;
}

}  // namespace fet
