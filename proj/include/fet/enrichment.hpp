#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fet/ontology.hpp"

namespace fet {

/// Full-text search over a reference corpus.
class CorpusRetriever {
 public:
  virtual ~CorpusRetriever() = default;
  /// At most `k` documents, best first. Deterministic for a fixed corpus and query.
  virtual std::vector<std::string> retrieve(const std::string& query, std::size_t k) const = 0;
};

/// Extractive question answering. A returned span must be a substring of `context`.
class QAExtractor {
 public:
  virtual ~QAExtractor() = default;
  virtual std::optional<std::string> answer(const std::string& question,
                                            const std::string& context) const = 0;
};

/// Grows a seed list into a larger instance list. Output keeps every seed and
/// holds at most `target_count` entries.
class InstanceExpander {
 public:
  virtual ~InstanceExpander() = default;
  virtual std::vector<std::string> expand(const std::vector<std::string>& seeds,
                                          const CorpusRetriever& corpus,
                                          std::size_t target_count) const = 0;
};

/// Mines at most `k` distinct topic terms for `query` from retrieved documents.
class TopicMiner {
 public:
  virtual ~TopicMiner() = default;
  virtual std::vector<std::string> mine(const std::string& query,
                                        const std::vector<std::string>& documents,
                                        std::size_t k) const = 0;
};

/// `[CLS]What is the instance of <type> in this sentence?[SEP]<sentence>[SEP]`
std::string build_qa_query(std::string_view type_name, std::string_view sentence);

/// Splits on `.`, `!`, `?` followed by whitespace (or end of text) and on newlines.
std::vector<std::string> split_sentences(std::string_view document);

struct SeedOptions {
  std::size_t documents = 20;
  std::size_t max_answer_tokens = 10;  // longer answers are treated as noise
};

/// Queries the QA extractor on every retrieved sentence for the type's name
/// and keeps up to `n` distinct (case-insensitive) answers in retrieval order.
std::vector<std::string> collect_seeds(const std::string& type_path, const TypeOntology& ontology,
                                       const CorpusRetriever& retriever, const QAExtractor& qa,
                                       std::size_t n, const SeedOptions& options = {});

struct EnrichOptions {
  std::size_t instances_per_type = 30;
  std::size_t topics_per_type = 5;
  std::size_t docs_per_type = 20;
  std::size_t seeds_per_type = 10;
  std::size_t max_answer_tokens = 10;
};

struct NodeFailure {
  std::string path;
  std::string stage;  // "topics" or "instances"
  std::string message;
};

struct EnrichmentReport {
  Enrichment enrichment;
  std::vector<NodeFailure> failures;
};

/// Enriches every node with mined topics and expanded instances. A backend
/// failure on one node is recorded and the remaining nodes are still processed.
/// Backends are called sequentially.
EnrichmentReport enrich_ontology(const TypeOntology& ontology, const CorpusRetriever& retriever,
                                 const QAExtractor& qa, const InstanceExpander& expander,
                                 const TopicMiner& miner, const EnrichOptions& options = {});

}  // namespace fet
