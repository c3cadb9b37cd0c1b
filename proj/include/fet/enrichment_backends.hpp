#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fet/enrichment.hpp"
#include "fet/text.hpp"

namespace fet {

/// Retriever over documents held in memory, ranked by summed tf-idf of the
/// query's content words. Ties keep corpus order.
class InMemoryCorpusRetriever final : public CorpusRetriever {
 public:
  explicit InMemoryCorpusRetriever(std::vector<std::string> documents);

  /// One document per regular file, files visited in lexicographic name order.
  static InMemoryCorpusRetriever from_directory(const std::filesystem::path& dir);

  std::vector<std::string> retrieve(const std::string& query, std::size_t k) const override;

  const std::vector<std::string>& documents() const { return documents_; }

 private:
  std::vector<std::string> documents_;
  std::vector<std::vector<std::string>> tokens_;
  text::BackgroundTable stats_;
};

/// Retriever backed by an Elasticsearch-compatible `_search` endpoint.
/// Sends `{"query":{"match":{<field>:query}},"size":k}` and reads
/// `hits.hits[]._source.<field>`.
class SearchServiceRetriever final : public CorpusRetriever {
 public:
  SearchServiceRetriever(std::string endpoint, std::string index, std::string field = "text");

  std::vector<std::string> retrieve(const std::string& query, std::size_t k) const override;

 private:
  std::string endpoint_;
  std::string index_;
  std::string field_;
};

/// Rule-based stand-in for an extractive QA model. Reads the type word out of
/// the templated question and answers with the capitalized span that heads a
/// copular clause (`X is/was a ...`), falling back to the first capitalized
/// span that is not the type word itself.
class HeuristicQAExtractor final : public QAExtractor {
 public:
  std::optional<std::string> answer(const std::string& question,
                                    const std::string& context) const override;
};

/// Expands seeds with nearest neighbours of their centroid in a static
/// phrase-embedding table (cosine similarity, ties broken lexicographically).
class EmbeddingInstanceExpander final : public InstanceExpander {
 public:
  explicit EmbeddingInstanceExpander(std::map<std::string, std::vector<double>> table);

  /// Text format: `phrase<TAB>v1 v2 ... vd` per line, all rows the same d.
  static EmbeddingInstanceExpander load(const std::filesystem::path& file);

  std::vector<std::string> expand(const std::vector<std::string>& seeds,
                                  const CorpusRetriever& corpus,
                                  std::size_t target_count) const override;

 private:
  std::map<std::string, std::vector<double>> table_;
};

/// tf-idf of unigrams/bigrams in the documents against a background table,
/// excluding stopwords and the query's own words.
class TfidfTopicMiner final : public TopicMiner {
 public:
  explicit TfidfTopicMiner(text::BackgroundTable background);

  std::vector<std::string> mine(const std::string& query, const std::vector<std::string>& documents,
                                std::size_t k) const override;

 private:
  text::BackgroundTable background_;
};

}  // namespace fet
