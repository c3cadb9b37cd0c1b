#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fet::text {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

/// Splits on whitespace, keeping every non-space run verbatim.
std::vector<std::string> split_whitespace(std::string_view s);

/// Lowercased runs of alphanumeric characters (apostrophes and hyphens inside
/// a word are kept). Used by keyword ranking and by the toy encoder.
std::vector<std::string> word_tokens(std::string_view s);

std::string join(std::span<const std::string> parts, std::string_view sep);

bool is_stopword(std::string_view lowercase_word);

/// Case-insensitive search of `needle` as a contiguous token sequence of `haystack`.
bool contains_token_sequence(std::span<const std::string> haystack,
                             std::span<const std::string> needle);

/// Document frequencies from a reference collection, used for idf weighting.
class BackgroundTable {
 public:
  BackgroundTable() = default;

  static BackgroundTable from_documents(std::span<const std::string> documents);

  /// Format: a header line `#documents<TAB>N`, then `term<TAB>df` per line.
  static BackgroundTable parse(std::istream& in);
  static BackgroundTable load(const std::filesystem::path& file);
  void write(std::ostream& out) const;

  void add_document(std::string_view document);

  std::size_t documents() const { return documents_; }
  std::size_t document_frequency(const std::string& term) const;

  /// Smoothed idf: ln((1 + N) / (1 + df)) + 1. Always positive.
  double idf(const std::string& term) const;

 private:
  std::size_t documents_ = 0;
  std::unordered_map<std::string, std::size_t> df_;
};

struct ScoredTerm {
  std::string term;
  double score = 0.0;
  std::size_t first_position = 0;  // token index of the first occurrence
  std::size_t length = 1;          // 1 = unigram, 2 = bigram
};

/// Ranks unigrams and bigrams (adjacent non-stopword pairs) of the token
/// stream by tf * idf. Stopwords, single-character tokens, `excluded` terms
/// and bigrams containing an excluded word are dropped. Order: score desc, first occurrence asc, unigram first.
std::vector<ScoredTerm> rank_terms(std::span<const std::vector<std::string>> token_documents,
                                   const BackgroundTable& background,
                                   const std::set<std::string>& excluded = {});

}  // namespace fet::text
