#include "fet/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "fet/error.hpp"

namespace fet::text {

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

const std::unordered_set<std::string_view>& stopwords() {
  static const std::unordered_set<std::string_view> words = {
      "a",       "about",   "above",  "after",  "again",   "against", "all",     "also",
      "am",      "an",      "and",    "any",    "are",     "as",      "at",      "be",
      "because", "been",    "before", "being",  "below",   "between", "both",    "but",
      "by",      "can",     "could",  "did",    "do",      "does",    "doing",   "down",
      "during",  "each",    "few",    "for",    "from",    "further", "had",     "has",
      "have",    "having",  "he",     "her",    "here",    "hers",    "herself", "him",
      "himself", "his",     "how",    "i",      "if",      "in",      "into",    "is",
      "it",      "its",     "itself", "just",   "me",      "more",    "most",    "my",
      "myself",  "no",      "nor",    "not",    "now",     "of",      "off",     "on",
      "once",    "only",    "or",     "other",  "our",     "ours",    "out",     "over",
      "own",     "same",    "she",    "should", "so",      "some",    "such",    "than",
      "that",    "the",     "their",  "theirs", "them",    "then",    "there",   "these",
      "they",    "this",    "those",  "through", "to",     "too",     "under",   "until",
      "up",      "very",    "was",    "we",     "were",    "what",    "when",    "where",
      "which",   "while",   "who",    "whom",   "why",     "will",    "with",    "would",
      "you",     "your",    "yours",  "yourself", "one",   "two",     "many",    "much",
      "may",     "might",   "must",   "shall",  "upon",    "within",  "without", "yet",
  };
  return words;
}

bool is_candidate(const std::string& token) { return token.size() > 1 && !is_stopword(token); }

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

std::vector<std::string> word_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string current;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto c = static_cast<unsigned char>(s[i]);
    const bool inner_joiner = (c == '\'' || c == '-') && !current.empty() && i + 1 < s.size() &&
                              is_word_char(static_cast<unsigned char>(s[i + 1]));
    if (is_word_char(c) || inner_joiner) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::string join(std::span<const std::string> parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

bool is_stopword(std::string_view lowercase_word) { return stopwords().contains(lowercase_word); }

bool contains_token_sequence(std::span<const std::string> haystack,
                             std::span<const std::string> needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  for (std::size_t start = 0; start + needle.size() <= haystack.size(); ++start) {
    bool match = true;
    for (std::size_t j = 0; j < needle.size() && match; ++j) {
      match = to_lower(haystack[start + j]) == to_lower(needle[j]);
    }
    if (match) return true;
  }
  return false;
}

BackgroundTable BackgroundTable::from_documents(std::span<const std::string> documents) {
  BackgroundTable table;
  for (const auto& doc : documents) table.add_document(doc);
  return table;
}

void BackgroundTable::add_document(std::string_view document) {
  const auto tokens = word_tokens(document);
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    seen.insert(tokens[i]);
    if (i + 1 < tokens.size()) seen.insert(tokens[i] + " " + tokens[i + 1]);
  }
  for (const auto& term : seen) ++df_[term];
  ++documents_;
}

std::size_t BackgroundTable::document_frequency(const std::string& term) const {
  const auto it = df_.find(term);
  return it == df_.end() ? 0 : it->second;
}

double BackgroundTable::idf(const std::string& term) const {
  const double n = static_cast<double>(documents_);
  const double df = static_cast<double>(document_frequency(term));
  return std::log((1.0 + n) / (1.0 + df)) + 1.0;
}

BackgroundTable BackgroundTable::parse(std::istream& in) {
  BackgroundTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError("background table line " + std::to_string(line_no) + ": missing tab");
    }
    const std::string key = line.substr(0, tab);
    std::size_t value = 0;
    try {
      value = std::stoull(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw ParseError("background table line " + std::to_string(line_no) + ": bad count");
    }
    if (key == "#documents") {
      table.documents_ = value;
      have_header = true;
    } else {
      table.df_[key] = value;
    }
  }
  if (!have_header) throw ParseError("background table: missing #documents header");
  return table;
}

BackgroundTable BackgroundTable::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open " + file.string());
  return parse(in);
}

void BackgroundTable::write(std::ostream& out) const {
  out << "#documents\t" << documents_ << '\n';
  std::map<std::string, std::size_t> sorted(df_.begin(), df_.end());
  for (const auto& [term, df] : sorted) out << term << '\t' << df << '\n';
}

std::vector<ScoredTerm> rank_terms(std::span<const std::vector<std::string>> token_documents,
                                   const BackgroundTable& background,
                                   const std::set<std::string>& excluded) {
  struct Tally {
    std::size_t count = 0;
    std::size_t first = 0;
    std::size_t length = 1;
  };
  std::map<std::string, Tally> tallies;
  std::size_t position = 0;
  auto bump = [&](const std::string& term, std::size_t at, std::size_t length) {
    if (excluded.contains(term)) return;
    auto [it, inserted] = tallies.try_emplace(term);
    if (inserted) {
      it->second.first = at;
      it->second.length = length;
    }
    ++it->second.count;
  };
  for (const auto& tokens : token_documents) {
    for (std::size_t i = 0; i < tokens.size(); ++i, ++position) {
      if (!is_candidate(tokens[i])) continue;
      bump(tokens[i], position, 1);
      if (i + 1 < tokens.size() && is_candidate(tokens[i + 1]) && !excluded.contains(tokens[i]) &&
          !excluded.contains(tokens[i + 1])) {
        bump(tokens[i] + " " + tokens[i + 1], position, 2);
      }
    }
  }
  std::vector<ScoredTerm> ranked;
  ranked.reserve(tallies.size());
  for (const auto& [term, tally] : tallies) {
    ranked.push_back({term, static_cast<double>(tally.count) * background.idf(term), tally.first,
                      tally.length});
  }
  std::sort(ranked.begin(), ranked.end(), [](const ScoredTerm& a, const ScoredTerm& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.first_position != b.first_position) return a.first_position < b.first_position;
    return a.length < b.length;
  });
  return ranked;
}

}  // namespace fet::text
