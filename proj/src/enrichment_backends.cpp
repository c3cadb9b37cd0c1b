#include "fet/enrichment_backends.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <regex>
#include <sstream>

#include "fet/io.hpp"
#include "httplib.h"

namespace fet {

InMemoryCorpusRetriever::InMemoryCorpusRetriever(std::vector<std::string> documents)
    : documents_(std::move(documents)) {
  tokens_.reserve(documents_.size());
  for (const auto& d : documents_) {
    tokens_.push_back(text::word_tokens(d));
    stats_.add_document(d);
  }
}

InMemoryCorpusRetriever InMemoryCorpusRetriever::from_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error("corpus directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<std::string> docs;
  docs.reserve(files.size());
  for (const auto& f : files) docs.push_back(io::read_text_file(f));
  return InMemoryCorpusRetriever(std::move(docs));
}

std::vector<std::string> InMemoryCorpusRetriever::retrieve(const std::string& query,
                                                           std::size_t k) const {
  std::vector<std::string> terms;
  for (auto& t : text::word_tokens(query)) {
    if (!text::is_stopword(t)) terms.push_back(std::move(t));
  }
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t d = 0; d < tokens_.size(); ++d) {
    double score = 0.0;
    for (const auto& term : terms) {
      const auto tf = std::count(tokens_[d].begin(), tokens_[d].end(), term);
      score += static_cast<double>(tf) * stats_.idf(term);
    }
    if (score > 0.0) scored.emplace_back(score, d);
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < scored.size() && i < k; ++i) out.push_back(documents_[scored[i].second]);
  return out;
}

// ---------------------------------------------------------------------------

SearchServiceRetriever::SearchServiceRetriever(std::string endpoint, std::string index,
                                               std::string field)
    : endpoint_(std::move(endpoint)), index_(std::move(index)), field_(std::move(field)) {
  while (!endpoint_.empty() && endpoint_.back() == '/') endpoint_.pop_back();
  if (endpoint_.empty() || index_.empty()) {
    throw InvalidArgument("search retriever needs an endpoint URL and an index name");
  }
}

std::vector<std::string> SearchServiceRetriever::retrieve(const std::string& query,
                                                          std::size_t k) const {
  httplib::Client client(endpoint_);
  client.set_connection_timeout(5);
  client.set_read_timeout(30);
  const io::Json body{{"query", {{"match", {{field_, query}}}}}, {"size", k}};
  auto res = client.Post("/" + index_ + "/_search", body.dump(), "application/json");
  if (!res) {
    throw BackendError("search request to " + endpoint_ + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw BackendError("search service returned HTTP " + std::to_string(res->status));
  }
  std::vector<std::string> out;
  try {
    const auto reply = io::Json::parse(res->body);
    for (const auto& hit : reply.at("hits").at("hits")) {
      if (out.size() >= k) break;
      out.push_back(hit.at("_source").at(field_).get<std::string>());
    }
  } catch (const io::Json::exception& e) {
    throw BackendError(std::string("malformed search response: ") + e.what());
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct Span {
  std::size_t begin;
  std::size_t end;
};

std::string strip_word(std::string_view w) {
  std::size_t b = 0;
  std::size_t e = w.size();
  while (b < e && std::ispunct(static_cast<unsigned char>(w[b]))) ++b;
  while (e > b && std::ispunct(static_cast<unsigned char>(w[e - 1]))) --e;
  return std::string(w.substr(b, e - b));
}

// Character spans of whitespace-delimited words with surrounding punctuation removed.
std::vector<Span> word_spans(const std::string& s) {
  std::vector<Span> spans;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t b = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t e = i;
    while (b < e && std::ispunct(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(s[e - 1]))) --e;
    if (e > b) spans.push_back({b, e});
  }
  return spans;
}

bool capitalized(const std::string& s, const Span& sp) {
  return std::isupper(static_cast<unsigned char>(s[sp.begin])) != 0;
}

}  // namespace

std::optional<std::string> HeuristicQAExtractor::answer(const std::string& question,
                                                        const std::string& context) const {
  static const std::regex type_pattern(R"(instance of <?([^>?]*?)>? in this sentence)");
  std::smatch m;
  std::string type_word;
  if (std::regex_search(question, m, type_pattern)) type_word = text::to_lower(text::trim(m[1].str()));

  const auto spans = word_spans(context);
  // Maximal runs of capitalized words.
  std::vector<Span> runs;
  std::vector<std::size_t> run_end_word;
  for (std::size_t i = 0; i < spans.size();) {
    if (!capitalized(context, spans[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < spans.size() && capitalized(context, spans[j + 1]) &&
           spans[j + 1].begin == spans[j].end + 1) {
      ++j;
    }
    runs.push_back({spans[i].begin, spans[j].end});
    run_end_word.push_back(j);
    i = j + 1;
  }
  static const std::vector<std::string> copulas = {"is", "was", "are", "were"};
  auto is_type_word = [&](const Span& r) {
    return !type_word.empty() && text::to_lower(context.substr(r.begin, r.end - r.begin)) == type_word;
  };
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto next = run_end_word[r] + 1;
    if (next < spans.size()) {
      const auto w = text::to_lower(strip_word(context.substr(spans[next].begin, spans[next].end - spans[next].begin)));
      if (std::find(copulas.begin(), copulas.end(), w) != copulas.end() && !is_type_word(runs[r])) {
        return context.substr(runs[r].begin, runs[r].end - runs[r].begin);
      }
    }
  }
  for (const auto& r : runs) {
    if (!is_type_word(r)) return context.substr(r.begin, r.end - r.begin);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

EmbeddingInstanceExpander::EmbeddingInstanceExpander(std::map<std::string, std::vector<double>> table)
    : table_(std::move(table)) {
  std::size_t dim = 0;
  for (const auto& [phrase, vec] : table_) {
    if (vec.empty()) throw InvalidArgument("embedding for '" + phrase + "' is empty");
    if (dim == 0) dim = vec.size();
    if (vec.size() != dim) throw InvalidArgument("embedding table rows differ in dimension");
  }
}

EmbeddingInstanceExpander EmbeddingInstanceExpander::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open embedding table " + file.string());
  std::map<std::string, std::vector<double>> table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(file.string() + ":" + std::to_string(line_no) + ": missing tab");
    }
    std::istringstream values(line.substr(tab + 1));
    std::vector<double> vec;
    double v = 0.0;
    while (values >> v) vec.push_back(v);
    if (!values.eof()) throw ParseError(file.string() + ":" + std::to_string(line_no) + ": bad number");
    table[line.substr(0, tab)] = std::move(vec);
  }
  return EmbeddingInstanceExpander(std::move(table));
}

std::vector<std::string> EmbeddingInstanceExpander::expand(const std::vector<std::string>& seeds,
                                                           const CorpusRetriever& /*corpus*/,
                                                           std::size_t target_count) const {
  std::vector<std::string> out;
  std::set<std::string> taken;
  for (const auto& s : seeds) {
    if (out.size() >= target_count) break;
    if (taken.insert(text::to_lower(s)).second) out.push_back(s);
  }
  if (out.size() >= target_count || table_.empty()) return out;

  std::vector<double> centroid;
  std::size_t found = 0;
  for (const auto& [phrase, vec] : table_) {
    if (!taken.contains(text::to_lower(phrase))) continue;
    if (centroid.empty()) centroid.assign(vec.size(), 0.0);
    for (std::size_t i = 0; i < vec.size(); ++i) centroid[i] += vec[i];
    ++found;
  }
  if (found == 0) return out;

  auto norm = [](const std::vector<double>& v) {
    return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
  };
  const double centroid_norm = norm(centroid);
  std::vector<std::pair<double, std::string>> candidates;
  for (const auto& [phrase, vec] : table_) {
    if (taken.contains(text::to_lower(phrase))) continue;
    const double denom = centroid_norm * norm(vec);
    const double cos = denom > 0.0 ? std::inner_product(vec.begin(), vec.end(), centroid.begin(), 0.0) / denom : 0.0;
    candidates.emplace_back(cos, phrase);
  }
  std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (const auto& [_, phrase] : candidates) {
    if (out.size() >= target_count) break;
    if (taken.insert(text::to_lower(phrase)).second) out.push_back(phrase);
  }
  return out;
}

// ---------------------------------------------------------------------------

TfidfTopicMiner::TfidfTopicMiner(text::BackgroundTable background) : background_(std::move(background)) {}

std::vector<std::string> TfidfTopicMiner::mine(const std::string& query,
                                               const std::vector<std::string>& documents,
                                               std::size_t k) const {
  std::vector<std::vector<std::string>> token_docs;
  token_docs.reserve(documents.size());
  for (const auto& d : documents) token_docs.push_back(text::word_tokens(d));
  std::set<std::string> excluded;
  const auto query_tokens = text::word_tokens(query);
  excluded.insert(query_tokens.begin(), query_tokens.end());
  excluded.insert(text::join(query_tokens, " "));
  std::vector<std::string> out;
  for (auto& scored : text::rank_terms(token_docs, background_, excluded)) {
    if (out.size() >= k) break;
    out.push_back(std::move(scored.term));
  }
  return out;
}

}  // namespace fet
