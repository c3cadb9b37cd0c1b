#pragma once

// Independent reference implementations and stubs shared by the unit tests
// and the acceptance runner. Nothing here calls into the code under test
// except to build inputs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fet/generation.hpp"
#include "fet/metrics.hpp"
#include "fet/nli_data.hpp"
#include "fet/ontology.hpp"

namespace fet::testing {

// --- metrics ---------------------------------------------------------------

struct BruteMetrics {
  double acc, ma_p, ma_r, ma_f, mi_p, mi_r, mi_f;
};

inline double harmonic(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

inline BruteMetrics brute_metrics(const std::vector<EvalPair>& pairs) {
  const double n = static_cast<double>(pairs.size());
  double exact = 0, sum_p = 0, sum_r = 0, inter_total = 0, pred_total = 0, gold_total = 0;
  for (const auto& pr : pairs) {
    std::size_t inter = 0;
    for (const auto& g : pr.gold) {
      for (const auto& p : pr.predicted) inter += (g == p) ? 1 : 0;
    }
    bool same = pr.gold.size() == pr.predicted.size();
    for (const auto& g : pr.gold) same = same && pr.predicted.count(g) == 1;
    exact += same ? 1 : 0;
    sum_p += pr.predicted.empty() ? 0.0 : double(inter) / double(pr.predicted.size());
    sum_r += pr.gold.empty() ? 0.0 : double(inter) / double(pr.gold.size());
    inter_total += double(inter);
    pred_total += double(pr.predicted.size());
    gold_total += double(pr.gold.size());
  }
  BruteMetrics m{};
  m.acc = exact / n;
  m.ma_p = sum_p / n;
  m.ma_r = sum_r / n;
  m.ma_f = harmonic(m.ma_p, m.ma_r);
  m.mi_p = pred_total == 0 ? 0.0 : inter_total / pred_total;
  m.mi_r = gold_total == 0 ? 0.0 : inter_total / gold_total;
  m.mi_f = harmonic(m.mi_p, m.mi_r);
  return m;
}

inline std::vector<EvalPair> random_pairs(std::mt19937_64& rng) {
  static const std::vector<std::string> universe = {"/a", "/a/x", "/a/y", "/b", "/b/z", "/c", "/c/w", "/d"};
  std::uniform_int_distribution<int> n_pairs(1, 10), n_types(0, 5), pick(0, int(universe.size()) - 1);
  std::vector<EvalPair> pairs(static_cast<std::size_t>(n_pairs(rng)));
  for (auto& pr : pairs) {
    const int g = std::max(1, n_types(rng));
    while (int(pr.gold.size()) < g) pr.gold.insert(universe[std::size_t(pick(rng))]);
    const int p = n_types(rng);
    while (int(pr.predicted.size()) < p) pr.predicted.insert(universe[std::size_t(pick(rng))]);
  }
  return pairs;
}

// --- decoding --------------------------------------------------------------

/// p_i^(1/w_i) normalized, with p the softmax of the raw logits.
inline std::vector<double> direct_rescaled(const std::vector<double>& logits, const TokenSet& entity,
                                           const TokenSet& prefix, double tau, double alpha, double beta) {
  long double z = 0;
  for (double l : logits) z += std::exp(static_cast<long double>(l));
  std::vector<long double> w(logits.size());
  long double total = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const auto id = static_cast<TokenId>(i);
    long double omega = tau;
    if (prefix.count(id)) omega = tau * beta;
    else if (entity.count(id)) omega = tau * alpha;
    const long double p = std::exp(static_cast<long double>(logits[i])) / z;
    w[i] = std::pow(p, 1.0L / omega);
    total += w[i];
  }
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(w[i] / total);
  return out;
}

/// Log-probabilities of a random categorical distribution.
inline std::vector<double> random_log_probs(std::mt19937_64& rng, std::size_t v) {
  std::gamma_distribution<double> gamma(1.0, 1.0);
  std::vector<double> p(v);
  double s = 0;
  for (auto& x : p) s += (x = gamma(rng) + 1e-6);
  for (auto& x : p) x = std::log(x / s);
  return p;
}

/// Language model over a fixed vocabulary whose logits come from a callback.
class StubLM final : public TokenLM {
 public:
  using Fn = std::function<std::vector<double>(std::span<const TokenId>)>;
  StubLM(std::vector<std::string> vocab, Fn fn) : vocab_(std::move(vocab)), fn_(std::move(fn)) {}
  const std::vector<std::string>& vocabulary() const override { return vocab_; }
  std::vector<double> next_logits(std::span<const TokenId> prefix) const override { return fn_(prefix); }

 private:
  std::vector<std::string> vocab_;
  Fn fn_;
};

inline GeneratedSample make_sample(std::string text, std::string instance, double mlp,
                                   std::string type = "/t") {
  GeneratedSample s;
  s.text = std::move(text);
  std::string word;
  for (char c : s.text) {
    if (c == ' ') {
      if (!word.empty()) s.tokens.push_back(word);
      word.clear();
    } else {
      word += c;
    }
  }
  if (!word.empty()) s.tokens.push_back(word);
  s.instance = std::move(instance);
  s.mean_log_prob = mlp;
  s.type_path = std::move(type);
  return s;
}

// --- ontology --------------------------------------------------------------

/// Random 3-level forest in document order with at least `min_nodes` nodes.
inline std::vector<std::string> random_forest_paths(std::mt19937_64& rng, std::size_t min_nodes) {
  std::uniform_int_distribution<int> roots(2, 4), kids(0, 4);
  std::vector<std::string> paths;
  while (paths.size() < min_nodes) {
    paths.clear();
    const int r = roots(rng);
    for (int i = 0; i < r; ++i) {
      const auto root = "/r" + std::to_string(i);
      paths.push_back(root);
      const int c = kids(rng) + 1;
      for (int j = 0; j < c; ++j) {
        const auto mid = root + "/m" + std::to_string(j);
        paths.push_back(mid);
        const int g = kids(rng);
        for (int k = 0; k < g; ++k) paths.push_back(mid + "/l" + std::to_string(k));
      }
    }
  }
  return paths;
}

inline std::string first_segment(const std::string& path) { return path.substr(0, path.find('/', 1)); }

inline bool is_prefix_path(const std::string& a, const std::string& b) {
  return b.size() > a.size() && b.compare(0, a.size(), a) == 0 && b[a.size()] == '/';
}

inline std::string parent_of(const std::string& path) {
  const auto cut = path.rfind('/');
  return cut == 0 ? std::string() : path.substr(0, cut);
}

/// Label a hypothesis type may carry for a given source type, from path strings
/// alone. Returns the set of admissible labels.
inline std::set<NliLabel> admissible_labels(const std::string& source, const std::string& hyp,
                                            bool include_siblings) {
  std::set<NliLabel> out;
  if (hyp == source) out.insert(NliLabel::Entailment);
  if (is_prefix_path(hyp, source)) out.insert(NliLabel::Neutral);
  const bool other_branch = first_segment(hyp) != first_segment(source) && hyp.find('/', 1) != std::string::npos;
  const bool sibling = hyp != source && parent_of(hyp) == parent_of(source);
  if (other_branch || (include_siblings && sibling)) out.insert(NliLabel::Contradiction);
  return out;
}

// --- files -----------------------------------------------------------------

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("fet_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fet::testing
