#include "fet/metrics.hpp"

#include <algorithm>
#include <iterator>

#include "fet/error.hpp"
#include "fet/ontology.hpp"

namespace fet {

namespace {

void require_pairs(std::span<const EvalPair> pairs, const char* what) {
  if (pairs.empty()) throw InvalidArgument(std::string(what) + ": no evaluation pairs");
  for (const auto& p : pairs) {
    if (p.gold.empty()) throw InvalidArgument(std::string(what) + ": gold type set is empty");
  }
}

std::size_t overlap(const TypeSet& a, const TypeSet& b) {
  std::size_t n = 0;
  for (const auto& x : a) n += b.count(x);
  return n;
}

}  // namespace

double f1_score(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

double strict_accuracy(std::span<const EvalPair> pairs) {
  require_pairs(pairs, "strict_accuracy");
  std::size_t correct = 0;
  for (const auto& p : pairs) correct += p.gold == p.predicted ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

PRF macro_f1(std::span<const EvalPair> pairs) {
  require_pairs(pairs, "macro_f1");
  double p_sum = 0.0;
  double r_sum = 0.0;
  for (const auto& p : pairs) {
    const auto hit = static_cast<double>(overlap(p.gold, p.predicted));
    if (!p.predicted.empty()) p_sum += hit / static_cast<double>(p.predicted.size());
    r_sum += hit / static_cast<double>(p.gold.size());
  }
  const double n = static_cast<double>(pairs.size());
  PRF out{p_sum / n, r_sum / n, 0.0};
  out.f1 = f1_score(out.precision, out.recall);
  return out;
}

PRF micro_f1(std::span<const EvalPair> pairs) {
  require_pairs(pairs, "micro_f1");
  std::size_t hits = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;
  for (const auto& p : pairs) {
    hits += overlap(p.gold, p.predicted);
    predicted += p.predicted.size();
    gold += p.gold.size();
  }
  PRF out;
  out.precision = predicted > 0 ? static_cast<double>(hits) / static_cast<double>(predicted) : 0.0;
  out.recall = static_cast<double>(hits) / static_cast<double>(gold);
  out.f1 = f1_score(out.precision, out.recall);
  return out;
}

MetricsReport evaluate(std::span<const EvalPair> pairs) {
  const auto macro = macro_f1(pairs);
  const auto micro = micro_f1(pairs);
  return MetricsReport{strict_accuracy(pairs), macro.precision, macro.recall, macro.f1,
                       micro.precision,        micro.recall,    micro.f1};
}

EvalPair normalized(const EvalPair& pair) {
  EvalPair out;
  for (const auto& g : pair.gold) out.gold.insert(normalize_path(g));
  for (const auto& p : pair.predicted) out.predicted.insert(normalize_path(p));
  return out;
}

}  // namespace fet
