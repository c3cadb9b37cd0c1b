#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

namespace fet {

using TypeSet = std::set<std::string>;

struct EvalPair {
  TypeSet gold;
  TypeSet predicted;
};

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  double strict_accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
};

/// Harmonic mean; 0 when p + r = 0.
double f1_score(double precision, double recall);

/// Fraction of pairs whose predicted set equals the gold set exactly.
double strict_accuracy(std::span<const EvalPair> pairs);

/// Per-mention precision |g & p| / |p| and recall |g & p| / |g|, averaged.
/// A mention with an empty prediction contributes precision 0.
PRF macro_f1(std::span<const EvalPair> pairs);

/// Sum |g & p| / sum |p| and sum |g & p| / sum |g|; precision is 0 when nothing is predicted.
PRF micro_f1(std::span<const EvalPair> pairs);

MetricsReport evaluate(std::span<const EvalPair> pairs);

/// Normalizes every path (lowercase, single leading slash) of both sets.
EvalPair normalized(const EvalPair& pair);

}  // namespace fet
