#pragma once

// Central finite differences over every trainable parameter of an
// EntailmentModel, compared against loss_and_gradients.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "fet/entailment_model.hpp"

namespace fet::testing {

struct GradCheck {
  double worst_relative = 0.0;  // max over parameter blocks of ||a - n|| / (||a|| + ||n||)
  std::string worst_block;
  std::size_t entries = 0;
};

inline GradCheck gradient_check(EntailmentModel model, const std::vector<NLIExample>& batch, LossMode mode,
                                bool use_topics, double h = 1e-5) {
  Gradients g;
  loss_and_gradients(model, batch, mode, use_topics, &g);

  GradCheck out;
  auto loss = [&] { return loss_and_gradients(model, batch, mode, use_topics, nullptr); };
  auto compare = [&](double* param, double analytic, double& num_sq, double& diff_sq,
                     double& ana_sq) {
    const double keep = *param;
    *param = keep + h;
    const double up = loss();
    *param = keep - h;
    const double down = loss();
    *param = keep;
    const double numeric = (up - down) / (2 * h);
    num_sq += numeric * numeric;
    ana_sq += analytic * analytic;
    diff_sq += (numeric - analytic) * (numeric - analytic);
    ++out.entries;
  };
  auto block = [&](const std::string& name, Matrix& m, const Matrix& gm) {
    double n = 0, d = 0, a = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) compare(&m(i, j), gm(i, j), n, d, a);
    }
    const double rel = std::sqrt(d) / std::max(std::sqrt(n) + std::sqrt(a), 1e-10);
    if (rel > out.worst_relative) {
      out.worst_relative = rel;
      out.worst_block = name;
    }
  };

  auto& fusion = model.fusion();
  auto& clf = model.classifier();
  block("gate_topic", fusion.gate_topic, g.gate_topic);
  block("gate_context", fusion.gate_context, g.gate_context);
  if (fusion.projection) block("projection", *fusion.projection, g.projection);
  block("head", clf.head, g.head);
  {
    double n = 0, d = 0, a = 0;
    for (Eigen::Index i = 0; i < clf.bias.size(); ++i) compare(&clf.bias(i), g.bias(i), n, d, a);
    const double rel = std::sqrt(d) / std::max(std::sqrt(n) + std::sqrt(a), 1e-10);
    if (rel > out.worst_relative) {
      out.worst_relative = rel;
      out.worst_block = "bias";
    }
  }
  if (auto* bag = model.trainable_encoder()) {
    Matrix& table = bag->table();
    const Eigen::Index d = table.cols();
    double n = 0, diff = 0, a = 0;
    // Every row the batch touches, plus one it does not.
    std::vector<std::size_t> rows;
    for (const auto& [row, _] : g.embedding_rows) rows.push_back(row);
    for (std::size_t r = 0; r < static_cast<std::size_t>(table.rows()); ++r) {
      if (!g.embedding_rows.count(r)) {
        rows.push_back(r);
        break;
      }
    }
    for (auto r : rows) {
      const auto it = g.embedding_rows.find(r);
      for (Eigen::Index j = 0; j < d; ++j) {
        const double analytic = it == g.embedding_rows.end() ? 0.0 : it->second(j);
        compare(&table(static_cast<Eigen::Index>(r), j), analytic, n, diff, a);
      }
    }
    const double rel = std::sqrt(diff) / std::max(std::sqrt(n) + std::sqrt(a), 1e-10);
    if (rel > out.worst_relative) {
      out.worst_relative = rel;
      out.worst_block = "embedding";
    }
  }
  return out;
}

/// A d-dimensional toy model with weights large enough that every gradient term matters.
inline EntailmentModel toy_model(std::size_t d, std::uint64_t seed) {
  ModelOptions opts;
  opts.dimension = d;
  opts.buckets = 97;
  opts.init_scale = 0.8;
  opts.embedding_scale = 0.8;
  auto m = EntailmentModel::initialize(opts, seed);
  std::mt19937_64 rng(seed * 31 + 7);
  std::normal_distribution<double> n(0.0, 0.5);
  for (Eigen::Index i = 0; i < m.fusion().projection->size(); ++i) m.fusion().projection->data()[i] += n(rng);
  for (Eigen::Index i = 0; i < m.classifier().bias.size(); ++i) m.classifier().bias(i) = n(rng);
  return m;
}

inline std::vector<NLIExample> toy_batch(std::mt19937_64& rng, std::size_t n) {
  static const std::vector<std::string> words = {"river", "painter", "club", "north", "canvas", "goal",
                                                 "city",  "bank",    "song", "field", "stage",  "coach"};
  std::uniform_int_distribution<std::size_t> w(0, words.size() - 1), len(2, 6), lab(0, 2), ntop(0, 3);
  std::vector<NLIExample> batch(n);
  for (auto& ex : batch) {
    for (std::size_t i = 0, l = len(rng); i < l; ++i) ex.premise += (i ? " " : "") + words[w(rng)];
    ex.hypothesis = "it is a " + words[w(rng)];
    for (std::size_t i = 0, k = ntop(rng); i < k; ++i) ex.topics.push_back(words[w(rng)]);
    ex.label = static_cast<NliLabel>(lab(rng));
  }
  return batch;
}

}  // namespace fet::testing
