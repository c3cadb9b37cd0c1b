#include "fet/inference.hpp"

#include "fet/nli_data.hpp"

namespace fet {

void Mention::validate() const {
  if (span_begin > span_end || span_end > context.size() ||
      context.compare(span_begin, span_end - span_begin, surface) != 0) {
    throw InvalidArgument("mention span [" + std::to_string(span_begin) + ", " + std::to_string(span_end) +
                          ") does not select '" + surface + "' in its context");
  }
  if (surface.empty()) throw InvalidArgument("mention surface is empty");
}

std::string_view to_string(InferenceMode mode) {
  return mode == InferenceMode::CoarseToFine ? "coarse_to_fine" : "flat";
}

std::vector<std::string> extract_keywords(std::string_view context, std::size_t k,
                                          const text::BackgroundTable& background,
                                          const std::set<std::string>& excluded) {
  const std::vector<std::vector<std::string>> docs{text::word_tokens(context)};
  std::vector<std::string> out;
  for (auto& term : text::rank_terms(docs, background, excluded)) {
    if (out.size() >= k) break;
    out.push_back(std::move(term.term));
  }
  return out;
}

double ModelScorer::entailment(const std::string& premise, const std::string& hypothesis,
                               const std::vector<std::string>& topics) const {
  return model_.predict(premise, hypothesis, topics, use_topics_)[static_cast<std::size_t>(NliLabel::Entailment)];
}

std::vector<std::pair<std::string, double>> score_children(const EntailmentScorer& scorer,
                                                           const TypeOntology& ontology,
                                                           const Mention& mention,
                                                           const std::vector<std::string>& candidates,
                                                           const std::vector<std::string>& keywords) {
  if (candidates.empty()) throw InvalidArgument("score_children: no candidates");
  std::vector<std::pair<std::string, double>> scores;
  scores.reserve(candidates.size());
  for (const auto& c : candidates) {
    const auto hypothesis = render_hypothesis(mention.surface, ontology.node(c).name);
    scores.emplace_back(c, scorer.entailment(mention.context, hypothesis, keywords));
  }
  return scores;
}

namespace {

std::size_t argmax(const std::vector<std::pair<std::string, double>>& scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i].second > scores[best].second) best = i;
  }
  return best;
}

std::vector<std::string> keywords_for(const Mention& mention, const text::BackgroundTable& background,
                                      const InferenceOptions& options) {
  if (!options.use_topics) return {};
  const auto surface = text::word_tokens(mention.surface);
  std::set<std::string> excluded(surface.begin(), surface.end());
  excluded.insert(text::join(surface, " "));
  for (std::size_t i = 0; i + 1 < surface.size(); ++i) excluded.insert(surface[i] + " " + surface[i + 1]);
  return extract_keywords(mention.context, options.keywords, background, excluded);
}

}  // namespace

TypePrediction type_mention(const EntailmentScorer& scorer, const TypeOntology& ontology,
                            const Mention& mention, const text::BackgroundTable& background,
                            const InferenceOptions& options) {
  if (ontology.empty()) throw InvalidArgument("type_mention: empty ontology");
  const auto keywords = keywords_for(mention, background, options);
  TypePrediction pred;
  pred.mode = InferenceMode::CoarseToFine;

  auto level = score_children(scorer, ontology, mention, ontology.roots(), keywords);
  auto best = level[argmax(level)];
  pred.path = best.first;
  pred.level_scores.push_back(best);
  if (best.second < options.threshold) return pred;

  while (!ontology.children(pred.path).empty()) {
    level = score_children(scorer, ontology, mention, ontology.children(pred.path), keywords);
    best = level[argmax(level)];
    if (best.second < options.threshold) break;
    pred.path = best.first;
    pred.level_scores.push_back(best);
  }
  return pred;
}

TypePrediction type_mention_flat(const EntailmentScorer& scorer, const TypeOntology& ontology,
                                 const Mention& mention, const text::BackgroundTable& background,
                                 const InferenceOptions& options) {
  if (ontology.empty()) throw InvalidArgument("type_mention_flat: empty ontology");
  const auto keywords = keywords_for(mention, background, options);
  std::vector<std::string> all;
  for (const auto& n : ontology.nodes()) all.push_back(n.path);
  const auto scores = score_children(scorer, ontology, mention, all, keywords);
  TypePrediction pred;
  pred.mode = InferenceMode::Flat;
  pred.path = scores[argmax(scores)].first;
  for (const auto& p : ontology.lineage(pred.path)) {
    for (const auto& s : scores) {
      if (s.first == p) pred.level_scores.push_back(s);
    }
  }
  return pred;
}

}  // namespace fet
