#include "fet/language_models.hpp"

#include <cmath>
#include <fstream>

#include "fet/io.hpp"
#include "fet/text.hpp"
#include "httplib.h"

namespace fet {

BigramLM BigramLM::train(std::span<const std::string> sentences, double smoothing) {
  if (!(smoothing > 0.0)) throw InvalidArgument("bigram smoothing must be > 0");
  BigramLM lm;
  lm.smoothing_ = smoothing;
  lm.vocab_.push_back(kEndToken);
  lm.ids_.emplace(kEndToken, 0);
  std::vector<std::vector<TokenId>> encoded;
  for (const auto& s : sentences) {
    std::vector<TokenId> ids;
    for (const auto& piece : text::split_whitespace(s)) {
      const auto tok = text::to_lower(piece);
      auto [it, inserted] = lm.ids_.emplace(tok, static_cast<TokenId>(lm.vocab_.size()));
      if (inserted) lm.vocab_.push_back(tok);
      ids.push_back(it->second);
    }
    if (!ids.empty()) encoded.push_back(std::move(ids));
  }
  lm.counts_.assign(lm.vocab_.size() + 1, {});
  lm.totals_.assign(lm.vocab_.size() + 1, 0.0);
  auto bump = [&](std::size_t row, TokenId next) {
    lm.counts_[row][next] += 1.0;
    lm.totals_[row] += 1.0;
  };
  for (const auto& ids : encoded) {
    bump(0, ids.front());
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) bump(ids[i] + 1, ids[i + 1]);
    bump(ids.back() + 1, 0);
  }
  return lm;
}

BigramLM BigramLM::train_file(const std::filesystem::path& file, double smoothing) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open language-model corpus " + file.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!text::trim(line).empty()) lines.push_back(line);
  }
  return train(lines, smoothing);
}

std::vector<double> BigramLM::next_logits(std::span<const TokenId> prefix) const {
  const std::size_t row = prefix.empty() ? 0 : prefix.back() + 1;
  if (row >= counts_.size()) throw InvalidArgument("bigram: token id out of range");
  const double v = static_cast<double>(vocab_.size());
  const double denom = std::log(totals_[row] + smoothing_ * v);
  std::vector<double> logits(vocab_.size(), std::log(smoothing_) - denom);
  for (const auto& [next, count] : counts_[row]) logits[next] = std::log(count + smoothing_) - denom;
  return logits;
}

std::optional<TokenId> BigramLM::token_id(std::string_view token) const {
  const auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------

RemoteTokenLM::RemoteTokenLM(std::string endpoint, std::string style)
    : endpoint_(std::move(endpoint)), style_(std::move(style)) {
  httplib::Client client(endpoint_);
  auto res = client.Get("/vocabulary");
  if (!res || res->status != 200) throw BackendError("cannot fetch vocabulary from " + endpoint_);
  try {
    vocab_ = io::Json::parse(res->body).at("tokens").get<std::vector<std::string>>();
  } catch (const io::Json::exception& e) {
    throw BackendError(std::string("malformed vocabulary response: ") + e.what());
  }
  for (std::size_t i = 0; i < vocab_.size(); ++i) ids_.emplace(vocab_[i], static_cast<TokenId>(i));
}

std::vector<double> RemoteTokenLM::next_logits(std::span<const TokenId> prefix) const {
  std::vector<std::string> tokens;
  tokens.reserve(prefix.size());
  for (auto id : prefix) tokens.push_back(vocab_.at(id));
  const io::Json body{{"prefix", tokens}, {"style", style_}};
  httplib::Client client(endpoint_);
  auto res = client.Post("/next_logits", body.dump(), "application/json");
  if (!res || res->status != 200) throw BackendError("next_logits request to " + endpoint_ + " failed");
  try {
    return io::Json::parse(res->body).at("logits").get<std::vector<double>>();
  } catch (const io::Json::exception& e) {
    throw BackendError(std::string("malformed logits response: ") + e.what());
  }
}

std::optional<TokenId> RemoteTokenLM::token_id(std::string_view token) const {
  const auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

}  // namespace fet
