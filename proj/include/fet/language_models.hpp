#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fet/generation.hpp"

namespace fet {

/// Add-k smoothed bigram model over lowercased whitespace tokens. The
/// vocabulary starts with the end-of-sentence token `</s>`; an empty prefix
/// conditions on the sentence start.
class BigramLM final : public TokenLM {
 public:
  static constexpr const char* kEndToken = "</s>";

  static BigramLM train(std::span<const std::string> sentences, double smoothing = 0.01);
  /// One sentence per non-empty line.
  static BigramLM train_file(const std::filesystem::path& file, double smoothing = 0.01);

  const std::vector<std::string>& vocabulary() const override { return vocab_; }
  std::vector<double> next_logits(std::span<const TokenId> prefix) const override;
  std::optional<TokenId> token_id(std::string_view token) const override;

  TokenId end_token() const { return 0; }

 private:
  BigramLM() = default;

  double smoothing_ = 0.01;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, TokenId> ids_;
  // Row 0 is the sentence-start context; row t + 1 follows token t.
  std::vector<std::unordered_map<TokenId, double>> counts_;
  std::vector<double> totals_;
};

/// Adapter for an out-of-process language model served over HTTP.
///   GET  /vocabulary   -> {"tokens": [...]}
///   POST /next_logits  {"prefix": [...token strings], "style": "..."} -> {"logits": [...]}
/// `style` carries the generation control code (e.g. "Wikipedia").
class RemoteTokenLM final : public TokenLM {
 public:
  RemoteTokenLM(std::string endpoint, std::string style = "Wikipedia");

  const std::vector<std::string>& vocabulary() const override { return vocab_; }
  std::vector<double> next_logits(std::span<const TokenId> prefix) const override;
  std::optional<TokenId> token_id(std::string_view token) const override;

 private:
  std::string endpoint_;
  std::string style_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, TokenId> ids_;
};

}  // namespace fet
