// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <istream>
#include <memory>
#include <unordered_map>

#include "segmark/lm.h"

namespace segmark {

/// Additively smoothed n-gram model.
///
/// Logits are log((c(h, w) + smoothing) / (c(h) + smoothing * |V|)) where h
/// is the last min(order - 1, |context|) tokens. Shorter histories are used
/// near the start of a text; unseen histories give uniform logits.
class NgramSource final : public LogitsSource {
 public:
  std::size_t vocab_size() const override { return vocab_.size(); }
  LogitsVector next_logits(std::span<const TokenId> context) const override;
  std::string describe() const override;

  std::size_t order() const noexcept { return order_; }
  double smoothing() const noexcept { return smoothing_; }
  const Vocabulary& vocabulary() const noexcept { return vocab_; }
  const std::vector<TokenId>& corpus() const noexcept { return corpus_; }

  friend NgramSource train_ngram(std::vector<TokenId> corpus, Vocabulary vocab,
                                 std::size_t order, double smoothing);

 private:
  NgramSource(Vocabulary vocab, std::size_t order, double smoothing);

  struct HistoryHash {
    std::size_t operator()(const std::vector<TokenId>& h) const noexcept;
  };
  struct Counts {
    std::uint64_t total = 0;
    std::unordered_map<TokenId, std::uint64_t> next;
  };

  Vocabulary vocab_;
  std::size_t order_;
  double smoothing_;
  std::vector<TokenId> corpus_;
  std::unordered_map<std::vector<TokenId>, Counts, HistoryHash> table_;
};

// corpus.size() must exceed order; order >= 1; smoothing > 0.
NgramSource train_ngram(std::vector<TokenId> corpus, Vocabulary vocab,
                        std::size_t order, double smoothing);

// Whitespace-tokenized text -> ids. The vocabulary is the sorted set of
// distinct tokens, padded with "<pad:i>" fillers to an even size >= 4.
std::pair<Vocabulary, std::vector<TokenId>> tokenize_corpus(std::istream& in);

// Model files are JSON documents (format "segmark-ngram", version 1) that
// store the vocabulary, order, smoothing and training ids.
void save_ngram(const NgramSource& model, const std::filesystem::path& path);
NgramSource load_ngram(const std::filesystem::path& path);

}  // namespace segmark
