// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#include "segmark/ngram_source.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "segmark/error.h"
#include "segmark/rng.h"

namespace segmark {

std::size_t NgramSource::HistoryHash::operator()(
    const std::vector<TokenId>& h) const noexcept {
  std::uint64_t x = h.size();
  for (TokenId id : h) x = mix64(x, id);
  return static_cast<std::size_t>(x);
}

NgramSource::NgramSource(Vocabulary vocab, std::size_t order, double smoothing)
    : vocab_(std::move(vocab)), order_(order), smoothing_(smoothing) {}

NgramSource train_ngram(std::vector<TokenId> corpus, Vocabulary vocab,
                        std::size_t order, double smoothing) {
  if (corpus.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty n-gram corpus");
  }
  if (order < 1) {
    throw Error(ErrorCode::kInvalidArgument, "n-gram order must be >= 1");
  }
  if (corpus.size() <= order) {
    throw Error(ErrorCode::kInvalidArgument,
                "n-gram corpus must be longer than the order");
  }
  if (!(smoothing > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "smoothing must be > 0");
  }
  validate_ids(corpus, vocab.size());

  NgramSource model(std::move(vocab), order, smoothing);
  // Count every history length 0..order-1 so short contexts are covered.
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const std::size_t max_h = std::min(order - 1, i);
    for (std::size_t h = 0; h <= max_h; ++h) {
      std::vector<TokenId> history(corpus.begin() + static_cast<long>(i - h),
                                   corpus.begin() + static_cast<long>(i));
      auto& counts = model.table_[std::move(history)];
      ++counts.total;
      ++counts.next[corpus[i]];
    }
  }
  model.corpus_ = std::move(corpus);
  return model;
}

LogitsVector NgramSource::next_logits(std::span<const TokenId> context) const {
  if (context.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "next_logits needs a context");
  }
  validate_ids(context, vocab_.size());
  const std::size_t h = std::min(order_ - 1, context.size());
  const std::vector<TokenId> history(context.end() - static_cast<long>(h),
                                     context.end());

  const double v = static_cast<double>(vocab_.size());
  auto it = table_.find(history);
  const double total = it == table_.end() ? 0.0 : static_cast<double>(it->second.total);
  const double denom = std::log(total + smoothing_ * v);
  LogitsVector logits(vocab_.size(), std::log(smoothing_) - denom);
  if (it != table_.end()) {
    for (const auto& [tok, c] : it->second.next) {
      logits[tok] = std::log(static_cast<double>(c) + smoothing_) - denom;
    }
  }
  return logits;
}

std::string NgramSource::describe() const {
  std::ostringstream os;
  os << "ngram(vocab=" << vocab_.size() << ",order=" << order_
     << ",smoothing=" << smoothing_ << ",corpus=" << corpus_.size() << ")";
  return os.str();
}

std::pair<Vocabulary, std::vector<TokenId>> tokenize_corpus(std::istream& in) {
  std::vector<std::string> words;
  std::string w;
  while (in >> w) words.push_back(w);
  if (words.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty corpus");
  }
  std::set<std::string> distinct(words.begin(), words.end());
  std::vector<std::string> tokens(distinct.begin(), distinct.end());
  for (std::size_t i = 0; tokens.size() < 4 || tokens.size() % 2 != 0; ++i) {
    tokens.push_back("<pad:" + std::to_string(i) + ">");
  }
  Vocabulary vocab(std::move(tokens));
  std::vector<TokenId> ids;
  ids.reserve(words.size());
  for (const auto& word : words) ids.push_back(*vocab.find(word));
  return {std::move(vocab), std::move(ids)};
}

void save_ngram(const NgramSource& model, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format"] = "segmark-ngram";
  j["version"] = 1;
  j["order"] = model.order();
  j["smoothing"] = model.smoothing();
  j["vocab_size"] = model.vocab_size();
  if (model.vocabulary().has_surface_forms()) {
    j["tokens"] = model.vocabulary().tokens();
  }
  j["corpus"] = model.corpus();
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot write " + path.string());
  }
  out << j.dump() << '\n';
}

NgramSource load_ngram(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot read " + path.string());
  }
  nlohmann::json j;
  try {
    in >> j;
    if (j.at("format") != "segmark-ngram" || j.at("version") != 1) {
      throw Error(ErrorCode::kParse, "not a segmark-ngram v1 file");
    }
    const auto vocab_size = j.at("vocab_size").get<std::size_t>();
    Vocabulary vocab = j.contains("tokens")
                           ? Vocabulary(j["tokens"].get<std::vector<std::string>>())
                           : Vocabulary(vocab_size);
    return train_ngram(j.at("corpus").get<std::vector<TokenId>>(),
                       std::move(vocab), j.at("order").get<std::size_t>(),
                       j.at("smoothing").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

}  // namespace segmark
