// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#include "segmark/attacks.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "segmark/error.h"
#include "segmark/rng.h"

namespace segmark {

const char* to_string(AttackKind kind) {
  return kind == AttackKind::kInsert ? "insert" : "delete";
}

AttackKind parse_attack_kind(const std::string& name) {
  if (name == "insert") return AttackKind::kInsert;
  if (name == "delete") return AttackKind::kDelete;
  throw Error(ErrorCode::kInvalidArgument, "unknown attack kind '" + name + "'");
}

std::string AttackSpec::label() const {
  std::ostringstream os;
  os << to_string(kind) << ':' << rate;
  if (kind == AttackKind::kInsert && mode == InsertionMode::kPlausible) {
    os << ":plausible";
  }
  return os.str();
}

void AttackSpec::validate() const {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "attack rate must lie in [0, 1)");
  }
}

std::size_t attack_count(std::size_t length, double rate) {
  return static_cast<std::size_t>(std::llround(rate * static_cast<double>(length)));
}

std::vector<TokenId> insert_attack(std::span<const TokenId> text,
                                   std::size_t vocab_size,
                                   const AttackSpec& spec,
                                   const LogitsSource* plausible) {
  spec.validate();
  if (spec.mode == InsertionMode::kPlausible && plausible == nullptr) {
    throw Error(ErrorCode::kInvalidArgument,
                "plausible insertion needs a logits source");
  }
  validate_ids(text, vocab_size);
  std::vector<TokenId> out(text.begin(), text.end());
  const std::size_t count = attack_count(text.size(), spec.rate);
  CounterRng rng(mix64(spec.rng_seed, 0x1a5e47));
  for (std::size_t i = 0; i < count; ++i) {
    const auto pos = static_cast<std::size_t>(rng.below(out.size() + 1));
    TokenId token;
    if (spec.mode == InsertionMode::kPlausible) {
      std::vector<TokenId> ctx(out.begin(), out.begin() + static_cast<long>(pos));
      if (ctx.empty()) ctx.push_back(0);
      const auto p = softmax(plausible->next_logits(ctx));
      token = static_cast<TokenId>(sample_categorical(p, rng.uniform()));
    } else {
      token = static_cast<TokenId>(rng.below(vocab_size));
    }
    out.insert(out.begin() + static_cast<long>(pos), token);
  }
  return out;
}

std::vector<TokenId> delete_attack(std::span<const TokenId> text,
                                   const AttackSpec& spec) {
  spec.validate();
  const std::size_t count = attack_count(text.size(), spec.rate);
  if (count == 0) return {text.begin(), text.end()};
  if (count >= text.size()) {
    throw Error(ErrorCode::kInvalidArgument, "deletion would remove every token");
  }
  // Partial Fisher-Yates picks `count` distinct positions.
  std::vector<std::size_t> idx(text.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  CounterRng rng(mix64(spec.rng_seed, 0xde1e7e));
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(text.size() - i));
    std::swap(idx[i], idx[j]);
  }
  std::vector<std::uint8_t> drop(text.size(), 0);
  for (std::size_t i = 0; i < count; ++i) drop[idx[i]] = 1;
  std::vector<TokenId> out;
  out.reserve(text.size() - count);
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!drop[i]) out.push_back(text[i]);
  }
  return out;
}

std::vector<TokenId> apply_attack(std::span<const TokenId> text,
                                  std::size_t vocab_size,
                                  const AttackSpec& spec,
                                  const LogitsSource* plausible) {
  return spec.kind == AttackKind::kInsert
             ? insert_attack(text, vocab_size, spec, plausible)
             : delete_attack(text, spec);
}

EmbedOutput fixed_length_embed(std::span<const TokenId> prompt,
                               const WatermarkMessage& message,
                               std::size_t seg_len, const EmbedConfig& cfg,
                               const LogitsSource& source, const SecretKey& key) {
  if (seg_len < 1) {
    throw Error(ErrorCode::kInvalidArgument, "segment length must be >= 1");
  }
  return embed(prompt, message, cfg, source, key, SegmentRule::fixed(seg_len));
}

ExtractionResult fixed_length_extract(std::span<const TokenId> text,
                                      std::size_t k, std::size_t seg_len,
                                      const SecretKey& key,
                                      std::size_t vocab_size) {
  if (seg_len < 1 || k < 1) {
    throw Error(ErrorCode::kInvalidArgument, "k and segment length must be >= 1");
  }
  if (text.size() < k * seg_len) {
    throw Error(ErrorCode::kInfeasible,
                "text of " + std::to_string(text.size()) +
                    " tokens is shorter than k * seg_len = " +
                    std::to_string(k * seg_len));
  }
  const auto colors = color_text(text, key, vocab_size);
  ExtractionResult result;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t begin = std::max<std::size_t>(i * seg_len, 1);
    const std::size_t end = (i + 1) * seg_len;
    std::size_t green = 0;
    std::size_t red = 0;
    for (std::size_t pos = begin; pos < end; ++pos) {
      (colors[pos - 1] == Color::kGreen ? green : red) += 1;
    }
    result.bits.push_back(green > red ? 1 : 0);
    result.segmentation.push_back(end);
    result.per_segment.push_back({0.0, 0.0, green, red});
  }
  result.padding_start = k * seg_len;
  result.iterations = 1;
  result.converged = true;
  return result;
}

}  // namespace segmark
