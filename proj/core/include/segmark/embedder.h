// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "segmark/color_oracle.h"
#include "segmark/lm.h"
#include "segmark/stats.h"

namespace segmark {

class WatermarkMessage {
 public:
  explicit WatermarkMessage(std::vector<std::uint8_t> bits);

  // "1011"
  static WatermarkMessage from_bit_string(std::string_view bits);
  // Hex digits read most-significant bit first; the first `bit_count` bits
  // are kept. "0xb", 4 -> 1011.
  static WatermarkMessage from_hex(std::string_view hex, std::size_t bit_count);
  static WatermarkMessage all_ones(std::size_t k);

  std::size_t size() const noexcept { return bits_.size(); }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }
  std::string to_bit_string() const;

 private:
  std::vector<std::uint8_t> bits_;
};

struct EmbedConfig {
  double delta = 2.0;
  double alpha = 0.9;
  // Defaults to alpha * quantile(alpha)^2 when unset.
  std::optional<double> lambda;
  std::size_t max_tokens = 200;
  std::uint64_t sampling_seed = 0;
  double repetition_penalty = 1.0;
  Orientation orientation = Orientation::kCoherent;

  double effective_lambda() const;
  ConfidenceConfig confidence() const;
  void validate() const;
};

// How a segment is closed.
struct SegmentRule {
  enum class Kind { kDynamic, kFixed };
  Kind kind = Kind::kDynamic;
  std::size_t fixed_length = 0;

  static SegmentRule dynamic() { return {}; }
  static SegmentRule fixed(std::size_t length) {
    return {Kind::kFixed, length};
  }
  std::string describe() const;
};

// Everything an extractor needs to check compatibility and rebuild the
// embedding-time statistics.
struct Manifest {
  int format_version = 1;
  ColorProtocol color;
  std::string key_fingerprint;
  std::string source;
  std::size_t vocab_size = 0;
  std::string segmentation;
  std::size_t message_bits = 0;
  double delta = 0.0;
  double alpha = 0.0;
  double lambda = 0.0;
  std::size_t max_tokens = 0;
  std::uint64_t sampling_seed = 0;
  double repetition_penalty = 1.0;
  Orientation orientation = Orientation::kCoherent;

  bool operator==(const Manifest&) const = default;
};

struct EmbedOutput {
  // Prompt followed by the generated tokens.
  TokenSequence text;
  // Exclusive segment ends, in generated-token coordinates.
  std::vector<std::size_t> boundaries;
  std::size_t bits_embedded = 0;
  // First padding token (generated coordinates), if any padding was produced.
  std::optional<std::size_t> padding_start;
  // False on capacity shortfall: max_tokens ran out before every bit closed.
  bool complete = false;
  // One entry per generated token.
  std::vector<StepStat> trace;
  Manifest manifest;

  bool operator==(const EmbedOutput&) const = default;
};

EmbedOutput embed(std::span<const TokenId> prompt,
                  const WatermarkMessage& message, const EmbedConfig& cfg,
                  const LogitsSource& source, const SecretKey& key,
                  SegmentRule rule = SegmentRule::dynamic());

// Unwatermarked generation through the same pipeline and sampler draws.
// Generates exactly max_tokens tokens. With an empty prompt both this and
// embed condition the model on a virtual kStartToken that is not emitted.
TokenSequence generate_raw(std::span<const TokenId> prompt,
                           const EmbedConfig& cfg, const LogitsSource& source);

// Bits embeddable within `horizon` tokens: embeds an all-ones probe message
// of length horizon with max_tokens = horizon.
std::size_t capacity_probe(std::span<const TokenId> prompt,
                           const EmbedConfig& cfg, const LogitsSource& source,
                           const SecretKey& key, std::size_t horizon);

}  // namespace segmark
