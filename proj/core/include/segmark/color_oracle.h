// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "segmark/types.h"

namespace segmark {

class SecretKey {
 public:
  explicit SecretKey(std::vector<std::uint8_t> bytes);

  static SecretKey from_string(std::string_view text);
  static SecretKey from_hex(std::string_view hex);

  std::span<const std::uint8_t> bytes() const noexcept { return bytes_; }
  // Short public fingerprint (hex of a keyed-hash digest), safe to publish.
  std::string fingerprint() const;

 private:
  std::vector<std::uint8_t> bytes_;
};

enum class Color : std::uint8_t { kRed = 0, kGreen = 1 };

inline Color opposite(Color c) {
  return c == Color::kGreen ? Color::kRed : Color::kGreen;
}

/// Balanced split of the vocabulary. Exactly half of the ids are green.
class ColorPartition {
 public:
  explicit ColorPartition(std::vector<std::uint8_t> green_mask);

  std::size_t vocab_size() const noexcept { return mask_.size(); }
  bool is_green(TokenId id) const { return mask_[id] != 0; }
  Color color(TokenId id) const {
    return is_green(id) ? Color::kGreen : Color::kRed;
  }
  std::span<const std::uint8_t> mask() const noexcept { return mask_; }

  std::vector<TokenId> green() const;
  std::vector<TokenId> red() const;

 private:
  std::vector<std::uint8_t> mask_;
};

// Protocol constants identifying how partitions are derived. Recorded in
// every embed manifest and checked before extraction.
struct ColorProtocol {
  std::string prf;
  std::string shuffle;
  int version;

  bool operator==(const ColorProtocol&) const = default;
};

const ColorProtocol& color_protocol();

// The first generated token takes the last prompt token as its predecessor,
// or this id when there is no prompt.
inline constexpr TokenId kStartToken = 0;

// Seed = SipHash-2-4(prev_token as u64 LE) under a 16-byte key derived from
// the secret with keyed BLAKE2b; the seed drives a Fisher-Yates shuffle of
// 0..V-1 and the first V/2 entries are green.
ColorPartition partition_for(const SecretKey& key, TokenId prev_token,
                             std::size_t vocab_size);

Color color_of(const SecretKey& key, TokenId prev_token, TokenId token,
               std::size_t vocab_size);

/// Memoizing front end for partition_for. Not thread-safe; give each
/// embed/extract call its own instance.
class ColorOracle {
 public:
  ColorOracle(const SecretKey& key, std::size_t vocab_size);

  const ColorPartition& partition(TokenId prev_token);
  Color color(TokenId prev_token, TokenId token) {
    return partition(prev_token).color(token);
  }
  std::size_t vocab_size() const noexcept { return vocab_size_; }

 private:
  std::uint64_t seed_for(TokenId prev_token) const;

  std::array<std::uint8_t, 16> siphash_key_{};
  std::size_t vocab_size_;
  std::unordered_map<TokenId, ColorPartition> cache_;
};

}  // namespace segmark
