// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace segmark {

using TokenId = std::uint32_t;

// Per-step raw scores over the vocabulary. Entries must be finite.
using LogitsVector = std::vector<double>;

/// Token-id space, optionally with surface forms. Ids are 0..size()-1.
///
/// The size must be even and at least 4 so that every step admits an
/// equal-size green/red split.
class Vocabulary {
 public:
  explicit Vocabulary(std::size_t size);
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const noexcept { return size_; }
  bool has_surface_forms() const noexcept { return !tokens_.empty(); }

  // Falls back to the decimal id when no surface forms are attached.
  std::string token(TokenId id) const;
  std::optional<TokenId> find(std::string_view surface) const;
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  static void validate_size(std::size_t size);

 private:
  std::size_t size_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

struct TokenSequence {
  std::vector<TokenId> ids;
  // Number of leading prompt tokens in ids.
  std::size_t prompt_len = 0;

  std::span<const TokenId> prompt() const {
    return std::span<const TokenId>(ids).first(prompt_len);
  }
  std::span<const TokenId> generated() const {
    return std::span<const TokenId>(ids).subspan(prompt_len);
  }
  std::size_t size() const noexcept { return ids.size(); }
  bool empty() const noexcept { return ids.empty(); }

  bool operator==(const TokenSequence&) const = default;
};

// Throws ErrorCode::kOutOfRange if any id is >= vocab_size.
void validate_ids(std::span<const TokenId> ids, std::size_t vocab_size);

}  // namespace segmark
