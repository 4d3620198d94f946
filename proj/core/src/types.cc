// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#include "segmark/types.h"

#include <string>

#include "segmark/error.h"

namespace segmark {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kOutOfRange: return "out_of_range";
    case ErrorCode::kTraceExhausted: return "trace_exhausted";
    case ErrorCode::kBridgeIo: return "bridge_io";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kProtocolMismatch: return "protocol_mismatch";
    case ErrorCode::kInfeasible: return "infeasible";
    case ErrorCode::kZeroProbability: return "zero_probability";
  }
  return "unknown";
}

void Vocabulary::validate_size(std::size_t size) {
  if (size < 4 || size % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "vocabulary size must be even and >= 4, got " +
                    std::to_string(size));
  }
}

Vocabulary::Vocabulary(std::size_t size) : size_(size) { validate_size(size); }

Vocabulary::Vocabulary(std::vector<std::string> tokens)
    : size_(tokens.size()), tokens_(std::move(tokens)) {
  validate_size(size_);
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    auto [it, inserted] = index_.emplace(tokens_[i], static_cast<TokenId>(i));
    if (!inserted) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate vocabulary entry '" + tokens_[i] + "'");
    }
  }
}

std::string Vocabulary::token(TokenId id) const {
  if (id >= size_) {
    throw Error(ErrorCode::kOutOfRange, "token id out of range");
  }
  return tokens_.empty() ? std::to_string(id) : tokens_[id];
}

std::optional<TokenId> Vocabulary::find(std::string_view surface) const {
  auto it = index_.find(std::string(surface));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void validate_ids(std::span<const TokenId> ids, std::size_t vocab_size) {
  for (TokenId id : ids) {
    if (id >= vocab_size) {
      throw Error(ErrorCode::kOutOfRange,
                  "token id " + std::to_string(id) +
                      " outside vocabulary of size " +
                      std::to_string(vocab_size));
    }
  }
}

}  // namespace segmark
