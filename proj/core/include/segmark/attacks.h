// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "segmark/embedder.h"
#include "segmark/extractor.h"

namespace segmark {

enum class AttackKind { kInsert, kDelete };

// kPlausible draws inserted tokens from a logits source at the insertion
// point instead of uniformly.
enum class InsertionMode { kUniform, kPlausible };

const char* to_string(AttackKind kind);
AttackKind parse_attack_kind(const std::string& name);

struct AttackSpec {
  AttackKind kind = AttackKind::kDelete;
  double rate = 0.05;
  std::uint64_t rng_seed = 0;
  InsertionMode mode = InsertionMode::kUniform;

  std::string label() const;
  void validate() const;
};

// Number of tokens an attack touches: round(rate * length).
std::size_t attack_count(std::size_t length, double rate);

// Inserts attack_count tokens at uniformly random positions.
std::vector<TokenId> insert_attack(std::span<const TokenId> text,
                                   std::size_t vocab_size,
                                   const AttackSpec& spec,
                                   const LogitsSource* plausible = nullptr);

// Removes attack_count tokens at seeded uniform positions. Throws
// kInvalidArgument if that would remove every token.
std::vector<TokenId> delete_attack(std::span<const TokenId> text,
                                   const AttackSpec& spec);

std::vector<TokenId> apply_attack(std::span<const TokenId> text,
                                  std::size_t vocab_size,
                                  const AttackSpec& spec,
                                  const LogitsSource* plausible = nullptr);

// Fixed-length baseline: the same biasing machinery with segments closed
// after exactly seg_len tokens. Incomplete when max_tokens < K * seg_len.
EmbedOutput fixed_length_embed(std::span<const TokenId> prompt,
                               const WatermarkMessage& message,
                               std::size_t seg_len, const EmbedConfig& cfg,
                               const LogitsSource& source, const SecretKey& key);

// Reads bit i from generated positions [i * seg_len, (i + 1) * seg_len),
// skipping position 0 whose color is unknown without the prompt. Throws
// kInfeasible if the text is shorter than k * seg_len.
ExtractionResult fixed_length_extract(std::span<const TokenId> text,
                                      std::size_t k, std::size_t seg_len,
                                      const SecretKey& key,
                                      std::size_t vocab_size);

}  // namespace segmark
