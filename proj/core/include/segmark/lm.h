// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "segmark/types.h"

namespace segmark {

/// A language model reduced to what watermarking needs: next-token logits
/// for a context.
///
/// Implementations must be deterministic: next_logits is a pure function of
/// the source state and the context. Calls on one instance are not required
/// to be thread-safe unless the implementation says so.
class LogitsSource {
 public:
  virtual ~LogitsSource() = default;

  virtual std::size_t vocab_size() const = 0;

  // context must be non-empty and contain only valid ids.
  virtual LogitsVector next_logits(std::span<const TokenId> context) const = 0;

  // One vector per position t >= 1, each conditioned on text[0..t-1]. The
  // default loops over next_logits; sources with batch paths override it.
  virtual std::vector<LogitsVector> teacher_force(
      std::span<const TokenId> text) const;

  // Short human-readable identity, echoed into manifests.
  virtual std::string describe() const = 0;
};

std::vector<LogitsVector> teacher_force(const LogitsSource& source,
                                        std::span<const TokenId> text);

// Positive logits of tokens present in context are divided by penalty,
// negative ones multiplied. penalty must be >= 1.
LogitsVector apply_repetition_penalty(LogitsVector logits,
                                      std::span<const TokenId> context,
                                      double penalty);

// Normalized probabilities, computed with max-logit subtraction.
std::vector<double> softmax(std::span<const double> logits);
double log_sum_exp(std::span<const double> logits);

// Index of the first cumulative weight exceeding u * sum(weights). Weights
// are summed left to right so identical inputs always pick the same index.
std::size_t sample_categorical(std::span<const double> weights, double u);

// Shannon entropy (nats) of softmax(logits).
double entropy(std::span<const double> logits);

enum class SourceKind { kSynthetic, kNgram, kTrace, kBridge };

const char* to_string(SourceKind kind);
SourceKind parse_source_kind(const std::string& name);

struct SourceDescriptor {
  SourceKind kind = SourceKind::kSynthetic;

  // synthetic
  std::size_t vocab_size = 256;
  double concentration = 0.01;
  std::uint64_t seed = 0;
  std::size_t context_window = 2;

  // ngram: path to a model file written by save_ngram
  std::string ngram_path;
  // trace: path to a trace file
  std::string trace_path;
  // bridge: shell command that starts a bridge server
  std::string bridge_command;

  void validate() const;
};

std::unique_ptr<LogitsSource> make_source(const SourceDescriptor& desc);

}  // namespace segmark
