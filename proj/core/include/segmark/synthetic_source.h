// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>

#include "segmark/lm.h"

namespace segmark {

struct SyntheticConfig {
  std::size_t vocab_size = 256;
  // Symmetric Dirichlet concentration per token. Small values give peaked,
  // low-entropy steps; +infinity gives exactly uniform logits.
  double concentration = 0.01;
  std::uint64_t seed = 0;
  // Number of trailing context tokens that key the per-step distribution.
  std::size_t context_window = 2;
};

/// Draws each step's distribution from Dirichlet(concentration) using a
/// generator keyed on (seed, last context_window tokens). Logits are the
/// log of the Dirichlet draw up to a constant, sampled in log space so tiny
/// concentrations never underflow.
class SyntheticSource final : public LogitsSource {
 public:
  explicit SyntheticSource(SyntheticConfig cfg);

  std::size_t vocab_size() const override { return cfg_.vocab_size; }
  LogitsVector next_logits(std::span<const TokenId> context) const override;
  std::string describe() const override;

  const SyntheticConfig& config() const noexcept { return cfg_; }

  static constexpr double kUniform = std::numeric_limits<double>::infinity();

 private:
  SyntheticConfig cfg_;
};

}  // namespace segmark
