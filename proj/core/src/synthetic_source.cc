// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#include "segmark/synthetic_source.h"

#include <cmath>
#include <random>
#include <sstream>

#include "segmark/error.h"
#include "segmark/rng.h"

namespace segmark {

SyntheticSource::SyntheticSource(SyntheticConfig cfg) : cfg_(cfg) {
  Vocabulary::validate_size(cfg_.vocab_size);
  if (!(cfg_.concentration > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "concentration must be > 0");
  }
  if (cfg_.context_window == 0) {
    throw Error(ErrorCode::kInvalidArgument, "context window must be >= 1");
  }
}

LogitsVector SyntheticSource::next_logits(
    std::span<const TokenId> context) const {
  if (context.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "next_logits needs a context");
  }
  // Only the window is read, so only the window is checked.
  const std::size_t w = std::min(cfg_.context_window, context.size());
  validate_ids(context.last(w), cfg_.vocab_size);

  LogitsVector logits(cfg_.vocab_size, 0.0);
  if (std::isinf(cfg_.concentration)) return logits;

  std::uint64_t key = mix64(cfg_.seed, w);
  for (TokenId id : context.last(w)) key = mix64(key, id);

  // log Gamma(c) = log Gamma(c + 1) + log(U) / c keeps small shapes finite.
  CounterRng rng(key);
  std::gamma_distribution<double> gamma(cfg_.concentration + 1.0, 1.0);
  const double inv_c = 1.0 / cfg_.concentration;
  for (double& l : logits) {
    const double g = gamma(rng);
    double u = rng.uniform();
    if (u <= 0.0) u = 0x1.0p-53;
    l = std::log(g) + std::log(u) * inv_c;
  }
  return logits;
}

std::string SyntheticSource::describe() const {
  std::ostringstream os;
  os << "synthetic(vocab=" << cfg_.vocab_size
     << ",concentration=" << cfg_.concentration << ",seed=" << cfg_.seed
     << ",window=" << cfg_.context_window << ")";
  return os.str();
}

}  // namespace segmark
