// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <istream>
#include <ostream>

#include "segmark/lm.h"

namespace segmark {

// Trace files are line oriented:
//
//   segmark-trace <version> <vocab_size>
//   <step> <logit_0> <logit_1> ... <logit_{V-1}>
//   ...
//
// Record `step` holds the logits conditioned on the first step + 1 tokens of
// the traced text. Values are written with 17 significant digits so doubles
// round-trip exactly.
inline constexpr int kTraceFormatVersion = 1;

struct Trace {
  std::size_t vocab_size = 0;
  std::vector<LogitsVector> steps;
};

void write_trace(std::ostream& out, const Trace& trace);
void write_trace(const std::filesystem::path& path, const Trace& trace);
Trace read_trace(std::istream& in);
Trace read_trace(const std::filesystem::path& path);

/// Replays a stored trace. The context is used only for its length: a
/// context of length t returns record t - 1.
class TraceSource final : public LogitsSource {
 public:
  explicit TraceSource(Trace trace);

  std::size_t vocab_size() const override { return trace_.vocab_size; }
  LogitsVector next_logits(std::span<const TokenId> context) const override;
  std::string describe() const override;

  std::size_t steps() const noexcept { return trace_.steps.size(); }

 private:
  Trace trace_;
};

}  // namespace segmark
