// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#include "segmark/lm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "segmark/bridge_source.h"
#include "segmark/error.h"
#include "segmark/ngram_source.h"
#include "segmark/synthetic_source.h"
#include "segmark/trace_source.h"

namespace segmark {

std::vector<LogitsVector> LogitsSource::teacher_force(
    std::span<const TokenId> text) const {
  if (text.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "teacher_force on empty text");
  }
  std::vector<LogitsVector> out;
  out.reserve(text.size() - 1);
  for (std::size_t t = 1; t < text.size(); ++t) {
    out.push_back(next_logits(text.first(t)));
  }
  return out;
}

std::vector<LogitsVector> teacher_force(const LogitsSource& source,
                                        std::span<const TokenId> text) {
  validate_ids(text, source.vocab_size());
  return source.teacher_force(text);
}

LogitsVector apply_repetition_penalty(LogitsVector logits,
                                      std::span<const TokenId> context,
                                      double penalty) {
  if (!(penalty >= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "repetition penalty must be >= 1");
  }
  if (penalty == 1.0) return logits;
  std::vector<std::uint8_t> seen(logits.size(), 0);
  for (TokenId id : context) {
    if (id < seen.size()) seen[id] = 1;
  }
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!seen[i]) continue;
    logits[i] = logits[i] > 0 ? logits[i] / penalty : logits[i] * penalty;
  }
  return logits;
}

double log_sum_exp(std::span<const double> logits) {
  const double max = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l - max);
  return max + std::log(sum);
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double max = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - max);
    sum += p[i];
  }
  for (double& x : p) x /= sum;
  return p;
}

std::size_t sample_categorical(std::span<const double> weights, double u) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw Error(ErrorCode::kInvalidArgument,
                "sampling weights must have a positive finite sum");
  }
  const double target = u * total;
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    cum += weights[i];
    last_positive = i;
    if (cum > target) return i;
  }
  return last_positive;
}

double entropy(std::span<const double> logits) {
  const auto p = softmax(logits);
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

const char* to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::kSynthetic: return "synthetic";
    case SourceKind::kNgram: return "ngram";
    case SourceKind::kTrace: return "trace";
    case SourceKind::kBridge: return "bridge";
  }
  return "unknown";
}

SourceKind parse_source_kind(const std::string& name) {
  if (name == "synthetic") return SourceKind::kSynthetic;
  if (name == "ngram") return SourceKind::kNgram;
  if (name == "trace") return SourceKind::kTrace;
  if (name == "bridge") return SourceKind::kBridge;
  throw Error(ErrorCode::kInvalidArgument, "unknown source kind '" + name + "'");
}

void SourceDescriptor::validate() const {
  switch (kind) {
    case SourceKind::kSynthetic:
      Vocabulary::validate_size(vocab_size);
      if (!(concentration > 0.0)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "synthetic concentration must be > 0");
      }
      if (context_window == 0) {
        throw Error(ErrorCode::kInvalidArgument,
                    "synthetic context window must be >= 1");
      }
      break;
    case SourceKind::kNgram:
      if (ngram_path.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "ngram source needs a model path");
      }
      break;
    case SourceKind::kTrace:
      if (trace_path.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "trace source needs a path");
      }
      break;
    case SourceKind::kBridge:
      if (bridge_command.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "bridge source needs a command");
      }
      break;
  }
}

std::unique_ptr<LogitsSource> make_source(const SourceDescriptor& desc) {
  desc.validate();
  switch (desc.kind) {
    case SourceKind::kSynthetic:
      return std::make_unique<SyntheticSource>(SyntheticConfig{
          desc.vocab_size, desc.concentration, desc.seed, desc.context_window});
    case SourceKind::kNgram:
      return std::make_unique<NgramSource>(load_ngram(desc.ngram_path));
    case SourceKind::kTrace:
      return std::make_unique<TraceSource>(read_trace(desc.trace_path));
    case SourceKind::kBridge:
      return std::make_unique<BridgeSource>(desc.bridge_command);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown source kind");
}

}  // namespace segmark
