// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#include "segmark/embedder.h"

#include <algorithm>
#include <cmath>

#include "segmark/error.h"
#include "segmark/rng.h"

namespace segmark {

WatermarkMessage::WatermarkMessage(std::vector<std::uint8_t> bits)
    : bits_(std::move(bits)) {
  if (bits_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "message must have at least one bit");
  }
  for (auto b : bits_) {
    if (b > 1) throw Error(ErrorCode::kInvalidArgument, "message bits must be 0/1");
  }
}

WatermarkMessage WatermarkMessage::from_bit_string(std::string_view bits) {
  std::vector<std::uint8_t> out;
  out.reserve(bits.size());
  for (char c : bits) {
    if (c != '0' && c != '1') {
      throw Error(ErrorCode::kParse,
                  "bit string may contain only '0' and '1'");
    }
    out.push_back(c == '1' ? 1 : 0);
  }
  return WatermarkMessage(std::move(out));
}

WatermarkMessage WatermarkMessage::from_hex(std::string_view hex,
                                            std::size_t bit_count) {
  if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
  if (bit_count == 0 || bit_count > 4 * hex.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "hex message length must be in 1..4*digits bits");
  }
  std::vector<std::uint8_t> out;
  for (char c : hex) {
    int v;
    if (c >= '0' && c <= '9') {
      v = c - '0';
    } else if (c >= 'a' && c <= 'f') {
      v = c - 'a' + 10;
    } else if (c >= 'A' && c <= 'F') {
      v = c - 'A' + 10;
    } else {
      throw Error(ErrorCode::kParse, "invalid hex digit in message");
    }
    for (int s = 3; s >= 0; --s) out.push_back(static_cast<std::uint8_t>((v >> s) & 1));
  }
  out.resize(bit_count);
  return WatermarkMessage(std::move(out));
}

WatermarkMessage WatermarkMessage::all_ones(std::size_t k) {
  return WatermarkMessage(std::vector<std::uint8_t>(k, 1));
}

std::string WatermarkMessage::to_bit_string() const {
  std::string s;
  s.reserve(bits_.size());
  for (auto b : bits_) s.push_back(b ? '1' : '0');
  return s;
}

double EmbedConfig::effective_lambda() const {
  return lambda.value_or(ConfidenceConfig::default_lambda(alpha));
}

ConfidenceConfig EmbedConfig::confidence() const {
  ConfidenceConfig c;
  c.alpha = alpha;
  c.delta = delta;
  c.lambda = effective_lambda();
  c.orientation = orientation;
  return c;
}

void EmbedConfig::validate() const {
  if (max_tokens < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_tokens must be >= 1");
  }
  if (!(repetition_penalty >= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "repetition_penalty must be >= 1");
  }
  confidence().validate();
}

std::string SegmentRule::describe() const {
  return kind == Kind::kDynamic ? "dynamic"
                                : "fixed:" + std::to_string(fixed_length);
}

namespace {

// Model side of a generation step, shared by raw and watermarked paths so
// both consume identical numbers.
class StepPipeline {
 public:
  StepPipeline(const LogitsSource& source, double repetition_penalty)
      : source_(source), penalty_(repetition_penalty) {}

  // Fills exps() with exp(l_i - max l) for the penalized logits.
  void prepare(std::span<const TokenId> context) {
    auto logits = source_.next_logits(context);
    if (penalty_ != 1.0) {
      logits = apply_repetition_penalty(std::move(logits), context, penalty_);
    }
    const double max = *std::max_element(logits.begin(), logits.end());
    exps_.resize(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
      exps_[i] = std::exp(logits[i] - max);
    }
  }

  std::span<const double> exps() const { return exps_; }

 private:
  const LogitsSource& source_;
  double penalty_;
  std::vector<double> exps_;
};

std::vector<TokenId> initial_context(std::span<const TokenId> prompt) {
  if (prompt.empty()) return {kStartToken};
  return {prompt.begin(), prompt.end()};
}

Manifest make_manifest(const EmbedConfig& cfg, const LogitsSource& source,
                       const SecretKey& key, const SegmentRule& rule,
                       std::size_t message_bits) {
  Manifest m;
  m.color = color_protocol();
  m.key_fingerprint = key.fingerprint();
  m.source = source.describe();
  m.vocab_size = source.vocab_size();
  m.segmentation = rule.describe();
  m.message_bits = message_bits;
  m.delta = cfg.delta;
  m.alpha = cfg.alpha;
  m.lambda = cfg.effective_lambda();
  m.max_tokens = cfg.max_tokens;
  m.sampling_seed = cfg.sampling_seed;
  m.repetition_penalty = cfg.repetition_penalty;
  m.orientation = cfg.orientation;
  return m;
}

}  // namespace

EmbedOutput embed(std::span<const TokenId> prompt,
                  const WatermarkMessage& message, const EmbedConfig& cfg,
                  const LogitsSource& source, const SecretKey& key,
                  SegmentRule rule) {
  cfg.validate();
  if (rule.kind == SegmentRule::Kind::kFixed && rule.fixed_length == 0) {
    throw Error(ErrorCode::kInvalidArgument, "fixed segment length must be >= 1");
  }
  const std::size_t vocab = source.vocab_size();
  Vocabulary::validate_size(vocab);
  validate_ids(prompt, vocab);

  const ConfidenceConfig conf = cfg.confidence();
  const double boost = std::exp(cfg.delta);
  const std::size_t k_total = message.size();

  ColorOracle oracle(key, vocab);
  StepPipeline pipeline(source, cfg.repetition_penalty);
  std::vector<TokenId> context = initial_context(prompt);
  context.reserve(context.size() + cfg.max_tokens);

  EmbedOutput out;
  out.text.ids.assign(prompt.begin(), prompt.end());
  out.text.prompt_len = prompt.size();
  out.text.ids.reserve(prompt.size() + cfg.max_tokens);
  out.trace.reserve(cfg.max_tokens);
  out.manifest = make_manifest(cfg, source, key, rule, k_total);

  std::vector<double> weights(vocab);
  SegmentStats segment;
  std::size_t k = 0;

  for (std::size_t t = 0; t < cfg.max_tokens; ++t) {
    const TokenId prev = context.back();
    pipeline.prepare(context);
    const auto exps = pipeline.exps();
    const auto mask = oracle.partition(prev).mask();

    const std::uint8_t bit = k < k_total ? message[k] : !message[k_total - 1];
    // Branch-free: the mask is a coin flip per token.
    const double scale[2] = {bit ? 1.0 : boost, bit ? boost : 1.0};
    double green = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < vocab; ++i) {
      total += exps[i];
      green += exps[i] * static_cast<double>(mask[i]);
      weights[i] = exps[i] * scale[mask[i]];
    }
    const double p_green = green / total;

    const auto token = static_cast<TokenId>(sample_categorical(
        weights, to_unit(counter_draw(cfg.sampling_seed, t))));
    const Color color = mask[token] ? Color::kGreen : Color::kRed;

    // Prior uses only colors sampled earlier in the open segment.
    const Prior prior = prior_estimate(segment.green_count(),
                                       segment.red_count(), conf.lambda);
    StepStat step{p_green, expected_desired(p_green, cfg.delta, prior), color};
    segment.push(step);
    out.trace.push_back(step);
    out.text.ids.push_back(token);
    context.push_back(token);

    if (k < k_total) {
      const bool closed = rule.kind == SegmentRule::Kind::kDynamic
                              ? boundary_satisfied(segment, conf)
                              : segment.n() == rule.fixed_length;
      if (closed) {
        out.boundaries.push_back(t + 1);
        ++k;
        segment = SegmentStats();
        if (k == k_total && t + 1 < cfg.max_tokens) out.padding_start = t + 1;
      }
    }
  }
  out.bits_embedded = k;
  out.complete = k == k_total;
  return out;
}

TokenSequence generate_raw(std::span<const TokenId> prompt,
                           const EmbedConfig& cfg, const LogitsSource& source) {
  cfg.validate();
  const std::size_t vocab = source.vocab_size();
  validate_ids(prompt, vocab);

  StepPipeline pipeline(source, cfg.repetition_penalty);
  std::vector<TokenId> context = initial_context(prompt);
  context.reserve(context.size() + cfg.max_tokens);

  TokenSequence out;
  out.ids.assign(prompt.begin(), prompt.end());
  out.prompt_len = prompt.size();
  for (std::size_t t = 0; t < cfg.max_tokens; ++t) {
    pipeline.prepare(context);
    const auto token = static_cast<TokenId>(sample_categorical(
        pipeline.exps(), to_unit(counter_draw(cfg.sampling_seed, t))));
    out.ids.push_back(token);
    context.push_back(token);
  }
  return out;
}

std::size_t capacity_probe(std::span<const TokenId> prompt,
                           const EmbedConfig& cfg, const LogitsSource& source,
                           const SecretKey& key, std::size_t horizon) {
  if (horizon < 1) {
    throw Error(ErrorCode::kInvalidArgument, "capacity horizon must be >= 1");
  }
  EmbedConfig probe = cfg;
  probe.max_tokens = horizon;
  return embed(prompt, WatermarkMessage::all_ones(horizon), probe, source, key)
      .bits_embedded;
}

}  // namespace segmark
