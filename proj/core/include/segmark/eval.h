// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "segmark/attacks.h"

namespace segmark {

// exp(mean negative log-likelihood) of text[1..] under teacher forcing.
// Throws kZeroProbability if some token has probability zero.
double perplexity(std::span<const TokenId> text, const LogitsSource& source);

struct TrialRecord {
  std::string method;  // "dynamic" or "fixed:<len>"
  double alpha = 0.0;
  double delta = 0.0;
  std::string attack;  // "none" or AttackSpec::label()
  std::size_t trial = 0;
  std::size_t bits_sent = 0;
  std::size_t bits_correct = 0;
  std::size_t bits_embedded = 0;
  // Tokens spent on the message (padding excluded).
  std::size_t tokens_used = 0;
  std::size_t text_len = 0;
  double perplexity = 0.0;
  double embed_ms = 0.0;
  double extract_ms = 0.0;
};

struct Aggregate {
  std::string method;
  double alpha = 0.0;
  double delta = 0.0;
  std::string attack;
  std::size_t trials = 0;
  double detection_rate = 0.0;    // mean per-bit accuracy
  double exact_match_rate = 0.0;  // whole message recovered
  double tokens_per_bit = 0.0;    // mean of tokens_used / bits_sent
  double completion_rate = 0.0;   // bits_embedded == bits_sent
  double mean_perplexity = 0.0;
  double embed_ms_p50 = 0.0;
  double embed_ms_p90 = 0.0;
  double extract_ms_p50 = 0.0;
  double extract_ms_p90 = 0.0;

  bool operator==(const Aggregate&) const = default;
};

// Aggregate of a group of records; group labels are taken from the first.
Aggregate aggregate(std::span<const TrialRecord> records);

struct EvalReport {
  std::vector<TrialRecord> records;
  std::vector<Aggregate> aggregates;

  // Rebuilds aggregates from records, grouping on (method, alpha, delta,
  // attack) in first-seen order.
  void recompute_aggregates();
};

struct SweepSpec {
  std::vector<double> alphas = {0.9};
  std::vector<double> deltas = {2.0};
  std::size_t trials = 10;
  std::size_t message_bits = 8;
  std::size_t max_tokens = 200;
  std::size_t prompt_len = 8;
  double beta = 14.0;
  double repetition_penalty = 1.0;
  std::uint64_t seed = 0;
  std::string key = "segmark-default-key";
  SourceDescriptor source;
  std::optional<SourceDescriptor> eval_source;
  std::vector<AttackSpec> attacks;
  // 0 disables the fixed-length baseline rows.
  std::size_t baseline_seg_len = 0;
  bool record_timing = true;

  void validate() const;
};

// Seeds for trial i derive only from (spec.seed, i): prompt, message and
// sampling seed are shared across every alpha, delta, method and attack.
struct TrialSeeds {
  std::uint64_t prompt;
  std::uint64_t message;
  std::uint64_t sampling;
  std::uint64_t attack;
};
TrialSeeds trial_seeds(std::uint64_t base, std::size_t trial);

EvalReport capacity_sweep(const SweepSpec& spec);

void write_csv(std::ostream& out, const EvalReport& report);
void write_table(std::ostream& out, const EvalReport& report);

struct TimingWorkload {
  SourceDescriptor source;
  std::vector<std::size_t> lengths;
  std::size_t message_bits = 8;
  std::size_t repeats = 5;
  std::size_t warmup = 1;
  double alpha = 0.9;
  double delta = 2.0;
  std::string key = "segmark-default-key";
};

struct TimingRow {
  std::size_t tokens = 0;
  double raw_ms = 0.0;
  double watermark_ms = 0.0;
  double extract_ms = 0.0;
};

struct TimingReport {
  std::vector<TimingRow> rows;
};

// Median wall times; warm-up runs are discarded. Empty lengths give an empty
// report.
TimingReport timing_harness(const TimingWorkload& workload);

// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

double median(std::vector<double> values);
double percentile(std::vector<double> values, double q);

}  // namespace segmark
