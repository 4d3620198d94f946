// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "segmark/color_oracle.h"
#include "segmark/lm.h"
#include "segmark/stats.h"

namespace segmark {

// Extraction works on "scoreable" positions: text positions 1..N-1. Position
// 0 has no known predecessor (the prompt is not available) and is excluded
// from every statistic. Scoreable index j corresponds to text position j + 1.

struct ExtractConfig {
  std::size_t k = 1;
  double alpha = 0.9;
  double delta = 2.0;
  std::optional<double> lambda;
  double beta = 14.0;
  std::size_t max_epsilon_iters = 10;
  double epsilon_tol = 1e-3;
  std::size_t min_segment_len = 1;
  double repetition_penalty = 1.0;
  // Added when the padding majority does not oppose the last segment's.
  double padding_penalty = 14.0;
  bool detect_padding = true;

  double effective_lambda() const;
  ConfidenceConfig confidence(double eps_s = 0.0, double eps_d = 0.0) const;
  void validate() const;
};

// Colors of text positions 1..N-1 (index j is position j + 1).
std::vector<Color> color_text(std::span<const TokenId> text,
                              const SecretKey& key, std::size_t vocab_size);

// Per scoreable position: green mass under teacher forcing and observed color.
struct ScoredText {
  std::vector<double> p_green;
  std::vector<Color> colors;

  std::size_t size() const noexcept { return colors.size(); }
};

ScoredText score_text(std::span<const TokenId> text, const LogitsSource& source,
                      const SecretKey& key, double repetition_penalty);

// Statistics of scoreable range [a, b) with smoothed color priors accumulated
// left to right from a.
SegmentStats range_stats(const ScoredText& scored, std::size_t a, std::size_t b,
                         const ConfidenceConfig& cfg);

/// cost(a, b) = beta * seg_loss + color_loss of scoreable range [a, b).
/// Entries with b - a < min_segment_len are +infinity.
class CostMatrix {
 public:
  CostMatrix(std::size_t n, std::size_t min_segment_len);

  std::size_t n() const noexcept { return n_; }
  std::size_t min_segment_len() const noexcept { return min_len_; }
  double operator()(std::size_t a, std::size_t b) const {
    return cost_[a * (n_ + 1) + b];
  }
  double& at(std::size_t a, std::size_t b) { return cost_[a * (n_ + 1) + b]; }

 private:
  std::size_t n_;
  std::size_t min_len_;
  std::vector<double> cost_;
};

// O(N^2): one left-to-right pass per start position.
CostMatrix build_costs(const ScoredText& scored, const ConfidenceConfig& cfg,
                       std::size_t min_segment_len);

// Forward DP tables for every prefix length. loss[t][b] is the minimum cost
// of splitting [0, b) into t segments; start[t][b] is the start of the last
// of those segments.
struct DpTable {
  std::size_t k = 0;
  std::size_t n = 0;
  std::vector<double> loss;
  std::vector<std::size_t> start;

  double L(std::size_t t, std::size_t b) const { return loss[t * (n + 1) + b]; }
  std::size_t prev(std::size_t t, std::size_t b) const {
    return start[t * (n + 1) + b];
  }
};

DpTable dp_forward(const CostMatrix& costs, std::size_t k);

struct Segmentation {
  // Exclusive ends of each segment; the first segment starts at 0.
  std::vector<std::size_t> ends;
  double loss = 0.0;
};

// Minimum-loss split of [0, n_effective) into exactly k segments. Ties go to
// the smallest last-segment start. Throws kInfeasible if
// n_effective < k * min_segment_len.
Segmentation dp_segment(const CostMatrix& costs, std::size_t k,
                        std::size_t n_effective);

struct PaddingChoice {
  // Scoreable index where padding begins; equals n when there is none.
  std::size_t padding_start = 0;
  Segmentation segmentation;
  double combined_loss = 0.0;
};

// Joint choice of padding start p and the k-segmentation of [0, p). Every p
// comes from a single DP pass: combined(p) = L[k][p] plus padding_penalty if
// the color majority of [p, n) does not oppose that of the last segment.
PaddingChoice identify_padding(const CostMatrix& costs, const ScoredText& scored,
                               std::size_t k, double padding_penalty);

struct Epsilons {
  double eps_s = 0.0;
  double eps_d = 0.0;
};

// Means over segments of f - quantile(alpha)^2 and min(G, R) / n.
Epsilons update_epsilons(std::span<const SegmentStats> segments, double alpha);

struct SegmentReport {
  double seg_loss = 0.0;
  double color_loss = 0.0;
  std::size_t green_count = 0;
  std::size_t red_count = 0;

  bool operator==(const SegmentReport&) const = default;
};

struct ExtractionResult {
  std::vector<std::uint8_t> bits;
  // Exclusive segment ends in text coordinates; segment 0 starts at 1.
  std::vector<std::size_t> segmentation;
  // Text coordinate of the first padding token (== text length if none).
  std::size_t padding_start = 0;
  double total_loss = 0.0;
  double eps_s = 0.0;
  double eps_d = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<SegmentReport> per_segment;
  // Loss of each iterate, in iteration order.
  std::vector<double> loss_history;

  bool operator==(const ExtractionResult&) const = default;
};

// 1 iff strictly more green than red.
std::uint8_t read_bit(const SegmentStats& stats);

ExtractionResult extract(std::span<const TokenId> text, const ExtractConfig& cfg,
                         const LogitsSource& source, const SecretKey& key);

// Same as extract but on precomputed scores.
ExtractionResult extract_scored(const ScoredText& scored,
                                const ExtractConfig& cfg);

/// Baseline that replays the embedding-time closing rule on the given text
/// and reads the first k closed segments. A trailing unclosed segment is read
/// by majority; bits with no segment at all read as 0.
ExtractionResult naive_extract(std::span<const TokenId> text,
                               const ExtractConfig& cfg,
                               const LogitsSource& source, const SecretKey& key);
ExtractionResult naive_extract_scored(const ScoredText& scored,
                                      const ExtractConfig& cfg);

}  // namespace segmark
