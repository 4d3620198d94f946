// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "segmark/color_oracle.h"

namespace segmark {

// Which way the segment-closing inequality is read.
//
// kCoherent: close when P(T > 1/2) >= alpha, i.e.
//            (mu - n/2) >= quantile(alpha) * sigma.
// kLiteral:  the mirrored reading,
//            quantile(1 - alpha) <= (n/2 - mu) / sigma. It accepts
//            segments whose desired fraction is *below* 1/2 and exists only
//            for comparison.
enum class Orientation { kCoherent, kLiteral };

const char* to_string(Orientation o);
Orientation parse_orientation(const std::string& name);

struct StepStat {
  double p_green = 0.5;
  double expected_desired = 0.5;
  Color color = Color::kRed;

  bool operator==(const StepStat&) const = default;
};

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Running statistics of one segment: mu = sum E[P'], var = sum E[P'](1 -
/// E[P']), plus color counts.
class SegmentStats {
 public:
  void push(const StepStat& step);
  void push(double expected_desired, Color color);

  double mu() const noexcept { return mu_.value(); }
  double var() const noexcept;
  std::size_t n() const noexcept { return n_; }
  std::size_t green_count() const noexcept { return green_; }
  std::size_t red_count() const noexcept { return red_; }

 private:
  CompensatedSum mu_;
  CompensatedSum var_;
  std::size_t n_ = 0;
  std::size_t green_ = 0;
  std::size_t red_ = 0;
};

SegmentStats segment_stats_push(SegmentStats stats, const StepStat& step);

struct ConfidenceConfig {
  double alpha = 0.9;
  double delta = 2.0;
  double lambda = 0.0;
  double beta = 14.0;
  double eps_s = 0.0;
  double eps_d = 0.0;
  Orientation orientation = Orientation::kCoherent;

  // lambda = alpha * quantile(alpha)^2
  static double default_lambda(double alpha);
  static ConfidenceConfig with_alpha(double alpha, double delta);

  void validate() const;
};

// sum_{i in G} e^{l_i} / sum_i e^{l_i}.
double green_mass(std::span<const double> logits,
                  const ColorPartition& partition);

// Probability of the favored color after adding delta to its logits, given
// its unbiased mass p.
double biased_mass(double p, double delta);

struct Prior {
  double p1;  // P(bit = 1)
  double p0;  // P(bit = 0)
};

// (G + lambda) / (n + 2 lambda), (R + lambda) / (n + 2 lambda).
Prior prior_estimate(std::size_t green_count, std::size_t red_count,
                     double lambda);

// p1 * biased_mass(p_green) + p0 * biased_mass(1 - p_green).
double expected_desired(double p_green, double delta, Prior prior);

// Standard normal CDF via erfc.
double normal_cdf(double z);
// Inverse of normal_cdf; q must lie in (0, 1).
double normal_quantile(double q);

bool boundary_satisfied(const SegmentStats& stats, const ConfidenceConfig& cfg);

// Value used for f when the segment variance is zero.
inline constexpr double kFStatisticCap = 1e6;

// (mu - n/2)^2 / var. Returns +infinity when var == 0.
double f_statistic(const SegmentStats& stats);

// (min(f, cap) - quantile(alpha)^2 - eps_s)^2
double seg_loss(const SegmentStats& stats, const ConfidenceConfig& cfg);

// |min(G, R) / n - eps_d|
double color_loss(const SegmentStats& stats, const ConfidenceConfig& cfg);

// beta * seg_loss + color_loss for one segment.
double segment_cost(const SegmentStats& stats, const ConfidenceConfig& cfg);

// Sum of segment_cost over a non-empty segmentation.
double total_loss(std::span<const SegmentStats> segments,
                  const ConfidenceConfig& cfg);

}  // namespace segmark
