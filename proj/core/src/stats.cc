// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#include "segmark/stats.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "segmark/error.h"

namespace segmark {

const char* to_string(Orientation o) {
  return o == Orientation::kCoherent ? "coherent" : "literal";
}

Orientation parse_orientation(const std::string& name) {
  if (name == "coherent") return Orientation::kCoherent;
  if (name == "literal") return Orientation::kLiteral;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown inequality orientation '" + name + "'");
}

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

void SegmentStats::push(double expected_desired, Color color) {
  mu_.add(expected_desired);
  var_.add(expected_desired - expected_desired * expected_desired);
  ++n_;
  if (color == Color::kGreen) {
    ++green_;
  } else {
    ++red_;
  }
}

void SegmentStats::push(const StepStat& step) {
  push(step.expected_desired, step.color);
}

double SegmentStats::var() const noexcept {
  return std::max(0.0, var_.value());
}

SegmentStats segment_stats_push(SegmentStats stats, const StepStat& step) {
  stats.push(step);
  return stats;
}

double ConfidenceConfig::default_lambda(double alpha) {
  const double z = normal_quantile(alpha);
  return alpha * z * z;
}

ConfidenceConfig ConfidenceConfig::with_alpha(double alpha, double delta) {
  ConfidenceConfig cfg;
  cfg.alpha = alpha;
  cfg.delta = delta;
  cfg.lambda = default_lambda(alpha);
  return cfg;
}

void ConfidenceConfig::validate() const {
  if (!(alpha > 0.5 && alpha < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in (0.5, 1)");
  }
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorCode::kInvalidArgument, "delta must be finite and >= 0");
  }
  if (!(lambda > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "lambda must be > 0");
  }
  if (!(beta >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "beta must be >= 0");
  }
}

double green_mass(std::span<const double> logits,
                  const ColorPartition& partition) {
  if (logits.size() != partition.vocab_size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "logits and partition sizes differ");
  }
  const double max = *std::max_element(logits.begin(), logits.end());
  double green = 0.0;
  double total = 0.0;
  const auto mask = partition.mask();
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double e = std::exp(logits[i] - max);
    total += e;
    if (mask[i]) green += e;
  }
  return green / total;
}

double biased_mass(double p, double delta) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  const double scaled = std::exp(delta) * p;
  return scaled / (scaled + (1.0 - p));
}

Prior prior_estimate(std::size_t green_count, std::size_t red_count,
                     double lambda) {
  const double denom =
      static_cast<double>(green_count + red_count) + 2.0 * lambda;
  const double p1 = (static_cast<double>(green_count) + lambda) / denom;
  return {p1, 1.0 - p1};
}

double expected_desired(double p_green, double delta, Prior prior) {
  return prior.p1 * biased_mass(p_green, delta) +
         prior.p0 * biased_mass(1.0 - p_green, delta);
}

bool boundary_satisfied(const SegmentStats& stats, const ConfidenceConfig& cfg) {
  if (stats.n() == 0) return false;
  const double margin = stats.mu() - 0.5 * static_cast<double>(stats.n());
  const double var = stats.var();
  if (cfg.orientation == Orientation::kLiteral) {
    // quantile(1 - alpha) <= -margin / sigma
    if (var <= 0.0) return margin < 0.0;
    return normal_quantile(1.0 - cfg.alpha) <= -margin / std::sqrt(var);
  }
  if (var <= 0.0) return margin > 0.0;
  return margin >= normal_quantile(cfg.alpha) * std::sqrt(var);
}

double f_statistic(const SegmentStats& stats) {
  const double var = stats.var();
  const double margin = stats.mu() - 0.5 * static_cast<double>(stats.n());
  if (var <= 0.0) return std::numeric_limits<double>::infinity();
  return margin * margin / var;
}

double seg_loss(const SegmentStats& stats, const ConfidenceConfig& cfg) {
  const double f = std::min(f_statistic(stats), kFStatisticCap);
  const double z = normal_quantile(cfg.alpha);
  const double r = f - z * z - cfg.eps_s;
  return r * r;
}

double color_loss(const SegmentStats& stats, const ConfidenceConfig& cfg) {
  if (stats.n() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "color_loss of empty segment");
  }
  const double minority = static_cast<double>(
      std::min(stats.green_count(), stats.red_count()));
  return std::abs(minority / static_cast<double>(stats.n()) - cfg.eps_d);
}

double segment_cost(const SegmentStats& stats, const ConfidenceConfig& cfg) {
  return cfg.beta * seg_loss(stats, cfg) + color_loss(stats, cfg);
}

double total_loss(std::span<const SegmentStats> segments,
                  const ConfidenceConfig& cfg) {
  if (segments.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "total_loss of empty segmentation");
  }
  double total = 0.0;
  for (const auto& s : segments) total += segment_cost(s, cfg);
  return total;
}

}  // namespace segmark
