// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#include "segmark/extractor.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "segmark/error.h"

namespace segmark {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// f and minority fraction for every range; independent of the epsilons so the
// iteration reuses it.
class RangeTable {
 public:
  RangeTable(const ScoredText& scored, const ConfidenceConfig& cfg,
             std::size_t min_len)
      : n_(scored.size()),
        min_len_(min_len),
        f_((n_ + 1) * (n_ + 1), kInf),
        minority_((n_ + 1) * (n_ + 1), 0.0) {
    std::vector<double> boost_green(n_), boost_red(n_);
    for (std::size_t t = 0; t < n_; ++t) {
      boost_green[t] = biased_mass(scored.p_green[t], cfg.delta);
      boost_red[t] = biased_mass(1.0 - scored.p_green[t], cfg.delta);
    }
    for (std::size_t a = 0; a < n_; ++a) {
      SegmentStats stats;
      for (std::size_t b = a + 1; b <= n_; ++b) {
        const std::size_t t = b - 1;
        const Prior prior =
            prior_estimate(stats.green_count(), stats.red_count(), cfg.lambda);
        stats.push(prior.p1 * boost_green[t] + prior.p0 * boost_red[t],
                   scored.colors[t]);
        if (b - a < min_len_) continue;
        f_[idx(a, b)] = std::min(f_statistic(stats), kFStatisticCap);
        minority_[idx(a, b)] =
            static_cast<double>(std::min(stats.green_count(), stats.red_count())) /
            static_cast<double>(stats.n());
      }
    }
  }

  CostMatrix costs(const ConfidenceConfig& cfg) const {
    CostMatrix m(n_, min_len_);
    const double z = normal_quantile(cfg.alpha);
    for (std::size_t a = 0; a < n_; ++a) {
      for (std::size_t b = a + min_len_; b <= n_; ++b) {
        const double r = f_[idx(a, b)] - z * z - cfg.eps_s;
        m.at(a, b) =
            cfg.beta * (r * r) + std::abs(minority_[idx(a, b)] - cfg.eps_d);
      }
    }
    return m;
  }

 private:
  std::size_t idx(std::size_t a, std::size_t b) const { return a * (n_ + 1) + b; }

  std::size_t n_;
  std::size_t min_len_;
  std::vector<double> f_;
  std::vector<double> minority_;
};

// Prefix counts of green colors for O(1) range majorities.
std::vector<std::size_t> green_prefix(const ScoredText& scored) {
  std::vector<std::size_t> prefix(scored.size() + 1, 0);
  for (std::size_t i = 0; i < scored.size(); ++i) {
    prefix[i + 1] = prefix[i] + (scored.colors[i] == Color::kGreen ? 1 : 0);
  }
  return prefix;
}

// +1 green majority, -1 red majority, 0 tie or empty.
int majority(const std::vector<std::size_t>& prefix, std::size_t a,
             std::size_t b) {
  const auto green = prefix[b] - prefix[a];
  const auto red = (b - a) - green;
  return green > red ? 1 : (red > green ? -1 : 0);
}

Segmentation backtrack(const DpTable& dp, std::size_t k, std::size_t end) {
  Segmentation seg;
  seg.loss = dp.L(k, end);
  seg.ends.resize(k);
  std::size_t b = end;
  for (std::size_t t = k; t >= 1; --t) {
    seg.ends[t - 1] = b;
    b = dp.prev(t, b);
  }
  return seg;
}

std::vector<SegmentStats> stats_for(const ScoredText& scored,
                                    const std::vector<std::size_t>& ends,
                                    const ConfidenceConfig& cfg) {
  std::vector<SegmentStats> out;
  out.reserve(ends.size());
  std::size_t a = 0;
  for (std::size_t end : ends) {
    out.push_back(range_stats(scored, a, end, cfg));
    a = end;
  }
  return out;
}

}  // namespace

double ExtractConfig::effective_lambda() const {
  return lambda.value_or(ConfidenceConfig::default_lambda(alpha));
}

ConfidenceConfig ExtractConfig::confidence(double eps_s, double eps_d) const {
  ConfidenceConfig c;
  c.alpha = alpha;
  c.delta = delta;
  c.lambda = effective_lambda();
  c.beta = beta;
  c.eps_s = eps_s;
  c.eps_d = eps_d;
  return c;
}

void ExtractConfig::validate() const {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (!(epsilon_tol > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon_tol must be > 0");
  }
  if (max_epsilon_iters < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_epsilon_iters must be >= 1");
  }
  if (min_segment_len < 1) {
    throw Error(ErrorCode::kInvalidArgument, "min_segment_len must be >= 1");
  }
  if (!(repetition_penalty >= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "repetition_penalty must be >= 1");
  }
  if (!(padding_penalty >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "padding_penalty must be >= 0");
  }
  confidence().validate();
}

std::vector<Color> color_text(std::span<const TokenId> text,
                              const SecretKey& key, std::size_t vocab_size) {
  validate_ids(text, vocab_size);
  ColorOracle oracle(key, vocab_size);
  std::vector<Color> colors;
  if (text.size() < 2) return colors;
  colors.reserve(text.size() - 1);
  for (std::size_t t = 1; t < text.size(); ++t) {
    colors.push_back(oracle.color(text[t - 1], text[t]));
  }
  return colors;
}

ScoredText score_text(std::span<const TokenId> text, const LogitsSource& source,
                      const SecretKey& key, double repetition_penalty) {
  const std::size_t vocab = source.vocab_size();
  validate_ids(text, vocab);
  ScoredText scored;
  if (text.size() < 2) return scored;
  const auto logits = teacher_force(source, text);
  ColorOracle oracle(key, vocab);
  scored.p_green.reserve(text.size() - 1);
  scored.colors.reserve(text.size() - 1);
  for (std::size_t t = 1; t < text.size(); ++t) {
    const auto& partition = oracle.partition(text[t - 1]);
    if (repetition_penalty != 1.0) {
      scored.p_green.push_back(green_mass(
          apply_repetition_penalty(logits[t - 1], text.first(t), repetition_penalty),
          partition));
    } else {
      scored.p_green.push_back(green_mass(logits[t - 1], partition));
    }
    scored.colors.push_back(partition.color(text[t]));
  }
  return scored;
}

SegmentStats range_stats(const ScoredText& scored, std::size_t a, std::size_t b,
                         const ConfidenceConfig& cfg) {
  if (a > b || b > scored.size()) {
    throw Error(ErrorCode::kOutOfRange, "segment range out of bounds");
  }
  SegmentStats stats;
  for (std::size_t t = a; t < b; ++t) {
    const Prior prior =
        prior_estimate(stats.green_count(), stats.red_count(), cfg.lambda);
    stats.push(expected_desired(scored.p_green[t], cfg.delta, prior),
               scored.colors[t]);
  }
  return stats;
}

CostMatrix::CostMatrix(std::size_t n, std::size_t min_segment_len)
    : n_(n), min_len_(min_segment_len), cost_((n + 1) * (n + 1), kInf) {
  if (min_len_ < 1) {
    throw Error(ErrorCode::kInvalidArgument, "min_segment_len must be >= 1");
  }
}

CostMatrix build_costs(const ScoredText& scored, const ConfidenceConfig& cfg,
                       std::size_t min_segment_len) {
  return RangeTable(scored, cfg, min_segment_len).costs(cfg);
}

DpTable dp_forward(const CostMatrix& costs, std::size_t k) {
  DpTable dp;
  dp.k = k;
  dp.n = costs.n();
  const std::size_t n = dp.n;
  const std::size_t m = costs.min_segment_len();
  dp.loss.assign((k + 1) * (n + 1), kInf);
  dp.start.assign((k + 1) * (n + 1), 0);
  dp.loss[0] = 0.0;
  for (std::size_t t = 1; t <= k; ++t) {
    const double* prev_row = &dp.loss[(t - 1) * (n + 1)];
    for (std::size_t b = t * m; b <= n; ++b) {
      double best = kInf;
      std::size_t arg = 0;
      for (std::size_t a = (t - 1) * m; a + m <= b; ++a) {
        if (prev_row[a] == kInf) continue;
        const double v = prev_row[a] + costs(a, b);
        if (v < best) {
          best = v;
          arg = a;
        }
      }
      dp.loss[t * (n + 1) + b] = best;
      dp.start[t * (n + 1) + b] = arg;
    }
  }
  return dp;
}

Segmentation dp_segment(const CostMatrix& costs, std::size_t k,
                        std::size_t n_effective) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (n_effective > costs.n()) {
    throw Error(ErrorCode::kOutOfRange, "n_effective exceeds cost matrix");
  }
  if (n_effective < k * costs.min_segment_len()) {
    throw Error(ErrorCode::kInfeasible,
                "cannot split " + std::to_string(n_effective) +
                    " positions into " + std::to_string(k) + " segments");
  }
  const DpTable dp = dp_forward(costs, k);
  return backtrack(dp, k, n_effective);
}

PaddingChoice identify_padding(const CostMatrix& costs, const ScoredText& scored,
                               std::size_t k, double padding_penalty) {
  const std::size_t n = costs.n();
  if (n < k * costs.min_segment_len()) {
    throw Error(ErrorCode::kInfeasible, "text too short for k segments");
  }
  const DpTable dp = dp_forward(costs, k);
  const auto prefix = green_prefix(scored);

  PaddingChoice best;
  best.combined_loss = kInf;
  for (std::size_t p = k * costs.min_segment_len(); p <= n; ++p) {
    const double loss = dp.L(k, p);
    if (loss == kInf) continue;
    double combined = loss;
    if (p < n) {
      const int last = majority(prefix, dp.prev(k, p), p);
      const int pad = majority(prefix, p, n);
      const bool opposed = last != 0 && pad != 0 && last != pad;
      if (!opposed) combined += padding_penalty;
    }
    if (combined < best.combined_loss) {
      best.combined_loss = combined;
      best.padding_start = p;
    }
  }
  best.segmentation = backtrack(dp, k, best.padding_start);
  return best;
}

Epsilons update_epsilons(std::span<const SegmentStats> segments, double alpha) {
  if (segments.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "update_epsilons needs segments");
  }
  const double z = normal_quantile(alpha);
  double s = 0.0;
  double d = 0.0;
  for (const auto& seg : segments) {
    s += std::min(f_statistic(seg), kFStatisticCap) - z * z;
    d += static_cast<double>(std::min(seg.green_count(), seg.red_count())) /
         static_cast<double>(seg.n());
  }
  const auto count = static_cast<double>(segments.size());
  return {s / count, d / count};
}

std::uint8_t read_bit(const SegmentStats& stats) {
  return stats.green_count() > stats.red_count() ? 1 : 0;
}

ExtractionResult extract_scored(const ScoredText& scored,
                                const ExtractConfig& cfg) {
  cfg.validate();
  const std::size_t n = scored.size();
  if (n < cfg.k * cfg.min_segment_len) {
    throw Error(ErrorCode::kInfeasible,
                "text has " + std::to_string(n) + " scoreable tokens, need " +
                    std::to_string(cfg.k * cfg.min_segment_len) + " for k = " +
                    std::to_string(cfg.k));
  }

  const RangeTable table(scored, cfg.confidence(), cfg.min_segment_len);

  struct Iterate {
    PaddingChoice choice;
    std::vector<SegmentStats> stats;
    Epsilons eps;
    double loss = kInf;
  };
  Iterate best;
  ExtractionResult result;
  Epsilons eps;

  for (std::size_t iter = 1; iter <= cfg.max_epsilon_iters; ++iter) {
    const ConfidenceConfig conf = cfg.confidence(eps.eps_s, eps.eps_d);
    const CostMatrix costs = table.costs(conf);
    PaddingChoice choice;
    if (cfg.detect_padding) {
      choice = identify_padding(costs, scored, cfg.k, cfg.padding_penalty);
    } else {
      choice.padding_start = n;
      choice.segmentation = dp_segment(costs, cfg.k, n);
      choice.combined_loss = choice.segmentation.loss;
    }
    auto stats = stats_for(scored, choice.segmentation.ends, conf);
    const double loss = total_loss(stats, conf);
    result.loss_history.push_back(loss);
    result.iterations = iter;
    if (loss < best.loss) {
      best = {choice, stats, eps, loss};
    }

    const Epsilons next = update_epsilons(stats, cfg.alpha);
    const bool converged = std::abs(next.eps_s - eps.eps_s) < cfg.epsilon_tol &&
                           std::abs(next.eps_d - eps.eps_d) < cfg.epsilon_tol;
    eps = next;
    if (converged) {
      result.converged = true;
      break;
    }
  }

  const ConfidenceConfig conf = cfg.confidence(best.eps.eps_s, best.eps.eps_d);
  result.eps_s = best.eps.eps_s;
  result.eps_d = best.eps.eps_d;
  result.total_loss = best.loss;
  result.padding_start = best.choice.padding_start + 1;
  for (std::size_t i = 0; i < best.stats.size(); ++i) {
    const auto& s = best.stats[i];
    result.bits.push_back(read_bit(s));
    result.segmentation.push_back(best.choice.segmentation.ends[i] + 1);
    result.per_segment.push_back(
        {seg_loss(s, conf), color_loss(s, conf), s.green_count(), s.red_count()});
  }
  return result;
}

ExtractionResult extract(std::span<const TokenId> text, const ExtractConfig& cfg,
                         const LogitsSource& source, const SecretKey& key) {
  cfg.validate();
  return extract_scored(score_text(text, source, key, cfg.repetition_penalty), cfg);
}

ExtractionResult naive_extract_scored(const ScoredText& scored,
                                      const ExtractConfig& cfg) {
  cfg.validate();
  const ConfidenceConfig conf = cfg.confidence();
  ExtractionResult result;
  SegmentStats segment;
  auto close = [&](std::size_t end) {
    result.bits.push_back(read_bit(segment));
    result.segmentation.push_back(end + 1);
    result.per_segment.push_back({seg_loss(segment, conf),
                                  color_loss(segment, conf),
                                  segment.green_count(), segment.red_count()});
    segment = SegmentStats();
  };
  std::size_t t = 0;
  for (; t < scored.size() && result.bits.size() < cfg.k; ++t) {
    const Prior prior =
        prior_estimate(segment.green_count(), segment.red_count(), conf.lambda);
    segment.push(expected_desired(scored.p_green[t], conf.delta, prior),
                 scored.colors[t]);
    if (boundary_satisfied(segment, conf)) close(t + 1);
  }
  if (result.bits.size() < cfg.k && segment.n() > 0) close(t);
  result.padding_start = (result.segmentation.empty() ? 0 : result.segmentation.back());
  while (result.bits.size() < cfg.k) result.bits.push_back(0);
  result.iterations = 1;
  return result;
}

ExtractionResult naive_extract(std::span<const TokenId> text,
                               const ExtractConfig& cfg,
                               const LogitsSource& source, const SecretKey& key) {
  cfg.validate();
  return naive_extract_scored(
      score_text(text, source, key, cfg.repetition_penalty), cfg);
}

}  // namespace segmark
