// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "segmark/attacks.h"
#include "segmark/error.h"
#include "segmark/eval.h"
#include "segmark/synthetic_source.h"

namespace segmark {
namespace {

const SecretKey& key() {
  static const SecretKey k = SecretKey::from_string("attacks-eval-key");
  return k;
}

std::vector<TokenId> ramp(std::size_t n) {
  std::vector<TokenId> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<TokenId>(i % 64);
  return v;
}

TEST(Attacks, CountsFollowRate) {
  EXPECT_EQ(attack_count(100, 0.1), 10u);
  EXPECT_EQ(attack_count(200, 0.05), 10u);
  EXPECT_EQ(attack_count(7, 0.0), 0u);
  const auto text = ramp(100);
  EXPECT_EQ(insert_attack(text, 64, {AttackKind::kInsert, 0.1, 1}).size(), 110u);
  EXPECT_EQ(delete_attack(ramp(200), {AttackKind::kDelete, 0.05, 1}).size(), 190u);
}

TEST(Attacks, RateZeroIsIdentity) {
  const auto text = ramp(50);
  EXPECT_EQ(insert_attack(text, 64, {AttackKind::kInsert, 0.0, 3}), text);
  EXPECT_EQ(delete_attack(text, {AttackKind::kDelete, 0.0, 3}), text);
}

TEST(Attacks, SeededAndDeterministic) {
  const auto text = ramp(200);
  for (AttackKind kind : {AttackKind::kInsert, AttackKind::kDelete}) {
    const AttackSpec a{kind, 0.1, 42};
    const AttackSpec b{kind, 0.1, 43};
    EXPECT_EQ(apply_attack(text, 64, a), apply_attack(text, 64, a));
    EXPECT_NE(apply_attack(text, 64, a), apply_attack(text, 64, b));
  }
}

TEST(Attacks, DeletionKeepsOrderOfSurvivors) {
  std::vector<TokenId> text(300);
  std::iota(text.begin(), text.end(), 0u);
  const auto out = delete_attack(text, {AttackKind::kDelete, 0.1, 5});
  EXPECT_EQ(out.size(), 270u);
  EXPECT_TRUE(std::is_sorted(out.begin(), out.end()));
}

TEST(Attacks, InsertionKeepsOriginalAsSubsequence) {
  const auto text = ramp(120);
  const auto out = insert_attack(text, 64, {AttackKind::kInsert, 0.2, 9});
  std::size_t j = 0;
  for (TokenId t : out) {
    if (j < text.size() && t == text[j]) ++j;
  }
  EXPECT_EQ(j, text.size());
}

TEST(Attacks, OutputIdsStayInVocabulary) {
  const SyntheticSource src({64, 0.5, 1, 2});
  const auto text = ramp(200);
  for (std::uint64_t s = 0; s < 20; ++s) {
    EXPECT_NO_THROW(validate_ids(insert_attack(text, 64, {AttackKind::kInsert, 0.1, s}), 64));
    AttackSpec p{AttackKind::kInsert, 0.1, s, InsertionMode::kPlausible};
    EXPECT_NO_THROW(validate_ids(insert_attack(text, 64, p, &src), 64));
  }
}

TEST(Attacks, Validation) {
  EXPECT_THROW((AttackSpec{AttackKind::kDelete, 1.0, 0}.validate()), Error);
  EXPECT_THROW((AttackSpec{AttackKind::kDelete, -0.1, 0}.validate()), Error);
  const std::vector<TokenId> one = {1};
  EXPECT_THROW(delete_attack(one, {AttackKind::kDelete, 0.9, 0}), Error);
  const AttackSpec plausible{AttackKind::kInsert, 0.1, 0, InsertionMode::kPlausible};
  EXPECT_THROW(insert_attack(ramp(20), 64, plausible, nullptr), Error);
  EXPECT_EQ(parse_attack_kind("insert"), AttackKind::kInsert);
  EXPECT_THROW(parse_attack_kind("swap"), Error);
  EXPECT_EQ((AttackSpec{AttackKind::kDelete, 0.05, 0}.label()), "delete:0.05");
}

TEST(FixedLength, BoundariesEveryTenAndBlockReadout) {
  const SyntheticSource src({256, 1.0, 3, 2});
  EmbedConfig c;
  c.max_tokens = 60;
  const auto msg = WatermarkMessage::from_bit_string("10110");
  const auto out = fixed_length_embed(std::vector<TokenId>{9}, msg, 10, c, src, key());
  EXPECT_EQ(out.boundaries, (std::vector<std::size_t>{10, 20, 30, 40, 50}));
  const auto gen = out.text.generated();
  const auto r = fixed_length_extract(gen, 5, 10, key(), 256);
  ASSERT_EQ(r.bits.size(), 5u);
  EXPECT_EQ(r.segmentation, (std::vector<std::size_t>{10, 20, 30, 40, 50}));
  EXPECT_EQ(r.padding_start, 50u);
  EXPECT_EQ(r.per_segment[0].green_count + r.per_segment[0].red_count, 9u);
  EXPECT_EQ(r.per_segment[1].green_count + r.per_segment[1].red_count, 10u);
  for (std::size_t i = 0; i < 5; ++i) {
    const std::size_t lo = std::max<std::size_t>(i * 10, 1);
    int g = 0, red = 0;
    for (std::size_t t = lo; t < (i + 1) * 10; ++t) {
      (out.trace[t].color == Color::kGreen ? g : red)++;
    }
    EXPECT_EQ(r.bits[i], g > red ? 1 : 0);
  }
  try {
    fixed_length_extract(gen, 7, 10, key(), 256);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasible);
  }
  c.max_tokens = 30;
  EXPECT_FALSE(fixed_length_embed({}, msg, 10, c, src, key()).complete);
}

TEST(Perplexity, UniformSourceGivesVocabSize) {
  const SyntheticSource uni({64, SyntheticSource::kUniform, 0, 2});
  EXPECT_NEAR(perplexity(ramp(50), uni), 64.0, 1e-9);
  const std::vector<TokenId> one = {1};
  EXPECT_THROW(perplexity(one, uni), Error);
}

TEST(Perplexity, SampledTextBeatsRandomText) {
  const SyntheticSource src({64, 0.1, 4, 2});
  std::mt19937_64 gen(8);
  int wins = 0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    EmbedConfig c;
    c.max_tokens = 60;
    c.sampling_seed = t;
    const std::vector<TokenId> prompt = {static_cast<TokenId>(t % 64)};
    const auto sampled = generate_raw(prompt, c, src);
    std::vector<TokenId> random(sampled.ids.size());
    for (auto& x : random) x = static_cast<TokenId>(gen() % 64);
    wins += perplexity(sampled.ids, src) < perplexity(random, src);
  }
  EXPECT_GE(wins, 95);
}

TEST(Perplexity, ZeroDeltaEmbedHasRawPerplexity) {
  const SyntheticSource src({64, 0.3, 4, 2});
  EmbedConfig c;
  c.max_tokens = 80;
  c.delta = 0.0;
  const std::vector<TokenId> prompt = {2, 3};
  const auto w = embed(prompt, WatermarkMessage::from_bit_string("11"), c, src, key());
  EXPECT_EQ(perplexity(w.text.ids, src), perplexity(generate_raw(prompt, c, src).ids, src));
}

TEST(EvalStats, MedianPercentileSlope) {
  EXPECT_DOUBLE_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_DOUBLE_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  EXPECT_DOUBLE_EQ(percentile({0.0, 10.0}, 0.9), 9.0);
  const std::vector<double> x = {1, 2, 4, 8}, y = {3, 12, 48, 192};
  EXPECT_NEAR(loglog_slope(x, y), 2.0, 1e-12);
}

SweepSpec small_sweep() {
  SweepSpec s;
  s.alphas = {0.8, 0.9, 0.99};
  s.trials = 10;
  s.message_bits = 4;
  s.max_tokens = 80;
  s.source.vocab_size = 64;
  s.source.concentration = 1.0;
  s.seed = 5;
  s.record_timing = false;
  return s;
}

TEST(CapacitySweep, OneRecordForOneTrial) {
  SweepSpec s = small_sweep();
  s.alphas = {0.9};
  s.trials = 1;
  const auto r = capacity_sweep(s);
  ASSERT_EQ(r.records.size(), 1u);
  ASSERT_EQ(r.aggregates.size(), 1u);
  EXPECT_EQ(r.records[0].bits_sent, 4u);
  EXPECT_EQ(r.records[0].method, "dynamic");
  EXPECT_EQ(r.records[0].attack, "none");
}

TEST(CapacitySweep, AggregatesRecomputeAndCsvAccounts) {
  const auto r = capacity_sweep(small_sweep());
  ASSERT_EQ(r.records.size(), 30u);
  ASSERT_EQ(r.aggregates.size(), 3u);
  EvalReport copy = r;
  copy.aggregates.clear();
  copy.recompute_aggregates();
  EXPECT_EQ(copy.aggregates, r.aggregates);
  for (std::size_t g = 0; g < 3; ++g) {
    const auto group = std::span<const TrialRecord>(r.records).subspan(g * 10, 10);
    EXPECT_EQ(aggregate(group), r.aggregates[g]);
    double acc = 0;
    for (const auto& t : group) acc += double(t.bits_correct) / t.bits_sent;
    EXPECT_DOUBLE_EQ(r.aggregates[g].detection_rate, acc / 10);
  }
  std::ostringstream csv;
  write_csv(csv, r);
  std::istringstream in(csv.str());
  std::string line;
  int trial_rows = 0, agg_rows = 0, header = 0;
  while (std::getline(in, line)) {
    if (line.rfind("row,", 0) == 0) ++header;
    if (line.rfind("trial,", 0) == 0) ++trial_rows;
    if (line.rfind("aggregate,", 0) == 0) ++agg_rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 23);
  }
  EXPECT_EQ(header, 1);
  EXPECT_EQ(trial_rows, 30);
  EXPECT_EQ(agg_rows, 3);
  std::ostringstream table;
  write_table(table, r);
  EXPECT_NE(table.str().find("dynamic"), std::string::npos);
}

TEST(CapacitySweep, PairedSeedsAndBaselineRows) {
  SweepSpec s = small_sweep();
  s.alphas = {0.9};
  s.trials = 3;
  s.baseline_seg_len = 10;
  s.max_tokens = 60;
  s.attacks = {{AttackKind::kDelete, 0.05, 1}};
  const auto r = capacity_sweep(s);
  // methods x trials x (none + one attack)
  ASSERT_EQ(r.records.size(), 2u * 3u * 2u);
  EXPECT_EQ(r.aggregates.size(), 4u);
  EXPECT_EQ(capacity_sweep(s).records.size(), r.records.size());
  const auto a = trial_seeds(5, 2), b = trial_seeds(5, 2), c = trial_seeds(5, 3);
  EXPECT_EQ(a.sampling, b.sampling);
  EXPECT_NE(a.sampling, c.sampling);
  EXPECT_NE(a.prompt, a.message);
}

TEST(CapacitySweep, DeterministicWithoutTiming) {
  const auto a = capacity_sweep(small_sweep());
  const auto b = capacity_sweep(small_sweep());
  std::ostringstream x, y;
  write_csv(x, a);
  write_csv(y, b);
  EXPECT_EQ(x.str(), y.str());
}

TEST(CapacitySweep, Validation) {
  SweepSpec s = small_sweep();
  s.trials = 0;
  EXPECT_THROW(s.validate(), Error);
  s = small_sweep();
  s.alphas = {1.2};
  EXPECT_THROW(s.validate(), Error);
}

TEST(Timing, EmptyWorkloadGivesEmptyReport) {
  TimingWorkload w;
  EXPECT_TRUE(timing_harness(w).rows.empty());
}

TEST(Timing, OneRowPerLength) {
  TimingWorkload w;
  w.source.vocab_size = 32;
  w.lengths = {20, 40};
  w.repeats = 1;
  w.warmup = 0;
  w.message_bits = 2;
  const auto r = timing_harness(w);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[1].tokens, 40u);
  EXPECT_GT(r.rows[1].watermark_ms, 0.0);
}

}  // namespace
}  // namespace segmark
