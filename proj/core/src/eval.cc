// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#include "segmark/eval.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include "segmark/error.h"
#include "segmark/rng.h"

namespace segmark {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double mean_of(std::span<const TrialRecord> records,
               double (*field)(const TrialRecord&)) {
  double sum = 0.0;
  for (const auto& r : records) sum += field(r);
  return records.empty() ? 0.0 : sum / static_cast<double>(records.size());
}

std::vector<TokenId> random_ids(std::uint64_t seed, std::size_t n,
                                std::size_t vocab_size) {
  CounterRng rng(seed);
  std::vector<TokenId> ids(n);
  for (auto& id : ids) id = static_cast<TokenId>(rng.below(vocab_size));
  return ids;
}

WatermarkMessage random_message(std::uint64_t seed, std::size_t bits) {
  CounterRng rng(seed);
  std::vector<std::uint8_t> out(bits);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng.below(2));
  return WatermarkMessage(std::move(out));
}

std::string fixed_label(std::size_t seg_len) {
  return "fixed:" + std::to_string(seg_len);
}

std::size_t count_matches(const std::vector<std::uint8_t>& sent,
                          const std::vector<std::uint8_t>& got) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < sent.size() && i < got.size(); ++i) {
    hits += sent[i] == got[i] ? 1 : 0;
  }
  return hits;
}

}  // namespace

double perplexity(std::span<const TokenId> text, const LogitsSource& source) {
  if (text.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "perplexity needs at least two tokens");
  }
  const auto logits = teacher_force(source, text);
  CompensatedSum nll;
  for (std::size_t t = 1; t < text.size(); ++t) {
    const auto& row = logits[t - 1];
    const double lp = row[text[t]] - log_sum_exp(row);
    if (!std::isfinite(lp)) {
      throw Error(ErrorCode::kZeroProbability,
                  "token at position " + std::to_string(t) +
                      " has zero probability");
    }
    nll.add(-lp);
  }
  return std::exp(nll.value() / static_cast<double>(text.size() - 1));
}

Aggregate aggregate(std::span<const TrialRecord> records) {
  Aggregate a;
  if (records.empty()) return a;
  const auto& first = records.front();
  a.method = first.method;
  a.alpha = first.alpha;
  a.delta = first.delta;
  a.attack = first.attack;
  a.trials = records.size();
  a.detection_rate = mean_of(records, [](const TrialRecord& r) {
    return r.bits_sent == 0 ? 1.0
                            : static_cast<double>(r.bits_correct) /
                                  static_cast<double>(r.bits_sent);
  });
  a.exact_match_rate = mean_of(records, [](const TrialRecord& r) {
    return r.bits_correct == r.bits_sent ? 1.0 : 0.0;
  });
  a.tokens_per_bit = mean_of(records, [](const TrialRecord& r) {
    return r.bits_sent == 0 ? 0.0
                            : static_cast<double>(r.tokens_used) /
                                  static_cast<double>(r.bits_sent);
  });
  a.completion_rate = mean_of(records, [](const TrialRecord& r) {
    return r.bits_embedded == r.bits_sent ? 1.0 : 0.0;
  });
  a.mean_perplexity =
      mean_of(records, [](const TrialRecord& r) { return r.perplexity; });
  std::vector<double> embed_ms;
  std::vector<double> extract_ms;
  for (const auto& r : records) {
    embed_ms.push_back(r.embed_ms);
    extract_ms.push_back(r.extract_ms);
  }
  a.embed_ms_p50 = percentile(embed_ms, 0.5);
  a.embed_ms_p90 = percentile(embed_ms, 0.9);
  a.extract_ms_p50 = percentile(extract_ms, 0.5);
  a.extract_ms_p90 = percentile(extract_ms, 0.9);
  return a;
}

void EvalReport::recompute_aggregates() {
  using GroupKey = std::tuple<std::string, double, double, std::string>;
  std::vector<GroupKey> order;
  std::map<GroupKey, std::vector<TrialRecord>> groups;
  for (const auto& r : records) {
    GroupKey key{r.method, r.alpha, r.delta, r.attack};
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(r);
  }
  aggregates.clear();
  for (const auto& key : order) aggregates.push_back(aggregate(groups[key]));
}

void SweepSpec::validate() const {
  if (alphas.empty() || deltas.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "sweep needs alphas and deltas");
  }
  for (double a : alphas) ConfidenceConfig::with_alpha(a, 0.0).validate();
  for (double d : deltas) {
    if (!(d >= 0.0) || !std::isfinite(d)) {
      throw Error(ErrorCode::kInvalidArgument, "delta must be finite and >= 0");
    }
  }
  if (trials == 0) throw Error(ErrorCode::kInvalidArgument, "trials must be >= 1");
  if (message_bits == 0) {
    throw Error(ErrorCode::kInvalidArgument, "message_bits must be >= 1");
  }
  if (max_tokens < 2) {
    throw Error(ErrorCode::kInvalidArgument, "max_tokens must be >= 2");
  }
  if (repetition_penalty < 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "repetition_penalty must be >= 1");
  }
  source.validate();
  if (eval_source) eval_source->validate();
  for (const auto& a : attacks) a.validate();
}

TrialSeeds trial_seeds(std::uint64_t base, std::size_t trial) {
  const std::uint64_t root = mix64(base, trial);
  return {mix64(root, 1), mix64(root, 2), mix64(root, 3), mix64(root, 4)};
}

EvalReport capacity_sweep(const SweepSpec& spec) {
  spec.validate();
  const auto source = make_source(spec.source);
  const auto eval_source =
      spec.eval_source ? make_source(*spec.eval_source) : nullptr;
  const auto key = SecretKey::from_string(spec.key);
  const std::size_t vocab = source->vocab_size();

  std::vector<std::size_t> methods = {0};
  if (spec.baseline_seg_len > 0) methods.push_back(spec.baseline_seg_len);

  EvalReport report;
  for (double alpha : spec.alphas) {
    for (double delta : spec.deltas) {
      for (std::size_t seg_len : methods) {
        const std::string method = seg_len == 0 ? "dynamic" : fixed_label(seg_len);
        for (std::size_t trial = 0; trial < spec.trials; ++trial) {
          const auto seeds = trial_seeds(spec.seed, trial);
          const auto prompt = random_ids(seeds.prompt, spec.prompt_len, vocab);
          const auto message = random_message(seeds.message, spec.message_bits);
          EmbedConfig cfg;
          cfg.alpha = alpha;
          cfg.delta = delta;
          cfg.max_tokens = spec.max_tokens;
          cfg.sampling_seed = seeds.sampling;
          cfg.repetition_penalty = spec.repetition_penalty;

          auto start = Clock::now();
          const EmbedOutput out =
              seg_len == 0
                  ? embed(prompt, message, cfg, *source, key)
                  : fixed_length_embed(prompt, message, seg_len, cfg, *source, key);
          const double embed_ms = spec.record_timing ? elapsed_ms(start) : 0.0;
          const auto generated = out.text.generated();
          const std::vector<TokenId> gen(generated.begin(), generated.end());
          const double ppl =
              eval_source && gen.size() >= 2 ? perplexity(gen, *eval_source) : 0.0;
          const std::size_t tokens_used =
              out.complete && !out.boundaries.empty() ? out.boundaries.back()
                                                      : gen.size();

          std::vector<std::optional<AttackSpec>> variants = {std::nullopt};
          for (const auto& a : spec.attacks) variants.emplace_back(a);
          for (const auto& variant : variants) {
            std::vector<TokenId> text = gen;
            std::string attack_label = "none";
            if (variant) {
              AttackSpec a = *variant;
              a.rng_seed = mix64(a.rng_seed, seeds.attack);
              text = apply_attack(gen, vocab, a, source.get());
              attack_label = variant->label();
            }
            start = Clock::now();
            std::vector<std::uint8_t> bits;
            try {
              if (seg_len == 0) {
                ExtractConfig xc;
                xc.k = spec.message_bits;
                xc.alpha = alpha;
                xc.delta = delta;
                xc.beta = spec.beta;
                xc.repetition_penalty = spec.repetition_penalty;
                bits = extract(text, xc, *source, key).bits;
              } else {
                bits = fixed_length_extract(text, spec.message_bits, seg_len, key,
                                            vocab)
                           .bits;
              }
            } catch (const Error& e) {
              if (e.code() != ErrorCode::kInfeasible) throw;
            }
            const double extract_ms = spec.record_timing ? elapsed_ms(start) : 0.0;

            TrialRecord r;
            r.method = method;
            r.alpha = alpha;
            r.delta = delta;
            r.attack = attack_label;
            r.trial = trial;
            r.bits_sent = spec.message_bits;
            r.bits_correct = count_matches(message.bits(), bits);
            r.bits_embedded = out.bits_embedded;
            r.tokens_used = tokens_used;
            r.text_len = text.size();
            r.perplexity = ppl;
            r.embed_ms = embed_ms;
            r.extract_ms = extract_ms;
            report.records.push_back(std::move(r));
          }
        }
      }
    }
  }
  report.recompute_aggregates();
  return report;
}

void write_csv(std::ostream& out, const EvalReport& report) {
  out << std::setprecision(17);
  out << "row,method,alpha,delta,attack,trial,bits_sent,bits_correct,"
         "bits_embedded,tokens_used,text_len,perplexity,embed_ms,extract_ms,"
         "trials,detection_rate,exact_match_rate,tokens_per_bit,"
         "completion_rate,mean_perplexity,embed_ms_p50,embed_ms_p90,"
         "extract_ms_p50,extract_ms_p90\n";
  for (const auto& r : report.records) {
    out << "trial," << r.method << ',' << r.alpha << ',' << r.delta << ','
        << r.attack << ',' << r.trial << ',' << r.bits_sent << ','
        << r.bits_correct << ',' << r.bits_embedded << ',' << r.tokens_used
        << ',' << r.text_len << ',' << r.perplexity << ',' << r.embed_ms << ','
        << r.extract_ms << ",,,,,,,,,,\n";
  }
  for (const auto& a : report.aggregates) {
    out << "aggregate," << a.method << ',' << a.alpha << ',' << a.delta << ','
        << a.attack << ",,,,,,,,,," << a.trials << ',' << a.detection_rate
        << ',' << a.exact_match_rate << ',' << a.tokens_per_bit << ','
        << a.completion_rate << ',' << a.mean_perplexity << ','
        << a.embed_ms_p50 << ',' << a.embed_ms_p90 << ',' << a.extract_ms_p50
        << ',' << a.extract_ms_p90 << '\n';
  }
}

void write_table(std::ostream& out, const EvalReport& report) {
  std::ostringstream os;
  os << std::left << std::setw(12) << "method" << std::right << std::setw(7)
     << "alpha" << std::setw(7) << "delta" << "  " << std::left << std::setw(16)
     << "attack" << std::right << std::setw(7) << "trials" << std::setw(10)
     << "detect" << std::setw(8) << "exact" << std::setw(10) << "tok/bit"
     << std::setw(10) << "complete" << std::setw(10) << "ppl" << '\n';
  os << std::fixed;
  for (const auto& a : report.aggregates) {
    os << std::left << std::setw(12) << a.method << std::right
       << std::setprecision(3) << std::setw(7) << a.alpha << std::setw(7)
       << a.delta << "  " << std::left << std::setw(16) << a.attack << std::right
       << std::setw(7) << a.trials << std::setw(10) << a.detection_rate
       << std::setw(8) << a.exact_match_rate << std::setprecision(2)
       << std::setw(10) << a.tokens_per_bit << std::setprecision(3)
       << std::setw(10) << a.completion_rate << std::setprecision(2)
       << std::setw(10) << a.mean_perplexity << '\n';
  }
  out << os.str();
}

TimingReport timing_harness(const TimingWorkload& workload) {
  TimingReport report;
  if (workload.lengths.empty()) return report;
  if (workload.repeats == 0) {
    throw Error(ErrorCode::kInvalidArgument, "repeats must be >= 1");
  }
  const auto source = make_source(workload.source);
  const auto key = SecretKey::from_string(workload.key);
  const std::vector<TokenId> prompt = random_ids(0x7157, 8, source->vocab_size());
  const auto message = random_message(0x3e55, workload.message_bits);

  for (std::size_t n : workload.lengths) {
    EmbedConfig cfg;
    cfg.alpha = workload.alpha;
    cfg.delta = workload.delta;
    cfg.max_tokens = n;
    ExtractConfig xc;
    xc.k = workload.message_bits;
    xc.alpha = workload.alpha;
    xc.delta = workload.delta;

    std::vector<double> raw_ms;
    std::vector<double> wm_ms;
    std::vector<double> ex_ms;
    for (std::size_t rep = 0; rep < workload.warmup + workload.repeats; ++rep) {
      const bool keep = rep >= workload.warmup;
      cfg.sampling_seed = rep;
      auto start = Clock::now();
      const auto raw = generate_raw(prompt, cfg, *source);
      const double r_ms = elapsed_ms(start);
      start = Clock::now();
      const auto out = embed(prompt, message, cfg, *source, key);
      const double w_ms = elapsed_ms(start);
      const auto gen = out.text.generated();
      const std::vector<TokenId> text(gen.begin(), gen.end());
      start = Clock::now();
      const auto res = extract(text, xc, *source, key);
      const double x_ms = elapsed_ms(start);
      (void)raw;
      (void)res;
      if (keep) {
        raw_ms.push_back(r_ms);
        wm_ms.push_back(w_ms);
        ex_ms.push_back(x_ms);
      }
    }
    report.rows.push_back({n, median(raw_ms), median(wm_ms), median(ex_ms)});
  }
  return report;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "slope needs two or more paired points");
  }
  const auto n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "slope needs positive values");
    }
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "x values must not all be equal");
  }
  return (n * sxy - sx * sy) / denom;
}

double median(std::vector<double> values) { return percentile(std::move(values), 0.5); }

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  if (!(q >= 0.0 && q <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "percentile must lie in [0, 1]");
  }
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

}  // namespace segmark
