// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "segmark/attacks.h"
#include "segmark/embedder.h"
#include "segmark/error.h"
#include "segmark/eval.h"
#include "segmark/extractor.h"
#include "segmark/io.h"
#include "segmark/lm.h"
#include "segmark/ngram_source.h"

namespace {

using nlohmann::json;
using segmark::Error;
using segmark::ErrorCode;

// Stable process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitValidation = 2,
  kExitShortfall = 3,
  kExitProtocol = 4,
  kExitInfeasible = 5,
  kExitIo = 6,
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kOutOfRange:
    case ErrorCode::kParse:
      return kExitValidation;
    case ErrorCode::kProtocolMismatch:
      return kExitProtocol;
    case ErrorCode::kInfeasible:
      return kExitInfeasible;
    case ErrorCode::kIo:
    case ErrorCode::kBridgeIo:
    case ErrorCode::kTraceExhausted:
      return kExitIo;
    case ErrorCode::kZeroProbability:
      return kExitInternal;
  }
  return kExitInternal;
}

constexpr const char* kTextFormat = "segmark-text";
constexpr const char* kProbeFormat = "segmark-probe";

struct SourceOptions {
  std::string kind = "synthetic";
  std::size_t vocab_size = 256;
  double concentration = 0.01;
  std::uint64_t seed = 0;
  std::size_t context_window = 2;
  std::string ngram_path;
  std::string trace_path;
  std::string bridge_command;

  void add(CLI::App* app) {
    app->add_option("--source", kind, "synthetic | ngram | trace | bridge")
        ->capture_default_str();
    app->add_option("--vocab-size", vocab_size, "synthetic vocabulary size")
        ->capture_default_str();
    app->add_option("--concentration", concentration,
                    "synthetic Dirichlet concentration (inf = uniform)")
        ->capture_default_str();
    app->add_option("--source-seed", seed, "synthetic source seed")
        ->capture_default_str();
    app->add_option("--context-window", context_window,
                    "synthetic context window")
        ->capture_default_str();
    app->add_option("--ngram-path", ngram_path, "model file from train-ngram");
    app->add_option("--trace-path", trace_path, "logits trace file");
    app->add_option("--bridge-command", bridge_command,
                    "shell command starting a bridge server");
  }

  segmark::SourceDescriptor descriptor() const {
    segmark::SourceDescriptor d;
    d.kind = segmark::parse_source_kind(kind);
    d.vocab_size = vocab_size;
    d.concentration = concentration;
    d.seed = seed;
    d.context_window = context_window;
    d.ngram_path = ngram_path;
    d.trace_path = trace_path;
    d.bridge_command = bridge_command;
    d.validate();
    return d;
  }

  std::unique_ptr<segmark::LogitsSource> make() const {
    return segmark::make_source(descriptor());
  }
};

struct KeyOptions {
  std::string file;
  std::string text;
  std::string hex;

  void add(CLI::App* app) {
    auto* f = app->add_option("--key-file", file,
                              "file holding the secret key bytes");
    auto* t = app->add_option("--key", text, "secret key as a literal string");
    auto* h = app->add_option("--key-hex", hex, "secret key as hex");
    f->excludes(t)->excludes(h);
    t->excludes(h);
  }

  segmark::SecretKey load() const {
    if (!file.empty()) {
      std::ifstream in(file, std::ios::binary);
      if (!in) {
        throw Error(ErrorCode::kInvalidArgument,
                    "cannot read key file '" + file + "'");
      }
      std::string bytes((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
      while (!bytes.empty() && (bytes.back() == '\n' || bytes.back() == '\r')) {
        bytes.pop_back();
      }
      return segmark::SecretKey::from_string(bytes);
    }
    if (!text.empty()) return segmark::SecretKey::from_string(text);
    if (!hex.empty()) return segmark::SecretKey::from_hex(hex);
    throw Error(ErrorCode::kInvalidArgument,
                "a key is required: --key-file, --key or --key-hex");
  }
};

struct EmbedOptions {
  double delta = 2.0;
  double alpha = 0.9;
  CLI::Option* lambda_opt = nullptr;
  double lambda = 0.0;
  std::size_t max_tokens = 200;
  std::uint64_t seed = 0;
  double repetition_penalty = 1.0;
  std::string orientation = "coherent";

  void add(CLI::App* app) {
    app->add_option("--delta", delta, "green/red logit bias")
        ->capture_default_str();
    app->add_option("--alpha", alpha, "segment confidence level")
        ->capture_default_str();
    lambda_opt = app->add_option("--lambda", lambda,
                                 "prior pseudo-count (default from alpha)");
    app->add_option("--max-tokens", max_tokens, "generation budget")
        ->capture_default_str();
    app->add_option("--seed", seed, "sampling seed")->capture_default_str();
    app->add_option("--repetition-penalty", repetition_penalty,
                    "repetition penalty (1 disables)")
        ->capture_default_str();
    app->add_option("--orientation", orientation, "coherent | literal")
        ->capture_default_str();
  }

  segmark::EmbedConfig config() const {
    segmark::EmbedConfig cfg;
    cfg.delta = delta;
    cfg.alpha = alpha;
    if (lambda_opt->count() > 0) cfg.lambda = lambda;
    cfg.max_tokens = max_tokens;
    cfg.sampling_seed = seed;
    cfg.repetition_penalty = repetition_penalty;
    cfg.orientation = segmark::parse_orientation(orientation);
    cfg.validate();
    return cfg;
  }
};

// Input text: either an embed document (generated tokens are used) or a text
// document written by the attack command.
struct TextInput {
  std::vector<segmark::TokenId> ids;
  std::optional<segmark::Manifest> manifest;
};

TextInput read_text_input(const std::string& path) {
  const json doc = segmark::read_json_file(path);
  TextInput in;
  if (doc.is_object() && doc.value("format", "") == segmark::kEmbedFormat) {
    const segmark::EmbedOutput out = segmark::embed_output_from_json(doc);
    const auto gen = out.text.generated();
    in.ids.assign(gen.begin(), gen.end());
    in.manifest = out.manifest;
    return in;
  }
  if (!doc.is_object() || doc.value("format", "") != kTextFormat) {
    throw Error(ErrorCode::kParse, "'" + path +
                                       "' is neither a segmark-embed nor a "
                                       "segmark-text document");
  }
  if (doc.value("version", -1) != segmark::kDocumentVersion) {
    throw Error(ErrorCode::kProtocolMismatch,
                "unsupported segmark-text version in '" + path + "'");
  }
  try {
    in.ids = doc.at("ids").get<std::vector<segmark::TokenId>>();
    if (doc.contains("manifest") && !doc.at("manifest").is_null()) {
      in.manifest = segmark::manifest_from_json(doc.at("manifest"));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed text document: ") +
                                       e.what());
  }
  return in;
}

json text_document(const std::vector<segmark::TokenId>& ids,
                   const std::optional<segmark::Manifest>& manifest,
                   const std::string& attack) {
  json doc = {{"format", kTextFormat},
              {"version", segmark::kDocumentVersion},
              {"ids", ids},
              {"attack", attack}};
  doc["manifest"] = manifest ? segmark::to_json(*manifest) : json();
  return doc;
}

segmark::AttackSpec parse_attack_spec(const std::string& text) {
  // kind:rate[:plausible]
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  if (parts.size() < 2 || parts.size() > 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "attack spec '" + text + "' must be kind:rate[:plausible]");
  }
  segmark::AttackSpec spec;
  spec.kind = segmark::parse_attack_kind(parts[0]);
  try {
    std::size_t used = 0;
    spec.rate = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument,
                "bad attack rate in '" + text + "'");
  }
  if (parts.size() == 3) {
    if (parts[2] != "plausible" && parts[2] != "uniform") {
      throw Error(ErrorCode::kInvalidArgument,
                  "unknown insertion mode '" + parts[2] + "'");
    }
    spec.mode = parts[2] == "plausible" ? segmark::InsertionMode::kPlausible
                                        : segmark::InsertionMode::kUniform;
  }
  spec.validate();
  return spec;
}

segmark::InsertionMode parse_insertion_mode(const std::string& name) {
  if (name == "uniform") return segmark::InsertionMode::kUniform;
  if (name == "plausible") return segmark::InsertionMode::kPlausible;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown insertion mode '" + name + "'");
}

void verify_against(const segmark::Manifest& manifest,
                    const segmark::LogitsSource& source,
                    const segmark::SecretKey& key) {
  segmark::verify_manifest(manifest, source.vocab_size());
  if (manifest.key_fingerprint != key.fingerprint()) {
    throw Error(ErrorCode::kProtocolMismatch,
                "key fingerprint " + key.fingerprint() +
                    " differs from the manifest's " + manifest.key_fingerprint);
  }
  if (manifest.source != source.describe()) {
    std::cerr << "warning: source '" << source.describe()
              << "' differs from the manifest's '" << manifest.source << "'\n";
  }
}

struct ExtractOptions {
  std::string input;
  std::string out;
  CLI::Option* k_opt = nullptr;
  std::size_t k = 0;
  CLI::Option* alpha_opt = nullptr;
  double alpha = 0.9;
  CLI::Option* delta_opt = nullptr;
  double delta = 2.0;
  CLI::Option* lambda_opt = nullptr;
  double lambda = 0.0;
  CLI::Option* rep_opt = nullptr;
  double repetition_penalty = 1.0;
  double beta = 14.0;
  std::size_t max_epsilon_iters = 10;
  double epsilon_tol = 1e-3;
  std::size_t min_segment_len = 1;
  double padding_penalty = 14.0;
  bool no_padding = false;
  bool naive = false;

  // Options shared by extract and attack (paired extraction).
  void add_tuning(CLI::App* app) {
    k_opt = app->add_option("--bits", k,
                            "message length K (default from the manifest)");
    alpha_opt = app->add_option("--alpha", alpha,
                                "confidence level (default from the manifest)");
    delta_opt = app->add_option("--delta", delta,
                                "logit bias (default from the manifest)");
    lambda_opt = app->add_option("--lambda", lambda,
                                 "prior pseudo-count (default from the manifest)");
    rep_opt = app->add_option("--repetition-penalty", repetition_penalty,
                              "repetition penalty (default from the manifest)");
    app->add_option("--beta", beta, "weight of the segment loss")
        ->capture_default_str();
    app->add_option("--max-epsilon-iters", max_epsilon_iters,
                    "epsilon refinement iterations")
        ->capture_default_str();
    app->add_option("--epsilon-tol", epsilon_tol, "epsilon convergence tolerance")
        ->capture_default_str();
    app->add_option("--min-segment-len", min_segment_len,
                    "minimum segment length")
        ->capture_default_str();
    app->add_option("--padding-penalty", padding_penalty,
                    "penalty when padding does not oppose the last segment")
        ->capture_default_str();
    app->add_flag("--no-padding", no_padding, "disable padding detection");
    app->add_flag("--naive", naive,
                  "replay the embedding-time closing rule instead of the DP");
  }

  segmark::ExtractConfig config(
      const std::optional<segmark::Manifest>& manifest) const {
    segmark::ExtractConfig cfg;
    if (manifest) {
      cfg.k = manifest->message_bits;
      cfg.alpha = manifest->alpha;
      cfg.delta = manifest->delta;
      cfg.lambda = manifest->lambda;
      cfg.repetition_penalty = manifest->repetition_penalty;
    }
    if (k_opt->count() > 0) {
      cfg.k = k;
    } else if (!manifest) {
      throw Error(ErrorCode::kInvalidArgument,
                  "--bits is required when the input carries no manifest");
    }
    if (alpha_opt->count() > 0) cfg.alpha = alpha;
    if (delta_opt->count() > 0) cfg.delta = delta;
    if (lambda_opt->count() > 0) cfg.lambda = lambda;
    if (rep_opt->count() > 0) cfg.repetition_penalty = repetition_penalty;
    cfg.beta = beta;
    cfg.max_epsilon_iters = max_epsilon_iters;
    cfg.epsilon_tol = epsilon_tol;
    cfg.min_segment_len = min_segment_len;
    cfg.padding_penalty = padding_penalty;
    cfg.detect_padding = !no_padding;
    cfg.validate();
    return cfg;
  }

  segmark::ExtractionResult run(const std::vector<segmark::TokenId>& ids,
                                const segmark::ExtractConfig& cfg,
                                const segmark::LogitsSource& source,
                                const segmark::SecretKey& key) const {
    return naive ? segmark::naive_extract(ids, cfg, source, key)
                 : segmark::extract(ids, cfg, source, key);
  }
};

std::string bits_string(const std::vector<std::uint8_t>& bits) {
  std::string s;
  for (auto b : bits) s.push_back(b ? '1' : '0');
  return s;
}

// embed ----------------------------------------------------------------------

struct EmbedCommand {
  SourceOptions source;
  KeyOptions key;
  EmbedOptions embed;
  std::string message;
  std::string message_hex;
  std::size_t message_bits = 0;
  std::vector<segmark::TokenId> prompt;
  std::size_t fixed_length = 0;
  bool no_trace = false;
  std::string out;

  void add(CLI::App* app) {
    source.add(app);
    key.add(app);
    embed.add(app);
    auto* m = app->add_option("--message", message, "message as a bit string");
    auto* h = app->add_option("--message-hex", message_hex,
                              "message as hex, most significant bit first");
    app->add_option("--message-bits", message_bits,
                    "number of bits kept from --message-hex")
        ->needs(h);
    m->excludes(h);
    app->add_option("--prompt", prompt, "prompt token ids")->delimiter(',');
    app->add_option("--fixed-length", fixed_length,
                    "close segments every N tokens instead of dynamically");
    app->add_flag("--no-trace", no_trace, "omit the per-token trace");
    app->add_option("--out", out, "output embed document")->required();
  }

  int run() const {
    const segmark::WatermarkMessage msg = parse_message();
    const segmark::SecretKey k = key.load();
    const segmark::EmbedConfig cfg = embed.config();
    const auto src = source.make();
    const segmark::SegmentRule rule =
        fixed_length > 0 ? segmark::SegmentRule::fixed(fixed_length)
                         : segmark::SegmentRule::dynamic();
    const segmark::EmbedOutput result =
        segmark::embed(prompt, msg, cfg, *src, k, rule);
    segmark::write_json_file(out, segmark::to_json(result, !no_trace));
    std::cout << "embedded " << result.bits_embedded << "/" << msg.size()
              << " bits in " << result.text.generated().size()
              << " tokens; boundaries " << result.boundaries.size() << "\n";
    if (!result.complete) {
      std::cerr << "capacity shortfall: " << result.bits_embedded << " of "
                << msg.size() << " bits closed within " << cfg.max_tokens
                << " tokens\n";
      return kExitShortfall;
    }
    return kExitOk;
  }

  segmark::WatermarkMessage parse_message() const {
    if (!message.empty()) {
      return segmark::WatermarkMessage::from_bit_string(message);
    }
    if (!message_hex.empty()) {
      if (message_bits == 0) {
        throw Error(ErrorCode::kInvalidArgument,
                    "--message-hex needs --message-bits");
      }
      return segmark::WatermarkMessage::from_hex(message_hex, message_bits);
    }
    throw Error(ErrorCode::kInvalidArgument,
                "a message is required: --message or --message-hex");
  }
};

// extract --------------------------------------------------------------------

struct ExtractCommand {
  SourceOptions source;
  KeyOptions key;
  ExtractOptions extract;

  void add(CLI::App* app) {
    source.add(app);
    key.add(app);
    app->add_option("--input", extract.input,
                    "embed or text document to read")
        ->required();
    app->add_option("--out", extract.out, "output extraction document")
        ->required();
    extract.add_tuning(app);
  }

  int run() const {
    const segmark::SecretKey k = key.load();
    const TextInput in = read_text_input(extract.input);
    const auto src = source.make();
    if (in.manifest) verify_against(*in.manifest, *src, k);
    const segmark::ExtractConfig cfg = extract.config(in.manifest);
    const segmark::ExtractionResult result = extract.run(in.ids, cfg, *src, k);
    segmark::write_json_file(extract.out, segmark::to_json(result));
    std::cout << "bits " << bits_string(result.bits) << " loss "
              << result.total_loss << "\n";
    return kExitOk;
  }
};

// attack ---------------------------------------------------------------------

struct AttackCommand {
  SourceOptions source;
  KeyOptions key;
  ExtractOptions extract;
  std::string kind = "delete";
  double rate = 0.05;
  std::uint64_t attack_seed = 0;
  std::string insertion_mode = "uniform";
  std::string extract_out;

  void add(CLI::App* app) {
    source.add(app);
    key.add(app);
    app->add_option("--input", extract.input, "embed or text document")
        ->required();
    app->add_option("--kind", kind, "insert | delete")->capture_default_str();
    app->add_option("--rate", rate, "fraction of tokens touched")
        ->capture_default_str();
    app->add_option("--attack-seed", attack_seed, "attack seed")
        ->capture_default_str();
    app->add_option("--insertion-mode", insertion_mode, "uniform | plausible")
        ->capture_default_str();
    app->add_option("--out", extract.out, "attacked text document")
        ->required();
    app->add_option("--extract-out", extract_out,
                    "also extract from the attacked text into this file");
    extract.add_tuning(app);
  }

  int run() const {
    segmark::AttackSpec spec;
    spec.kind = segmark::parse_attack_kind(kind);
    spec.rate = rate;
    spec.rng_seed = attack_seed;
    spec.mode = parse_insertion_mode(insertion_mode);
    spec.validate();

    const TextInput in = read_text_input(extract.input);
    std::optional<segmark::SecretKey> k;
    if (!extract_out.empty()) k = key.load();

    std::unique_ptr<segmark::LogitsSource> src;
    const bool need_source = !extract_out.empty() ||
                             spec.mode == segmark::InsertionMode::kPlausible;
    if (need_source) src = source.make();
    std::size_t vocab = 0;
    if (src) {
      vocab = src->vocab_size();
    } else if (in.manifest) {
      vocab = in.manifest->vocab_size;
    } else {
      vocab = source.descriptor().vocab_size;
    }
    if (src && in.manifest && k) verify_against(*in.manifest, *src, *k);

    std::optional<segmark::ExtractConfig> cfg;
    if (!extract_out.empty()) cfg = extract.config(in.manifest);

    const std::vector<segmark::TokenId> attacked =
        segmark::apply_attack(in.ids, vocab, spec, src.get());
    segmark::write_json_file(extract.out,
                             text_document(attacked, in.manifest, spec.label()));
    std::cout << spec.label() << ": " << in.ids.size() << " -> "
              << attacked.size() << " tokens\n";
    if (cfg) {
      const segmark::ExtractionResult result =
          extract.run(attacked, *cfg, *src, *k);
      segmark::write_json_file(extract_out, segmark::to_json(result));
      std::cout << "bits " << bits_string(result.bits) << "\n";
    }
    return kExitOk;
  }
};

// sweep ----------------------------------------------------------------------

struct SweepCommand {
  SourceOptions source;
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
  std::vector<std::string> attacks;
  std::size_t baseline_seg_len = 0;
  bool no_timing = false;
  bool eval_with_source = false;
  std::string eval_ngram_path;
  std::string csv;
  std::string json_out;

  void add(CLI::App* app) {
    source.add(app);
    app->add_option("--alphas", alphas, "alpha grid")->capture_default_str();
    app->add_option("--deltas", deltas, "delta grid")->capture_default_str();
    app->add_option("--trials", trials, "trials per grid cell")
        ->capture_default_str();
    app->add_option("--message-bits", message_bits, "bits per message")
        ->capture_default_str();
    app->add_option("--max-tokens", max_tokens, "generation budget")
        ->capture_default_str();
    app->add_option("--prompt-len", prompt_len, "random prompt length")
        ->capture_default_str();
    app->add_option("--beta", beta, "extraction segment-loss weight")
        ->capture_default_str();
    app->add_option("--repetition-penalty", repetition_penalty,
                    "repetition penalty")
        ->capture_default_str();
    app->add_option("--seed", seed, "base seed")->capture_default_str();
    app->add_option("--key", key, "secret key string")->capture_default_str();
    app->add_option("--attacks", attacks,
                    "attack specs kind:rate[:plausible]");
    app->add_option("--baseline-seg-len", baseline_seg_len,
                    "fixed-length baseline segment length (0 disables)")
        ->capture_default_str();
    app->add_flag("--no-timing", no_timing,
                  "zero timing fields for byte-identical reruns");
    auto* ews = app->add_flag("--eval-with-source", eval_with_source,
                              "score perplexity with the generating source");
    app->add_option("--eval-ngram-path", eval_ngram_path,
                    "score perplexity with this n-gram model")
        ->excludes(ews);
    app->add_option("--csv", csv, "CSV report path");
    app->add_option("--json", json_out, "JSON report path");
  }

  int run() const {
    segmark::SweepSpec spec;
    spec.alphas = alphas;
    spec.deltas = deltas;
    spec.trials = trials;
    spec.message_bits = message_bits;
    spec.max_tokens = max_tokens;
    spec.prompt_len = prompt_len;
    spec.beta = beta;
    spec.repetition_penalty = repetition_penalty;
    spec.seed = seed;
    spec.key = key;
    spec.source = source.descriptor();
    if (eval_with_source) spec.eval_source = spec.source;
    if (!eval_ngram_path.empty()) {
      segmark::SourceDescriptor eval;
      eval.kind = segmark::SourceKind::kNgram;
      eval.ngram_path = eval_ngram_path;
      spec.eval_source = eval;
    }
    for (const auto& a : attacks) spec.attacks.push_back(parse_attack_spec(a));
    spec.baseline_seg_len = baseline_seg_len;
    spec.record_timing = !no_timing;
    spec.validate();

    const segmark::EvalReport report = segmark::capacity_sweep(spec);
    if (!csv.empty()) {
      std::ofstream f(csv, std::ios::binary);
      if (!f) throw Error(ErrorCode::kIo, "cannot write '" + csv + "'");
      segmark::write_csv(f, report);
      if (!f) throw Error(ErrorCode::kIo, "failed writing '" + csv + "'");
    }
    if (!json_out.empty()) {
      segmark::write_json_file(json_out, segmark::to_json(report));
    }
    segmark::write_table(std::cout, report);
    return kExitOk;
  }
};

// train-ngram ----------------------------------------------------------------

struct TrainNgramCommand {
  std::string corpus;
  std::size_t order = 3;
  double smoothing = 0.01;
  std::string out;

  void add(CLI::App* app) {
    app->add_option("--corpus", corpus, "whitespace-tokenized text corpus")
        ->required();
    app->add_option("--order", order, "n-gram order")->capture_default_str();
    app->add_option("--smoothing", smoothing, "additive smoothing")
        ->capture_default_str();
    app->add_option("--out", out, "model file")->required();
  }

  int run() const {
    std::ifstream in(corpus);
    if (!in) throw Error(ErrorCode::kIo, "cannot read corpus '" + corpus + "'");
    auto [vocab, ids] = segmark::tokenize_corpus(in);
    const std::size_t n_tokens = ids.size();
    const std::size_t n_vocab = vocab.size();
    const segmark::NgramSource model =
        segmark::train_ngram(std::move(ids), std::move(vocab), order, smoothing);
    segmark::save_ngram(model, out);
    std::cout << "trained order-" << order << " model on " << n_tokens
              << " tokens, vocabulary " << n_vocab << "\n";
    return kExitOk;
  }
};

// probe ----------------------------------------------------------------------

struct ProbeCommand {
  SourceOptions source;
  KeyOptions key;
  EmbedOptions embed;
  std::vector<segmark::TokenId> prompt;
  std::size_t horizon = 200;
  std::string out;

  void add(CLI::App* app) {
    source.add(app);
    key.add(app);
    embed.add(app);
    app->add_option("--prompt", prompt, "prompt token ids")->delimiter(',');
    app->add_option("--horizon", horizon, "token horizon")
        ->capture_default_str();
    app->add_option("--out", out, "probe report path");
  }

  int run() const {
    const segmark::SecretKey k = key.load();
    const segmark::EmbedConfig cfg = embed.config();
    const auto src = source.make();
    const std::size_t bits =
        segmark::capacity_probe(prompt, cfg, *src, k, horizon);
    if (!out.empty()) {
      segmark::write_json_file(out, {{"format", kProbeFormat},
                                     {"version", segmark::kDocumentVersion},
                                     {"source", src->describe()},
                                     {"horizon", horizon},
                                     {"alpha", cfg.alpha},
                                     {"delta", cfg.delta},
                                     {"capacity_bits", bits}});
    }
    std::cout << "capacity " << bits << " bits within " << horizon
              << " tokens\n";
    return kExitOk;
  }
};

constexpr const char* kExitCodeHelp =
    "Exit codes: 0 ok, 1 internal error, 2 validation error, 3 capacity "
    "shortfall (partial output written), 4 protocol mismatch, 5 infeasible "
    "length, 6 I/O error.";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"segmark: multi-bit watermarking with dynamic segmentation"};
  app.footer(kExitCodeHelp);
  app.set_config("--config", "", "INI config file; [section] per subcommand");
  app.config_formatter(std::make_shared<CLI::ConfigINI>());
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  EmbedCommand embed_cmd;
  ExtractCommand extract_cmd;
  AttackCommand attack_cmd;
  SweepCommand sweep_cmd;
  TrainNgramCommand train_cmd;
  ProbeCommand probe_cmd;

  auto* embed = app.add_subcommand("embed", "embed a message while generating");
  auto* extract = app.add_subcommand("extract", "recover a message from text");
  auto* attack = app.add_subcommand("attack", "apply an edit attack");
  auto* sweep = app.add_subcommand("sweep", "run a capacity/accuracy sweep");
  auto* train =
      app.add_subcommand("train-ngram", "train an n-gram logits source");
  auto* probe = app.add_subcommand("probe", "measure embedding capacity");
  embed_cmd.add(embed);
  extract_cmd.add(extract);
  attack_cmd.add(attack);
  sweep_cmd.add(sweep);
  train_cmd.add(train);
  probe_cmd.add(probe);
  for (auto* sub : app.get_subcommands({})) {
    sub->allow_config_extras(CLI::config_extras_mode::error);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*embed) return embed_cmd.run();
    if (*extract) return extract_cmd.run();
    if (*attack) return attack_cmd.run();
    if (*sweep) return sweep_cmd.run();
    if (*train) return train_cmd.run();
    if (*probe) return probe_cmd.run();
  } catch (const Error& e) {
    std::cerr << "error (" << segmark::to_string(e.code()) << "): " << e.what()
              << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
