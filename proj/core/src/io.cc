// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#include "segmark/io.h"

#include <fstream>

#include "segmark/error.h"

namespace segmark {
namespace {

using nlohmann::json;

void expect_format(const json& j, const char* format) {
  if (!j.is_object() || j.value("format", "") != format) {
    throw Error(ErrorCode::kParse, std::string("expected a ") + format +
                                       " document");
  }
  const int version = j.value("version", -1);
  if (version != kDocumentVersion) {
    throw Error(ErrorCode::kProtocolMismatch,
                std::string(format) + " version " + std::to_string(version) +
                    " is not supported (expected " +
                    std::to_string(kDocumentVersion) + ")");
  }
}

template <typename F>
auto parse_guard(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed document: ") + e.what());
  }
}

json color_json(const Color c) { return c == Color::kGreen ? "green" : "red"; }

Color color_from_json(const json& j) {
  const auto s = j.get<std::string>();
  if (s == "green") return Color::kGreen;
  if (s == "red") return Color::kRed;
  throw Error(ErrorCode::kParse, "unknown color '" + s + "'");
}

}  // namespace

json to_json(const Manifest& m) {
  return json{
      {"format_version", m.format_version},
      {"color_protocol",
       {{"prf", m.color.prf}, {"shuffle", m.color.shuffle},
        {"version", m.color.version}}},
      {"key_fingerprint", m.key_fingerprint},
      {"source", m.source},
      {"vocab_size", m.vocab_size},
      {"segmentation", m.segmentation},
      {"message_bits", m.message_bits},
      {"delta", m.delta},
      {"alpha", m.alpha},
      {"lambda", m.lambda},
      {"max_tokens", m.max_tokens},
      {"sampling_seed", m.sampling_seed},
      {"repetition_penalty", m.repetition_penalty},
      {"orientation", to_string(m.orientation)},
  };
}

Manifest manifest_from_json(const json& j) {
  return parse_guard([&] {
    Manifest m;
    m.format_version = j.at("format_version").get<int>();
    const auto& cp = j.at("color_protocol");
    m.color.prf = cp.at("prf").get<std::string>();
    m.color.shuffle = cp.at("shuffle").get<std::string>();
    m.color.version = cp.at("version").get<int>();
    m.key_fingerprint = j.at("key_fingerprint").get<std::string>();
    m.source = j.at("source").get<std::string>();
    m.vocab_size = j.at("vocab_size").get<std::size_t>();
    m.segmentation = j.at("segmentation").get<std::string>();
    m.message_bits = j.at("message_bits").get<std::size_t>();
    m.delta = j.at("delta").get<double>();
    m.alpha = j.at("alpha").get<double>();
    m.lambda = j.at("lambda").get<double>();
    m.max_tokens = j.at("max_tokens").get<std::size_t>();
    m.sampling_seed = j.at("sampling_seed").get<std::uint64_t>();
    m.repetition_penalty = j.at("repetition_penalty").get<double>();
    m.orientation = parse_orientation(j.at("orientation").get<std::string>());
    return m;
  });
}

void verify_manifest(const Manifest& m, std::size_t vocab_size) {
  if (m.format_version != kDocumentVersion) {
    throw Error(ErrorCode::kProtocolMismatch,
                "manifest format version " + std::to_string(m.format_version) +
                    " is not supported");
  }
  if (!(m.color == color_protocol())) {
    throw Error(ErrorCode::kProtocolMismatch,
                "manifest was produced under a different partition protocol");
  }
  if (m.vocab_size != vocab_size) {
    throw Error(ErrorCode::kProtocolMismatch,
                "manifest vocabulary size " + std::to_string(m.vocab_size) +
                    " differs from the source's " + std::to_string(vocab_size));
  }
}

json to_json(const EmbedOutput& out, bool include_trace) {
  json j{
      {"format", kEmbedFormat},
      {"version", kDocumentVersion},
      {"manifest", to_json(out.manifest)},
      {"prompt", std::vector<TokenId>(out.text.prompt().begin(),
                                      out.text.prompt().end())},
      {"generated", std::vector<TokenId>(out.text.generated().begin(),
                                         out.text.generated().end())},
      {"boundaries", out.boundaries},
      {"bits_embedded", out.bits_embedded},
      {"padding_start", out.padding_start ? json(*out.padding_start) : json()},
      {"complete", out.complete},
  };
  if (include_trace) {
    json trace = json::array();
    for (const auto& s : out.trace) {
      trace.push_back({{"p_green", s.p_green},
                       {"expected_desired", s.expected_desired},
                       {"color", color_json(s.color)}});
    }
    j["trace"] = std::move(trace);
  }
  return j;
}

EmbedOutput embed_output_from_json(const json& j) {
  expect_format(j, kEmbedFormat);
  return parse_guard([&] {
    EmbedOutput out;
    out.manifest = manifest_from_json(j.at("manifest"));
    auto prompt = j.at("prompt").get<std::vector<TokenId>>();
    const auto generated = j.at("generated").get<std::vector<TokenId>>();
    out.text.prompt_len = prompt.size();
    out.text.ids = std::move(prompt);
    out.text.ids.insert(out.text.ids.end(), generated.begin(), generated.end());
    out.boundaries = j.at("boundaries").get<std::vector<std::size_t>>();
    out.bits_embedded = j.at("bits_embedded").get<std::size_t>();
    if (!j.at("padding_start").is_null()) {
      out.padding_start = j.at("padding_start").get<std::size_t>();
    }
    out.complete = j.at("complete").get<bool>();
    if (j.contains("trace")) {
      for (const auto& s : j.at("trace")) {
        out.trace.push_back({s.at("p_green").get<double>(),
                             s.at("expected_desired").get<double>(),
                             color_from_json(s.at("color"))});
      }
    }
    return out;
  });
}

json to_json(const ExtractionResult& r) {
  json segments = json::array();
  for (const auto& s : r.per_segment) {
    segments.push_back({{"seg_loss", s.seg_loss},
                        {"color_loss", s.color_loss},
                        {"green", s.green_count},
                        {"red", s.red_count}});
  }
  std::string bits;
  for (auto b : r.bits) bits.push_back(b ? '1' : '0');
  return json{
      {"format", kExtractFormat},
      {"version", kDocumentVersion},
      {"bits", bits},
      {"segmentation", r.segmentation},
      {"padding_start", r.padding_start},
      {"total_loss", r.total_loss},
      {"eps_s", r.eps_s},
      {"eps_d", r.eps_d},
      {"iterations", r.iterations},
      {"converged", r.converged},
      {"segments", std::move(segments)},
      {"loss_history", r.loss_history},
  };
}

ExtractionResult extraction_result_from_json(const json& j) {
  expect_format(j, kExtractFormat);
  return parse_guard([&] {
    ExtractionResult r;
    for (char c : j.at("bits").get<std::string>()) {
      if (c != '0' && c != '1') {
        throw Error(ErrorCode::kParse, "bits must be a string of 0 and 1");
      }
      r.bits.push_back(c == '1' ? 1 : 0);
    }
    r.segmentation = j.at("segmentation").get<std::vector<std::size_t>>();
    r.padding_start = j.at("padding_start").get<std::size_t>();
    r.total_loss = j.at("total_loss").get<double>();
    r.eps_s = j.at("eps_s").get<double>();
    r.eps_d = j.at("eps_d").get<double>();
    r.iterations = j.at("iterations").get<std::size_t>();
    r.converged = j.at("converged").get<bool>();
    for (const auto& s : j.at("segments")) {
      r.per_segment.push_back({s.at("seg_loss").get<double>(),
                               s.at("color_loss").get<double>(),
                               s.at("green").get<std::size_t>(),
                               s.at("red").get<std::size_t>()});
    }
    r.loss_history = j.at("loss_history").get<std::vector<double>>();
    return r;
  });
}

json to_json(const EvalReport& report) {
  json records = json::array();
  for (const auto& r : report.records) {
    records.push_back({{"method", r.method},
                       {"alpha", r.alpha},
                       {"delta", r.delta},
                       {"attack", r.attack},
                       {"trial", r.trial},
                       {"bits_sent", r.bits_sent},
                       {"bits_correct", r.bits_correct},
                       {"bits_embedded", r.bits_embedded},
                       {"tokens_used", r.tokens_used},
                       {"text_len", r.text_len},
                       {"perplexity", r.perplexity},
                       {"embed_ms", r.embed_ms},
                       {"extract_ms", r.extract_ms}});
  }
  json aggregates = json::array();
  for (const auto& a : report.aggregates) {
    aggregates.push_back({{"method", a.method},
                          {"alpha", a.alpha},
                          {"delta", a.delta},
                          {"attack", a.attack},
                          {"trials", a.trials},
                          {"detection_rate", a.detection_rate},
                          {"exact_match_rate", a.exact_match_rate},
                          {"tokens_per_bit", a.tokens_per_bit},
                          {"completion_rate", a.completion_rate},
                          {"mean_perplexity", a.mean_perplexity},
                          {"embed_ms_p50", a.embed_ms_p50},
                          {"embed_ms_p90", a.embed_ms_p90},
                          {"extract_ms_p50", a.extract_ms_p50},
                          {"extract_ms_p90", a.extract_ms_p90}});
  }
  return json{{"format", kReportFormat},
              {"version", kDocumentVersion},
              {"records", std::move(records)},
              {"aggregates", std::move(aggregates)}};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace segmark
