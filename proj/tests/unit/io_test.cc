// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>
#include <functional>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "segmark/error.h"
#include "segmark/extractor.h"
#include "segmark/io.h"
#include "segmark/synthetic_source.h"

namespace segmark {
namespace {

const SecretKey& key() {
  static const SecretKey k = SecretKey::from_string("io-test-key");
  return k;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no segmark::Error thrown";
  return ErrorCode::kInvalidArgument;
}

EmbedOutput sample_embed(std::size_t max_tokens = 90) {
  const SyntheticSource src({64, 1.0, 2, 2});
  EmbedConfig c;
  c.max_tokens = max_tokens;
  c.sampling_seed = 4;
  c.lambda = 0.3;
  c.orientation = Orientation::kLiteral;
  return embed(std::vector<TokenId>{5, 6}, WatermarkMessage::from_bit_string("101"),
               c, src, key());
}

TEST(Io, ManifestRoundTrip) {
  const Manifest m = sample_embed().manifest;
  const auto j = to_json(m);
  EXPECT_TRUE(j["color_protocol"].is_object());
  EXPECT_EQ(j["orientation"], "literal");
  EXPECT_EQ(manifest_from_json(j), m);
}

TEST(Io, EmbedOutputRoundTripWithAndWithoutTrace) {
  const EmbedOutput out = sample_embed();
  ASSERT_TRUE(out.padding_start.has_value());
  const auto j = to_json(out);
  EXPECT_EQ(j["format"], kEmbedFormat);
  EXPECT_EQ(j["version"], kDocumentVersion);
  EXPECT_EQ(embed_output_from_json(j), out);
  EXPECT_EQ(embed_output_from_json(nlohmann::json::parse(j.dump())), out);
  const auto bare = embed_output_from_json(to_json(out, false));
  EXPECT_TRUE(bare.trace.empty());
  EXPECT_EQ(bare.text, out.text);
  EXPECT_EQ(bare.boundaries, out.boundaries);
}

TEST(Io, IncompleteEmbedHasNullPadding) {
  const EmbedOutput out = sample_embed(2);
  ASSERT_FALSE(out.complete);
  const auto j = to_json(out);
  EXPECT_TRUE(j["padding_start"].is_null());
  EXPECT_EQ(embed_output_from_json(j), out);
}

TEST(Io, ExtractionResultRoundTripThroughFile) {
  const EmbedOutput out = sample_embed();
  const SyntheticSource src({64, 1.0, 2, 2});
  ExtractConfig cfg;
  cfg.k = 3;
  const auto r = extract(out.text.ids, cfg, src, key());
  const auto path = std::filesystem::temp_directory_path() / "segmark_io_rt.json";
  write_json_file(path, to_json(r));
  const auto back = extraction_result_from_json(read_json_file(path));
  std::filesystem::remove(path);
  EXPECT_EQ(back, r);
  EXPECT_EQ(to_json(r)["bits"].get<std::string>().size(), 3u);
}

TEST(Io, ReportDocumentCarriesFormat) {
  EvalReport rep;
  rep.records.push_back({"dynamic", 0.9, 2.0, "none", 0, 4, 3, 4, 20, 30, 5.0, 1.0, 2.0});
  rep.recompute_aggregates();
  const auto j = to_json(rep);
  EXPECT_EQ(j["format"], kReportFormat);
  EXPECT_EQ(j["records"].size(), 1u);
  EXPECT_EQ(j["aggregates"].size(), 1u);
}

TEST(Io, ManifestVerification) {
  const Manifest good = sample_embed().manifest;
  EXPECT_NO_THROW(verify_manifest(good, 64));
  EXPECT_EQ(code_of([&] { verify_manifest(good, 128); }), ErrorCode::kProtocolMismatch);
  Manifest m = good;
  m.color.shuffle = "other";
  EXPECT_EQ(code_of([&] { verify_manifest(m, 64); }), ErrorCode::kProtocolMismatch);
  m = good;
  m.color.version = 2;
  EXPECT_EQ(code_of([&] { verify_manifest(m, 64); }), ErrorCode::kProtocolMismatch);
  m = good;
  m.format_version = 9;
  EXPECT_EQ(code_of([&] { verify_manifest(m, 64); }), ErrorCode::kProtocolMismatch);
}

TEST(Io, WrongFormatOrVersionIsRejected) {
  auto j = to_json(sample_embed());
  auto wrong = j;
  wrong["format"] = kExtractFormat;
  EXPECT_EQ(code_of([&] { embed_output_from_json(wrong); }), ErrorCode::kParse);
  wrong = j;
  wrong["version"] = 2;
  EXPECT_EQ(code_of([&] { embed_output_from_json(wrong); }),
            ErrorCode::kProtocolMismatch);
  wrong = j;
  wrong.erase("generated");
  EXPECT_EQ(code_of([&] { embed_output_from_json(wrong); }), ErrorCode::kParse);
  wrong = j;
  wrong["boundaries"] = "nope";
  EXPECT_EQ(code_of([&] { embed_output_from_json(wrong); }), ErrorCode::kParse);
}

TEST(Io, FileErrors) {
  EXPECT_EQ(code_of([] { read_json_file("/nonexistent/dir/x.json"); }), ErrorCode::kIo);
  EXPECT_EQ(code_of([] { write_json_file("/nonexistent/dir/x.json", {}); }),
            ErrorCode::kIo);
  const auto path = std::filesystem::temp_directory_path() / "segmark_io_bad.json";
  {
    std::ofstream(path) << "{ not json";
  }
  EXPECT_EQ(code_of([&] { read_json_file(path); }), ErrorCode::kParse);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace segmark
