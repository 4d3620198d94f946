// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "segmark/embedder.h"
#include "segmark/eval.h"
#include "segmark/extractor.h"

namespace segmark {

// Versioned JSON documents. Every document carries "format" and "version".
inline constexpr int kDocumentVersion = 1;
inline constexpr const char* kEmbedFormat = "segmark-embed";
inline constexpr const char* kExtractFormat = "segmark-extract";
inline constexpr const char* kReportFormat = "segmark-report";

nlohmann::json to_json(const Manifest& manifest);
Manifest manifest_from_json(const nlohmann::json& j);

// Throws kProtocolMismatch if the manifest was produced under different
// partition protocol constants, document version or vocabulary size.
void verify_manifest(const Manifest& manifest, std::size_t vocab_size);

nlohmann::json to_json(const EmbedOutput& out, bool include_trace = true);
EmbedOutput embed_output_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ExtractionResult& result);
ExtractionResult extraction_result_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EvalReport& report);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path,
                     const nlohmann::json& doc);

}  // namespace segmark
