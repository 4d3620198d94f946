// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdio>
#include <mutex>
#include <string>
#include <sys/types.h>

#include <nlohmann/json.hpp>

#include "segmark/lm.h"

namespace segmark {

// Line protocol spoken with an external model server over its stdio. One JSON
// object per line in each direction, exactly one response per request.
//
//   -> {"op":"hello","protocol":1}
//   <- {"model":"gpt2","ok":true,"protocol":1,"vocab_size":50257}
//   -> {"ids":[464,3290],"op":"next_logits"}
//   <- {"logits":"<base64 f32le>","ok":true}
//   -> {"ids":[464,3290,318],"op":"teacher_force"}
//   <- {"logits":["<base64 f32le>","<base64 f32le>"],"ok":true}
//   -> {"op":"shutdown"}
//   <- {"ok":true}
//
// Errors come back as {"error":{"code":"...","message":"..."},"ok":false}.
// Logit arrays are little-endian float32 encoded with standard base64.
inline constexpr int kBridgeProtocolVersion = 1;

namespace bridge {

std::string encode_f32(std::span<const double> values);
LogitsVector decode_f32(const std::string& b64, std::size_t expected_len);

nlohmann::json hello_request();
nlohmann::json next_logits_request(std::span<const TokenId> ids);
nlohmann::json teacher_force_request(std::span<const TokenId> ids);
nlohmann::json shutdown_request();

}  // namespace bridge

/// Client side of the bridge. Spawns `/bin/sh -c command`, performs the
/// hello handshake and serializes requests (one in flight).
class BridgeSource final : public LogitsSource {
 public:
  explicit BridgeSource(std::string command);
  ~BridgeSource() override;

  BridgeSource(const BridgeSource&) = delete;
  BridgeSource& operator=(const BridgeSource&) = delete;

  std::size_t vocab_size() const override { return vocab_size_; }
  LogitsVector next_logits(std::span<const TokenId> context) const override;
  std::vector<LogitsVector> teacher_force(
      std::span<const TokenId> text) const override;
  std::string describe() const override;

  const std::string& model() const noexcept { return model_; }

 private:
  nlohmann::json round_trip(const nlohmann::json& request) const;
  void shutdown() noexcept;

  std::string command_;
  std::string model_;
  std::size_t vocab_size_ = 0;
  pid_t child_ = -1;
  std::FILE* to_child_ = nullptr;
  std::FILE* from_child_ = nullptr;
  mutable std::mutex mu_;
};

}  // namespace segmark
