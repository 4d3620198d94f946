// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace segmark {

enum class ErrorCode {
  kInvalidArgument,
  kOutOfRange,
  kTraceExhausted,
  kBridgeIo,
  kIo,
  kParse,
  kProtocolMismatch,
  kInfeasible,
  kZeroProbability,
};

const char* to_string(ErrorCode code);

// All library failures surface as this exception type. The code is stable and
// is what the CLI maps onto process exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace segmark
