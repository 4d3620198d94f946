// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#include "segmark/trace_source.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "segmark/error.h"

namespace segmark {
namespace {

void append_double(std::string& line, double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v,
                           std::chars_format::general, 17);
  line.append(buf, res.ptr);
}

double parse_double(std::string_view tok, std::size_t line_no) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() ||
      !std::isfinite(v)) {
    throw Error(ErrorCode::kParse, "trace line " + std::to_string(line_no) +
                                       ": bad value '" + std::string(tok) + "'");
  }
  return v;
}

}  // namespace

void write_trace(std::ostream& out, const Trace& trace) {
  out << "segmark-trace " << kTraceFormatVersion << ' ' << trace.vocab_size
      << '\n';
  std::string line;
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    const auto& step = trace.steps[t];
    if (step.size() != trace.vocab_size) {
      throw Error(ErrorCode::kInvalidArgument, "trace step has wrong length");
    }
    line = std::to_string(t);
    for (double v : step) {
      line.push_back(' ');
      append_double(line, v);
    }
    out << line << '\n';
  }
}

void write_trace(const std::filesystem::path& path, const Trace& trace) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write_trace(out, trace);
}

Trace read_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kParse, "trace: missing header");
  }
  std::istringstream header(line);
  std::string magic;
  int version = 0;
  Trace trace;
  if (!(header >> magic >> version >> trace.vocab_size) ||
      magic != "segmark-trace") {
    throw Error(ErrorCode::kParse, "trace: bad header '" + line + "'");
  }
  if (version != kTraceFormatVersion) {
    throw Error(ErrorCode::kProtocolMismatch,
                "trace: unsupported version " + std::to_string(version));
  }
  Vocabulary::validate_size(trace.vocab_size);

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::string_view rest(line);
    auto next_token = [&rest]() {
      while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
      auto end = rest.find(' ');
      auto tok = rest.substr(0, end);
      rest.remove_prefix(end == std::string_view::npos ? rest.size() : end);
      return tok;
    };
    auto step_tok = next_token();
    std::size_t step = 0;
    auto res = std::from_chars(step_tok.data(), step_tok.data() + step_tok.size(), step);
    if (res.ec != std::errc() || step != trace.steps.size()) {
      throw Error(ErrorCode::kParse, "trace line " + std::to_string(line_no) +
                                         ": expected step " +
                                         std::to_string(trace.steps.size()));
    }
    LogitsVector logits;
    logits.reserve(trace.vocab_size);
    for (auto tok = next_token(); !tok.empty(); tok = next_token()) {
      logits.push_back(parse_double(tok, line_no));
    }
    if (logits.size() != trace.vocab_size) {
      throw Error(ErrorCode::kParse, "trace line " + std::to_string(line_no) +
                                         ": expected " +
                                         std::to_string(trace.vocab_size) +
                                         " values");
    }
    trace.steps.push_back(std::move(logits));
  }
  return trace;
}

Trace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return read_trace(in);
}

TraceSource::TraceSource(Trace trace) : trace_(std::move(trace)) {
  Vocabulary::validate_size(trace_.vocab_size);
}

LogitsVector TraceSource::next_logits(std::span<const TokenId> context) const {
  if (context.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "next_logits needs a context");
  }
  validate_ids(context, trace_.vocab_size);
  const std::size_t step = context.size() - 1;
  if (step >= trace_.steps.size()) {
    throw Error(ErrorCode::kTraceExhausted,
                "trace has " + std::to_string(trace_.steps.size()) +
                    " steps, requested step " + std::to_string(step));
  }
  return trace_.steps[step];
}

std::string TraceSource::describe() const {
  return "trace(vocab=" + std::to_string(trace_.vocab_size) +
         ",steps=" + std::to_string(trace_.steps.size()) + ")";
}

}  // namespace segmark
