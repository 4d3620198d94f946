// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#include "segmark/bridge_source.h"

#include <csignal>
#include <cstring>
#include <sys/wait.h>
#include <unistd.h>

#include <bit>

#include <sodium.h>

#include "segmark/error.h"

namespace segmark {
namespace bridge {

std::string encode_f32(std::span<const double> values) {
  static_assert(std::endian::native == std::endian::little,
                "bridge encoding assumes a little-endian host");
  std::vector<float> f(values.begin(), values.end());
  const auto* bytes = reinterpret_cast<const unsigned char*>(f.data());
  const std::size_t len = f.size() * sizeof(float);
  std::string out(sodium_base64_encoded_len(len, sodium_base64_VARIANT_ORIGINAL),
                  '\0');
  sodium_bin2base64(out.data(), out.size(), bytes, len,
                    sodium_base64_VARIANT_ORIGINAL);
  out.pop_back();  // trailing NUL
  return out;
}

LogitsVector decode_f32(const std::string& b64, std::size_t expected_len) {
  std::vector<float> f(expected_len);
  std::size_t bin_len = 0;
  const char* end = nullptr;
  if (sodium_base642bin(reinterpret_cast<unsigned char*>(f.data()),
                        f.size() * sizeof(float), b64.data(), b64.size(),
                        nullptr, &bin_len, &end,
                        sodium_base64_VARIANT_ORIGINAL) != 0 ||
      end != b64.data() + b64.size()) {
    throw Error(ErrorCode::kBridgeIo, "bridge: malformed base64 logits");
  }
  if (bin_len != expected_len * sizeof(float)) {
    throw Error(ErrorCode::kBridgeIo,
                "bridge: logits length " + std::to_string(bin_len / 4) +
                    " != vocab size " + std::to_string(expected_len));
  }
  return LogitsVector(f.begin(), f.end());
}

nlohmann::json hello_request() {
  return {{"op", "hello"}, {"protocol", kBridgeProtocolVersion}};
}

nlohmann::json next_logits_request(std::span<const TokenId> ids) {
  return {{"op", "next_logits"},
          {"ids", std::vector<TokenId>(ids.begin(), ids.end())}};
}

nlohmann::json teacher_force_request(std::span<const TokenId> ids) {
  return {{"op", "teacher_force"},
          {"ids", std::vector<TokenId>(ids.begin(), ids.end())}};
}

nlohmann::json shutdown_request() { return {{"op", "shutdown"}}; }

}  // namespace bridge

namespace {

template <typename T>
T field(const nlohmann::json& j, const char* name) {
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kBridgeIo,
                std::string("bridge: response lacks a valid '") + name + "'");
  }
}

}  // namespace

BridgeSource::BridgeSource(std::string command) : command_(std::move(command)) {
  if (sodium_init() < 0) {
    throw Error(ErrorCode::kBridgeIo, "libsodium initialization failed");
  }
  // A dead child must surface as a write error, not kill the process.
  std::signal(SIGPIPE, SIG_IGN);

  int in_pipe[2];   // parent -> child
  int out_pipe[2];  // child -> parent
  if (pipe(in_pipe) != 0) {
    throw Error(ErrorCode::kBridgeIo, "bridge: pipe() failed");
  }
  if (pipe(out_pipe) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw Error(ErrorCode::kBridgeIo, "bridge: pipe() failed");
  }
  child_ = fork();
  if (child_ < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
    throw Error(ErrorCode::kBridgeIo, "bridge: fork() failed");
  }
  if (child_ == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
    execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  to_child_ = fdopen(in_pipe[1], "w");
  from_child_ = fdopen(out_pipe[0], "r");

  try {
    const auto hello = round_trip(bridge::hello_request());
    if (!hello.contains("protocol") ||
        field<int>(hello, "protocol") != kBridgeProtocolVersion) {
      throw Error(ErrorCode::kProtocolMismatch,
                  "bridge: unsupported protocol version");
    }
    vocab_size_ = field<std::size_t>(hello, "vocab_size");
    model_ = hello.contains("model") ? field<std::string>(hello, "model") : "";
    Vocabulary::validate_size(vocab_size_);
  } catch (...) {
    shutdown();
    throw;
  }
}

BridgeSource::~BridgeSource() { shutdown(); }

void BridgeSource::shutdown() noexcept {
  if (to_child_ != nullptr) {
    const std::string line = bridge::shutdown_request().dump() + "\n";
    std::fputs(line.c_str(), to_child_);
    std::fflush(to_child_);
    std::fclose(to_child_);
    to_child_ = nullptr;
  }
  if (from_child_ != nullptr) {
    std::fclose(from_child_);
    from_child_ = nullptr;
  }
  if (child_ > 0) {
    int status = 0;
    waitpid(child_, &status, 0);
    child_ = -1;
  }
}

nlohmann::json BridgeSource::round_trip(const nlohmann::json& request) const {
  std::lock_guard<std::mutex> lock(mu_);
  if (to_child_ == nullptr || from_child_ == nullptr) {
    throw Error(ErrorCode::kBridgeIo, "bridge: not connected");
  }
  const std::string line = request.dump() + "\n";
  if (std::fputs(line.c_str(), to_child_) < 0 || std::fflush(to_child_) != 0) {
    throw Error(ErrorCode::kBridgeIo, "bridge: write failed");
  }

  std::string response;
  char buf[1 << 16];
  while (std::fgets(buf, sizeof(buf), from_child_) != nullptr) {
    response.append(buf);
    if (!response.empty() && response.back() == '\n') break;
  }
  if (response.empty() || response.back() != '\n') {
    throw Error(ErrorCode::kBridgeIo, "bridge: server closed the stream");
  }

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(response);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kBridgeIo,
                std::string("bridge: malformed response: ") + e.what());
  }
  if (!j.is_object()) {
    throw Error(ErrorCode::kBridgeIo, "bridge: response is not an object");
  }
  const auto ok = j.find("ok");
  if (ok == j.end() || !ok->is_boolean() || !ok->get<bool>()) {
    std::string msg = "bridge: server error";
    if (j.contains("error") && j["error"].is_object()) {
      msg += " [" + j["error"].value("code", "?") + "] " +
             j["error"].value("message", "");
    }
    throw Error(ErrorCode::kBridgeIo, msg);
  }
  return j;
}

LogitsVector BridgeSource::next_logits(std::span<const TokenId> context) const {
  if (context.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "next_logits needs a context");
  }
  validate_ids(context, vocab_size_);
  const auto j = round_trip(bridge::next_logits_request(context));
  return bridge::decode_f32(field<std::string>(j, "logits"), vocab_size_);
}

std::vector<LogitsVector> BridgeSource::teacher_force(
    std::span<const TokenId> text) const {
  if (text.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "teacher_force on empty text");
  }
  validate_ids(text, vocab_size_);
  const auto j = round_trip(bridge::teacher_force_request(text));
  const auto arr = field<std::vector<std::string>>(j, "logits");
  if (arr.size() != text.size() - 1) {
    throw Error(ErrorCode::kBridgeIo, "bridge: teacher_force count mismatch");
  }
  std::vector<LogitsVector> out;
  out.reserve(arr.size());
  for (const auto& item : arr) {
    out.push_back(bridge::decode_f32(item, vocab_size_));
  }
  return out;
}

std::string BridgeSource::describe() const {
  return "bridge(model=" + model_ + ",vocab=" + std::to_string(vocab_size_) +
         ")";
}

}  // namespace segmark
