// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#include "segmark/color_oracle.h"

#include <numeric>

#include <sodium.h>

#include "segmark/error.h"
#include "segmark/rng.h"

namespace segmark {
namespace {

void ensure_sodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw Error(ErrorCode::kInvalidArgument, "libsodium init failed");
}

constexpr std::string_view kKdfContext = "segmark/partition/v1";

std::array<std::uint8_t, crypto_shorthash_KEYBYTES> derive_siphash_key(
    const SecretKey& key) {
  ensure_sodium();
  std::array<std::uint8_t, crypto_shorthash_KEYBYTES> out{};
  // BLAKE2b keyed with the secret over a fixed context string. Keys longer
  // than the BLAKE2b key limit are first compressed.
  auto secret = key.bytes();
  std::array<std::uint8_t, crypto_generichash_KEYBYTES_MAX> compressed{};
  if (secret.size() > crypto_generichash_KEYBYTES_MAX) {
    crypto_generichash(compressed.data(), compressed.size(), secret.data(),
                       secret.size(), nullptr, 0);
    secret = compressed;
  }
  crypto_generichash(out.data(), out.size(),
                     reinterpret_cast<const unsigned char*>(kKdfContext.data()),
                     kKdfContext.size(), secret.data(), secret.size());
  return out;
}

// Fisher-Yates driven by 32-bit halves of counter draws, each reduced with
// Lemire's multiply-and-reject. Low half first, then high half.
ColorPartition shuffle_partition(std::uint64_t seed, std::size_t vocab_size) {
  std::vector<TokenId> perm(vocab_size);
  std::iota(perm.begin(), perm.end(), TokenId{0});
  std::uint64_t counter = 0;
  std::uint64_t word = 0;
  bool have_high = false;
  auto next32 = [&]() -> std::uint32_t {
    if (have_high) {
      have_high = false;
      return static_cast<std::uint32_t>(word >> 32);
    }
    word = counter_draw(seed, counter++);
    have_high = true;
    return static_cast<std::uint32_t>(word);
  };
  for (std::size_t i = vocab_size - 1; i > 0; --i) {
    const auto bound = static_cast<std::uint32_t>(i + 1);
    std::uint64_t m = static_cast<std::uint64_t>(next32()) * bound;
    auto low = static_cast<std::uint32_t>(m);
    if (low < bound) {
      const std::uint32_t threshold = (0u - bound) % bound;
      while (low < threshold) {
        m = static_cast<std::uint64_t>(next32()) * bound;
        low = static_cast<std::uint32_t>(m);
      }
    }
    std::swap(perm[i], perm[static_cast<std::size_t>(m >> 32)]);
  }
  std::vector<std::uint8_t> mask(vocab_size, 0);
  for (std::size_t i = 0; i < vocab_size / 2; ++i) mask[perm[i]] = 1;
  return ColorPartition(std::move(mask));
}

void check_args(TokenId prev_token, std::size_t vocab_size) {
  if (vocab_size < 2 || vocab_size % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "partition requires an even vocabulary size");
  }
  if (prev_token >= vocab_size) {
    throw Error(ErrorCode::kOutOfRange, "previous token id out of range");
  }
}

}  // namespace

SecretKey::SecretKey(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {
  if (bytes_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "secret key must be non-empty");
  }
}

SecretKey SecretKey::from_string(std::string_view text) {
  return SecretKey(std::vector<std::uint8_t>(text.begin(), text.end()));
}

SecretKey SecretKey::from_hex(std::string_view hex) {
  ensure_sodium();
  std::vector<std::uint8_t> bytes(hex.size() / 2 + 1);
  std::size_t len = 0;
  const char* end = nullptr;
  if (sodium_hex2bin(bytes.data(), bytes.size(), hex.data(), hex.size(),
                     nullptr, &len, &end) != 0 ||
      end != hex.data() + hex.size()) {
    throw Error(ErrorCode::kParse, "secret key: invalid hex");
  }
  bytes.resize(len);
  return SecretKey(std::move(bytes));
}

std::string SecretKey::fingerprint() const {
  ensure_sodium();
  std::array<unsigned char, 8> digest{};
  static constexpr std::string_view kLabel = "segmark/fingerprint/v1";
  auto secret = bytes();
  std::array<std::uint8_t, crypto_generichash_KEYBYTES_MAX> compressed{};
  if (secret.size() > crypto_generichash_KEYBYTES_MAX) {
    crypto_generichash(compressed.data(), compressed.size(), secret.data(),
                       secret.size(), nullptr, 0);
    secret = compressed;
  }
  crypto_generichash(digest.data(), digest.size(),
                     reinterpret_cast<const unsigned char*>(kLabel.data()),
                     kLabel.size(), secret.data(), secret.size());
  std::string hex(digest.size() * 2 + 1, '\0');
  sodium_bin2hex(hex.data(), hex.size(), digest.data(), digest.size());
  hex.pop_back();
  return hex;
}

ColorPartition::ColorPartition(std::vector<std::uint8_t> green_mask)
    : mask_(std::move(green_mask)) {}

std::vector<TokenId> ColorPartition::green() const {
  std::vector<TokenId> ids;
  ids.reserve(mask_.size() / 2);
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    if (mask_[i]) ids.push_back(static_cast<TokenId>(i));
  }
  return ids;
}

std::vector<TokenId> ColorPartition::red() const {
  std::vector<TokenId> ids;
  ids.reserve(mask_.size() / 2);
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    if (!mask_[i]) ids.push_back(static_cast<TokenId>(i));
  }
  return ids;
}

const ColorProtocol& color_protocol() {
  static const ColorProtocol kProtocol{
      "siphash24(blake2b-128(key,\"segmark/partition/v1\"),u64le(prev))",
      "fisher-yates/splitmix64-counter/lemire32x2", 1};
  return kProtocol;
}

ColorOracle::ColorOracle(const SecretKey& key, std::size_t vocab_size)
    : vocab_size_(vocab_size) {
  check_args(0, vocab_size);
  const auto k = derive_siphash_key(key);
  std::copy(k.begin(), k.end(), siphash_key_.begin());
}

std::uint64_t ColorOracle::seed_for(TokenId prev_token) const {
  std::array<unsigned char, 8> in{};
  const auto prev = static_cast<std::uint64_t>(prev_token);
  for (int i = 0; i < 8; ++i) in[i] = static_cast<unsigned char>(prev >> (8 * i));
  std::array<unsigned char, crypto_shorthash_BYTES> out{};
  crypto_shorthash(out.data(), in.data(), in.size(), siphash_key_.data());
  std::uint64_t seed = 0;
  for (int i = 0; i < 8; ++i) seed |= static_cast<std::uint64_t>(out[i]) << (8 * i);
  return seed;
}

const ColorPartition& ColorOracle::partition(TokenId prev_token) {
  check_args(prev_token, vocab_size_);
  auto it = cache_.find(prev_token);
  if (it == cache_.end()) {
    it = cache_.emplace(prev_token,
                        shuffle_partition(seed_for(prev_token), vocab_size_))
             .first;
  }
  return it->second;
}

ColorPartition partition_for(const SecretKey& key, TokenId prev_token,
                             std::size_t vocab_size) {
  check_args(prev_token, vocab_size);
  ColorOracle oracle(key, vocab_size);
  return oracle.partition(prev_token);
}

Color color_of(const SecretKey& key, TokenId prev_token, TokenId token,
               std::size_t vocab_size) {
  if (token >= vocab_size) {
    throw Error(ErrorCode::kOutOfRange, "token id out of range");
  }
  return partition_for(key, prev_token, vocab_size).color(token);
}

}  // namespace segmark
