#pragma once

#include <array>
#include <cstdint>
#include <span>

#include <openssl/evp.h>

#include "otp/common.hpp"

namespace otp::sig {

inline constexpr std::size_t kDigestBytes = 28;
inline constexpr std::size_t kDigestBits = kDigestBytes * 8;

inline std::array<std::uint8_t, kDigestBytes> sha3_224(std::span<const std::uint8_t> msg) {
  std::array<std::uint8_t, kDigestBytes> out{};
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) fail(Errc::invalid_state, "digest context allocation failed");
  unsigned int len = 0;
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha3_224(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, msg.data(), msg.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, out.data(), &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok || len != kDigestBytes) fail(Errc::invalid_state, "sha3-224 failed");
  return out;
}

// Bit i of a digest, LSB-first within each byte.
inline int digest_bit(std::span<const std::uint8_t> digest, std::size_t i) {
  if (i / 8 >= digest.size()) fail(Errc::invalid_argument, "digest bit out of range");
  return (digest[i / 8] >> (i % 8)) & 1;
}

}  // namespace otp::sig
