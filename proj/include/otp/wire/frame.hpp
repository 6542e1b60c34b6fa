#pragma once

#include <cstdint>
#include <cstring>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "otp/common.hpp"

namespace otp::wire {

inline constexpr char kFrameMagic[4] = {'O', 'T', 'P', '1'};
inline constexpr std::size_t kMaxPayload = 16u << 20;
inline constexpr std::size_t kHeaderSize = 4 + 1 + 8 + 4;  // magic, type, session, length

enum class MsgType : std::uint8_t {
  hello = 1,
  table_digest = 2,
  detection_digest = 3,
  coinc_confirm = 4,
  propose_batch = 5,
  respond_batch = 6,
  reveal_batch = 7,
  test_lines = 8,
  sign_submit = 9,
  verify_result = 10,
  abort = 11,
};

inline bool valid_msg_type(std::uint8_t t) {
  return t >= 1 && t <= 11;
}

struct Frame {
  MsgType type = MsgType::abort;
  std::uint64_t session_id = 0;
  std::vector<std::uint8_t> payload;
};

inline std::vector<std::uint8_t> encode_frame(const Frame& f) {
  if (f.payload.size() > kMaxPayload) fail(Errc::oversize, "frame payload too large");
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + f.payload.size() + 4);
  put_bytes(out, std::span(reinterpret_cast<const std::uint8_t*>(kFrameMagic), 4));
  put_u8(out, static_cast<std::uint8_t>(f.type));
  put_u64(out, f.session_id);
  put_u32(out, static_cast<std::uint32_t>(f.payload.size()));
  put_bytes(out, f.payload);
  put_u32(out, crc32_bytes(out));
  return out;
}

// Incremental decoder for stream transports; tolerates arbitrary chunking.
class FrameDecoder {
 public:
  void feed(std::span<const std::uint8_t> bytes) { buf_.insert(buf_.end(), bytes.begin(), bytes.end()); }

  // Extracts the next complete frame, or nullopt if more bytes are needed.
  // Throws on any malformed prefix; the stream is unusable afterwards.
  std::optional<Frame> next() {
    if (buf_.size() < kHeaderSize) {
      check_magic_prefix();
      return std::nullopt;
    }
    check_magic_prefix();
    const std::uint8_t type = buf_[4];
    if (!valid_msg_type(type)) fail(Errc::malformed, "unknown message type");
    std::uint64_t session = 0;
    for (int i = 0; i < 8; ++i) session |= static_cast<std::uint64_t>(buf_[5 + i]) << (8 * i);
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(buf_[13 + i]) << (8 * i);
    if (len > kMaxPayload) fail(Errc::oversize, "frame payload too large");
    const std::size_t total = kHeaderSize + len + 4;
    if (buf_.size() < total) return std::nullopt;
    std::vector<std::uint8_t> raw(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(total));
    const std::uint32_t stored = static_cast<std::uint32_t>(raw[total - 4]) |
                                 (static_cast<std::uint32_t>(raw[total - 3]) << 8) |
                                 (static_cast<std::uint32_t>(raw[total - 2]) << 16) |
                                 (static_cast<std::uint32_t>(raw[total - 1]) << 24);
    if (crc32_bytes(std::span(raw).first(total - 4)) != stored)
      fail(Errc::checksum_mismatch, "frame checksum mismatch");
    Frame f;
    f.type = static_cast<MsgType>(type);
    f.session_id = session;
    f.payload.assign(raw.begin() + kHeaderSize, raw.end() - 4);
    buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(total));
    return f;
  }

  std::size_t buffered() const { return buf_.size(); }

 private:
  void check_magic_prefix() const {
    const std::size_t n = std::min<std::size_t>(buf_.size(), 4);
    for (std::size_t i = 0; i < n; ++i)
      if (buf_[i] != static_cast<std::uint8_t>(kFrameMagic[i]))
        fail(Errc::bad_magic, "bad frame magic");
  }

  std::deque<std::uint8_t> buf_;
};

// Single-shot decode; returns the frame and the bytes consumed.
inline std::pair<Frame, std::size_t> decode_frame(std::span<const std::uint8_t> bytes) {
  FrameDecoder dec;
  dec.feed(bytes);
  const std::size_t before = dec.buffered();
  auto f = dec.next();
  if (!f) fail(Errc::truncated, "incomplete frame");
  return {std::move(*f), before - dec.buffered()};
}

}  // namespace otp::wire
