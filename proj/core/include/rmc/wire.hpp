#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace rmc::wire {

// Socket backend wire protocol. Little-endian framed messages:
//
//   { opcode : u8, rank : u16, offset : u64, len : u32, payload[len] }
//
// `rank` carries the sender's rank. For READ requests `len` is the number of
// bytes requested and the payload is empty; for everything else `len` is the
// payload size. Responses echo the request opcode with the high bit set.
// BARRIER_HINT doubles as the rendezvous hello: its offset field carries the
// sender's segment size so mismatched worlds fail fast.

enum Opcode : uint8_t {
  kRead = 1,
  kWrite = 2,
  kCas32 = 3,
  kCas64 = 4,
  kFaa64 = 5,
  kFor32 = 6,
  kFor64 = 7,
  kFand32 = 8,
  kFand64 = 9,
  kBarrierHint = 10,
};

inline constexpr uint8_t kResponseBit = 0x80;
inline constexpr size_t kHeaderBytes = 1 + 2 + 8 + 4;

struct Header {
  uint8_t opcode = 0;
  uint16_t rank = 0;
  uint64_t offset = 0;
  uint32_t len = 0;
};

inline void put_u16(uint8_t* p, uint16_t v) {
  p[0] = uint8_t(v);
  p[1] = uint8_t(v >> 8);
}
inline void put_u32(uint8_t* p, uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = uint8_t(v >> (8 * i));
}
inline void put_u64(uint8_t* p, uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = uint8_t(v >> (8 * i));
}
inline uint16_t get_u16(const uint8_t* p) { return uint16_t(p[0]) | uint16_t(p[1]) << 8; }
inline uint32_t get_u32(const uint8_t* p) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= uint32_t(p[i]) << (8 * i);
  return v;
}
inline uint64_t get_u64(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= uint64_t(p[i]) << (8 * i);
  return v;
}

inline void encode_header(const Header& h, uint8_t out[kHeaderBytes]) {
  out[0] = h.opcode;
  put_u16(out + 1, h.rank);
  put_u64(out + 3, h.offset);
  put_u32(out + 11, h.len);
}

inline Header decode_header(const uint8_t in[kHeaderBytes]) {
  Header h;
  h.opcode = in[0];
  h.rank = get_u16(in + 1);
  h.offset = get_u64(in + 3);
  h.len = get_u32(in + 11);
  return h;
}

/// Payload byte count that follows a header on the wire. A READ request
/// carries none (len is the byte count wanted); everything else carries len.
inline size_t payload_bytes(const Header& h) {
  return h.opcode == kRead ? 0 : h.len;
}

/// Append a complete frame to `out`.
inline void append_frame(std::vector<uint8_t>& out, const Header& h, const void* payload) {
  uint8_t hdr[kHeaderBytes];
  encode_header(h, hdr);
  out.insert(out.end(), hdr, hdr + kHeaderBytes);
  size_t n = payload_bytes(h);
  if (n > 0) {
    const auto* p = static_cast<const uint8_t*>(payload);
    out.insert(out.end(), p, p + n);
  }
}

}  // namespace rmc::wire
