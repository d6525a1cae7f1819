#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>

namespace rmc::detail {

// Word-granular copies into/out of shared segments. Racing readers must see
// whole 32/64-bit aligned words, never torn bytes, so the bulk of every copy
// moves 8-byte words with atomic loads/stores (release on the write side,
// acquire on the read side). Unaligned head/tail bytes go one byte at a time.

inline void copy_to_segment(void* dst, const void* src, size_t n) {
  auto* d = static_cast<unsigned char*>(dst);
  const auto* s = static_cast<const unsigned char*>(src);
  while (n > 0 && (reinterpret_cast<uintptr_t>(d) & 7) != 0) {
    __atomic_store_n(d++, *s++, __ATOMIC_RELEASE);
    --n;
  }
  while (n >= 8) {
    uint64_t w;
    std::memcpy(&w, s, 8);
    __atomic_store_n(reinterpret_cast<uint64_t*>(d), w, __ATOMIC_RELEASE);
    d += 8;
    s += 8;
    n -= 8;
  }
  while (n > 0) {
    __atomic_store_n(d++, *s++, __ATOMIC_RELEASE);
    --n;
  }
}

inline void copy_from_segment(void* dst, const void* src, size_t n) {
  auto* d = static_cast<unsigned char*>(dst);
  const auto* s = static_cast<const unsigned char*>(src);
  while (n > 0 && (reinterpret_cast<uintptr_t>(s) & 7) != 0) {
    *d++ = __atomic_load_n(s++, __ATOMIC_ACQUIRE);
    --n;
  }
  while (n >= 8) {
    uint64_t w = __atomic_load_n(reinterpret_cast<const uint64_t*>(s), __ATOMIC_ACQUIRE);
    std::memcpy(d, &w, 8);
    d += 8;
    s += 8;
    n -= 8;
  }
  while (n > 0) {
    *d++ = __atomic_load_n(s++, __ATOMIC_ACQUIRE);
    --n;
  }
}

// Hardware atomics on segment words, sequentially consistent to emulate the
// NIC-side total order. Used by the threads backend directly and by the
// socket backend's memory agent (under its per-segment lock).

template <typename W>
inline W seg_cas(void* addr, W expected, W desired) {
  __atomic_compare_exchange_n(static_cast<W*>(addr), &expected, desired,
                              /*weak=*/false, __ATOMIC_SEQ_CST, __ATOMIC_SEQ_CST);
  return expected;  // holds the prior value on both success and failure
}

template <typename W>
inline W seg_faa(void* addr, W delta) {
  return __atomic_fetch_add(static_cast<W*>(addr), delta, __ATOMIC_SEQ_CST);
}

template <typename W>
inline W seg_for(void* addr, W bits) {
  return __atomic_fetch_or(static_cast<W*>(addr), bits, __ATOMIC_SEQ_CST);
}

template <typename W>
inline W seg_fand(void* addr, W bits) {
  return __atomic_fetch_and(static_cast<W*>(addr), bits, __ATOMIC_SEQ_CST);
}

template <typename W>
inline W seg_fxor(void* addr, W bits) {
  return __atomic_fetch_xor(static_cast<W*>(addr), bits, __ATOMIC_SEQ_CST);
}

template <typename W>
inline W seg_load(const void* addr) {
  return __atomic_load_n(static_cast<const W*>(addr), __ATOMIC_SEQ_CST);
}

template <typename W>
inline void seg_store(void* addr, W v) {
  __atomic_store_n(static_cast<W*>(addr), v, __ATOMIC_SEQ_CST);
}

}  // namespace rmc::detail
