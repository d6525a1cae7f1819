#pragma once

#include <cstddef>
#include <cstdint>
#include <unordered_map>
#include <vector>

namespace rmc::detail {

/// Bump allocator over one rank's shared segment with a size-segregated free
/// list. 8-byte aligned. Containers are phase-oriented and rarely free, so
/// nothing fancier is needed; an exact-size free-list hit may hand back the
/// most recently freed block.
class SegmentAllocator {
public:
  SegmentAllocator() = default;
  SegmentAllocator(uint64_t begin, uint64_t end) : bump_(begin), end_(end) {}

  /// Returns the offset of a fresh block, or 0 on exhaustion (offset 0 is in
  /// the reserved header, so it is never a valid allocation).
  uint64_t alloc(size_t bytes) {
    size_t sz = round8(bytes == 0 ? 1 : bytes);
    if (auto it = free_.find(sz); it != free_.end() && !it->second.empty()) {
      uint64_t off = it->second.back();
      it->second.pop_back();
      live_[off] = sz;
      return off;
    }
    if (bump_ + sz > end_) return 0;
    uint64_t off = bump_;
    bump_ += sz;
    live_[off] = sz;
    return off;
  }

  /// True on success; false if `off` is not a live allocation (double free or
  /// a pointer this rank never produced).
  bool dealloc(uint64_t off) {
    auto it = live_.find(off);
    if (it == live_.end()) return false;
    free_[it->second].push_back(off);
    live_.erase(it);
    return true;
  }

  uint64_t used() const { return bump_; }

private:
  static size_t round8(size_t n) { return (n + 7) & ~size_t(7); }

  uint64_t bump_ = 0;
  uint64_t end_ = 0;
  std::unordered_map<size_t, std::vector<uint64_t>> free_;
  std::unordered_map<uint64_t, size_t> live_;
};

}  // namespace rmc::detail
