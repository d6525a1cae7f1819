#pragma once

#include <cstddef>
#include <cstdint>
#include <type_traits>

namespace rmc {

/// Global pointer: (rank, byte offset into that rank's shared segment).
/// Plain data -- it can be stored in global memory, shipped between ranks and
/// read back bit-identically. {rank 0, offset 0} is reserved as null (offset 0
/// lies in the runtime's control header and is never handed out by alloc).
template <typename T>
struct GlobalPtr {
  uint64_t offset = 0;
  uint32_t rank = 0;

  constexpr GlobalPtr() = default;
  constexpr GlobalPtr(uint32_t r, uint64_t off) : offset(off), rank(r) {}

  constexpr explicit operator bool() const { return !(rank == 0 && offset == 0); }

  constexpr friend bool operator==(GlobalPtr a, GlobalPtr b) {
    return a.rank == b.rank && a.offset == b.offset;
  }
  constexpr friend bool operator!=(GlobalPtr a, GlobalPtr b) { return !(a == b); }

  constexpr GlobalPtr operator+(ptrdiff_t n) const {
    return GlobalPtr(rank, offset + static_cast<uint64_t>(n * ptrdiff_t(sizeof(T))));
  }
  constexpr GlobalPtr operator-(ptrdiff_t n) const { return *this + (-n); }
  constexpr ptrdiff_t operator-(GlobalPtr other) const {
    return static_cast<ptrdiff_t>(offset - other.offset) / ptrdiff_t(sizeof(T));
  }
  GlobalPtr& operator+=(ptrdiff_t n) { return *this = *this + n; }
  GlobalPtr& operator++() { return *this += 1; }

  /// Reinterpret as a pointer to U at the same global address.
  template <typename U>
  constexpr GlobalPtr<U> cast() const {
    return GlobalPtr<U>(rank, offset);
  }

  /// Raw local pointer; only valid when rank == my rank. Defined in runtime.hpp.
  T* local() const;
};

template <typename T>
inline constexpr GlobalPtr<T> nullgptr{};

static_assert(std::is_trivially_copyable_v<GlobalPtr<int>>);
static_assert(sizeof(GlobalPtr<int>) == 16);

}  // namespace rmc
