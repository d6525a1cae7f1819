#pragma once

#include <cstdint>

namespace rmc {

/// Concurrency promise: a caller-asserted bitmask of the operation kinds that
/// may run concurrently with the call. Containers use it to pick a cheaper
/// implementation variant. Promises are never verified at run time; a wrong
/// promise is undefined behaviour by contract.
///
/// A default-constructed (empty) promise means "no assertion": the container
/// uses its fully atomic variant.
class ConcurrencyPromise {
public:
  constexpr ConcurrencyPromise() = default;
  constexpr explicit ConcurrencyPromise(uint32_t bits) : bits_(bits) {}

  constexpr friend ConcurrencyPromise operator|(ConcurrencyPromise a, ConcurrencyPromise b) {
    return ConcurrencyPromise(a.bits_ | b.bits_);
  }
  constexpr bool has(ConcurrencyPromise p) const { return (bits_ & p.bits_) == p.bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr friend bool operator==(ConcurrencyPromise a, ConcurrencyPromise b) {
    return a.bits_ == b.bits_;
  }

private:
  uint32_t bits_ = 0;
};

namespace promise {
// hash map operation kinds
inline constexpr ConcurrencyPromise insert{1u << 0};
inline constexpr ConcurrencyPromise find{1u << 1};
// queue operation kinds
inline constexpr ConcurrencyPromise push{1u << 2};
inline constexpr ConcurrencyPromise pop{1u << 3};
// only the owning rank touches the structure, with plain CPU instructions
inline constexpr ConcurrencyPromise local{1u << 4};
}  // namespace promise

}  // namespace rmc
