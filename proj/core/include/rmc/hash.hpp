#pragma once

#include <cstdint>
#include <cstring>
#include <functional>
#include <string>
#include <string_view>
#include <type_traits>

namespace rmc {

/// 64-bit avalanche finalizer (splitmix64). Every output bit depends on every
/// input bit, which quadratic probing and the Bloom filter both rely on.
constexpr uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a over bytes, avalanched. Deterministic across platforms so tests can
/// compare hashes between backends and against oracles.
inline uint64_t hash_bytes(const void* data, size_t len, uint64_t seed = 0) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

/// Default hash used by the containers: reproducible 64-bit avalanche hash.
/// Integral keys and byte ranges hash deterministically; anything else falls
/// back to std::hash and gets avalanched on top.
template <typename T, typename Enable = void>
struct HashFn {
  uint64_t operator()(const T& v) const { return mix64(std::hash<T>{}(v)); }
};

template <typename T>
struct HashFn<T, std::enable_if_t<std::is_integral_v<T> || std::is_enum_v<T>>> {
  uint64_t operator()(T v) const { return mix64(static_cast<uint64_t>(v)); }
};

template <>
struct HashFn<std::string> {
  uint64_t operator()(const std::string& s) const { return hash_bytes(s.data(), s.size()); }
};

template <>
struct HashFn<std::string_view> {
  uint64_t operator()(std::string_view s) const { return hash_bytes(s.data(), s.size()); }
};

}  // namespace rmc
