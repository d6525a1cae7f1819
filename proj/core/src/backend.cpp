#include "rmc/backend.hpp"

namespace rmc {

namespace {

template <typename W, typename F>
W cas_loop(Backend& b, int rank, uint64_t offset, F next,
           W (Backend::*cas)(int, uint64_t, W, W)) {
  W old;
  b.read(rank, offset, &old, sizeof(W));
  for (;;) {
    W prev = (b.*cas)(rank, offset, old, next(old));
    if (prev == old) return prev;
    old = prev;
  }
}

}  // namespace

uint32_t Backend::faa32(int rank, uint64_t offset, uint32_t delta) {
  return cas_loop<uint32_t>(*this, rank, offset,
                            [delta](uint32_t v) { return v + delta; }, &Backend::cas32);
}

uint64_t Backend::faa64(int rank, uint64_t offset, uint64_t delta) {
  return cas_loop<uint64_t>(*this, rank, offset,
                            [delta](uint64_t v) { return v + delta; }, &Backend::cas64);
}

uint32_t Backend::for32(int rank, uint64_t offset, uint32_t bits) {
  return cas_loop<uint32_t>(*this, rank, offset,
                            [bits](uint32_t v) { return v | bits; }, &Backend::cas32);
}

uint64_t Backend::for64(int rank, uint64_t offset, uint64_t bits) {
  return cas_loop<uint64_t>(*this, rank, offset,
                            [bits](uint64_t v) { return v | bits; }, &Backend::cas64);
}

uint32_t Backend::fand32(int rank, uint64_t offset, uint32_t bits) {
  return cas_loop<uint32_t>(*this, rank, offset,
                            [bits](uint32_t v) { return v & bits; }, &Backend::cas32);
}

uint64_t Backend::fand64(int rank, uint64_t offset, uint64_t bits) {
  return cas_loop<uint64_t>(*this, rank, offset,
                            [bits](uint64_t v) { return v & bits; }, &Backend::cas64);
}

uint32_t Backend::fxor32(int rank, uint64_t offset, uint32_t bits) {
  return cas_loop<uint32_t>(*this, rank, offset,
                            [bits](uint32_t v) { return v ^ bits; }, &Backend::cas32);
}

uint64_t Backend::fxor64(int rank, uint64_t offset, uint64_t bits) {
  return cas_loop<uint64_t>(*this, rank, offset,
                            [bits](uint64_t v) { return v ^ bits; }, &Backend::cas64);
}

}  // namespace rmc
