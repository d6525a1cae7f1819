#pragma once

#include <cstdint>
#include <cstring>
#include <random>
#include <string>
#include <type_traits>
#include <vector>

#include "rmc/allocator.hpp"
#include "rmc/backend.hpp"
#include "rmc/backoff.hpp"
#include "rmc/errors.hpp"
#include "rmc/global_ptr.hpp"

namespace rmc {

/// Per-rank tallies of one-sided operations, counted at the API boundary:
/// one tick per call regardless of payload size (the best-case cost model).
struct OpCounts {
  uint64_t reads = 0;
  uint64_t writes = 0;
  uint64_t atomics = 0;
  uint64_t barriers = 0;

  friend OpCounts operator-(OpCounts a, OpCounts b) {
    return {a.reads - b.reads, a.writes - b.writes, a.atomics - b.atomics,
            a.barriers - b.barriers};
  }
  friend bool operator==(const OpCounts& a, const OpCounts& b) {
    return a.reads == b.reads && a.writes == b.writes && a.atomics == b.atomics &&
           a.barriers == b.barriers;
  }
};

namespace detail {

// Reserved header at the front of every segment:
//   [0]  barrier arrival counter (rank 0's copy is the live one)
//   [8]  barrier generation
//   [64] collective scratch: nprocs gather slots + 1 result slot
inline constexpr uint64_t kBarrierArrivals = 0;
inline constexpr uint64_t kBarrierGen = 8;
inline constexpr uint64_t kScratchBase = 64;
inline constexpr uint64_t kScratchSlot = 256;

inline uint64_t reserved_bytes(int nprocs) {
  return kScratchBase + (uint64_t(nprocs) + 1) * kScratchSlot;
}

}  // namespace detail

/// One Runtime per rank per program run. Owns the rank's view of the backend,
/// the segment allocator and the op counters. Core operations are not
/// required to be callable from multiple threads within a rank.
class Runtime {
public:
  Runtime(Backend& backend, bool owns_backend);
  ~Runtime();

  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  int rank() const noexcept { return backend_.rank(); }
  int nprocs() const noexcept { return backend_.nprocs(); }
  size_t segment_size() const noexcept { return backend_.segment_size(); }
  Backend& backend() noexcept { return backend_; }
  std::byte* segment() noexcept { return backend_.local_segment(); }

  OpCounts& ops() noexcept { return ops_; }
  detail::SegmentAllocator& allocator() noexcept { return alloc_; }
  uint64_t next_barrier_gen() noexcept { return ++barrier_gen_; }
  std::mt19937_64& rng() noexcept { return rng_; }

private:
  Backend& backend_;
  bool owns_backend_;
  detail::SegmentAllocator alloc_;
  OpCounts ops_;
  uint64_t barrier_gen_ = 0;
  std::mt19937_64 rng_;
};

namespace detail {
inline thread_local Runtime* tl_runtime = nullptr;
}

inline bool initialized() { return detail::tl_runtime != nullptr; }

inline Runtime& runtime() {
  if (!detail::tl_runtime) throw usage_error("no active runtime on this thread (init first)");
  return *detail::tl_runtime;
}

inline int rank() { return runtime().rank(); }
inline int nprocs() { return runtime().nprocs(); }

inline OpCounts op_snapshot() { return runtime().ops(); }
inline void op_reset() { runtime().ops() = OpCounts{}; }

// ---------------------------------------------------------------------------
// Memory management

template <typename T>
GlobalPtr<T> alloc(size_t n = 1) {
  Runtime& rt = runtime();
  uint64_t off = rt.allocator().alloc(n * sizeof(T));
  if (off == 0) {
    throw bad_alloc("shared segment exhausted on rank " + std::to_string(rt.rank()) +
                    " allocating " + std::to_string(n * sizeof(T)) + " bytes");
  }
  return GlobalPtr<T>(static_cast<uint32_t>(rt.rank()), off);
}

template <typename T>
void dealloc(GlobalPtr<T> p) {
  Runtime& rt = runtime();
  if (!p) return;
  if (p.rank != static_cast<uint32_t>(rt.rank()))
    throw usage_error("dealloc of a pointer owned by another rank");
  if (!rt.allocator().dealloc(p.offset))
    throw usage_error("dealloc of an unknown or already-freed pointer");
}

namespace detail {

inline void check_range(Runtime& rt, uint64_t offset, size_t len, const char* what) {
  if (offset + len > rt.segment_size() || offset + len < offset)
    throw usage_error(std::string(what) + ": out of segment bounds");
}

template <typename W>
void check_word(Runtime& rt, GlobalPtr<W> p, const char* what) {
  static_assert(std::is_same_v<W, uint32_t> || std::is_same_v<W, uint64_t>,
                "atomics are defined for 32- and 64-bit words only");
  if (p.offset % sizeof(W) != 0)
    throw usage_error(std::string(what) + ": misaligned word");
  check_range(rt, p.offset, sizeof(W), what);
  if (p.rank >= static_cast<uint32_t>(rt.nprocs()))
    throw usage_error(std::string(what) + ": rank out of range");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// One-sided read / write

/// Remote get: copy n elements from global memory into dst. One remote
/// operation per call. Aligned 32/64-bit words are never torn.
template <typename T>
void rget(GlobalPtr<T> src, T* dst, size_t n) {
  static_assert(std::is_trivially_copyable_v<T>);
  Runtime& rt = runtime();
  detail::check_range(rt, src.offset, n * sizeof(T), "rget");
  if (src.rank >= static_cast<uint32_t>(rt.nprocs())) throw usage_error("rget: bad rank");
  rt.ops().reads++;
  if (n == 0) return;
  rt.backend().read(static_cast<int>(src.rank), src.offset, dst, n * sizeof(T));
}

template <typename T>
T rget(GlobalPtr<T> src) {
  T v;
  rget(src, &v, 1);
  return v;
}

/// Remote put: initiate a write of n elements. Remote completion is not
/// guaranteed until a flush or barrier. One remote operation per call.
template <typename T>
void rput(GlobalPtr<T> dst, const T* src, size_t n) {
  static_assert(std::is_trivially_copyable_v<T>);
  Runtime& rt = runtime();
  detail::check_range(rt, dst.offset, n * sizeof(T), "rput");
  if (dst.rank >= static_cast<uint32_t>(rt.nprocs())) throw usage_error("rput: bad rank");
  rt.ops().writes++;
  if (n == 0) return;
  rt.backend().write(static_cast<int>(dst.rank), dst.offset, src, n * sizeof(T));
}

template <typename T>
void rput(GlobalPtr<T> dst, const T& val) {
  rput(dst, &val, 1);
}

/// Complete all writes issued by this rank before the call.
inline void flush() { runtime().backend().flush(); }

// ---------------------------------------------------------------------------
// Remote atomics (32- and 64-bit words)

template <typename W>
W compare_and_swap(GlobalPtr<W> p, W expected, W desired) {
  Runtime& rt = runtime();
  detail::check_word(rt, p, "compare_and_swap");
  rt.ops().atomics++;
  if constexpr (sizeof(W) == 4)
    return rt.backend().cas32(p.rank, p.offset, expected, desired);
  else
    return rt.backend().cas64(p.rank, p.offset, expected, desired);
}

template <typename W>
W fetch_and_add(GlobalPtr<W> p, W delta) {
  Runtime& rt = runtime();
  detail::check_word(rt, p, "fetch_and_add");
  rt.ops().atomics++;
  if constexpr (sizeof(W) == 4)
    return rt.backend().faa32(p.rank, p.offset, delta);
  else
    return rt.backend().faa64(p.rank, p.offset, delta);
}

template <typename W>
W fetch_and_or(GlobalPtr<W> p, W bits) {
  Runtime& rt = runtime();
  detail::check_word(rt, p, "fetch_and_or");
  rt.ops().atomics++;
  if constexpr (sizeof(W) == 4)
    return rt.backend().for32(p.rank, p.offset, bits);
  else
    return rt.backend().for64(p.rank, p.offset, bits);
}

template <typename W>
W fetch_and_and(GlobalPtr<W> p, W bits) {
  Runtime& rt = runtime();
  detail::check_word(rt, p, "fetch_and_and");
  rt.ops().atomics++;
  if constexpr (sizeof(W) == 4)
    return rt.backend().fand32(p.rank, p.offset, bits);
  else
    return rt.backend().fand64(p.rank, p.offset, bits);
}

template <typename W>
W fetch_and_xor(GlobalPtr<W> p, W bits) {
  Runtime& rt = runtime();
  detail::check_word(rt, p, "fetch_and_xor");
  rt.ops().atomics++;
  if constexpr (sizeof(W) == 4)
    return rt.backend().fxor32(p.rank, p.offset, bits);
  else
    return rt.backend().fxor64(p.rank, p.offset, bits);
}

// ---------------------------------------------------------------------------
// Barrier and collectives

/// Collective. Entering implies all of this rank's memory operations have
/// completed locally and at the remote target; exiting implies all ranks
/// entered. Centralized generation-counted barrier over a counter in rank 0's
/// segment (fetch-and-add plus polling with bounded backoff).
void barrier();

namespace detail {

template <typename T>
GlobalPtr<T> scratch_slot(int slot) {
  return GlobalPtr<T>(0, kScratchBase + uint64_t(slot) * kScratchSlot);
}

}  // namespace detail

/// Collective broadcast of root's value to every rank. Root-mediated over
/// rput/rget plus barriers; meant for pointers and control values.
template <typename T>
T broadcast(const T& val, int root) {
  static_assert(std::is_trivially_copyable_v<T> && sizeof(T) <= detail::kScratchSlot);
  Runtime& rt = runtime();
  auto slot = detail::scratch_slot<T>(rt.nprocs());
  if (rt.rank() == root) rput(slot, val);
  barrier();
  T out = rget(slot);
  barrier();
  return out;
}

/// Collective reduction with an associative, commutative combiner; every rank
/// returns the full fold.
template <typename T, typename Op>
T allreduce(const T& val, Op op) {
  static_assert(std::is_trivially_copyable_v<T> && sizeof(T) <= detail::kScratchSlot);
  Runtime& rt = runtime();
  rput(detail::scratch_slot<T>(rt.rank()), val);
  barrier();
  if (rt.rank() == 0) {
    T acc = *detail::scratch_slot<T>(0).local();
    for (int r = 1; r < rt.nprocs(); ++r) acc = op(acc, *detail::scratch_slot<T>(r).local());
    rput(detail::scratch_slot<T>(rt.nprocs()), acc);
  }
  barrier();
  T out = rget(detail::scratch_slot<T>(rt.nprocs()));
  barrier();
  return out;
}

namespace detail {

/// Collective: every rank contributes one value, all ranks get the full
/// table. Construction-time plumbing for the containers.
template <typename T>
std::vector<T> allgather(const T& val) {
  static_assert(std::is_trivially_copyable_v<T> && sizeof(T) <= kScratchSlot);
  Runtime& rt = runtime();
  rput(scratch_slot<T>(rt.rank()), val);
  barrier();
  std::vector<T> out(rt.nprocs());
  for (int r = 0; r < rt.nprocs(); ++r) out[r] = rget(scratch_slot<T>(r));
  barrier();
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------

template <typename T>
T* GlobalPtr<T>::local() const {
  Runtime& rt = runtime();
  if (rank != static_cast<uint32_t>(rt.rank()))
    throw usage_error("GlobalPtr::local() on a pointer owned by another rank");
  return reinterpret_cast<T*>(rt.segment() + offset);
}

}  // namespace rmc
