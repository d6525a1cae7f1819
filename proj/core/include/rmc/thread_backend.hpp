#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "rmc/backend.hpp"

namespace rmc {

/// In-process world: each rank is a thread, segments are disjoint slices of
/// one heap, and remote atomics map to hardware atomics (sequentially
/// consistent, matching the NIC total-order contract). The world structure is
/// shared read-only after construction except for the atomic words inside the
/// segments themselves.
class ThreadWorld {
public:
  ThreadWorld(int nprocs, size_t segment_size);

  int nprocs() const noexcept { return nprocs_; }
  size_t segment_size() const noexcept { return segment_size_; }
  std::byte* segment(int rank) noexcept { return segments_[rank].get(); }

  void abort() noexcept { aborted_.store(true, std::memory_order_seq_cst); }
  bool aborted() const noexcept { return aborted_.load(std::memory_order_relaxed); }

private:
  int nprocs_;
  size_t segment_size_;
  std::vector<std::unique_ptr<std::byte[]>> segments_;
  std::atomic<bool> aborted_{false};
};

class ThreadBackend final : public Backend {
public:
  ThreadBackend(ThreadWorld& world, int rank) : world_(world), rank_(rank) {}

  int rank() const noexcept override { return rank_; }
  int nprocs() const noexcept override { return world_.nprocs(); }
  size_t segment_size() const noexcept override { return world_.segment_size(); }
  std::byte* local_segment() noexcept override { return world_.segment(rank_); }

  void read(int rank, uint64_t offset, void* dst, size_t len) override;
  void write(int rank, uint64_t offset, const void* src, size_t len) override;
  void flush() override;

  uint32_t cas32(int rank, uint64_t offset, uint32_t expected, uint32_t desired) override;
  uint64_t cas64(int rank, uint64_t offset, uint64_t expected, uint64_t desired) override;
  uint32_t faa32(int rank, uint64_t offset, uint32_t delta) override;
  uint64_t faa64(int rank, uint64_t offset, uint64_t delta) override;
  uint32_t for32(int rank, uint64_t offset, uint32_t bits) override;
  uint64_t for64(int rank, uint64_t offset, uint64_t bits) override;
  uint32_t fand32(int rank, uint64_t offset, uint32_t bits) override;
  uint64_t fand64(int rank, uint64_t offset, uint64_t bits) override;
  uint32_t fxor32(int rank, uint64_t offset, uint32_t bits) override;
  uint64_t fxor64(int rank, uint64_t offset, uint64_t bits) override;

private:
  void* at(int rank, uint64_t offset) { return world_.segment(rank) + offset; }
  void check_alive();

  ThreadWorld& world_;
  int rank_;
};

/// Run `rank_main` on nprocs threads, each with its own Runtime over a fresh
/// world, and join them all. A throwing rank aborts the world: its exception
/// is rethrown here and peers stuck in spin loops are unwound.
void spawn_world(int nprocs, size_t segment_size, const std::function<void()>& rank_main);

}  // namespace rmc
