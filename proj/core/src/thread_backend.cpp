#include "rmc/thread_backend.hpp"

#include <cstring>
#include <exception>
#include <mutex>
#include <thread>

#include "rmc/errors.hpp"
#include "rmc/mem_ops.hpp"
#include "rmc/runtime.hpp"

namespace rmc {

ThreadWorld::ThreadWorld(int nprocs, size_t segment_size)
    : nprocs_(nprocs), segment_size_(segment_size) {
  if (nprocs < 1) throw fatal_error("spawn_world: nprocs must be >= 1");
  segments_.reserve(nprocs);
  for (int r = 0; r < nprocs; ++r) {
    segments_.push_back(std::make_unique<std::byte[]>(segment_size));
    std::memset(segments_.back().get(), 0, segment_size);
  }
}

void ThreadBackend::check_alive() {
  if (world_.aborted()) throw world_aborted();
}

void ThreadBackend::read(int rank, uint64_t offset, void* dst, size_t len) {
  check_alive();
  detail::copy_from_segment(dst, at(rank, offset), len);
}

void ThreadBackend::write(int rank, uint64_t offset, const void* src, size_t len) {
  check_alive();
  detail::copy_to_segment(at(rank, offset), src, len);
}

void ThreadBackend::flush() { std::atomic_thread_fence(std::memory_order_seq_cst); }

uint32_t ThreadBackend::cas32(int rank, uint64_t offset, uint32_t expected, uint32_t desired) {
  check_alive();
  return detail::seg_cas<uint32_t>(at(rank, offset), expected, desired);
}

uint64_t ThreadBackend::cas64(int rank, uint64_t offset, uint64_t expected, uint64_t desired) {
  check_alive();
  return detail::seg_cas<uint64_t>(at(rank, offset), expected, desired);
}

uint32_t ThreadBackend::faa32(int rank, uint64_t offset, uint32_t delta) {
  check_alive();
  return detail::seg_faa<uint32_t>(at(rank, offset), delta);
}

uint64_t ThreadBackend::faa64(int rank, uint64_t offset, uint64_t delta) {
  check_alive();
  return detail::seg_faa<uint64_t>(at(rank, offset), delta);
}

uint32_t ThreadBackend::for32(int rank, uint64_t offset, uint32_t bits) {
  check_alive();
  return detail::seg_for<uint32_t>(at(rank, offset), bits);
}

uint64_t ThreadBackend::for64(int rank, uint64_t offset, uint64_t bits) {
  check_alive();
  return detail::seg_for<uint64_t>(at(rank, offset), bits);
}

uint32_t ThreadBackend::fand32(int rank, uint64_t offset, uint32_t bits) {
  check_alive();
  return detail::seg_fand<uint32_t>(at(rank, offset), bits);
}

uint64_t ThreadBackend::fand64(int rank, uint64_t offset, uint64_t bits) {
  check_alive();
  return detail::seg_fand<uint64_t>(at(rank, offset), bits);
}

uint32_t ThreadBackend::fxor32(int rank, uint64_t offset, uint32_t bits) {
  check_alive();
  return detail::seg_fxor<uint32_t>(at(rank, offset), bits);
}

uint64_t ThreadBackend::fxor64(int rank, uint64_t offset, uint64_t bits) {
  check_alive();
  return detail::seg_fxor<uint64_t>(at(rank, offset), bits);
}

void spawn_world(int nprocs, size_t segment_size, const std::function<void()>& rank_main) {
  ThreadWorld world(nprocs, segment_size);
  std::mutex mu;
  std::exception_ptr first_error;

  auto body = [&](int my_rank) {
    try {
      ThreadBackend backend(world, my_rank);
      Runtime rt(backend, /*owns_backend=*/false);
      barrier();
      rank_main();
      barrier();
    } catch (...) {
      {
        std::lock_guard<std::mutex> lk(mu);
        if (!first_error) first_error = std::current_exception();
      }
      world.abort();
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(nprocs);
  for (int r = 0; r < nprocs; ++r) threads.emplace_back(body, r);
  for (auto& t : threads) t.join();

  if (first_error) {
    try {
      std::rethrow_exception(first_error);
    } catch (const world_aborted&) {
      throw fatal_error("thread world aborted");
    }
  }
}

}  // namespace rmc
