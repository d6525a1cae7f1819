#pragma once

#include <cstddef>
#include <cstdint>

namespace rmc {

/// Communication backend contract. A backend provides symmetric shared
/// segments plus a small set of one-sided primitives: variable-size read and
/// write, and word atomics. Compare-and-swap is mandatory; every other atomic
/// has a CAS-synthesized default and may be overridden where the transport
/// has it natively.
///
/// All atomics on a given word are totally ordered with respect to each
/// other. CPU-local accesses to segment memory are NOT ordered against
/// backend atomics unless the backend says so; that asymmetry is what makes
/// `local` promises unsafe outside single-owner phases.
class Backend {
public:
  virtual ~Backend() = default;

  virtual int rank() const noexcept = 0;
  virtual int nprocs() const noexcept = 0;
  virtual size_t segment_size() const noexcept = 0;
  /// Base of the calling rank's own segment.
  virtual std::byte* local_segment() noexcept = 0;

  virtual void read(int rank, uint64_t offset, void* dst, size_t len) = 0;
  virtual void write(int rank, uint64_t offset, const void* src, size_t len) = 0;
  /// Complete all writes issued by this rank (remote visibility).
  virtual void flush() = 0;

  virtual uint32_t cas32(int rank, uint64_t offset, uint32_t expected, uint32_t desired) = 0;
  virtual uint64_t cas64(int rank, uint64_t offset, uint64_t expected, uint64_t desired) = 0;

  // CAS-synthesized defaults; one API-level atomic regardless of retries.
  virtual uint32_t faa32(int rank, uint64_t offset, uint32_t delta);
  virtual uint64_t faa64(int rank, uint64_t offset, uint64_t delta);
  virtual uint32_t for32(int rank, uint64_t offset, uint32_t bits);
  virtual uint64_t for64(int rank, uint64_t offset, uint64_t bits);
  virtual uint32_t fand32(int rank, uint64_t offset, uint32_t bits);
  virtual uint64_t fand64(int rank, uint64_t offset, uint64_t bits);
  virtual uint32_t fxor32(int rank, uint64_t offset, uint32_t bits);
  virtual uint64_t fxor64(int rank, uint64_t offset, uint64_t bits);
};

}  // namespace rmc
