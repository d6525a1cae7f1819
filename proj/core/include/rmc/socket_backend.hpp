#pragma once

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "rmc/backend.hpp"

namespace rmc {

/// Rendezvous configuration for one rank of a socket world: the full
/// host:port list (rank order) plus this process's rank. `listen_fd` lets a
/// launcher pre-bind the listening socket and pass it through fork.
struct SocketConfig {
  std::vector<std::string> peers;  // "host:port" per rank
  int my_rank = 0;
  size_t segment_size = 0;
  int listen_fd = -1;
  int connect_timeout_s = 30;
};

/// Parse "host:port,host:port,..." into a peer list.
std::vector<std::string> parse_peer_list(const std::string& csv);

/// Multi-process backend over TCP. Each rank hosts a memory agent thread that
/// answers READ/WRITE/atomic frames against its segment, emulating one-sided
/// access: the application thread of a remote rank issues a synchronous
/// request and the local CPU never runs container code on its behalf. Atomics
/// are applied under a per-segment mutex so that all atomics on a word are
/// totally ordered. Operations on the caller's own rank bypass the socket but
/// atomic ones still take the agent's lock.
class SocketBackend final : public Backend {
public:
  explicit SocketBackend(const SocketConfig& config);
  ~SocketBackend() override;

  int rank() const noexcept override { return my_rank_; }
  int nprocs() const noexcept override { return nprocs_; }
  size_t segment_size() const noexcept override { return segment_size_; }
  std::byte* local_segment() noexcept override { return segment_.get(); }

  void read(int rank, uint64_t offset, void* dst, size_t len) override;
  void write(int rank, uint64_t offset, const void* src, size_t len) override;
  void flush() override;

  uint32_t cas32(int rank, uint64_t offset, uint32_t expected, uint32_t desired) override;
  uint64_t cas64(int rank, uint64_t offset, uint64_t expected, uint64_t desired) override;
  uint64_t faa64(int rank, uint64_t offset, uint64_t delta) override;
  uint32_t for32(int rank, uint64_t offset, uint32_t bits) override;
  uint64_t for64(int rank, uint64_t offset, uint64_t bits) override;
  uint32_t fand32(int rank, uint64_t offset, uint32_t bits) override;
  uint64_t fand64(int rank, uint64_t offset, uint64_t bits) override;
  // faa32 / fxor32 / fxor64 have no wire opcode; the CAS-synthesized
  // defaults from Backend cover them.

  /// Established peer connections (nprocs - 1 after a successful rendezvous).
  int connection_count() const;

private:
  struct Peer;

  void rendezvous(const SocketConfig& config);
  void agent_loop();
  void handle_frame(Peer& peer, const struct FrameView& frame);
  std::vector<uint8_t> request(int rank, uint8_t opcode, uint64_t offset, uint32_t len,
                               const void* payload, size_t payload_len);
  template <typename W>
  W atomic_apply(int rank, uint8_t opcode, uint64_t offset, W operand);
  template <typename W>
  W local_atomic(uint8_t opcode, uint64_t offset, W operand);
  void fatal_peer(int rank, const std::string& why);

  int my_rank_ = 0;
  int nprocs_ = 0;
  size_t segment_size_ = 0;
  std::unique_ptr<std::byte[]> segment_;
  std::vector<std::unique_ptr<Peer>> peers_;
  std::mutex atomics_mu_;  // per-segment total order for atomics
  int wake_pipe_[2] = {-1, -1};
  std::thread agent_;
  bool shutting_down_ = false;

  // single-slot response mailbox (the app thread is synchronous)
  std::mutex mail_mu_;
  std::condition_variable mail_cv_;
  bool mail_ready_ = false;
  std::vector<uint8_t> mail_payload_;
  std::string mail_error_;
};

/// Bring up a socket-backend runtime on this process. Pair with finalize().
void init_socket(const SocketConfig& config);

/// Collective teardown of the calling rank's runtime (any backend).
void finalize();

/// Test/launcher helper: fork nprocs local processes with pre-bound listen
/// sockets, run `rank_main` in each over a socket world, and wait for all.
/// Throws if any child exits nonzero.
void fork_world(int nprocs, size_t segment_size, const std::function<void()>& rank_main);

}  // namespace rmc
