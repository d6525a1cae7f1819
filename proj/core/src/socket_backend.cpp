#include "rmc/socket_backend.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <thread>

#include "rmc/backoff.hpp"
#include "rmc/errors.hpp"
#include "rmc/mem_ops.hpp"
#include "rmc/runtime.hpp"
#include "rmc/wire.hpp"

namespace rmc {

namespace {

// BARRIER_HINT with this offset means "I will send no more requests".
constexpr uint64_t kDoneMagic = ~uint64_t(0);

struct Addr {
  std::string host;
  uint16_t port;
};

Addr parse_addr(const std::string& s) {
  auto colon = s.rfind(':');
  if (colon == std::string::npos) throw fatal_error("bad peer address (want host:port): " + s);
  return {s.substr(0, colon), static_cast<uint16_t>(std::stoi(s.substr(colon + 1)))};
}

void set_nodelay(int fd) {
  int one = 1;
  setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

void set_nonblocking(int fd) { fcntl(fd, F_SETFL, fcntl(fd, F_GETFL, 0) | O_NONBLOCK); }

void set_blocking(int fd) { fcntl(fd, F_SETFL, fcntl(fd, F_GETFL, 0) & ~O_NONBLOCK); }

// Blocking exact-count I/O used during rendezvous (fds still blocking).
void read_exact(int fd, void* buf, size_t n, const char* what) {
  auto* p = static_cast<uint8_t*>(buf);
  while (n > 0) {
    ssize_t got = ::recv(fd, p, n, 0);
    if (got <= 0) throw fatal_error(std::string("rendezvous: connection failed during ") + what);
    p += got;
    n -= size_t(got);
  }
}

void write_exact(int fd, const void* buf, size_t n, const char* what) {
  const auto* p = static_cast<const uint8_t*>(buf);
  while (n > 0) {
    ssize_t put = ::send(fd, p, n, MSG_NOSIGNAL);
    if (put <= 0) throw fatal_error(std::string("rendezvous: connection failed during ") + what);
    p += put;
    n -= size_t(put);
  }
}

int make_listener(const Addr& addr) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw fatal_error("socket() failed");
  int one = 1;
  setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(addr.port);
  if (inet_pton(AF_INET, addr.host.c_str(), &sa.sin_addr) != 1)
    throw fatal_error("bad listen host: " + addr.host);
  if (bind(fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0) {
    ::close(fd);
    throw fatal_error("bind failed for " + addr.host + ":" + std::to_string(addr.port));
  }
  if (listen(fd, 64) != 0) {
    ::close(fd);
    throw fatal_error("listen failed");
  }
  return fd;
}

}  // namespace

struct FrameView {
  wire::Header header;
  const uint8_t* payload;
};

struct SocketBackend::Peer {
  int fd = -1;
  int rank = -1;
  std::mutex out_mu;
  std::vector<uint8_t> outbox;
  std::atomic<bool> has_pending{false};
  std::vector<uint8_t> inbox;
  size_t inbox_consumed = 0;
  std::atomic<bool> eof{false};
  std::atomic<bool> done{false};  // peer announced it will send no more requests

  ~Peer() {
    if (fd >= 0) ::close(fd);
  }
};

std::vector<std::string> parse_peer_list(const std::string& csv) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= csv.size()) {
    size_t comma = csv.find(',', start);
    if (comma == std::string::npos) comma = csv.size();
    if (comma > start) out.push_back(csv.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

SocketBackend::SocketBackend(const SocketConfig& config) {
  my_rank_ = config.my_rank;
  nprocs_ = static_cast<int>(config.peers.size());
  segment_size_ = config.segment_size;
  if (nprocs_ < 1 || my_rank_ < 0 || my_rank_ >= nprocs_)
    throw fatal_error("socket backend: rank " + std::to_string(my_rank_) + " outside world of " +
                      std::to_string(nprocs_) + " peers");
  segment_ = std::make_unique<std::byte[]>(segment_size_);
  std::memset(segment_.get(), 0, segment_size_);
  peers_.resize(nprocs_);

  if (pipe(wake_pipe_) != 0) throw fatal_error("pipe() failed");
  set_nonblocking(wake_pipe_[0]);

  rendezvous(config);
  for (auto& p : peers_) {
    if (p && p->fd >= 0) set_nonblocking(p->fd);
  }
  agent_ = std::thread([this] { agent_loop(); });
}

void SocketBackend::rendezvous(const SocketConfig& config) {
  int listen_fd = config.listen_fd;
  if (listen_fd < 0 && nprocs_ > 1) listen_fd = make_listener(parse_addr(config.peers[my_rank_]));

  auto hello = [&](int fd) {
    wire::Header h;
    h.opcode = wire::kBarrierHint;
    h.rank = static_cast<uint16_t>(my_rank_);
    h.offset = segment_size_;
    h.len = 0;
    uint8_t buf[wire::kHeaderBytes];
    wire::encode_header(h, buf);
    write_exact(fd, buf, sizeof(buf), "hello");
  };
  auto expect_hello = [&](int fd) {
    uint8_t buf[wire::kHeaderBytes];
    read_exact(fd, buf, sizeof(buf), "hello");
    wire::Header h = wire::decode_header(buf);
    if (h.opcode != wire::kBarrierHint || h.rank >= nprocs_)
      throw fatal_error("rendezvous: malformed hello");
    if (h.offset != segment_size_)
      throw fatal_error("rendezvous: segment size mismatch (mine " +
                        std::to_string(segment_size_) + ", rank " + std::to_string(h.rank) +
                        " has " + std::to_string(h.offset) + ")");
    return static_cast<int>(h.rank);
  };

  try {
    // connect to every lower rank, retrying until it is listening
    for (int r = 0; r < my_rank_; ++r) {
      Addr addr = parse_addr(config.peers[r]);
      auto deadline =
          std::chrono::steady_clock::now() + std::chrono::seconds(config.connect_timeout_s);
      int fd = -1;
      for (;;) {
        fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) throw fatal_error("socket() failed");
        sockaddr_in sa{};
        sa.sin_family = AF_INET;
        sa.sin_port = htons(addr.port);
        if (inet_pton(AF_INET, addr.host.c_str(), &sa.sin_addr) != 1)
          throw fatal_error("bad peer host: " + addr.host);
        if (connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) == 0) break;
        ::close(fd);
        if (std::chrono::steady_clock::now() > deadline)
          throw fatal_error("rendezvous: timeout connecting to rank " + std::to_string(r) +
                            " at " + config.peers[r]);
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
      }
      set_nodelay(fd);
      hello(fd);
      int got = expect_hello(fd);
      if (got != r) throw fatal_error("rendezvous: rank mismatch on connect");
      auto peer = std::make_unique<Peer>();
      peer->fd = fd;
      peer->rank = r;
      peers_[r] = std::move(peer);
    }
    // accept every higher rank
    for (int n = my_rank_ + 1; n < nprocs_; ++n) {
      int fd = ::accept(listen_fd, nullptr, nullptr);
      if (fd < 0) throw fatal_error("accept failed");
      set_nodelay(fd);
      int r = expect_hello(fd);
      if (r <= my_rank_ || peers_[r]) {
        ::close(fd);
        throw fatal_error("rendezvous: unexpected hello from rank " + std::to_string(r));
      }
      hello(fd);
      auto peer = std::make_unique<Peer>();
      peer->fd = fd;
      peer->rank = r;
      peers_[r] = std::move(peer);
    }
  } catch (...) {
    if (listen_fd >= 0) ::close(listen_fd);
    throw;
  }
  if (listen_fd >= 0) ::close(listen_fd);
}

SocketBackend::~SocketBackend() {
  // announce "no more requests", then keep serving until every peer does too
  for (auto& p : peers_) {
    if (!p || p->fd < 0) continue;
    wire::Header h;
    h.opcode = wire::kBarrierHint;
    h.rank = static_cast<uint16_t>(my_rank_);
    h.offset = kDoneMagic;
    h.len = 0;
    std::vector<uint8_t> frame;
    wire::append_frame(frame, h, nullptr);
    std::lock_guard<std::mutex> lk(p->out_mu);
    p->outbox.insert(p->outbox.end(), frame.begin(), frame.end());
    p->has_pending.store(true, std::memory_order_release);
  }
  shutting_down_ = true;
  char b = 1;
  [[maybe_unused]] ssize_t n = ::write(wake_pipe_[1], &b, 1);
  if (agent_.joinable()) agent_.join();
  ::close(wake_pipe_[0]);
  ::close(wake_pipe_[1]);
}

int SocketBackend::connection_count() const {
  int n = 0;
  for (const auto& p : peers_)
    if (p && p->fd >= 0) ++n;
  return n;
}

// --------------------------------------------------------------------------
// agent: the memory server answering one-sided requests against this segment

void SocketBackend::handle_frame(Peer& peer, const FrameView& f) {
  const wire::Header& h = f.header;
  if (h.opcode & wire::kResponseBit) {
    std::lock_guard<std::mutex> lk(mail_mu_);
    mail_payload_.assign(f.payload, f.payload + h.len);
    mail_ready_ = true;
    mail_cv_.notify_one();
    return;
  }

  if (h.opcode == wire::kBarrierHint && h.offset == kDoneMagic) {
    peer.done.store(true, std::memory_order_release);
    return;
  }

  wire::Header rh;
  rh.opcode = h.opcode | wire::kResponseBit;
  rh.rank = static_cast<uint16_t>(my_rank_);
  rh.offset = h.offset;
  std::vector<uint8_t> payload;

  auto check = [&](size_t len) {
    if (h.offset + len > segment_size_)
      throw fatal_error("wire: out-of-bounds request from rank " + std::to_string(peer.rank));
  };
  void* target = segment_.get() + h.offset;

  switch (h.opcode) {
    case wire::kRead: {
      check(h.len);
      payload.resize(h.len);
      detail::copy_from_segment(payload.data(), target, h.len);
      break;
    }
    case wire::kWrite: {
      check(h.len);
      detail::copy_to_segment(target, f.payload, h.len);
      break;
    }
    case wire::kCas32: {
      check(4);
      uint32_t expected = wire::get_u32(f.payload);
      uint32_t desired = wire::get_u32(f.payload + 4);
      std::lock_guard<std::mutex> lk(atomics_mu_);
      uint32_t prior = detail::seg_cas<uint32_t>(target, expected, desired);
      payload.resize(4);
      wire::put_u32(payload.data(), prior);
      break;
    }
    case wire::kCas64: {
      check(8);
      uint64_t expected = wire::get_u64(f.payload);
      uint64_t desired = wire::get_u64(f.payload + 8);
      std::lock_guard<std::mutex> lk(atomics_mu_);
      uint64_t prior = detail::seg_cas<uint64_t>(target, expected, desired);
      payload.resize(8);
      wire::put_u64(payload.data(), prior);
      break;
    }
    case wire::kFaa64:
    case wire::kFor64:
    case wire::kFand64: {
      check(8);
      uint64_t operand = wire::get_u64(f.payload);
      uint64_t prior;
      {
        std::lock_guard<std::mutex> lk(atomics_mu_);
        prior = h.opcode == wire::kFaa64  ? detail::seg_faa<uint64_t>(target, operand)
                : h.opcode == wire::kFor64 ? detail::seg_for<uint64_t>(target, operand)
                                           : detail::seg_fand<uint64_t>(target, operand);
      }
      payload.resize(8);
      wire::put_u64(payload.data(), prior);
      break;
    }
    case wire::kFor32:
    case wire::kFand32: {
      check(4);
      uint32_t operand = wire::get_u32(f.payload);
      uint32_t prior;
      {
        std::lock_guard<std::mutex> lk(atomics_mu_);
        prior = h.opcode == wire::kFor32 ? detail::seg_for<uint32_t>(target, operand)
                                         : detail::seg_fand<uint32_t>(target, operand);
      }
      payload.resize(4);
      wire::put_u32(payload.data(), prior);
      break;
    }
    case wire::kBarrierHint:
      break;  // ordering hint; synchronous protocol has nothing in flight
    default:
      throw fatal_error("wire: unknown opcode " + std::to_string(h.opcode));
  }

  rh.len = static_cast<uint32_t>(payload.size());
  std::lock_guard<std::mutex> lk(peer.out_mu);
  wire::append_frame(peer.outbox, rh, payload.data());
  // opportunistic flush; leftovers picked up via POLLOUT
  while (!peer.outbox.empty()) {
    ssize_t put = ::send(peer.fd, peer.outbox.data(), peer.outbox.size(), MSG_NOSIGNAL);
    if (put <= 0) break;
    peer.outbox.erase(peer.outbox.begin(), peer.outbox.begin() + put);
  }
  peer.has_pending.store(!peer.outbox.empty(), std::memory_order_release);
}

void SocketBackend::agent_loop() {
  std::vector<pollfd> fds;
  std::vector<Peer*> fd_peers;
  for (;;) {
    fds.clear();
    fd_peers.clear();
    fds.push_back({wake_pipe_[0], POLLIN, 0});
    fd_peers.push_back(nullptr);
    bool all_done = shutting_down_;
    for (auto& p : peers_) {
      if (!p || p->fd < 0) continue;
      if (!p->eof.load(std::memory_order_acquire)) {
        short ev = POLLIN;
        if (p->has_pending.load(std::memory_order_acquire)) ev |= POLLOUT;
        fds.push_back({p->fd, ev, 0});
        fd_peers.push_back(p.get());
        if (!p->done.load(std::memory_order_acquire)) all_done = false;
      } else if (p->has_pending.load(std::memory_order_acquire)) {
        all_done = false;
      }
    }
    if (all_done) return;

    int rc = ::poll(fds.data(), fds.size(), 200);
    if (rc < 0 && errno != EINTR) return;

    for (size_t i = 1; i < fds.size(); ++i) {
      Peer& p = *fd_peers[i];
      if (fds[i].revents & POLLOUT) {
        std::unique_lock<std::mutex> lk(p.out_mu, std::try_to_lock);
        if (lk.owns_lock()) {
          while (!p.outbox.empty()) {
            ssize_t put = ::send(p.fd, p.outbox.data(), p.outbox.size(), MSG_NOSIGNAL);
            if (put <= 0) break;
            p.outbox.erase(p.outbox.begin(), p.outbox.begin() + put);
          }
          p.has_pending.store(!p.outbox.empty(), std::memory_order_release);
        }
      }
      if (fds[i].revents & (POLLIN | POLLHUP | POLLERR)) {
        char buf[16384];
        for (;;) {
          ssize_t got = ::recv(p.fd, buf, sizeof(buf), 0);
          if (got > 0) {
            p.inbox.insert(p.inbox.end(), buf, buf + got);
            continue;
          }
          if (got < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) break;
          if (got < 0 && errno == EINTR) continue;
          p.eof.store(true, std::memory_order_release);
          if (!p.done.load(std::memory_order_acquire) && !shutting_down_)
            fatal_peer(p.rank, "connection lost");
          break;
        }
        // consume complete frames
        size_t pos = 0;
        while (p.inbox.size() - pos >= wire::kHeaderBytes) {
          wire::Header h = wire::decode_header(p.inbox.data() + pos);
          size_t need = wire::kHeaderBytes + wire::payload_bytes(h);
          if (p.inbox.size() - pos < need) break;
          FrameView f{h, p.inbox.data() + pos + wire::kHeaderBytes};
          try {
            handle_frame(p, f);
          } catch (const std::exception& e) {
            fatal_peer(p.rank, e.what());
            p.eof.store(true, std::memory_order_release);
            break;
          }
          pos += need;
        }
        if (pos > 0) p.inbox.erase(p.inbox.begin(), p.inbox.begin() + pos);
      }
    }
    if (fds[0].revents & POLLIN) {
      char sink[64];
      while (::read(wake_pipe_[0], sink, sizeof(sink)) > 0) {
      }
    }
  }
}

void SocketBackend::fatal_peer(int rank, const std::string& why) {
  std::lock_guard<std::mutex> lk(mail_mu_);
  if (mail_error_.empty()) mail_error_ = "rank " + std::to_string(rank) + ": " + why;
  mail_ready_ = true;
  mail_cv_.notify_one();
}

// --------------------------------------------------------------------------
// application-thread request path

std::vector<uint8_t> SocketBackend::request(int rank, uint8_t opcode, uint64_t offset,
                                            uint32_t len, const void* payload,
                                            size_t payload_len) {
  Peer* p = peers_[rank].get();
  if (!p || p->eof.load(std::memory_order_acquire))
    throw fatal_error("connection to rank " + std::to_string(rank) + " lost");

  {
    std::lock_guard<std::mutex> lk(mail_mu_);
    mail_ready_ = false;
    mail_payload_.clear();
  }

  wire::Header h;
  h.opcode = opcode;
  h.rank = static_cast<uint16_t>(my_rank_);
  h.offset = offset;
  h.len = len;
  {
    std::lock_guard<std::mutex> lk(p->out_mu);
    size_t before = p->outbox.size();
    wire::append_frame(p->outbox, h, payload);
    if (payload && payload_len > 0 && h.opcode == wire::kRead) {
      // READ frames never carry payload; guard against misuse
      p->outbox.resize(before + wire::kHeaderBytes);
    }
    // blocking flush of the whole outbox (frames stay contiguous)
    while (!p->outbox.empty()) {
      ssize_t put = ::send(p->fd, p->outbox.data(), p->outbox.size(), MSG_NOSIGNAL);
      if (put > 0) {
        p->outbox.erase(p->outbox.begin(), p->outbox.begin() + put);
        continue;
      }
      if (errno == EAGAIN || errno == EWOULDBLOCK) {
        pollfd w{p->fd, POLLOUT, 0};
        ::poll(&w, 1, 1000);
        continue;
      }
      if (errno == EINTR) continue;
      p->eof.store(true, std::memory_order_release);
      throw fatal_error("connection to rank " + std::to_string(rank) + " lost (send)");
    }
    p->has_pending.store(false, std::memory_order_release);
  }

  std::unique_lock<std::mutex> lk(mail_mu_);
  mail_cv_.wait(lk, [&] { return mail_ready_; });
  if (!mail_error_.empty()) {
    std::string err = mail_error_;
    throw fatal_error("remote operation failed: " + err);
  }
  return std::move(mail_payload_);
}

void SocketBackend::read(int rank, uint64_t offset, void* dst, size_t len) {
  if (rank == my_rank_) {
    detail::copy_from_segment(dst, segment_.get() + offset, len);
    return;
  }
  auto resp = request(rank, wire::kRead, offset, static_cast<uint32_t>(len), nullptr, 0);
  if (resp.size() != len) throw fatal_error("wire: short read response");
  std::memcpy(dst, resp.data(), len);
}

void SocketBackend::write(int rank, uint64_t offset, const void* src, size_t len) {
  if (rank == my_rank_) {
    detail::copy_to_segment(segment_.get() + offset, src, len);
    return;
  }
  request(rank, wire::kWrite, offset, static_cast<uint32_t>(len), src, len);
}

void SocketBackend::flush() {
  // requests are synchronous (each write is acked before return), so all
  // issued writes are already remotely complete
}

template <typename W>
W SocketBackend::local_atomic(uint8_t opcode, uint64_t offset, W operand_or_desired) {
  // never reached; specializations below
  (void)opcode;
  (void)offset;
  return operand_or_desired;
}

template <typename W>
W SocketBackend::atomic_apply(int rank, uint8_t opcode, uint64_t offset, W operand) {
  uint8_t payload[8];
  if constexpr (sizeof(W) == 4)
    wire::put_u32(payload, operand);
  else
    wire::put_u64(payload, operand);
  auto resp = request(rank, opcode, offset, sizeof(W), payload, sizeof(W));
  if (resp.size() != sizeof(W)) throw fatal_error("wire: short atomic response");
  if constexpr (sizeof(W) == 4)
    return wire::get_u32(resp.data());
  else
    return wire::get_u64(resp.data());
}

uint32_t SocketBackend::cas32(int rank, uint64_t offset, uint32_t expected, uint32_t desired) {
  if (rank == my_rank_) {
    std::lock_guard<std::mutex> lk(atomics_mu_);
    return detail::seg_cas<uint32_t>(segment_.get() + offset, expected, desired);
  }
  uint8_t payload[8];
  wire::put_u32(payload, expected);
  wire::put_u32(payload + 4, desired);
  auto resp = request(rank, wire::kCas32, offset, 8, payload, 8);
  if (resp.size() != 4) throw fatal_error("wire: short CAS32 response");
  return wire::get_u32(resp.data());
}

uint64_t SocketBackend::cas64(int rank, uint64_t offset, uint64_t expected, uint64_t desired) {
  if (rank == my_rank_) {
    std::lock_guard<std::mutex> lk(atomics_mu_);
    return detail::seg_cas<uint64_t>(segment_.get() + offset, expected, desired);
  }
  uint8_t payload[16];
  wire::put_u64(payload, expected);
  wire::put_u64(payload + 8, desired);
  auto resp = request(rank, wire::kCas64, offset, 16, payload, 16);
  if (resp.size() != 8) throw fatal_error("wire: short CAS64 response");
  return wire::get_u64(resp.data());
}

uint64_t SocketBackend::faa64(int rank, uint64_t offset, uint64_t delta) {
  if (rank == my_rank_) {
    std::lock_guard<std::mutex> lk(atomics_mu_);
    return detail::seg_faa<uint64_t>(segment_.get() + offset, delta);
  }
  return atomic_apply<uint64_t>(rank, wire::kFaa64, offset, delta);
}

uint32_t SocketBackend::for32(int rank, uint64_t offset, uint32_t bits) {
  if (rank == my_rank_) {
    std::lock_guard<std::mutex> lk(atomics_mu_);
    return detail::seg_for<uint32_t>(segment_.get() + offset, bits);
  }
  return atomic_apply<uint32_t>(rank, wire::kFor32, offset, bits);
}

uint64_t SocketBackend::for64(int rank, uint64_t offset, uint64_t bits) {
  if (rank == my_rank_) {
    std::lock_guard<std::mutex> lk(atomics_mu_);
    return detail::seg_for<uint64_t>(segment_.get() + offset, bits);
  }
  return atomic_apply<uint64_t>(rank, wire::kFor64, offset, bits);
}

uint32_t SocketBackend::fand32(int rank, uint64_t offset, uint32_t bits) {
  if (rank == my_rank_) {
    std::lock_guard<std::mutex> lk(atomics_mu_);
    return detail::seg_fand<uint32_t>(segment_.get() + offset, bits);
  }
  return atomic_apply<uint32_t>(rank, wire::kFand32, offset, bits);
}

uint64_t SocketBackend::fand64(int rank, uint64_t offset, uint64_t bits) {
  if (rank == my_rank_) {
    std::lock_guard<std::mutex> lk(atomics_mu_);
    return detail::seg_fand<uint64_t>(segment_.get() + offset, bits);
  }
  return atomic_apply<uint64_t>(rank, wire::kFand64, offset, bits);
}

// --------------------------------------------------------------------------
// process lifecycle

namespace {
std::unique_ptr<Runtime> g_socket_runtime;
}

void init_socket(const SocketConfig& config) {
  if (g_socket_runtime) throw usage_error("init_socket: already initialized");
  auto* backend = new SocketBackend(config);
  try {
    g_socket_runtime = std::make_unique<Runtime>(*backend, /*owns_backend=*/true);
  } catch (...) {
    delete backend;
    throw;
  }
  barrier();
}

void finalize() {
  if (g_socket_runtime) {
    barrier();
    g_socket_runtime.reset();
  }
}

void fork_world(int nprocs, size_t segment_size, const std::function<void()>& rank_main) {
  std::vector<int> listeners(nprocs);
  std::vector<std::string> peers(nprocs);
  for (int r = 0; r < nprocs; ++r) {
    listeners[r] = make_listener({"127.0.0.1", 0});
    sockaddr_in sa{};
    socklen_t salen = sizeof(sa);
    getsockname(listeners[r], reinterpret_cast<sockaddr*>(&sa), &salen);
    peers[r] = "127.0.0.1:" + std::to_string(ntohs(sa.sin_port));
  }

  std::fflush(stdout);
  std::fflush(stderr);
  std::vector<pid_t> pids(nprocs);
  for (int r = 0; r < nprocs; ++r) {
    pid_t pid = fork();
    if (pid < 0) throw fatal_error("fork failed");
    if (pid == 0) {
      for (int j = 0; j < nprocs; ++j)
        if (j != r) ::close(listeners[j]);
      int code = 0;
      try {
        SocketConfig cfg;
        cfg.peers = peers;
        cfg.my_rank = r;
        cfg.segment_size = segment_size;
        cfg.listen_fd = listeners[r];
        init_socket(cfg);
        rank_main();
        finalize();
      } catch (const std::exception& e) {
        std::fprintf(stderr, "[rank %d] error: %s\n", r, e.what());
        code = 1;
      }
      std::fflush(stdout);
      std::fflush(stderr);
      ::_exit(code);
    }
    pids[r] = pid;
  }
  for (int r = 0; r < nprocs; ++r) ::close(listeners[r]);

  std::string failures;
  for (int r = 0; r < nprocs; ++r) {
    int status = 0;
    waitpid(pids[r], &status, 0);
    if (WIFEXITED(status) && WEXITSTATUS(status) == 0) continue;
    failures += " rank " + std::to_string(r) +
                (WIFSIGNALED(status) ? " signaled " + std::to_string(WTERMSIG(status))
                                     : " exited " + std::to_string(WEXITSTATUS(status)));
  }
  if (!failures.empty()) throw fatal_error("socket world failed:" + failures);
}

}  // namespace rmc
