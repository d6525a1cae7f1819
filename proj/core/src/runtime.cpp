#include "rmc/runtime.hpp"

namespace rmc {

Runtime::Runtime(Backend& backend, bool owns_backend)
    : backend_(backend),
      owns_backend_(owns_backend),
      alloc_(detail::reserved_bytes(backend.nprocs()), backend.segment_size()),
      rng_(0x9e3779b97f4a7c15ULL ^ uint64_t(backend.rank())) {
  if (detail::tl_runtime) throw usage_error("runtime already initialized on this thread");
  detail::tl_runtime = this;
}

Runtime::~Runtime() {
  detail::tl_runtime = nullptr;
  if (owns_backend_) delete &backend_;
}

void barrier() {
  Runtime& rt = runtime();
  rt.ops().barriers++;
  Backend& b = rt.backend();
  uint64_t gen = rt.next_barrier_gen();
  uint64_t arrived = b.faa64(0, detail::kBarrierArrivals, 1);
  if (arrived == uint64_t(rt.nprocs()) - 1) {
    // last one in: reset the arrival counter, then release this generation
    b.faa64(0, detail::kBarrierArrivals, uint64_t(-int64_t(rt.nprocs())));
    b.faa64(0, detail::kBarrierGen, 1);
  } else {
    Backoff bo("barrier");
    for (;;) {
      uint64_t g;
      b.read(0, detail::kBarrierGen, &g, sizeof(g));
      if (g >= gen) break;
      bo.wait();
    }
  }
}

}  // namespace rmc
