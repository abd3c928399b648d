#include "pwaff/parallel.hpp"

namespace pwaff {

namespace {
std::atomic<unsigned> g_workers{std::max(1u, std::thread::hardware_concurrency())};
}

void set_worker_count(unsigned workers) { g_workers.store(workers == 0 ? 1 : workers); }

unsigned worker_count() { return g_workers.load(); }

}  // namespace pwaff
