#include "svk/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace svk {

namespace {
std::atomic<int> g_threads{0};
thread_local bool t_inside = false;  // nested loops run serially
}  // namespace

void set_threads(int n) { g_threads = std::max(0, n); }

int threads() {
  const int n = g_threads.load();
  if (n > 0) return n;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(long begin, long end, const std::function<void(long)>& f) {
  const long count = end - begin;
  if (count <= 0) return;
  const int nt = static_cast<int>(std::min<long>(threads(), count));
  if (nt <= 1 || t_inside) {
    for (long i = begin; i < end; ++i) f(i);
    return;
  }
  std::atomic<long> next{begin};
  std::exception_ptr err;
  std::mutex err_mu;
  auto work = [&] {
    t_inside = true;
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= end) break;
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!err) err = std::current_exception();
        next = end;
      }
    }
    t_inside = false;
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < nt; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace svk
