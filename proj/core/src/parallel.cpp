#include "odecert/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace odecert {

int thread_budget() {
  static const int budget = [] {
    if (const char* env = std::getenv("ODE_CERTIFY_THREADS")) {
      int v = std::atoi(env);
      if (v >= 1) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
  }();
  return budget;
}

namespace {

/// Captures the first exception thrown by any worker and rethrows it on the
/// spawning thread; an exception escaping std::thread would terminate.
class FirstError {
 public:
  void capture() {
    std::lock_guard<std::mutex> lock(mu_);
    if (!error_) error_ = std::current_exception();
  }
  bool set() const { return static_cast<bool>(error_); }
  void rethrow_if_set() {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mu_;
  std::exception_ptr error_;
};

}  // namespace

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  FirstError error;
  const std::size_t block = std::max<std::size_t>(1, n / (4 * static_cast<std::size_t>(workers)));
  auto worker = [&] {
    try {
      for (;;) {
        std::size_t begin = next.fetch_add(block);
        if (begin >= n || error.set()) return;
        std::size_t end = std::min(n, begin + block);
        for (std::size_t i = begin; i < end; ++i) fn(i);
      }
    } catch (...) {
      error.capture();
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  error.rethrow_if_set();
}

void chunked_reduce(std::size_t n, int n_chunks, int threads,
                    const std::function<void(int slot)>& reset,
                    const std::function<void(std::size_t begin, std::size_t end, int slot)>& accumulate,
                    const std::function<void(int slot)>& combine) {
  if (n == 0) return;
  n_chunks = std::max(1, std::min<int>(n_chunks, static_cast<int>(n)));
  const std::size_t per = (n + n_chunks - 1) / n_chunks;
  const int workers = std::max(1, std::min(threads, std::min(n_chunks, kReduceSlots)));

  // Chunks are processed in waves of kReduceSlots; slot s of a wave always
  // holds chunk (wave*kReduceSlots + s), and slots are combined in slot
  // order after the wave, so the fold order over chunks is fixed.
  for (int wave_start = 0; wave_start < n_chunks; wave_start += kReduceSlots) {
    const int wave_len = std::min(kReduceSlots, n_chunks - wave_start);
    auto run_slot = [&](int s) {
      const int chunk = wave_start + s;
      const std::size_t begin = static_cast<std::size_t>(chunk) * per;
      const std::size_t end = std::min(n, begin + per);
      reset(s);
      if (begin < end) accumulate(begin, end, s);
    };
    if (workers == 1 || wave_len == 1) {
      for (int s = 0; s < wave_len; ++s) run_slot(s);
    } else {
      std::atomic<int> next{0};
      FirstError error;
      auto worker = [&] {
        try {
          for (;;) {
            int s = next.fetch_add(1);
            if (s >= wave_len || error.set()) return;
            run_slot(s);
          }
        } catch (...) {
          error.capture();
        }
      };
      std::vector<std::thread> pool;
      const int w_here = std::min(workers, wave_len);
      pool.reserve(w_here - 1);
      for (int w = 1; w < w_here; ++w) pool.emplace_back(worker);
      worker();
      for (auto& t : pool) t.join();
      error.rethrow_if_set();
    }
    for (int s = 0; s < wave_len; ++s) combine(s);
  }
}

}  // namespace odecert
