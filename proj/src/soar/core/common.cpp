#include "soar/core/common.hpp"

#include <cstdlib>
#include <functional>
#include <iostream>
#include <mutex>
#include <thread>

namespace soar {

int thread_count() {
  static const int n = [] {
    const char* env = std::getenv("SOAR_THREADS");
    if (!env) return 1;
    int v = std::atoi(env);
    return v < 1 ? 1 : v;
  }();
  return n;
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn) {
  const int threads = thread_count();
  if (n <= 0) return;
  if (threads == 1 || n < 2 * threads) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::int64_t chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const std::int64_t begin = t * chunk;
    const std::int64_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(fn, begin, end);
  }
  for (auto& th : pool) th.join();
}

namespace {
std::mutex g_log_mutex;
}

void log_info(const std::string& msg) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  std::cerr << "[soar] " << msg << "\n";
}

void log_warn(const std::string& msg) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  std::cerr << "[soar] warning: " << msg << "\n";
}

}  // namespace soar
