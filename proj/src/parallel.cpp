#include "consensus_mesh/parallel.h"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace consensus {

int thread_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  const char* env = std::getenv("CONSENSUS_MESH_THREADS");
  if (env == nullptr || *env == '\0') return hw;
  try {
    int requested = std::stoi(env);
    if (requested <= 0) return hw;
    return requested;
  } catch (...) {
    return hw;
  }
}

namespace {

// Set on threads already running inside a parallel_for; nested calls run inline.
thread_local bool in_parallel_region = false;

}  // namespace

void parallel_for(int n, const std::function<void(int, int)>& fn, int max_workers) {
  if (n <= 0) return;
  int workers = in_parallel_region ? 1 : thread_count();
  if (max_workers > 0) workers = std::min(workers, max_workers);
  workers = std::clamp(workers, 1, n);
  if (workers == 1) {
    fn(0, n);
    return;
  }
  const int chunk = (n + workers - 1) / workers;
  std::vector<std::exception_ptr> errors(workers);
  auto run = [&](int w) {
    in_parallel_region = true;
    try {
      const int begin = w * chunk;
      const int end = std::min(n, begin + chunk);
      if (begin < end) fn(begin, end);
    } catch (...) {
      errors[w] = std::current_exception();
    }
    in_parallel_region = false;
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int w = 1; w < workers; ++w) pool.emplace_back(run, w);
  run(0);
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace consensus
