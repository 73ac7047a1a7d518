#include "cascadewg/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace cascadewg {

unsigned worker_count() {
  unsigned requested = 0;
  if (const char* env = std::getenv("CASCADEWG_THREADS")) {
    try {
      requested = static_cast<unsigned>(std::stoul(env));
    } catch (const std::exception&) {
      requested = 0;
    }
  }
  if (requested == 0) requested = std::max(1u, std::thread::hardware_concurrency());
  return requested;
}

void parallel_for(std::size_t begin, std::size_t end, unsigned workers,
                  const std::function<void(std::size_t)>& fn) {
  if (end <= begin) return;
  const std::size_t count = end - begin;
  std::vector<std::exception_ptr> errors(count);
  const unsigned n_threads =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), count));

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t j = next++; j < count; j = next++) {
      try {
        fn(begin + j);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace cascadewg
