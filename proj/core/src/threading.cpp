// core/src/threading.cpp

// Copyright 2026  The ndeblur Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "ndeblur/threading.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace ndeblur {

namespace {
std::atomic<int> g_max_threads{0};

int effective_threads() {
  int n = g_max_threads.load(std::memory_order_relaxed);
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  return std::max(1, n);
}
}  // namespace

void set_max_threads(int n) { g_max_threads.store(n, std::memory_order_relaxed); }

int max_threads() { return effective_threads(); }

int chunk_count(std::size_t n) {
  return static_cast<int>(std::min<std::size_t>(effective_threads(), std::max<std::size_t>(n, 1)));
}

void parallel_chunks(std::size_t n,
                     const std::function<void(int, std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  const int workers = chunk_count(n);
  if (workers == 1) {
    fn(0, 0, n);
    return;
  }
  const std::size_t base = n / workers;
  const std::size_t rem = n % workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::size_t begin = 0;
  for (int c = 0; c < workers; ++c) {
    const std::size_t len = base + (static_cast<std::size_t>(c) < rem ? 1 : 0);
    const std::size_t end = begin + len;
    pool.emplace_back([&, c, begin, end] {
      try {
        fn(c, begin, end);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    });
    begin = end;
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace ndeblur
