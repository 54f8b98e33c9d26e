// ndeblur/threading.hpp

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

#ifndef NDEBLUR_THREADING_HPP
#define NDEBLUR_THREADING_HPP

#include <cstddef>
#include <functional>

namespace ndeblur {

// Global cap on worker threads (CLI --threads). 0 means hardware concurrency.
void set_max_threads(int n);
int max_threads();

// Runs fn(chunk_index, begin, end) over [0, n) split into fixed contiguous
// chunks, one per worker. The partition depends only on n and the worker
// count, so results reduced in chunk order are reproducible for a fixed
// thread setting. With one worker this degenerates to a plain loop.
void parallel_chunks(std::size_t n,
                     const std::function<void(int, std::size_t, std::size_t)>& fn);

// Number of chunks parallel_chunks will use for n items.
int chunk_count(std::size_t n);

}  // namespace ndeblur

#endif  // NDEBLUR_THREADING_HPP
