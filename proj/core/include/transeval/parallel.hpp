// Copyright 2026 The transeval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TRANSEVAL_PARALLEL_HPP_
#define TRANSEVAL_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace transeval {

// Worker count: TRANSEVAL_THREADS if set to a positive integer, otherwise
// the hardware concurrency (at least 1).
int WorkerCount();

// Runs fn(i) for every i in [0, n) on up to WorkerCount() threads. Callers
// write results by index, so output never depends on scheduling. If several
// calls throw, the exception of the lowest index is rethrown.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace transeval

#endif  // TRANSEVAL_PARALLEL_HPP_
