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

#include "transeval/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include <gtest/gtest.h>

namespace transeval {
namespace {

class ThreadsEnv {
 public:
  explicit ThreadsEnv(const char* value) {
    if (const char* old = std::getenv("TRANSEVAL_THREADS")) old_ = old;
    ::setenv("TRANSEVAL_THREADS", value, 1);
  }
  ~ThreadsEnv() {
    if (old_.empty()) {
      ::unsetenv("TRANSEVAL_THREADS");
    } else {
      ::setenv("TRANSEVAL_THREADS", old_.c_str(), 1);
    }
  }

 private:
  std::string old_;
};

TEST(Parallel, EnvironmentCapsWorkers) {
  ThreadsEnv env("3");
  EXPECT_EQ(WorkerCount(), 3);
}

TEST(Parallel, InvalidEnvironmentFallsBack) {
  ThreadsEnv env("zero");
  EXPECT_GE(WorkerCount(), 1);
}

TEST(Parallel, ResultsLandByIndex) {
  ThreadsEnv env("4");
  std::vector<std::size_t> out(1000);
  ParallelFor(out.size(), [&](std::size_t i) { out[i] = i * i; });
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], i * i);
}

TEST(Parallel, LowestIndexExceptionWins) {
  ThreadsEnv env("4");
  try {
    ParallelFor(100, [](std::size_t i) {
      if (i == 17 || i == 60) throw std::runtime_error("fail " + std::to_string(i));
    });
    FAIL() << "expected an exception";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "fail 17");
  }
}

TEST(Parallel, NestedCallsComplete) {
  ThreadsEnv env("4");
  std::atomic<int> count{0};
  ParallelFor(8, [&](std::size_t) { ParallelFor(8, [&](std::size_t) { ++count; }); });
  EXPECT_EQ(count.load(), 64);
}

TEST(Parallel, ZeroItemsIsNoop) {
  int calls = 0;
  ParallelFor(0, [&](std::size_t) { ++calls; });
  EXPECT_EQ(calls, 0);
}

}  // namespace
}  // namespace transeval
