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

#ifndef TRANSEVAL_ERROR_HPP_
#define TRANSEVAL_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace transeval {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration, malformed files, violated preconditions. The CLI maps
// these to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

// A numeric kernel failed on otherwise valid input. Exit code 1.
class ComputationError : public Error {
 public:
  using Error::Error;
};

}  // namespace transeval

#endif  // TRANSEVAL_ERROR_HPP_
