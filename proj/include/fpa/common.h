// Copyright 2026 The fpa Authors
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

#ifndef FPA_COMMON_H_
#define FPA_COMMON_H_

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>

namespace fpa {

// Error hierarchy. The CLI maps each class to a distinct exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input or an instance that violates a model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A numerical routine could not produce a trustworthy answer.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A wall-clock budget ran out.
class TimeoutError : public Error {
 public:
  using Error::Error;
};

// Cooperative wall-clock deadline. A default-constructed deadline never
// expires.
class Deadline {
 public:
  using Clock = std::chrono::steady_clock;

  Deadline() = default;
  explicit Deadline(std::chrono::duration<double> budget)
      : end_(Clock::now() +
             std::chrono::duration_cast<Clock::duration>(budget)) {}

  bool expired() const { return end_ && Clock::now() >= *end_; }

  void check(const char* where) const {
    if (expired()) throw TimeoutError(std::string("deadline exceeded in ") + where);
  }

 private:
  std::optional<Clock::time_point> end_;
};

}  // namespace fpa

#endif  // FPA_COMMON_H_
