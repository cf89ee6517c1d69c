/*
 * Copyright 2026 The ntn-gai Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef NTN_COMMON_ERRORS_HPP
#define NTN_COMMON_ERRORS_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace ntn {

// Invalid shapes, ranges or config values.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Non-finite values during learning. `where` is a layer index or an
// iteration index, depending on the thrower.
class TrainingError : public std::runtime_error {
public:
  explicit TrainingError(const std::string& what, std::optional<std::size_t> where = std::nullopt)
      : std::runtime_error(what), where_(where) {}

  std::optional<std::size_t> where() const { return where_; }

private:
  std::optional<std::size_t> where_;
};

// Positive demand on a link whose SINR is zero.
class InfeasibleLoadError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A state whose outgoing flows are all zero.
class DegenerateStateError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace ntn

#endif  // NTN_COMMON_ERRORS_HPP
