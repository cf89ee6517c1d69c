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

#ifndef NTN_POLICIES_REPLAY_HPP
#define NTN_POLICIES_REPLAY_HPP

#include <cstddef>
#include <vector>

#include "ntn/common/random.hpp"
#include "ntn/policies/action_space.hpp"

namespace ntn::policy {

struct Transition {
  Vector obs;
  int action = 0;
  double reward = 0.0;
  Vector next_obs;
  bool terminal = false;
  Mask available = 0;       // SCs usable when the action was chosen
  Mask next_available = 0;  // SCs usable at next_obs
};

// FIFO ring; the oldest record is overwritten at capacity.
class ReplayBuffer {
public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  // Index 0 is the oldest stored record.
  const Transition& at(std::size_t i) const;

  // Uniform with replacement.
  std::vector<const Transition*> sample(std::size_t n, Rng& rng) const;

private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // next slot to overwrite once full
  std::vector<Transition> data_;
};

}  // namespace ntn::policy

#endif  // NTN_POLICIES_REPLAY_HPP
