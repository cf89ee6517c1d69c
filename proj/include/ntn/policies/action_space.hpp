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

#ifndef NTN_POLICIES_ACTION_SPACE_HPP
#define NTN_POLICIES_ACTION_SPACE_HPP

#include <vector>

#include <Eigen/Dense>

#include "ntn/sim/scenario.hpp"

namespace ntn::policy {

using sim::Mask;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Joint discrete actions a = scc_mask | (sc_mask << scc_bits). The PCC is not
// part of the action and can never be switched off.
class ActionSpace {
public:
  ActionSpace(int scc_bits, int sc_bits);

  int size() const { return 1 << (scc_bits_ + sc_bits_); }
  int scc_bits() const { return scc_bits_; }
  int sc_bits() const { return sc_bits_; }
  int bit_count() const { return scc_bits_ + sc_bits_; }

  Mask scc_mask(int a) const { return static_cast<Mask>(a) & ((Mask{1} << scc_bits_) - 1); }
  Mask sc_mask(int a) const { return static_cast<Mask>(a) >> scc_bits_; }
  int encode(Mask scc, Mask sc) const { return static_cast<int>(scc | (sc << scc_bits_)); }

  // `available` holds the SCs this agent may use (free or already its own).
  bool feasible(int a, Mask available) const { return (sc_mask(a) & ~available) == 0; }
  // 0/1 vector over actions; cached per available set.
  const Vector& mask(Mask available) const;
  int feasible_count(Mask available) const;

  // bit_count x size matrix whose column a is the binary expansion of a.
  const Matrix& features() const { return features_; }

private:
  int scc_bits_;
  int sc_bits_;
  std::vector<Vector> masks_;
  Matrix features_;
};

// PCC(i) = cc[i mod |cc|].
std::vector<int> round_robin_pcc(int leos_count, const std::vector<int>& ccs);

// Maps SCC bit k of LEOS with the given PCC to a CC index: the non-PCC CCs in
// ascending order.
int scc_to_cc(int pcc, int k);

// Active CC set implied by an action.
Mask active_set(const ActionSpace& space, int pcc, int action);

// Softmax restricted to the feasible actions; infeasible entries are exactly 0.
Vector masked_softmax(const Vector& logits, const Vector& mask);

// Renormalizes a distribution onto the feasible set.
Vector mask_distribution(const Vector& p, const Vector& mask);

}  // namespace ntn::policy

#endif  // NTN_POLICIES_ACTION_SPACE_HPP
