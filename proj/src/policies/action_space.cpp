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

#include "ntn/policies/action_space.hpp"

#include <cmath>
#include <limits>

#include "ntn/common/errors.hpp"

namespace ntn::policy {

ActionSpace::ActionSpace(int scc_bits, int sc_bits) : scc_bits_(scc_bits), sc_bits_(sc_bits) {
  if (scc_bits < 0 || sc_bits < 0 || scc_bits + sc_bits > 12 || scc_bits + sc_bits < 1)
    throw ConfigError("action space must have between 1 and 12 bits");
  const int n = size();
  masks_.resize(std::size_t{1} << sc_bits);
  for (std::size_t avail = 0; avail < masks_.size(); ++avail) {
    masks_[avail] = Vector::Zero(n);
    for (int a = 0; a < n; ++a)
      if (feasible(a, static_cast<Mask>(avail))) masks_[avail](a) = 1.0;
  }
  features_ = Matrix::Zero(bit_count(), n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < bit_count(); ++b) features_(b, a) = (a >> b) & 1;
}

const Vector& ActionSpace::mask(Mask available) const {
  return masks_[available & ((Mask{1} << sc_bits_) - 1)];
}

int ActionSpace::feasible_count(Mask available) const {
  return 1 << (scc_bits_ + sim::popcount(available & ((Mask{1} << sc_bits_) - 1)));
}

std::vector<int> round_robin_pcc(int leos_count, const std::vector<int>& ccs) {
  if (leos_count < 1 || ccs.empty()) throw ConfigError("round robin needs LEOS and CCs");
  std::vector<int> out(static_cast<std::size_t>(leos_count));
  for (int i = 0; i < leos_count; ++i) out[static_cast<std::size_t>(i)] = ccs[static_cast<std::size_t>(i) % ccs.size()];
  return out;
}

int scc_to_cc(int pcc, int k) { return k < pcc ? k : k + 1; }

Mask active_set(const ActionSpace& space, int pcc, int action) {
  Mask act = Mask{1} << pcc;
  const Mask scc = space.scc_mask(action);
  for (int k = 0; k < space.scc_bits(); ++k)
    if (sim::has_bit(scc, k)) act |= Mask{1} << scc_to_cc(pcc, k);
  return act;
}

Vector masked_softmax(const Vector& logits, const Vector& mask) {
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < logits.size(); ++a)
    if (mask(a) > 0.0) top = std::max(top, logits(a));
  if (!std::isfinite(top)) throw ConfigError("no feasible action");
  Vector p = Vector::Zero(logits.size());
  for (Eigen::Index a = 0; a < logits.size(); ++a)
    if (mask(a) > 0.0) p(a) = std::exp(logits(a) - top);
  return p / p.sum();
}

Vector mask_distribution(const Vector& p, const Vector& mask) {
  const Vector q = p.cwiseProduct(mask);
  const double total = q.sum();
  if (!(total > 0.0)) throw ConfigError("no feasible action");
  return q / total;
}

}  // namespace ntn::policy
