/*
 * Copyright 2026 The fral Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "jin_oracle.h"

#include <algorithm>

#include <Eigen/Dense>

#include "fral/adversarial.h"
#include "fral/random.h"
#include "oracles.h"

namespace fral::testing {

std::vector<double> one_step_kl_attack(const LinearParams& m, const std::vector<double>& x,
                                       double epsilon, double step, std::uint64_t seed) {
  Eigen::RowVectorXd xr(static_cast<Eigen::Index>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) xr[j] = x[j];
  const Eigen::RowVectorXd start = random_start(xr, epsilon, ClampRange{}, seed);
  std::vector<double> s(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    s[j] = std::clamp(start[j], std::max(x[j] - epsilon, 0.0), std::min(x[j] + epsilon, 1.0));
  }
  if (epsilon == 0.0) return s;
  const auto p = softmax(linear_logits(m.w, m.b, x));
  const auto q = softmax(linear_logits(m.w, m.b, s));
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    double g = 0.0;  // d/dx' KL(p || q(x')) = sum_c (q_c - p_c) w_cj
    for (std::size_t c = 0; c < p.size(); ++c) g += (q[c] - p[c]) * m.w[c][j];
    const double moved = s[j] + step * sign(g);
    out[j] = std::clamp(moved, std::max(x[j] - epsilon, 0.0), std::min(x[j] + epsilon, 1.0));
  }
  return out;
}

JinOracle jin_oracle(const JinCase& c) {
  JinOracle o;
  for (std::size_t i = 0; i < c.x.size(); ++i) {
    const auto ps = softmax(linear_logits(c.standard.w, c.standard.b, c.x[i]));
    const auto pr = softmax(linear_logits(c.robust.w, c.robust.b, c.x[i]));
    o.i_std.push_back(kl(ps, pr));
    const auto adv = one_step_kl_attack(c.robust, c.x[i], c.epsilon, c.step,
                                        derive_seed(c.attack_seed, "sample",
                                                    static_cast<std::uint64_t>(c.ids[i])));
    const auto pa = softmax(linear_logits(c.robust.w, c.robust.b, adv));
    o.i_rob.push_back(kl(pr, pa));
  }
  const auto ns = zscore(o.i_std);
  const auto nr = zscore(o.i_rob);
  for (std::size_t i = 0; i < ns.size(); ++i) o.joint.push_back(ns[i] + nr[i]);
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(c.budget), c.x.size());
  for (std::size_t pos : rank_desc(o.joint, c.ids, k)) o.selected.push_back(c.ids[pos]);
  return o;
}

}  // namespace fral::testing
