// spoofdet/optim.hpp
//
// Copyright 2026 The spoofdet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPOOFDET_OPTIM_HPP_
#define SPOOFDET_OPTIM_HPP_

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "spoofdet/layers.hpp"

namespace spoofdet {

struct OptimizerConfig {
  double learning_rate = 0.0005;
  double weight_decay = 0.0001;  // L2 term added to the gradient
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int batch_size = 32;
};

// AMSGrad: Adam whose second-moment denominator uses the running maximum of
// the second-moment estimate, so the effective step size never grows.
template <typename T>
class AmsGrad {
 public:
  explicit AmsGrad(const OptimizerConfig& cfg) : cfg_(cfg) {}

  const OptimizerConfig& config() const { return cfg_; }

  // One update over `params`; `frozen(name)` decides which entries are
  // skipped entirely (no update, no state advance).
  template <typename FrozenFn>
  void Step(const ParamList<T>& params, FrozenFn frozen) {
    for (const auto& p : params) {
      if (frozen(p.name)) continue;
      State& st = states_[p.name];
      if (st.m.size() != p.value->data.size()) {
        st.m.assign(p.value->data.size(), 0.0);
        st.v.assign(p.value->data.size(), 0.0);
        st.vmax.assign(p.value->data.size(), 0.0);
        st.t = 0;
      }
      ++st.t;
      double bc1 = 1.0 - std::pow(cfg_.beta1, st.t);
      double bc2 = 1.0 - std::pow(cfg_.beta2, st.t);
      for (size_t i = 0; i < p.value->data.size(); ++i) {
        double g = static_cast<double>(p.grad->data[i]);
        if (p.weight_decay)
          g += cfg_.weight_decay * static_cast<double>(p.value->data[i]);
        st.m[i] = cfg_.beta1 * st.m[i] + (1.0 - cfg_.beta1) * g;
        st.v[i] = cfg_.beta2 * st.v[i] + (1.0 - cfg_.beta2) * g * g;
        double vhat = st.v[i] / bc2;
        if (vhat > st.vmax[i]) st.vmax[i] = vhat;
        double step = cfg_.learning_rate * (st.m[i] / bc1) /
                      (std::sqrt(st.vmax[i]) + cfg_.eps);
        p.value->data[i] -= static_cast<T>(step);
      }
    }
  }

  void Step(const ParamList<T>& params) {
    Step(params, [](const std::string&) { return false; });
  }

  // Drops moment state for every parameter whose name starts with `prefix`.
  // Used when a parameter group is unfrozen at a phase transition.
  void ResetGroup(const std::string& prefix) {
    for (auto it = states_.begin(); it != states_.end();) {
      if (StartsWith(it->first, prefix)) {
        it = states_.erase(it);
      } else {
        ++it;
      }
    }
  }

  struct State {
    std::vector<double> m, v, vmax;
    int64_t t = 0;
  };

  const std::map<std::string, State>& states() const { return states_; }
  std::map<std::string, State>& mutable_states() { return states_; }

 private:
  OptimizerConfig cfg_;
  std::map<std::string, State> states_;
};

template <typename T>
void ZeroGrads(const ParamList<T>& params) {
  for (const auto& p : params) p.grad->Zero();
}

}  // namespace spoofdet

#endif  // SPOOFDET_OPTIM_HPP_
