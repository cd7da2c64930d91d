// Copyright 2026 The predrc Authors
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

#include "model/tracker.hpp"

#include <cmath>

#include "model/trustformer.hpp"
#include "num/attention.hpp"
#include "num/tape.hpp"

namespace predrc::model {

template <typename T>
RelianceTracker<T>::RelianceTracker(const ModelParams<T>& params)
    : params_(&params), keys_(params.config.num_layers), values_(params.config.num_layers) {}

template <typename T>
typename RelianceTracker<T>::Pass RelianceTracker<T>::run(const StepInput& token) const {
  const ModelConfig& cfg = params_->config;
  require(length_ < cfg.max_seq_len, "history exceeds max_seq_len");
  num::Tape<T> tape(false);
  const Binding<T> b = bind<T>(tape, *params_, nullptr);
  const std::size_t pos = length_;
  auto x = embed<T>(tape, b, std::span<const StepInput>(&token, 1),
                    std::span<const std::size_t>(&pos, 1));
  const std::size_t d = cfg.d_model;
  const std::size_t heads = cfg.num_heads;
  const std::size_t dh = d / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));
  Pass pass;
  std::vector<T> probs(length_ + 1);
  std::vector<const T*> kp(length_ + 1), vp(length_ + 1);
  for (std::size_t li = 0; li < b.layers.size(); ++li) {
    const auto& l = b.layers[li];
    auto [q, k, v] = attention_inputs<T>(tape, l, x);
    const Matrix<T>& Q = tape.value(q);
    const Matrix<T>& K = tape.value(k);
    const Matrix<T>& V = tape.value(v);
    const std::vector<T>& kc = keys_[li];
    const std::vector<T>& vc = values_[li];
    Matrix<T> out(1, d);
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t j = 0; j < length_; ++j) {
        kp[j] = kc.data() + j * d + h * dh;
        vp[j] = vc.data() + j * d + h * dh;
      }
      kp[length_] = K.data() + h * dh;
      vp[length_] = V.data() + h * dh;
      num::attend_row<T>(Q.data() + h * dh, kp, vp, dh, scale, probs.data(), out.data() + h * dh);
    }
    pass.keys.push_back(K);
    pass.values.push_back(V);
    x = finish_layer<T>(tape, b, l, x, tape.constant(std::move(out)), nullptr);
  }
  pass.logit = tape.value(head_logits<T>(tape, b, x))[0];
  return pass;
}

template <typename T>
double RelianceTracker<T>::predict(const std::vector<double>& x, std::optional<double> c) const {
  return probability_from_logit(static_cast<double>(run(StepInput::current(x, c)).logit));
}

template <typename T>
ReliancePair RelianceTracker<T>::predict_pair(const std::vector<double>& x, double c_hat) const {
  return {predict(x, c_hat), predict(x, std::nullopt)};
}

template <typename T>
void RelianceTracker<T>::append(const StepInput& step) {
  require(step.d.has_value() && step.f.has_value(),
          "history steps need a decision and feedback");
  const Pass pass = run(step);
  for (std::size_t li = 0; li < keys_.size(); ++li) {
    keys_[li].insert(keys_[li].end(), pass.keys[li].values().begin(), pass.keys[li].values().end());
    values_[li].insert(values_[li].end(), pass.values[li].values().begin(),
                       pass.values[li].values().end());
  }
  ++length_;
}

template class RelianceTracker<float>;
template class RelianceTracker<double>;

}  // namespace predrc::model
