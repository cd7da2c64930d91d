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

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "common/rng.hpp"
#include "model/config.hpp"
#include "model/params.hpp"
#include "model/step_input.hpp"
#include "num/attention.hpp"
#include "num/tape.hpp"

namespace predrc::model {

// Token rows for one encoder pass together with the attention pattern and
// the rows whose encoder output feeds the head. Several independent blocks
// (examples or sessions) can share one layout; blocks never attend to each
// other.
//
// Attention is causal over collaboration history: a history token at step j
// sees history tokens 0..j, and the token of the step being predicted sees
// the whole history before it plus itself. Because of this, all prefixes of
// a session can be evaluated in one pass over the session (see
// add_session_queries) with results identical to evaluating each prefix on
// its own.
struct TokenLayout {
  std::vector<StepInput> tokens;
  std::vector<std::size_t> positions;
  std::vector<std::vector<std::uint32_t>> keys;
  std::vector<std::size_t> readout;

  std::shared_ptr<const num::AttentionMask> mask() const {
    return std::make_shared<const num::AttentionMask>(keys);
  }
};

struct PrefixQuery {
  std::size_t step;          // history is steps[0..step)
  std::optional<double> c;   // cue value fed to the predicted step
};

class LayoutBuilder {
 public:
  explicit LayoutBuilder(const ModelConfig& config) : config_(config) {}

  // history + current; current.d and current.f must be MASK.
  void add_example(std::span<const StepInput> history, const StepInput& current);

  // Queries over prefixes of one completed session (steps carry d and f).
  // Each query predicts step q.step from steps before it.
  void add_session_queries(std::span<const StepInput> steps,
                           std::span<const PrefixQuery> queries);

  // One query per step using the cue as recorded in the session.
  void add_session(std::span<const StepInput> steps);

  const TokenLayout& layout() const { return layout_; }
  TokenLayout take() { return std::move(layout_); }

 private:
  std::uint32_t push(const StepInput& s, std::size_t position);

  ModelConfig config_;
  TokenLayout layout_;
};

// Tape leaves for every parameter tensor, in canonical order.
template <typename T>
struct Binding {
  using Var = typename num::Tape<T>::Var;
  struct Layer {
    Var q_w, q_b, k_w, k_b, v_w, v_b, o_w, o_b;
    Var norm1_gamma, norm1_beta, ff1_w, ff1_b, ff2_w, ff2_b, norm2_gamma, norm2_beta;
  };
  const ModelConfig* config = nullptr;
  Var x_w, x_b, c_w, c_b, c_mask, d_w, d_b, d_mask, f_w, f_b, f_mask, position;
  std::vector<Layer> layers;
  std::vector<Var> head_w, head_b;
};

template <typename T>
Binding<T> bind(num::Tape<T>& tape, const ModelParams<T>& params, ModelParams<T>* grads);

// Sum of per-field embeddings and the position embedding for each token.
template <typename T>
typename num::Tape<T>::Var embed(num::Tape<T>& tape, const Binding<T>& b,
                                 std::span<const StepInput> tokens,
                                 std::span<const std::size_t> positions);

// Projections q, k, v of one encoder layer.
template <typename T>
std::array<typename num::Tape<T>::Var, 3> attention_inputs(
    num::Tape<T>& tape, const typename Binding<T>::Layer& l, typename num::Tape<T>::Var x);

// Everything in an encoder layer after the attention core: output
// projection, residual + norm, ReLU feed-forward, residual + norm.
template <typename T>
typename num::Tape<T>::Var finish_layer(num::Tape<T>& tape, const Binding<T>& b,
                                        const typename Binding<T>::Layer& l,
                                        typename num::Tape<T>::Var x,
                                        typename num::Tape<T>::Var attended, Rng* dropout_rng);

// Full encoder stack over token rows.
template <typename T>
typename num::Tape<T>::Var encode(num::Tape<T>& tape, const Binding<T>& b,
                                  typename num::Tape<T>::Var tokens,
                                  std::shared_ptr<const num::AttentionMask> mask,
                                  Rng* dropout_rng);

// MLP head; returns the pre-sigmoid logit column.
template <typename T>
typename num::Tape<T>::Var head_logits(num::Tape<T>& tape, const Binding<T>& b,
                                       typename num::Tape<T>::Var rows);

// Probability from a logit, kept strictly inside (0, 1).
double probability_from_logit(double z);

template <typename T>
Matrix<T> embed_history(const ModelParams<T>& params, std::span<const StepInput> history,
                        const StepInput& current);

// Encoder + head over an embedded sequence (causal), reading out the last
// token. train_mode enables dropout and then requires rng.
template <typename T>
double forward(const ModelParams<T>& params, const Matrix<T>& tokens, bool train_mode,
               Rng* rng);

// r with the candidate cue shown (current.c) and with it masked.
template <typename T>
ReliancePair predict_pair(const ModelParams<T>& params, std::span<const StepInput> history,
                          const StepInput& current);

// Inference-mode probabilities for every readout row of a layout.
template <typename T>
std::vector<double> predict_layout(const ModelParams<T>& params, const TokenLayout& layout);

// -log r for AI, -log(1 - r) for human, with r clipped into [1e-7, 1-1e-7].
double bce_loss(double r, Agent d);

struct Example {
  std::vector<StepInput> history;
  StepInput current;
  Agent label = Agent::kAi;
};

template <typename T>
struct LossAndGrad {
  double loss = 0.0;
  ModelParams<T> grads;
};

// Mean BCE over the layout's readout rows and its parameter gradient.
// A null rng evaluates without dropout.
template <typename T>
LossAndGrad<T> layout_loss_and_grad(const ModelParams<T>& params, const TokenLayout& layout,
                                    std::span<const std::uint8_t> labels_ai, Rng* dropout_rng);

template <typename T>
LossAndGrad<T> loss_and_grad(const ModelParams<T>& params, std::span<const Example> batch,
                             Rng* dropout_rng);

}  // namespace predrc::model
