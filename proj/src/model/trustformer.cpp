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

#include "model/trustformer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace predrc::model {

using num::Tape;

namespace {

void check_cue(const std::optional<double>& c) {
  if (c && !(*c >= 0.0 && *c <= 1.0))
    fail(ErrorCode::kInvalidArgument, "cue value must lie in [0, 1]");
}

void check_masked_current(const StepInput& current) {
  require(!current.d && !current.f,
          "the predicted step must have its decision and feedback masked");
}

}  // namespace

std::uint32_t LayoutBuilder::push(const StepInput& s, std::size_t position) {
  require(s.x.size() == config_.x_dim, "task feature vector has " + std::to_string(s.x.size()) +
                                           " dims, model expects " +
                                           std::to_string(config_.x_dim));
  check_cue(s.c);
  require(position < config_.max_seq_len, "sequence exceeds max_seq_len");
  layout_.tokens.push_back(s);
  layout_.positions.push_back(position);
  layout_.keys.emplace_back();
  return static_cast<std::uint32_t>(layout_.tokens.size() - 1);
}

void LayoutBuilder::add_example(std::span<const StepInput> history, const StepInput& current) {
  require(history.size() + 1 <= config_.max_seq_len,
          "history of " + std::to_string(history.size()) + " steps exceeds max_seq_len " +
              std::to_string(config_.max_seq_len));
  check_masked_current(current);
  const auto base = static_cast<std::uint32_t>(layout_.tokens.size());
  for (std::size_t j = 0; j <= history.size(); ++j) {
    const std::uint32_t row = push(j < history.size() ? history[j] : current, j);
    for (std::uint32_t k = base; k <= row; ++k) layout_.keys[row].push_back(k);
  }
  layout_.readout.push_back(layout_.tokens.size() - 1);
}

void LayoutBuilder::add_session_queries(std::span<const StepInput> steps,
                                        std::span<const PrefixQuery> queries) {
  require(steps.size() <= config_.max_seq_len, "session exceeds max_seq_len");
  std::size_t needed = 0;
  for (const PrefixQuery& q : queries) {
    require(q.step < steps.size(), "prefix query beyond session length");
    needed = std::max(needed, q.step);
  }
  const auto base = static_cast<std::uint32_t>(layout_.tokens.size());
  for (std::size_t j = 0; j < needed; ++j) {
    const std::uint32_t row = push(steps[j], j);
    for (std::uint32_t k = base; k <= row; ++k) layout_.keys[row].push_back(k);
  }
  for (const PrefixQuery& q : queries) {
    const std::uint32_t row = push(StepInput::current(steps[q.step].x, q.c), q.step);
    for (std::uint32_t k = 0; k < q.step; ++k) layout_.keys[row].push_back(base + k);
    layout_.keys[row].push_back(row);
    layout_.readout.push_back(row);
  }
}

void LayoutBuilder::add_session(std::span<const StepInput> steps) {
  std::vector<PrefixQuery> q;
  q.reserve(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) q.push_back({i, steps[i].c});
  add_session_queries(steps, q);
}

template <typename T>
Binding<T> bind(Tape<T>& tape, const ModelParams<T>& p, ModelParams<T>* g) {
  Binding<T> b;
  b.config = &p.config;
  auto leaf = [&](const Matrix<T>& value, Matrix<T>* sink) { return tape.leaf(value, sink); };
#define PREDRC_BIND(field) b.field = leaf(p.field, g ? &g->field : nullptr)
  PREDRC_BIND(x_w);
  PREDRC_BIND(x_b);
  PREDRC_BIND(c_w);
  PREDRC_BIND(c_b);
  PREDRC_BIND(c_mask);
  PREDRC_BIND(d_w);
  PREDRC_BIND(d_b);
  PREDRC_BIND(d_mask);
  PREDRC_BIND(f_w);
  PREDRC_BIND(f_b);
  PREDRC_BIND(f_mask);
  PREDRC_BIND(position);
#undef PREDRC_BIND
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    const auto& lp = p.layers[i];
    auto* lg = g ? &g->layers[i] : nullptr;
    typename Binding<T>::Layer l;
#define PREDRC_BIND(field) l.field = leaf(lp.field, lg ? &lg->field : nullptr)
    PREDRC_BIND(q_w);
    PREDRC_BIND(q_b);
    PREDRC_BIND(k_w);
    PREDRC_BIND(k_b);
    PREDRC_BIND(v_w);
    PREDRC_BIND(v_b);
    PREDRC_BIND(o_w);
    PREDRC_BIND(o_b);
    PREDRC_BIND(norm1_gamma);
    PREDRC_BIND(norm1_beta);
    PREDRC_BIND(ff1_w);
    PREDRC_BIND(ff1_b);
    PREDRC_BIND(ff2_w);
    PREDRC_BIND(ff2_b);
    PREDRC_BIND(norm2_gamma);
    PREDRC_BIND(norm2_beta);
#undef PREDRC_BIND
    b.layers.push_back(l);
  }
  for (std::size_t i = 0; i < p.head_w.size(); ++i) {
    b.head_w.push_back(leaf(p.head_w[i], g ? &g->head_w[i] : nullptr));
    b.head_b.push_back(leaf(p.head_b[i], g ? &g->head_b[i] : nullptr));
  }
  return b;
}

template <typename T>
typename Tape<T>::Var embed(Tape<T>& tape, const Binding<T>& b, std::span<const StepInput> tokens,
                            std::span<const std::size_t> positions) {
  const ModelConfig& cfg = *b.config;
  const std::size_t n = tokens.size();
  require(n >= 1, "cannot embed an empty sequence");
  require(positions.size() == n, "one position per token required");
  Matrix<T> x(n, cfg.x_dim);
  Matrix<T> c_value(n, 1), c_present(n, 1), c_masked(n, 1);
  Matrix<T> d_onehot(n, 2), d_present(n, 1), d_masked(n, 1);
  Matrix<T> f_onehot(n, 3), f_present(n, 1), f_masked(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const StepInput& s = tokens[i];
    require(s.x.size() == cfg.x_dim, "task feature dimension mismatch");
    check_cue(s.c);
    for (std::size_t j = 0; j < cfg.x_dim; ++j) x(i, j) = static_cast<T>(s.x[j]);
    if (s.c) {
      c_value[i] = static_cast<T>(*s.c);
      c_present[i] = T(1);
    } else {
      c_masked[i] = T(1);
    }
    if (s.d) {
      d_onehot(i, static_cast<std::size_t>(*s.d)) = T(1);
      d_present[i] = T(1);
    } else {
      d_masked[i] = T(1);
    }
    if (s.f) {
      f_onehot(i, static_cast<std::size_t>(*s.f)) = T(1);
      f_present[i] = T(1);
    } else {
      f_masked[i] = T(1);
    }
  }
  auto term = [&tape](Matrix<T> features, typename Tape<T>::Var w) {
    return tape.matmul(tape.constant(std::move(features)), w);
  };
  auto acc = tape.add_row(term(std::move(x), b.x_w), b.x_b);
  acc = tape.add(acc, term(std::move(c_value), b.c_w));
  acc = tape.add(acc, term(std::move(c_present), b.c_b));
  acc = tape.add(acc, term(std::move(c_masked), b.c_mask));
  acc = tape.add(acc, term(std::move(d_onehot), b.d_w));
  acc = tape.add(acc, term(std::move(d_present), b.d_b));
  acc = tape.add(acc, term(std::move(d_masked), b.d_mask));
  acc = tape.add(acc, term(std::move(f_onehot), b.f_w));
  acc = tape.add(acc, term(std::move(f_present), b.f_b));
  acc = tape.add(acc, term(std::move(f_masked), b.f_mask));
  std::vector<std::size_t> pos(positions.begin(), positions.end());
  for (std::size_t p : pos) require(p < cfg.max_seq_len, "position beyond max_seq_len");
  return tape.add(acc, tape.gather_rows(b.position, std::move(pos)));
}

template <typename T>
std::array<typename Tape<T>::Var, 3> attention_inputs(Tape<T>& tape,
                                                      const typename Binding<T>::Layer& l,
                                                      typename Tape<T>::Var x) {
  return {tape.add_row(tape.matmul(x, l.q_w), l.q_b), tape.add_row(tape.matmul(x, l.k_w), l.k_b),
          tape.add_row(tape.matmul(x, l.v_w), l.v_b)};
}

template <typename T>
typename Tape<T>::Var finish_layer(Tape<T>& tape, const Binding<T>& b,
                                   const typename Binding<T>::Layer& l, typename Tape<T>::Var x,
                                   typename Tape<T>::Var attended, Rng* rng) {
  const ModelConfig& cfg = *b.config;
  const T eps = static_cast<T>(cfg.layer_norm_eps);
  const double p = rng ? cfg.dropout : 0.0;
  auto o = tape.add_row(tape.matmul(attended, l.o_w), l.o_b);
  if (p > 0) o = tape.dropout(o, p, *rng);
  auto h = tape.layer_norm(tape.add(x, o), l.norm1_gamma, l.norm1_beta, eps);
  auto ff = tape.relu(tape.add_row(tape.matmul(h, l.ff1_w), l.ff1_b));
  if (p > 0) ff = tape.dropout(ff, p, *rng);
  auto ff2 = tape.add_row(tape.matmul(ff, l.ff2_w), l.ff2_b);
  if (p > 0) ff2 = tape.dropout(ff2, p, *rng);
  return tape.layer_norm(tape.add(h, ff2), l.norm2_gamma, l.norm2_beta, eps);
}

template <typename T>
typename Tape<T>::Var encode(Tape<T>& tape, const Binding<T>& b, typename Tape<T>::Var tokens,
                             std::shared_ptr<const num::AttentionMask> mask, Rng* rng) {
  const ModelConfig& cfg = *b.config;
  auto x = tokens;
  if (rng && cfg.dropout > 0) x = tape.dropout(x, cfg.dropout, *rng);
  for (const auto& l : b.layers) {
    auto [q, k, v] = attention_inputs<T>(tape, l, x);
    auto a = tape.attention(q, k, v, cfg.num_heads, mask);
    x = finish_layer<T>(tape, b, l, x, a, rng);
  }
  return x;
}

template <typename T>
typename Tape<T>::Var head_logits(Tape<T>& tape, const Binding<T>& b, typename Tape<T>::Var rows) {
  auto z = rows;
  const std::size_t last = b.head_w.size() - 1;
  for (std::size_t i = 0; i < last; ++i)
    z = tape.relu(tape.add_row(tape.matmul(z, b.head_w[i]), b.head_b[i]));
  return tape.add_row(tape.matmul(z, b.head_w[last]), b.head_b[last]);
}

double probability_from_logit(double z) {
  if (!std::isfinite(z)) fail(ErrorCode::kNumeric, "non-finite reliance logit");
  const double r = num::sigmoid(z);
  constexpr double lo = std::numeric_limits<double>::min();
  return std::clamp(r, lo, std::nextafter(1.0, 0.0));
}

template <typename T>
Matrix<T> embed_history(const ModelParams<T>& params, std::span<const StepInput> history,
                        const StepInput& current) {
  LayoutBuilder builder(params.config);
  builder.add_example(history, current);
  const TokenLayout& layout = builder.layout();
  Tape<T> tape(false);
  const Binding<T> b = bind<T>(tape, params, nullptr);
  return tape.value(embed<T>(tape, b, layout.tokens, layout.positions));
}

template <typename T>
double forward(const ModelParams<T>& params, const Matrix<T>& tokens, bool train_mode, Rng* rng) {
  require(tokens.rows() >= 1, "forward on an empty token sequence");
  require(tokens.cols() == params.config.d_model, "token width does not match d_model");
  require(tokens.rows() <= params.config.max_seq_len, "sequence exceeds max_seq_len");
  require(!train_mode || rng != nullptr, "train mode requires an rng stream");
  Tape<T> tape(false);
  const Binding<T> b = bind<T>(tape, params, nullptr);
  auto x = tape.constant(tokens);
  auto mask = std::make_shared<const num::AttentionMask>(num::AttentionMask::causal(tokens.rows()));
  auto enc = encode<T>(tape, b, x, mask, train_mode ? rng : nullptr);
  auto last = tape.gather_rows(enc, {tokens.rows() - 1});
  const Matrix<T>& z = tape.value(head_logits<T>(tape, b, last));
  return probability_from_logit(static_cast<double>(z[0]));
}

template <typename T>
std::vector<double> predict_layout(const ModelParams<T>& params, const TokenLayout& layout) {
  require(!layout.readout.empty(), "layout has no readout rows");
  Tape<T> tape(false);
  const Binding<T> b = bind<T>(tape, params, nullptr);
  auto x = embed<T>(tape, b, layout.tokens, layout.positions);
  auto enc = encode<T>(tape, b, x, layout.mask(), nullptr);
  auto rows = tape.gather_rows(enc, layout.readout);
  const Matrix<T>& z = tape.value(head_logits<T>(tape, b, rows));
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = probability_from_logit(static_cast<double>(z[i]));
  return out;
}

template <typename T>
ReliancePair predict_pair(const ModelParams<T>& params, std::span<const StepInput> history,
                          const StepInput& current) {
  require(current.c.has_value(), "predict_pair needs the candidate cue value");
  LayoutBuilder builder(params.config);
  builder.add_example(history, current);
  builder.add_example(history, StepInput::current(current.x, std::nullopt));
  const auto r = predict_layout<T>(params, builder.layout());
  return {r[0], r[1]};
}

double bce_loss(double r, Agent d) {
  const double c = std::clamp(r, 1e-7, 1.0 - 1e-7);
  return d == Agent::kAi ? -std::log(c) : -std::log(1.0 - c);
}

template <typename T>
LossAndGrad<T> layout_loss_and_grad(const ModelParams<T>& params, const TokenLayout& layout,
                                    std::span<const std::uint8_t> labels_ai, Rng* rng) {
  require(!layout.readout.empty(), "empty minibatch");
  require(labels_ai.size() == layout.readout.size(), "one label per readout row required");
  LossAndGrad<T> out{0.0, ModelParams<T>::zeros(params.config)};
  Tape<T> tape(true);
  const Binding<T> b = bind<T>(tape, params, &out.grads);
  auto x = embed<T>(tape, b, layout.tokens, layout.positions);
  auto enc = encode<T>(tape, b, x, layout.mask(), rng);
  auto rows = tape.gather_rows(enc, layout.readout);
  auto r = tape.sigmoid(head_logits<T>(tape, b, rows));
  auto loss = tape.bce_mean(r, std::vector<std::uint8_t>(labels_ai.begin(), labels_ai.end()));
  out.loss = static_cast<double>(tape.value(loss)[0]);
  if (!std::isfinite(out.loss)) fail(ErrorCode::kNumeric, "non-finite training loss");
  tape.backward(loss);
  return out;
}

template <typename T>
LossAndGrad<T> loss_and_grad(const ModelParams<T>& params, std::span<const Example> batch,
                             Rng* rng) {
  require(!batch.empty(), "empty minibatch");
  LayoutBuilder builder(params.config);
  std::vector<std::uint8_t> labels;
  for (const Example& e : batch) {
    builder.add_example(e.history, e.current);
    labels.push_back(e.label == Agent::kAi ? 1 : 0);
  }
  return layout_loss_and_grad<T>(params, builder.layout(), labels, rng);
}

#define PREDRC_INSTANTIATE(T)                                                                     \
  template Binding<T> bind<T>(Tape<T>&, const ModelParams<T>&, ModelParams<T>*);                 \
  template Tape<T>::Var embed<T>(Tape<T>&, const Binding<T>&, std::span<const StepInput>,        \
                                 std::span<const std::size_t>);                                  \
  template std::array<Tape<T>::Var, 3> attention_inputs<T>(Tape<T>&,                             \
                                                          const Binding<T>::Layer&,              \
                                                          Tape<T>::Var);                         \
  template Tape<T>::Var finish_layer<T>(Tape<T>&, const Binding<T>&, const Binding<T>::Layer&,   \
                                        Tape<T>::Var, Tape<T>::Var, Rng*);                       \
  template Tape<T>::Var encode<T>(Tape<T>&, const Binding<T>&, Tape<T>::Var,                     \
                                  std::shared_ptr<const num::AttentionMask>, Rng*);              \
  template Tape<T>::Var head_logits<T>(Tape<T>&, const Binding<T>&, Tape<T>::Var);               \
  template Matrix<T> embed_history<T>(const ModelParams<T>&, std::span<const StepInput>,         \
                                      const StepInput&);                                         \
  template double forward<T>(const ModelParams<T>&, const Matrix<T>&, bool, Rng*);               \
  template std::vector<double> predict_layout<T>(const ModelParams<T>&, const TokenLayout&);     \
  template ReliancePair predict_pair<T>(const ModelParams<T>&, std::span<const StepInput>,       \
                                        const StepInput&);                                       \
  template LossAndGrad<T> layout_loss_and_grad<T>(const ModelParams<T>&, const TokenLayout&,     \
                                                  std::span<const std::uint8_t>, Rng*);          \
  template LossAndGrad<T> loss_and_grad<T>(const ModelParams<T>&, std::span<const Example>, Rng*);

PREDRC_INSTANTIATE(float)
PREDRC_INSTANTIATE(double)

#undef PREDRC_INSTANTIATE

}  // namespace predrc::model
