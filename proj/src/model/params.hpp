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

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "common/rng.hpp"
#include "model/config.hpp"
#include "num/matrix.hpp"

namespace predrc::model {

using num::Matrix;

template <typename T>
struct EncoderLayerParams {
  Matrix<T> q_w, q_b, k_w, k_b, v_w, v_b, o_w, o_b;
  Matrix<T> norm1_gamma, norm1_beta;
  Matrix<T> ff1_w, ff1_b, ff2_w, ff2_b;
  Matrix<T> norm2_gamma, norm2_beta;
};

// All learned tensors of the reliance model. Affine weights are stored
// input-major (in × out) so a layer computes x·W + b. Shapes follow from the
// config alone.
template <typename T>
struct ModelParams {
  ModelConfig config;

  Matrix<T> x_w, x_b;
  Matrix<T> c_w, c_b, c_mask;
  Matrix<T> d_w, d_b, d_mask;
  Matrix<T> f_w, f_b, f_mask;
  Matrix<T> position;
  std::vector<EncoderLayerParams<T>> layers;
  std::vector<Matrix<T>> head_w, head_b;

  static ModelParams zeros(const ModelConfig& cfg) {
    cfg.validate();
    ModelParams p;
    p.config = cfg;
    const std::size_t d = cfg.d_model;
    p.x_w = Matrix<T>(cfg.x_dim, d);
    p.x_b = Matrix<T>(1, d);
    p.c_w = Matrix<T>(1, d);
    p.c_b = Matrix<T>(1, d);
    p.c_mask = Matrix<T>(1, d);
    p.d_w = Matrix<T>(2, d);
    p.d_b = Matrix<T>(1, d);
    p.d_mask = Matrix<T>(1, d);
    p.f_w = Matrix<T>(3, d);
    p.f_b = Matrix<T>(1, d);
    p.f_mask = Matrix<T>(1, d);
    p.position = Matrix<T>(cfg.max_seq_len, d);
    p.layers.resize(cfg.num_layers);
    for (auto& l : p.layers) {
      for (Matrix<T>* w : {&l.q_w, &l.k_w, &l.v_w, &l.o_w}) *w = Matrix<T>(d, d);
      for (Matrix<T>* b : {&l.q_b, &l.k_b, &l.v_b, &l.o_b}) *b = Matrix<T>(1, d);
      l.norm1_gamma = Matrix<T>(1, d);
      l.norm1_beta = Matrix<T>(1, d);
      l.ff1_w = Matrix<T>(d, cfg.d_ff);
      l.ff1_b = Matrix<T>(1, cfg.d_ff);
      l.ff2_w = Matrix<T>(cfg.d_ff, d);
      l.ff2_b = Matrix<T>(1, d);
      l.norm2_gamma = Matrix<T>(1, d);
      l.norm2_beta = Matrix<T>(1, d);
    }
    std::size_t in = d;
    for (std::size_t h : cfg.mlp_hidden) {
      p.head_w.emplace_back(in, h);
      p.head_b.emplace_back(1, h);
      in = h;
    }
    p.head_w.emplace_back(in, 1);
    p.head_b.emplace_back(1, 1);
    return p;
  }

  // Affine maps: U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weight and bias.
  // Mask and position tables: U(-0.1, 0.1). Layer-norm gains 1, offsets 0.
  // The head's output layer starts at zero so every prediction is 0.5.
  static ModelParams init(const ModelConfig& cfg, Rng rng) {
    ModelParams p = zeros(cfg);
    auto affine = [&rng](Matrix<T>& w, Matrix<T>& b) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(w.rows()));
      for (T& v : w.values()) v = static_cast<T>(rng.uniform(-bound, bound));
      for (T& v : b.values()) v = static_cast<T>(rng.uniform(-bound, bound));
    };
    auto table = [&rng](Matrix<T>& m) {
      for (T& v : m.values()) v = static_cast<T>(rng.uniform(-0.1, 0.1));
    };
    affine(p.x_w, p.x_b);
    affine(p.c_w, p.c_b);
    table(p.c_mask);
    affine(p.d_w, p.d_b);
    table(p.d_mask);
    affine(p.f_w, p.f_b);
    table(p.f_mask);
    table(p.position);
    for (auto& l : p.layers) {
      affine(l.q_w, l.q_b);
      affine(l.k_w, l.k_b);
      affine(l.v_w, l.v_b);
      affine(l.o_w, l.o_b);
      affine(l.ff1_w, l.ff1_b);
      affine(l.ff2_w, l.ff2_b);
      l.norm1_gamma.fill(T(1));
      l.norm2_gamma.fill(T(1));
    }
    for (std::size_t i = 0; i + 1 < p.head_w.size(); ++i) affine(p.head_w[i], p.head_b[i]);
    return p;
  }

  // Canonical tensor order; the checkpoint format and the optimizer both
  // rely on it.
  template <typename F>
  void visit(F&& f) {
    visit_impl(*this, f);
  }
  template <typename F>
  void visit(F&& f) const {
    visit_impl(*this, f);
  }

  std::vector<Matrix<T>*> tensors() {
    std::vector<Matrix<T>*> out;
    visit([&out](const std::string&, Matrix<T>& m) { out.push_back(&m); });
    return out;
  }
  std::vector<const Matrix<T>*> tensors() const {
    std::vector<const Matrix<T>*> out;
    visit([&out](const std::string&, const Matrix<T>& m) { out.push_back(&m); });
    return out;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto* m : tensors()) n += m->size();
    return n;
  }

  template <typename U>
  ModelParams<U> cast() const {
    ModelParams<U> out = ModelParams<U>::zeros(config);
    auto src = tensors();
    auto dst = out.tensors();
    for (std::size_t i = 0; i < src.size(); ++i) *dst[i] = src[i]->template cast<U>();
    return out;
  }

  void set_zero() {
    for (Matrix<T>* m : tensors()) m->fill(T(0));
  }

  friend bool operator==(const ModelParams& a, const ModelParams& b) {
    if (!(a.config == b.config)) return false;
    auto ta = a.tensors();
    auto tb = b.tensors();
    for (std::size_t i = 0; i < ta.size(); ++i)
      if (!(*ta[i] == *tb[i])) return false;
    return true;
  }

 private:
  template <typename Self, typename F>
  static void visit_impl(Self& s, F& f) {
    f("embed.x.weight", s.x_w);
    f("embed.x.bias", s.x_b);
    f("embed.c.weight", s.c_w);
    f("embed.c.bias", s.c_b);
    f("embed.c.mask", s.c_mask);
    f("embed.d.weight", s.d_w);
    f("embed.d.bias", s.d_b);
    f("embed.d.mask", s.d_mask);
    f("embed.f.weight", s.f_w);
    f("embed.f.bias", s.f_b);
    f("embed.f.mask", s.f_mask);
    f("embed.position", s.position);
    for (std::size_t i = 0; i < s.layers.size(); ++i) {
      auto& l = s.layers[i];
      const std::string p = "encoder." + std::to_string(i) + ".";
      f(p + "attn.q.weight", l.q_w);
      f(p + "attn.q.bias", l.q_b);
      f(p + "attn.k.weight", l.k_w);
      f(p + "attn.k.bias", l.k_b);
      f(p + "attn.v.weight", l.v_w);
      f(p + "attn.v.bias", l.v_b);
      f(p + "attn.o.weight", l.o_w);
      f(p + "attn.o.bias", l.o_b);
      f(p + "norm1.gamma", l.norm1_gamma);
      f(p + "norm1.beta", l.norm1_beta);
      f(p + "ff1.weight", l.ff1_w);
      f(p + "ff1.bias", l.ff1_b);
      f(p + "ff2.weight", l.ff2_w);
      f(p + "ff2.bias", l.ff2_b);
      f(p + "norm2.gamma", l.norm2_gamma);
      f(p + "norm2.beta", l.norm2_beta);
    }
    for (std::size_t i = 0; i < s.head_w.size(); ++i) {
      f("head." + std::to_string(i) + ".weight", s.head_w[i]);
      f("head." + std::to_string(i) + ".bias", s.head_b[i]);
    }
  }
};

}  // namespace predrc::model
