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
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <string_view>
#include <vector>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "num/attention.hpp"
#include "num/kernels.hpp"
#include "num/matrix.hpp"

namespace predrc::num {

// Reverse-mode gradient tape over the fixed op set the reliance model uses.
// Ops are appended in forward order; backward() walks them in exact reverse.
// A tape built with record=false only evaluates values.
template <typename T>
class Tape {
 public:
  struct Var {
    std::size_t id;
  };

  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }

  // Borrowed parameter. When grad_sink is non-null, backward adds the
  // parameter's gradient into it.
  Var leaf(const Matrix<T>& value, Matrix<T>* grad_sink = nullptr) {
    Node n;
    n.borrowed = &value;
    n.sink = grad_sink;
    n.op = "leaf";
    n.needs_grad = record_ && grad_sink != nullptr;
    return push(std::move(n));
  }

  Var constant(Matrix<T> value) {
    Node n;
    n.value = std::move(value);
    n.op = "constant";
    return push(std::move(n));
  }

  const Matrix<T>& value(Var v) const {
    const Node& n = nodes_[v.id];
    return n.borrowed ? *n.borrowed : n.value;
  }

  // Gradient accumulated at v by the last backward(); empty if none reached it.
  const Matrix<T>& grad(Var v) const { return nodes_[v.id].grad; }

  std::string_view op_name(Var v) const { return nodes_[v.id].op; }

  // Node ids in the order their backward rules ran.
  const std::vector<std::size_t>& backward_trace() const { return trace_; }

  Var matmul(Var a, Var b) {
    Matrix<T> out = num::matmul(value(a), value(b));
    return op("matmul", std::move(out), {a, b}, [a, b](Tape& t, const Matrix<T>& g) {
      if (t.needs(a)) t.accumulate(a, matmul_nt(g, t.value(b)));
      if (t.needs(b)) t.accumulate(b, matmul_tn(t.value(a), g));
    });
  }

  Var add(Var a, Var b) {
    const Matrix<T>& x = value(a);
    const Matrix<T>& y = value(b);
    require(x.same_shape(y), "add shape mismatch " + x.shape_string() + " vs " +
                                 y.shape_string());
    Matrix<T> out = x;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += y[i];
    return op("add", std::move(out), {a, b}, [a, b](Tape& t, const Matrix<T>& g) {
      if (t.needs(a)) t.accumulate(a, g);
      if (t.needs(b)) t.accumulate(b, g);
    });
  }

  // a (n×m) + row (1×m) broadcast over rows.
  Var add_row(Var a, Var row) {
    const Matrix<T>& x = value(a);
    const Matrix<T>& r = value(row);
    require(r.rows() == 1 && r.cols() == x.cols(),
            "add_row shape mismatch " + x.shape_string() + " vs " + r.shape_string());
    Matrix<T> out = x;
    for (std::size_t i = 0; i < out.rows(); ++i)
      for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += r[j];
    return op("add", std::move(out), {a, row}, [a, row](Tape& t, const Matrix<T>& g) {
      if (t.needs(a)) t.accumulate(a, g);
      if (t.needs(row)) {
        Matrix<T> s(1, g.cols());
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < g.cols(); ++j) s[j] += g(i, j);
        t.accumulate(row, s);
      }
    });
  }

  Var scale(Var a, T s) {
    Matrix<T> out = value(a);
    for (T& v : out.values()) v *= s;
    return op("scale", std::move(out), {a}, [a, s](Tape& t, const Matrix<T>& g) {
      if (!t.needs(a)) return;
      Matrix<T> d = g;
      for (T& v : d.values()) v *= s;
      t.accumulate(a, d);
    });
  }

  Var relu(Var a) {
    Matrix<T> out = value(a);
    for (T& v : out.values()) v = v > T(0) ? v : T(0);
    return op("relu", std::move(out), {a}, [a](Tape& t, const Matrix<T>& g) {
      if (!t.needs(a)) return;
      const Matrix<T>& x = t.value(a);
      Matrix<T> d = g;
      for (std::size_t i = 0; i < d.size(); ++i)
        if (!(x[i] > T(0))) d[i] = T(0);
      t.accumulate(a, d);
    });
  }

  Var sigmoid(Var a) {
    Matrix<T> out = value(a);
    for (T& v : out.values()) v = num::sigmoid(v);
    const std::size_t self = nodes_.size();
    return op("sigmoid", std::move(out), {a}, [a, self](Tape& t, const Matrix<T>& g) {
      if (!t.needs(a)) return;
      const Matrix<T>& y = t.nodes_[self].value;
      Matrix<T> d = g;
      for (std::size_t i = 0; i < d.size(); ++i) d[i] *= y[i] * (T(1) - y[i]);
      t.accumulate(a, d);
    });
  }

  // Row-wise layer normalization with affine gamma/beta (each 1×m).
  Var layer_norm(Var x, Var gamma, Var beta, T eps) {
    const Matrix<T>& in = value(x);
    const Matrix<T>& ga = value(gamma);
    const Matrix<T>& be = value(beta);
    const std::size_t n = in.rows(), m = in.cols();
    require(ga.rows() == 1 && ga.cols() == m && be.same_shape(ga),
            "layer_norm parameter shape mismatch");
    auto xhat = std::make_shared<Matrix<T>>(n, m);
    auto inv_std = std::make_shared<std::vector<T>>(n);
    Matrix<T> out(n, m);
    for (std::size_t i = 0; i < n; ++i) {
      (*inv_std)[i] = layer_norm_row<T>(in.row(i), xhat->row(i), eps);
      for (std::size_t j = 0; j < m; ++j) out(i, j) = (*xhat)(i, j) * ga[j] + be[j];
    }
    return op("layer_norm", std::move(out), {x, gamma, beta},
              [x, gamma, beta, xhat, inv_std](Tape& t, const Matrix<T>& g) {
                const std::size_t n = g.rows(), m = g.cols();
                const Matrix<T>& ga = t.value(gamma);
                if (t.needs(gamma) || t.needs(beta)) {
                  Matrix<T> dg(1, m), db(1, m);
                  for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < m; ++j) {
                      dg[j] += g(i, j) * (*xhat)(i, j);
                      db[j] += g(i, j);
                    }
                  if (t.needs(gamma)) t.accumulate(gamma, dg);
                  if (t.needs(beta)) t.accumulate(beta, db);
                }
                if (!t.needs(x)) return;
                Matrix<T> dx(n, m);
                for (std::size_t i = 0; i < n; ++i) {
                  T mean_d = 0, mean_dx = 0;
                  for (std::size_t j = 0; j < m; ++j) {
                    const T dxh = g(i, j) * ga[j];
                    mean_d += dxh;
                    mean_dx += dxh * (*xhat)(i, j);
                  }
                  mean_d /= static_cast<T>(m);
                  mean_dx /= static_cast<T>(m);
                  for (std::size_t j = 0; j < m; ++j) {
                    const T dxh = g(i, j) * ga[j];
                    dx(i, j) = (*inv_std)[i] * (dxh - mean_d - (*xhat)(i, j) * mean_dx);
                  }
                }
                t.accumulate(x, dx);
              });
  }

  // Multi-head scaled dot-product attention over already-projected q, k, v
  // (all n×d); heads split d into equal contiguous slices.
  Var attention(Var q, Var k, Var v, std::size_t heads,
                std::shared_ptr<const AttentionMask> mask) {
    const Matrix<T>& Q = value(q);
    const Matrix<T>& K = value(k);
    const Matrix<T>& V = value(v);
    const std::size_t n = Q.rows(), d = Q.cols();
    require(K.same_shape(Q) && V.same_shape(Q), "attention q/k/v shape mismatch");
    require(heads > 0 && d % heads == 0, "d_model not divisible by heads");
    require(mask && mask->rows() == n, "attention mask size mismatch");
    const std::size_t dh = d / heads;
    const T scale = T(1) / std::sqrt(static_cast<T>(dh));

    // probs[i] holds heads × |keys(i)| weights.
    auto probs = std::make_shared<std::vector<std::vector<T>>>(n);
    Matrix<T> out(n, d);
    std::vector<const T*> kp, vp;
    for (std::size_t i = 0; i < n; ++i) {
      const auto keys = mask->keys(i);
      (*probs)[i].resize(heads * keys.size());
      kp.resize(keys.size());
      vp.resize(keys.size());
      for (std::size_t h = 0; h < heads; ++h) {
        for (std::size_t j = 0; j < keys.size(); ++j) {
          kp[j] = K.data() + keys[j] * d + h * dh;
          vp[j] = V.data() + keys[j] * d + h * dh;
        }
        attend_row<T>(Q.data() + i * d + h * dh, kp, vp, dh, scale,
                      (*probs)[i].data() + h * keys.size(), out.data() + i * d + h * dh);
      }
    }
    return op("attention", std::move(out), {q, k, v},
              [q, k, v, heads, mask, probs, dh, scale](Tape& t, const Matrix<T>& g) {
                const Matrix<T>& Q = t.value(q);
                const Matrix<T>& K = t.value(k);
                const Matrix<T>& V = t.value(v);
                const std::size_t n = Q.rows(), d = Q.cols();
                Matrix<T> dQ(n, d), dK(n, d), dV(n, d);
                std::vector<T> dp;
                for (std::size_t i = 0; i < n; ++i) {
                  const auto keys = mask->keys(i);
                  const std::size_t nk = keys.size();
                  dp.resize(nk);
                  for (std::size_t h = 0; h < heads; ++h) {
                    const T* p = (*probs)[i].data() + h * nk;
                    const T* gi = g.data() + i * d + h * dh;
                    T dot = 0;
                    for (std::size_t j = 0; j < nk; ++j) {
                      const T* vj = V.data() + keys[j] * d + h * dh;
                      T* dvj = dV.data() + keys[j] * d + h * dh;
                      T s = 0;
                      for (std::size_t e = 0; e < dh; ++e) {
                        s += gi[e] * vj[e];
                        dvj[e] += p[j] * gi[e];
                      }
                      dp[j] = s;
                      dot += s * p[j];
                    }
                    const T* qi = Q.data() + i * d + h * dh;
                    T* dqi = dQ.data() + i * d + h * dh;
                    for (std::size_t j = 0; j < nk; ++j) {
                      const T ds = p[j] * (dp[j] - dot) * scale;
                      const T* kj = K.data() + keys[j] * d + h * dh;
                      T* dkj = dK.data() + keys[j] * d + h * dh;
                      for (std::size_t e = 0; e < dh; ++e) {
                        dqi[e] += ds * kj[e];
                        dkj[e] += ds * qi[e];
                      }
                    }
                  }
                }
                if (t.needs(q)) t.accumulate(q, dQ);
                if (t.needs(k)) t.accumulate(k, dK);
                if (t.needs(v)) t.accumulate(v, dV);
              });
  }

  // out[r] = table[index[r]]
  Var gather_rows(Var table, std::vector<std::size_t> index) {
    const Matrix<T>& tab = value(table);
    Matrix<T> out(index.size(), tab.cols());
    for (std::size_t r = 0; r < index.size(); ++r) {
      require(index[r] < tab.rows(), "gather index out of range");
      std::copy(tab.row(index[r]).begin(), tab.row(index[r]).end(), out.row(r).begin());
    }
    auto idx = std::make_shared<std::vector<std::size_t>>(std::move(index));
    return op("gather", std::move(out), {table}, [table, idx](Tape& t, const Matrix<T>& g) {
      if (!t.needs(table)) return;
      const Matrix<T>& tab = t.value(table);
      Matrix<T> d(tab.rows(), tab.cols());
      for (std::size_t r = 0; r < idx->size(); ++r)
        for (std::size_t j = 0; j < d.cols(); ++j) d((*idx)[r], j) += g(r, j);
      t.accumulate(table, d);
    });
  }

  // Inverted dropout. The mask is drawn from rng once and kept for backward.
  Var dropout(Var a, double p, Rng& rng) {
    if (p <= 0.0) return a;
    require(p < 1.0, "dropout rate must be < 1");
    const Matrix<T>& x = value(a);
    auto mask = std::make_shared<Matrix<T>>(x.rows(), x.cols());
    const T keep = static_cast<T>(1.0 / (1.0 - p));
    for (T& m : mask->values()) m = rng.uniform() >= p ? keep : T(0);
    Matrix<T> out = x;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= (*mask)[i];
    return op("dropout", std::move(out), {a}, [a, mask](Tape& t, const Matrix<T>& g) {
      if (!t.needs(a)) return;
      Matrix<T> d = g;
      for (std::size_t i = 0; i < d.size(); ++i) d[i] *= (*mask)[i];
      t.accumulate(a, d);
    });
  }

  // Mean binary cross-entropy of probabilities r (n×1) against labels
  // (1 = AI, 0 = human). r is clipped into [1e-7, 1-1e-7] before the log;
  // clipped entries contribute no gradient.
  Var bce_mean(Var r, std::vector<std::uint8_t> labels) {
    const Matrix<T>& p = value(r);
    require(p.cols() == 1 && p.rows() == labels.size() && !labels.empty(),
            "bce_mean expects n×1 probabilities and n labels");
    const T lo = static_cast<T>(1e-7), hi = static_cast<T>(1.0 - 1e-7);
    T sum = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const T c = std::clamp(p[i], lo, hi);
      sum += labels[i] ? -std::log(c) : -std::log(T(1) - c);
    }
    Matrix<T> out(1, 1, sum / static_cast<T>(labels.size()));
    auto lab = std::make_shared<std::vector<std::uint8_t>>(std::move(labels));
    return op("bce", std::move(out), {r}, [r, lab, lo, hi](Tape& t, const Matrix<T>& g) {
      if (!t.needs(r)) return;
      const Matrix<T>& p = t.value(r);
      const T w = g[0] / static_cast<T>(lab->size());
      Matrix<T> d(p.rows(), 1);
      for (std::size_t i = 0; i < lab->size(); ++i) {
        if (p[i] < lo || p[i] > hi) continue;
        d[i] = (*lab)[i] ? -w / p[i] : w / (T(1) - p[i]);
      }
      t.accumulate(r, d);
    });
  }

  // Seeds d(loss)/d(loss) = 1 on a 1×1 node and runs every recorded rule in
  // reverse order.
  void backward(Var loss) {
    require(record_, "backward on a non-recording tape");
    require(value(loss).size() == 1, "backward expects a scalar loss");
    trace_.clear();
    Node& root = nodes_[loss.id];
    root.grad = Matrix<T>(1, 1, T(1));
    for (std::size_t id = loss.id + 1; id-- > 0;) {
      Node& n = nodes_[id];
      if (n.grad.empty()) continue;
      if (n.backward) {
        trace_.push_back(id);
        n.backward(*this, n.grad);
      } else if (n.sink) {
        Matrix<T>& s = *n.sink;
        require(s.same_shape(n.grad), "gradient sink shape mismatch");
        for (std::size_t i = 0; i < s.size(); ++i) s[i] += n.grad[i];
      }
    }
  }

 private:
  using Rule = std::function<void(Tape&, const Matrix<T>&)>;

  struct Node {
    Matrix<T> value;
    const Matrix<T>* borrowed = nullptr;
    Matrix<T> grad;
    Matrix<T>* sink = nullptr;
    const char* op = "";
    Rule backward;
    bool needs_grad = false;
  };

  Var push(Node n) {
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
  }

  Var op(const char* name, Matrix<T> out, std::initializer_list<Var> inputs, Rule rule) {
    Node n;
    n.value = std::move(out);
    n.op = name;
    if (record_) {
      for (Var in : inputs) n.needs_grad = n.needs_grad || nodes_[in.id].needs_grad;
      if (n.needs_grad) n.backward = std::move(rule);
    }
    return push(std::move(n));
  }

  bool needs(Var v) const { return nodes_[v.id].needs_grad; }

  void accumulate(Var v, const Matrix<T>& g) {
    Node& n = nodes_[v.id];
    if (n.grad.empty()) {
      n.grad = g;
      return;
    }
    for (std::size_t i = 0; i < g.size(); ++i) n.grad[i] += g[i];
  }

  bool record_;
  std::deque<Node> nodes_;
  std::vector<std::size_t> trace_;
};

}  // namespace predrc::num
