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

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace predrc::model {

struct ModelConfig {
  std::size_t num_layers = 3;
  std::size_t num_heads = 16;
  std::size_t d_model = 128;
  std::size_t d_ff = 2048;
  double dropout = 0.1;
  std::vector<std::size_t> mlp_hidden = {128, 128, 128};
  std::size_t max_seq_len = 60;
  std::size_t x_dim = 8;
  double layer_norm_eps = 1e-5;

  // Throws kInvalidArgument on any violated invariant.
  void validate() const;

  // "key=value" lines in a fixed key order; reals use round-trip formatting.
  std::string to_text() const;
  static ModelConfig from_text(std::string_view text);

  // 1 layer, d_model 8, 2 heads; small enough for finite-difference checks.
  static ModelConfig tiny(std::size_t x_dim);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

}  // namespace predrc::model
