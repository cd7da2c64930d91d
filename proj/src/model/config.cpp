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

#include "model/config.hpp"

#include <charconv>
#include <cstdio>
#include <map>
#include <sstream>

#include "common/error.hpp"

namespace predrc::model {

namespace {

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    fail(ErrorCode::kParse, "model config: bad integer for " + key + ": '" + v + "'");
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    fail(ErrorCode::kParse, "model config: bad real for " + key + ": '" + v + "'");
  }
}

}  // namespace

void ModelConfig::validate() const {
  require(num_layers >= 1, "model config: num_layers must be >= 1");
  require(num_heads >= 1 && d_model >= 1 && d_ff >= 1 && x_dim >= 1,
          "model config: dimensions must be positive");
  require(d_model % num_heads == 0, "model config: d_model must be divisible by num_heads");
  require(max_seq_len >= 1, "model config: max_seq_len must be >= 1");
  require(dropout >= 0.0 && dropout < 1.0, "model config: dropout must be in [0, 1)");
  require(layer_norm_eps >= 0.0, "model config: layer_norm_eps must be >= 0");
  for (std::size_t h : mlp_hidden) require(h >= 1, "model config: mlp_hidden sizes must be positive");
}

std::string ModelConfig::to_text() const {
  std::ostringstream os;
  os << "num_layers=" << num_layers << "\n";
  os << "num_heads=" << num_heads << "\n";
  os << "d_model=" << d_model << "\n";
  os << "d_ff=" << d_ff << "\n";
  os << "dropout=" << format_real(dropout) << "\n";
  os << "mlp_hidden=";
  for (std::size_t i = 0; i < mlp_hidden.size(); ++i) os << (i ? "," : "") << mlp_hidden[i];
  os << "\n";
  os << "max_seq_len=" << max_seq_len << "\n";
  os << "x_dim=" << x_dim << "\n";
  os << "layer_norm_eps=" << format_real(layer_norm_eps) << "\n";
  return os.str();
}

ModelConfig ModelConfig::from_text(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream is{std::string(text)};
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorCode::kParse, "model config: malformed line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto take = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) fail(ErrorCode::kParse, "model config: missing key " + key);
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  ModelConfig c;
  c.num_layers = parse_count("num_layers", take("num_layers"));
  c.num_heads = parse_count("num_heads", take("num_heads"));
  c.d_model = parse_count("d_model", take("d_model"));
  c.d_ff = parse_count("d_ff", take("d_ff"));
  c.dropout = parse_real("dropout", take("dropout"));
  c.mlp_hidden.clear();
  const std::string hidden = take("mlp_hidden");
  std::size_t start = 0;
  while (start < hidden.size()) {
    std::size_t comma = hidden.find(',', start);
    if (comma == std::string::npos) comma = hidden.size();
    c.mlp_hidden.push_back(parse_count("mlp_hidden", hidden.substr(start, comma - start)));
    start = comma + 1;
  }
  c.max_seq_len = parse_count("max_seq_len", take("max_seq_len"));
  c.x_dim = parse_count("x_dim", take("x_dim"));
  c.layer_norm_eps = parse_real("layer_norm_eps", take("layer_norm_eps"));
  if (!kv.empty()) fail(ErrorCode::kParse, "model config: unknown key " + kv.begin()->first);
  c.validate();
  return c;
}

ModelConfig ModelConfig::tiny(std::size_t x_dim) {
  ModelConfig c;
  c.num_layers = 1;
  c.num_heads = 2;
  c.d_model = 8;
  c.d_ff = 16;
  c.dropout = 0.0;
  c.mlp_hidden = {8};
  c.max_seq_len = 60;
  c.x_dim = x_dim;
  return c;
}

}  // namespace predrc::model
