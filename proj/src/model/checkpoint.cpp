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

#include "model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "common/digest.hpp"
#include "common/error.hpp"

namespace predrc::model {

namespace {

constexpr std::string_view kMagic = "PREDRC01";

static_assert(std::endian::native == std::endian::little,
              "checkpoint encoding assumes a little-endian host");

template <typename U>
void put(std::string& out, U v) {
  char buf[sizeof(U)];
  std::memcpy(buf, &v, sizeof(U));
  out.append(buf, sizeof(U));
}

template <typename U>
U get(std::string_view bytes, std::size_t& at) {
  if (at + sizeof(U) > bytes.size()) fail(ErrorCode::kParse, "checkpoint truncated");
  U v;
  std::memcpy(&v, bytes.data() + at, sizeof(U));
  at += sizeof(U);
  return v;
}

std::uint64_t checksum(std::string_view payload) {
  Fnv1a64 h;
  h.update(payload);
  return h.value();
}

}  // namespace

std::string encode_checkpoint(const ModelParams<float>& params) {
  std::string out(kMagic);
  const std::string cfg = params.config.to_text();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.size()));
  out += cfg;
  params.visit([&out](const std::string& name, const Matrix<float>& m) {
    if (!m.all_finite()) fail(ErrorCode::kNumeric, "non-finite values in tensor " + name);
    out.append(reinterpret_cast<const char*>(m.data()), m.size() * sizeof(float));
  });
  put<std::uint64_t>(out, checksum(std::string_view(out).substr(kMagic.size())));
  return out;
}

ModelParams<float> decode_checkpoint(std::string_view bytes) {
  if (bytes.substr(0, kMagic.size()) != kMagic)
    fail(ErrorCode::kParse, "not a checkpoint (bad magic)");
  if (bytes.size() < kMagic.size() + 4 + 8) fail(ErrorCode::kParse, "checkpoint truncated");
  const std::string_view payload = bytes.substr(kMagic.size(), bytes.size() - kMagic.size() - 8);
  std::size_t at = bytes.size() - 8;
  if (get<std::uint64_t>(bytes, at) != checksum(payload))
    fail(ErrorCode::kParse, "checkpoint checksum mismatch");

  at = kMagic.size();
  const auto len = get<std::uint32_t>(bytes, at);
  if (at + len > kMagic.size() + payload.size()) fail(ErrorCode::kParse, "checkpoint truncated");
  ModelParams<float> params = ModelParams<float>::zeros(ModelConfig::from_text(bytes.substr(at, len)));
  at += len;
  params.visit([&](const std::string& name, Matrix<float>& m) {
    const std::size_t n = m.size() * sizeof(float);
    if (at + n > kMagic.size() + payload.size())
      fail(ErrorCode::kParse, "checkpoint truncated in tensor " + name);
    std::memcpy(m.data(), bytes.data() + at, n);
    at += n;
  });
  if (at != kMagic.size() + payload.size())
    fail(ErrorCode::kParse, "checkpoint has trailing bytes");
  return params;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams<float>& params) {
  const std::string bytes = encode_checkpoint(params);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorCode::kIo, "cannot write checkpoint " + path.string());
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) fail(ErrorCode::kIo, "short write to " + path.string());
}

ModelParams<float> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::kIo, "cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return decode_checkpoint(ss.str());
}

std::string checkpoint_digest(const ModelParams<float>& params) {
  const std::string bytes = encode_checkpoint(params);
  std::size_t at = bytes.size() - 8;
  return hex64(get<std::uint64_t>(bytes, at));
}

}  // namespace predrc::model
