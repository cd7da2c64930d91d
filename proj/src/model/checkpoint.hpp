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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "model/params.hpp"

namespace predrc::model {

// Checkpoint layout (all integers little-endian):
//   8 bytes   magic "PREDRC01"
//   u32       length L of the config record
//   L bytes   ModelConfig::to_text(), UTF-8
//   f32 × N   every tensor in ModelParams canonical order, row-major
//   u64       FNV-1a 64 of every byte between the magic and this field
std::string encode_checkpoint(const ModelParams<float>& params);
ModelParams<float> decode_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const ModelParams<float>& params);
ModelParams<float> load_checkpoint(const std::filesystem::path& path);

// Hex of the payload checksum; identifies a model in service responses.
std::string checkpoint_digest(const ModelParams<float>& params);

}  // namespace predrc::model
