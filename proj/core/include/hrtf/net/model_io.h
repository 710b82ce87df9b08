// Copyright 2026 The hrtfmatch Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS-IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Versioned binary model container.
//
// Layout (little-endian):
//   magic "HRTFNET\0" | u32 version | u32 reserved | u64 payload_size |
//   u32 crc32(payload) | u32 reserved | payload
// The payload holds the input shape, seed, layer manifest and every
// parameter tensor (name, trainable flag, count, raw doubles).

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include "hrtf/net/model.h"

namespace hrtf::net {

inline constexpr std::uint32_t kModelFormatVersion = 1;
inline constexpr std::size_t kModelHeaderSize = 32;

struct ModelFileHeader {
  std::uint32_t version = 0;
  std::uint64_t payload_size = 0;
  std::uint32_t payload_crc32 = 0;
};

std::string serialize_model(const Model& model);
Model deserialize_model(const std::string& bytes);

/// Atomic write.
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

/// Parses only the fixed header; throws TruncatedFile or ModelFormatError.
ModelFileHeader read_model_header(const std::string& bytes);

}  // namespace hrtf::net
