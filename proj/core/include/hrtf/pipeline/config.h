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

// Flat "key = value" configuration shared by every subcommand.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "hrtf/dataset.h"
#include "hrtf/matcher.h"
#include "hrtf/net/train.h"
#include "hrtf/render.h"

namespace hrtf::pipeline {

struct PipelineConfig {
  std::filesystem::path corpus_images;
  std::filesystem::path corpus_landmarks;
  std::filesystem::path model;
  std::filesystem::path history;  // defaults next to the model
  std::filesystem::path factors;  // empty: built-in reference preset
  std::filesystem::path database;
  std::filesystem::path mesh_dir;

  net::TrainConfig train;
  /// "canonical" (20-layer network) or "compact" (desk-scale variant).
  std::string architecture = "canonical";
  bool train_augment = false;
  std::optional<std::size_t> limit;

  AugmentOptions augment;
  ReframeOptions reframe;
  BatchRenderOptions render;

  MatchOptions match;
  std::size_t top_k = 5;
  double pck_threshold_px = 10.0;
};

/// Parses "key = value" lines; '#' starts a comment. Throws ConfigError.
std::map<std::string, std::string> parse_key_values(std::string_view text);

/// Applies one setting. Throws ConfigError for unknown keys or bad values.
void apply_setting(PipelineConfig& config, std::string_view key, std::string_view value);

PipelineConfig load_config(const std::filesystem::path& path);

/// Every recognised key, for help output.
const std::map<std::string, std::string>& setting_descriptions();

/// Throws ConfigError with an actionable message when `path` is unset or
/// missing. `what` names the setting, e.g. "database".
void require_file(const std::filesystem::path& path, std::string_view what);
void require_dir(const std::filesystem::path& path, std::string_view what);

}  // namespace hrtf::pipeline
