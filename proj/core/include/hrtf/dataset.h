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

// Ear-image corpora: loading image/landmark pairs, reframing onto the ear,
// and the five joint image+landmark augmentations.

#include <array>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <opencv2/core.hpp>

#include "hrtf/anthro.h"

namespace hrtf {

/// One training example. `image` is 224x224 CV_8UC3; pixel values are scaled
/// to [0,1] when converted to network input (see net/landmarks.h).
struct Sample {
  cv::Mat image;
  LandmarkSet landmarks;
  std::string source_id;
};

struct Corpus {
  std::vector<Sample> train;
  std::vector<Sample> test;
};

struct LoadIssue {
  std::filesystem::path path;
  std::string message;
};

struct LoadReport {
  std::vector<LoadIssue> issues;
  std::size_t loaded = 0;
};

struct ReframeOptions {
  /// Padding added on each side, as a fraction of the landmark box extent.
  double margin = 0.1;
};

enum class AugmentKind { flip, rot_left, rot_right, flip_rot_left, flip_rot_right };

inline constexpr std::array<AugmentKind, 5> kAllAugmentations{
    AugmentKind::flip, AugmentKind::rot_left, AugmentKind::rot_right,
    AugmentKind::flip_rot_left, AugmentKind::flip_rot_right};

std::string_view to_string(AugmentKind kind);
AugmentKind parse_augment_kind(std::string_view text);
/// File-name tag: "_f", "_rl", "_rr", "_frl", "_frr".
std::string_view suffix(AugmentKind kind);

struct AugmentOptions {
  double rotation_deg = 15.0;
};

/// The 2x3 forward map (CV_64F) applied to pixel centres and landmarks.
cv::Mat augment_matrix(AugmentKind kind, const AugmentOptions& options = {},
                       ImageSize size = {});

/// Pairs files by stem. With train/ and test/ subdirectories under both
/// roots the split is taken from them; otherwise everything is training data.
/// Unreadable or unpaired files are recorded in `report` and skipped. Throws
/// EmptyCorpus when no pair survives.
Corpus load_corpus(const std::filesystem::path& image_dir,
                   const std::filesystem::path& landmark_dir, LoadReport* report = nullptr,
                   const ReframeOptions& options = {});

/// Crops the (padded) landmark bounding box and stretches it to 224x224,
/// mapping landmarks with x' = (x - x0) * 224 / box_w (same for y).
Sample reframe_to_ear(const cv::Mat& image, const LandmarkSet& landmarks,
                      const ReframeOptions& options = {}, std::string source_id = {});

Sample augment(const Sample& sample, AugmentKind kind, const AugmentOptions& options = {});

/// Calls `sink` with the sample itself and then its five variants.
void for_each_expanded(const Sample& sample, const AugmentOptions& options,
                       const std::function<void(Sample&&)>& sink);

/// Each sample followed by its five variants; sizes grow exactly sixfold.
Corpus expand_corpus(const Corpus& corpus, const AugmentOptions& options = {});

/// Writes images/<split>/<id>.png and landmarks/<split>/<id>.txt under `root`.
void write_sample(const std::filesystem::path& root, std::string_view split, const Sample& s);

}  // namespace hrtf
