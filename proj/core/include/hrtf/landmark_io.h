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

// Plain-text landmark files: one "label x y" line per point. Complete sets
// carry 55 lines, selected subsets 12, annotation exports may add REF_A/REF_B.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hrtf/anthro.h"

namespace hrtf {

struct LabeledPoint {
  std::string label;
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const LabeledPoint&, const LabeledPoint&) = default;
};

/// Parses "label x y" lines. Blank lines and lines starting with '#' are
/// skipped. Throws LandmarkFormatError with the offending line number.
std::vector<LabeledPoint> parse_labeled_points(std::string_view text);

/// Shortest round-trip decimal formatting, one point per line.
std::string format_labeled_points(const std::vector<LabeledPoint>& points);

/// Reads an lm55 (or subset) file. Labels must be integers in 0..54.
LandmarkSet read_landmarks(const std::filesystem::path& path, ImageSize size = {});
LandmarkSet parse_landmarks(std::string_view text, ImageSize size = {});

/// Reads the I-BUG ".pts" layout (version / n_points / braces); labels are
/// assigned in file order.
LandmarkSet read_pts(const std::filesystem::path& path, ImageSize size = {});

std::string format_landmarks(const LandmarkSet& set);
/// Atomic write.
void write_landmarks(const std::filesystem::path& path, const LandmarkSet& set);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

}  // namespace hrtf
