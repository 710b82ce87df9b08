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

// Persistence of manual landmark annotations. Each submission is stored as
// one JSON document per landmark under <dir>/<image_id>/<label>.json and as
// an aggregated <dir>/<image_id>.txt with "label x y" lines.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hrtf/anthro.h"
#include "hrtf/calibration.h"
#include "hrtf/landmark_io.h"

namespace hrtf::pipeline {

inline constexpr std::string_view kRefA = "REF_A";
inline constexpr std::string_view kRefB = "REF_B";

struct AnnotationDocument {
  std::string image_id;
  std::vector<LabeledPoint> points;  // in the 224x224 source frame
  /// Physical length between REF_A and REF_B, when supplied.
  std::optional<double> reference_length_cm;
};

/// Every problem found, empty when the document is valid. Checks a safe
/// image id, unique labels, labels in 0..54 or REF_A/REF_B (both or neither),
/// finite in-frame coordinates and a positive reference length.
std::vector<std::string> validate_annotation(const AnnotationDocument& doc);

/// Accepts {"image_id": ..., "points": [{"label": 4 | "4" | "REF_A", "x", "y"}],
/// "reference_length_cm": ...}. Throws InvalidArgument with every problem.
AnnotationDocument annotation_from_json(const nlohmann::json& j);
nlohmann::json annotation_to_json(const AnnotationDocument& doc);

/// Validates, then replaces any earlier submission for the image.
void save_annotation(const std::filesystem::path& dir, const AnnotationDocument& doc);
/// Reads the aggregated text file (and the reference length sidecar).
/// Throws NotFound when the image has no annotation.
AnnotationDocument load_annotation(const std::filesystem::path& dir, std::string_view image_id);
/// Reassembles a document from the per-landmark JSON files.
AnnotationDocument load_annotation_json_dir(const std::filesystem::path& dir,
                                            std::string_view image_id);
/// Sorted ids with an aggregated file.
std::vector<std::string> list_annotations(const std::filesystem::path& dir);

/// Numeric labels only.
LandmarkSet to_landmark_set(const AnnotationDocument& doc);
/// Present when both reference points and a length are annotated.
std::optional<ReferenceDistance> reference_distance(const AnnotationDocument& doc);

}  // namespace hrtf::pipeline
