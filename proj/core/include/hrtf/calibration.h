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

// Conversion between normalized pixel distances and centimetres.

#include <array>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hrtf/anthro.h"

namespace hrtf {

/// Centimetres per normalized pixel unit for each of d1..d7.
struct ConversionFactors {
  std::array<double, kNumDistances> factor{};
  double overall_average = 0.0;
  std::size_t n_ears = 0;
  std::string provenance;
  /// Set for the published preset, which has never been validated against
  /// held-out measurements.
  bool unvalidated = false;

  /// Builds a factor set whose overall_average is the mean of `factor`.
  static ConversionFactors from_values(const std::array<double, kNumDistances>& factor,
                                       std::size_t n_ears, std::string provenance);
  /// Same scalar for every distance (reference-distance calibration).
  static ConversionFactors uniform(double scale, std::string provenance);

  /// Every factor and the average finite and positive.
  void validate() const;
};

struct CalibrationRecord {
  std::string ear_id;
  AnthroVector cm;
  PixelDistanceVector px;
};

/// Two image points a known physical length apart.
struct ReferenceDistance {
  Landmark point_a;
  Landmark point_b;
  double physical_length_cm = 0.0;
};

/// f_j = cm_j / px_j. Throws CalibrationDegenerate on a non-positive px_j.
std::array<double, kNumDistances> per_ear_factors(const CalibrationRecord& record);

/// Per-distance mean of per_ear_factors over all records. The summation
/// order is fixed by value, so the result does not depend on record order.
ConversionFactors average_factors(std::span<const CalibrationRecord> records);

/// The published 116-ear averages, flagged unvalidated.
ConversionFactors load_reference_factors();

AnthroVector to_centimetres(const PixelDistanceVector& px, const ConversionFactors& factors);

/// cm per normalized unit implied by a reference segment. Points are first
/// mapped into the 224x224 frame when `image_size` differs from it.
double scale_from_reference(const ReferenceDistance& ref, ImageSize image_size = {});

// CSV persistence.
std::vector<CalibrationRecord> read_calibration_csv(const std::filesystem::path& path);
void write_calibration_csv(const std::filesystem::path& path,
                           std::span<const CalibrationRecord> records);
ConversionFactors read_factors_csv(const std::filesystem::path& path);
std::string format_factors_csv(const ConversionFactors& factors);
void write_factors_csv(const std::filesystem::path& path, const ConversionFactors& factors);

/// Reads ground-truth centimetres keyed by ear id from any CSV that has
/// "ear_id" and "d1_cm".."d7_cm" columns.
std::map<std::string, AnthroVector> read_cm_table(const std::filesystem::path& path);

}  // namespace hrtf
