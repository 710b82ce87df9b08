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

// Domain types and geometry shared across the pipeline: pinna landmarks,
// the seven-distance pair map, and normalized pixel / centimetre vectors.

#include <array>
#include <span>
#include <string_view>
#include <vector>

namespace hrtf {

inline constexpr int kNumLandmarks = 55;
inline constexpr int kNumDistances = 7;
inline constexpr int kFrameSize = 224;
/// Rounded diagonal of the 224x224 frame. Intentionally not 224*sqrt(2).
inline constexpr double kNormalization = 316.0;

struct ImageSize {
  int width = kFrameSize;
  int height = kFrameSize;
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

struct Landmark {
  double x = 0.0;
  double y = 0.0;
  int label = 0;
  friend bool operator==(const Landmark&, const Landmark&) = default;
};

/// Landmarks of one image, ordered by label with unique labels. A set is
/// either complete (labels 0..54) or a subset such as the 12-point selection.
class LandmarkSet {
 public:
  LandmarkSet() = default;
  /// Validates finiteness, label range and uniqueness, then sorts by label.
  LandmarkSet(std::vector<Landmark> points, ImageSize size = {});

  /// Builds a complete set from 55 (x, y) pairs given in label order.
  static LandmarkSet from_xy(std::span<const double> xy, ImageSize size = {});

  std::span<const Landmark> points() const { return points_; }
  ImageSize image_size() const { return size_; }
  std::size_t size() const { return points_.size(); }
  bool is_complete() const;

  bool contains(int label) const { return find(label) != nullptr; }
  const Landmark* find(int label) const;
  /// Throws IncompleteLandmarkSet when the label is absent.
  const Landmark& at(int label) const;

  /// Labels whose point lies outside [0, width) x [0, height).
  std::vector<int> out_of_frame_labels() const;

  friend bool operator==(const LandmarkSet&, const LandmarkSet&) = default;

 private:
  std::vector<Landmark> points_;
  ImageSize size_{};
};

struct DistancePair {
  int id;  // 1..7
  int label_a;
  int label_b;
  std::string_view name;
};

/// Which landmark pairs define d1..d7.
class DistancePairMap {
 public:
  /// The canonical HUTUBS-aligned map.
  DistancePairMap();
  explicit DistancePairMap(std::array<DistancePair, kNumDistances> pairs);

  const std::array<DistancePair, kNumDistances>& pairs() const { return pairs_; }
  /// Sorted union of every label referenced by a pair.
  std::vector<int> labels() const;

 private:
  std::array<DistancePair, kNumDistances> pairs_;
};

/// Seven unitless distances, each pixel length divided by kNormalization.
struct PixelDistanceVector {
  std::array<double, kNumDistances> d{};
  static constexpr double normalization_constant = kNormalization;
  friend bool operator==(const PixelDistanceVector&, const PixelDistanceVector&) = default;
};

/// Seven pinna distances in centimetres, ordered d1 (cavum concha height)
/// through d7 (intertragal incisure width).
struct AnthroVector {
  std::array<double, kNumDistances> d{};

  bool is_finite() const;
  /// Throws InvalidArgument unless every component is finite and > 0.
  void validate() const;
  friend bool operator==(const AnthroVector&, const AnthroVector&) = default;
};

std::string_view distance_name(int index);  // index 0..6

double euclidean_distance(const Landmark& a, const Landmark& b);

/// Requires a 224x224 frame and every label referenced by the map. An
/// all-zero result or a component above 1 is logged as a warning.
PixelDistanceVector measure_distances(const LandmarkSet& set,
                                      const DistancePairMap& map = {});

/// Projects onto the union of labels referenced by the map. Idempotent.
LandmarkSet select_relevant(const LandmarkSet& set, const DistancePairMap& map = {});

}  // namespace hrtf
