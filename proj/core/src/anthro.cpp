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

#include "hrtf/anthro.h"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "hrtf/errors.h"

namespace hrtf {

namespace {

constexpr std::array<DistancePair, kNumDistances> kCanonicalPairs{{
    {1, 20, 39, "cavum concha height"},
    {2, 20, 48, "cymba concha height"},
    {3, 37, 43, "cavum concha width"},
    {4, 25, 48, "fossa height"},
    {5, 4, 18, "pinna height"},
    {6, 33, 37, "pinna width"},
    {7, 38, 40, "intertragal incisure width"},
}};

void check_finite(const Landmark& p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    throw InvalidLandmark("landmark " + std::to_string(p.label) +
                          " has a non-finite coordinate");
  }
}

}  // namespace

LandmarkSet::LandmarkSet(std::vector<Landmark> points, ImageSize size)
    : points_(std::move(points)), size_(size) {
  if (size_.width <= 0 || size_.height <= 0) {
    throw InvalidArgument("image size must be positive");
  }
  for (const auto& p : points_) {
    check_finite(p);
    if (p.label < 0 || p.label >= kNumLandmarks) {
      throw InvalidLandmark("landmark label " + std::to_string(p.label) +
                            " outside 0..54");
    }
  }
  std::sort(points_.begin(), points_.end(),
            [](const Landmark& a, const Landmark& b) { return a.label < b.label; });
  auto dup = std::adjacent_find(
      points_.begin(), points_.end(),
      [](const Landmark& a, const Landmark& b) { return a.label == b.label; });
  if (dup != points_.end()) {
    throw InvalidLandmark("duplicate landmark label " + std::to_string(dup->label));
  }
}

LandmarkSet LandmarkSet::from_xy(std::span<const double> xy, ImageSize size) {
  if (xy.size() != 2 * kNumLandmarks) {
    throw IncompleteLandmarkSet("expected 110 interleaved coordinates, got " +
                                std::to_string(xy.size()));
  }
  std::vector<Landmark> pts(kNumLandmarks);
  for (int i = 0; i < kNumLandmarks; ++i) {
    pts[i] = {xy[2 * i], xy[2 * i + 1], i};
  }
  return LandmarkSet(std::move(pts), size);
}

bool LandmarkSet::is_complete() const {
  // Labels are unique and within range, so the count decides.
  return points_.size() == static_cast<std::size_t>(kNumLandmarks);
}

const Landmark* LandmarkSet::find(int label) const {
  auto it = std::lower_bound(
      points_.begin(), points_.end(), label,
      [](const Landmark& p, int l) { return p.label < l; });
  if (it == points_.end() || it->label != label) return nullptr;
  return &*it;
}

const Landmark& LandmarkSet::at(int label) const {
  const Landmark* p = find(label);
  if (p == nullptr) {
    throw IncompleteLandmarkSet("landmark " + std::to_string(label) +
                                " missing from set");
  }
  return *p;
}

std::vector<int> LandmarkSet::out_of_frame_labels() const {
  std::vector<int> out;
  for (const auto& p : points_) {
    if (p.x < 0.0 || p.y < 0.0 || p.x >= size_.width || p.y >= size_.height) {
      out.push_back(p.label);
    }
  }
  return out;
}

DistancePairMap::DistancePairMap() : pairs_(kCanonicalPairs) {}

DistancePairMap::DistancePairMap(std::array<DistancePair, kNumDistances> pairs)
    : pairs_(pairs) {
  for (const auto& p : pairs_) {
    if (p.label_a < 0 || p.label_a >= kNumLandmarks || p.label_b < 0 ||
        p.label_b >= kNumLandmarks) {
      throw InvalidArgument("distance pair references a label outside 0..54");
    }
  }
}

std::vector<int> DistancePairMap::labels() const {
  std::vector<int> out;
  for (const auto& p : pairs_) {
    out.push_back(p.label_a);
    out.push_back(p.label_b);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool AnthroVector::is_finite() const {
  return std::all_of(d.begin(), d.end(), [](double v) { return std::isfinite(v); });
}

void AnthroVector::validate() const {
  for (int j = 0; j < kNumDistances; ++j) {
    if (!std::isfinite(d[j]) || d[j] <= 0.0) {
      throw InvalidArgument("anthropometric d" + std::to_string(j + 1) +
                            " must be finite and positive");
    }
  }
}

std::string_view distance_name(int index) {
  if (index < 0 || index >= kNumDistances) {
    throw InvalidArgument("distance index out of range");
  }
  return kCanonicalPairs[index].name;
}

double euclidean_distance(const Landmark& a, const Landmark& b) {
  check_finite(a);
  check_finite(b);
  return std::hypot(b.x - a.x, b.y - a.y);
}

PixelDistanceVector measure_distances(const LandmarkSet& set,
                                      const DistancePairMap& map) {
  if (set.image_size() != ImageSize{kFrameSize, kFrameSize}) {
    throw SizeMismatch("distances are defined on a 224x224 frame, got " +
                       std::to_string(set.image_size().width) + "x" +
                       std::to_string(set.image_size().height));
  }
  PixelDistanceVector out;
  for (std::size_t j = 0; j < out.d.size(); ++j) {
    const auto& pair = map.pairs()[j];
    out.d[j] = euclidean_distance(set.at(pair.label_a), set.at(pair.label_b)) /
               kNormalization;
  }
  if (std::all_of(out.d.begin(), out.d.end(), [](double v) { return v == 0.0; })) {
    spdlog::warn("all seven pinna distances are zero; landmarks are coincident");
  }
  for (std::size_t j = 0; j < out.d.size(); ++j) {
    if (out.d[j] > 1.0) {
      spdlog::warn("d{} = {} exceeds 1; landmarks fall outside the frame", j + 1,
                   out.d[j]);
    }
  }
  return out;
}

LandmarkSet select_relevant(const LandmarkSet& set, const DistancePairMap& map) {
  std::vector<Landmark> kept;
  for (int label : map.labels()) kept.push_back(set.at(label));
  return LandmarkSet(std::move(kept), set.image_size());
}

}  // namespace hrtf
