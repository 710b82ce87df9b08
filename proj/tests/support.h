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

// Fixtures shared by the unit and acceptance tests: scratch directories,
// random landmark sets, synthetic images and primitive meshes.

#include <array>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>
#include <unistd.h>

#include "hrtf/anthro.h"
#include "hrtf/mesh.h"

namespace hrtf::testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("hrtf_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

/// 55 landmarks uniform in [lo, hi)^2.
inline LandmarkSet random_landmarks(std::mt19937_64& rng, double lo = 20.0, double hi = 200.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Landmark> pts;
  for (int i = 0; i < kNumLandmarks; ++i) pts.push_back({u(rng), u(rng), i});
  return LandmarkSet(std::move(pts));
}

/// Textured 224x224 BGR image with a dot drawn at every landmark.
inline cv::Mat synthetic_image(const LandmarkSet& set, unsigned seed) {
  cv::Mat img(kFrameSize, kFrameSize, CV_8UC3);
  cv::RNG rng(seed);
  rng.fill(img, cv::RNG::UNIFORM, cv::Scalar::all(40), cv::Scalar::all(90));
  for (const auto& p : set.points()) {
    cv::circle(img, cv::Point(static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y))),
               3, cv::Scalar(30 + 4 * p.label, 255 - 3 * p.label, 200), cv::FILLED);
  }
  return img;
}

/// Axis-aligned cube with outward-facing triangles.
inline TriangleMesh make_cube(double side, Vec3 origin = {}) {
  TriangleMesh m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.push_back(origin + Vec3{(i & 1) * side, ((i >> 1) & 1) * side, ((i >> 2) & 1) * side});
  }
  m.triangles = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                 {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  return m;
}

/// Icosphere with `levels` subdivisions, vertices on the sphere.
inline TriangleMesh make_sphere(double radius, int levels, Vec3 center = {}) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
                         {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
                         {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  std::vector<std::array<std::uint32_t, 3>> f = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (auto& p : v) p = p.normalized();
  for (int l = 0; l < levels; ++l) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> mid;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back(((v[a] + v[b]) * 0.5).normalized());
      const auto idx = static_cast<std::uint32_t>(v.size() - 1);
      mid.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<std::uint32_t, 3>> next;
    for (const auto& tri : f) {
      const auto a = midpoint(tri[0], tri[1]);
      const auto b = midpoint(tri[1], tri[2]);
      const auto c = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], a, c});
      next.push_back({tri[1], b, a});
      next.push_back({tri[2], c, b});
      next.push_back({a, b, c});
    }
    f = std::move(next);
  }
  TriangleMesh m;
  for (const auto& p : v) m.vertices.push_back(center + p * radius);
  m.triangles = std::move(f);
  return m;
}

}  // namespace hrtf::testing

#include <opencv2/imgcodecs.hpp>

#include "hrtf/landmark_io.h"

namespace hrtf::testing {

/// Writes <root>/images/<split>/<id>.png and <root>/landmarks/<split>/<id>.txt
/// with random 55-point sets. Splits are skipped when their count is zero.
inline void write_corpus(const std::filesystem::path& root, int n_train, int n_test,
                         std::uint64_t seed, int image_size = 224) {
  std::mt19937_64 rng(seed);
  auto emit = [&](const std::string& split, int n) {
    std::filesystem::create_directories(root / "images" / split);
    std::filesystem::create_directories(root / "landmarks" / split);
    for (int i = 0; i < n; ++i) {
      const double scale = image_size / 224.0;
      auto lm = random_landmarks(rng, 30 * scale, 194 * scale);
      LandmarkSet sized(std::vector<Landmark>(lm.points().begin(), lm.points().end()),
                        {image_size, image_size});
      cv::Mat img(image_size, image_size, CV_8UC3);
      cv::RNG noise(rng());
      noise.fill(img, cv::RNG::UNIFORM, cv::Scalar::all(0), cv::Scalar::all(255));
      const std::string id = split + "_" + std::to_string(i);
      cv::imwrite((root / "images" / split / (id + ".png")).string(), img);
      write_landmarks(root / "landmarks" / split / (id + ".txt"), sized);
    }
  };
  if (n_train > 0) emit("train", n_train);
  if (n_test > 0) emit("test", n_test);
}

}  // namespace hrtf::testing
