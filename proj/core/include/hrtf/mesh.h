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

// Triangle meshes and STL (binary and ASCII) input/output.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hrtf {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const;
  Vec3 normalized() const;
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

/// Row-major 3x3 matrix.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return {}; }
  static Mat3 from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2);
  /// Right-handed rotation of `radians` about the unit `axis`.
  static Mat3 rotation(const Vec3& axis, double radians);
  Vec3 operator*(const Vec3& v) const;
  Mat3 operator*(const Mat3& o) const;
  Mat3 transposed() const;
};

struct Box3 {
  Vec3 min;
  Vec3 max;
  Vec3 center() const { return (min + max) * 0.5; }
  Vec3 extent() const { return max - min; }
};

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  /// Per-triangle normals as stored in the file; may be empty.
  std::vector<Vec3> normals;

  bool empty() const { return triangles.empty(); }
  double surface_area() const;
  Box3 bounds() const;
  /// Applies `r` to every vertex (and stored normal).
  TriangleMesh rotated(const Mat3& r) const;
};

/// Detects binary vs ASCII. Throws CorruptStl when a binary triangle count
/// disagrees with the file size, StlFormatError for anything unrecognized.
/// Identical vertex coordinates are merged.
TriangleMesh parse_stl(const std::filesystem::path& path);
TriangleMesh parse_stl_bytes(std::string_view bytes);

std::string to_binary_stl(const TriangleMesh& mesh);
std::string to_ascii_stl(const TriangleMesh& mesh, std::string_view name = "mesh");

}  // namespace hrtf
