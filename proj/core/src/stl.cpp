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

#include "hrtf/mesh.h"

#include <cctype>
#include <charconv>
#include <tuple>
#include <cmath>
#include <cstring>
#include <map>
#include <sstream>

#include <spdlog/spdlog.h>

#include "hrtf/atomic_file.h"
#include "hrtf/errors.h"

namespace hrtf {

double Vec3::norm() const { return std::sqrt(dot(*this)); }

Vec3 Vec3::normalized() const {
  const double n = norm();
  return n > 0.0 ? *this * (1.0 / n) : Vec3{};
}

Mat3 Mat3::from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2) {
  return {{r0.x, r0.y, r0.z, r1.x, r1.y, r1.z, r2.x, r2.y, r2.z}};
}

Mat3 Mat3::rotation(const Vec3& axis, double radians) {
  const Vec3 a = axis.normalized();
  const double c = std::cos(radians), s = std::sin(radians), t = 1.0 - c;
  return {{t * a.x * a.x + c, t * a.x * a.y - s * a.z, t * a.x * a.z + s * a.y,
           t * a.x * a.y + s * a.z, t * a.y * a.y + c, t * a.y * a.z - s * a.x,
           t * a.x * a.z - s * a.y, t * a.y * a.z + s * a.x, t * a.z * a.z + c}};
}

Vec3 Mat3::operator*(const Vec3& v) const {
  return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
          m[6] * v.x + m[7] * v.y + m[8] * v.z};
}

Mat3 Mat3::operator*(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += m[i * 3 + k] * o.m[k * 3 + j];
      r.m[i * 3 + j] = s;
    }
  return r;
}

Mat3 Mat3::transposed() const {
  return {{m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]}};
}

double TriangleMesh::surface_area() const {
  double area = 0.0;
  for (const auto& t : triangles) {
    const Vec3& a = vertices[t[0]];
    area += 0.5 * (vertices[t[1]] - a).cross(vertices[t[2]] - a).norm();
  }
  return area;
}

Box3 TriangleMesh::bounds() const {
  if (vertices.empty()) return {};
  Box3 b{vertices.front(), vertices.front()};
  for (const auto& v : vertices) {
    b.min = {std::min(b.min.x, v.x), std::min(b.min.y, v.y), std::min(b.min.z, v.z)};
    b.max = {std::max(b.max.x, v.x), std::max(b.max.y, v.y), std::max(b.max.z, v.z)};
  }
  return b;
}

TriangleMesh TriangleMesh::rotated(const Mat3& r) const {
  TriangleMesh out = *this;
  for (auto& v : out.vertices) v = r * v;
  for (auto& n : out.normals) n = r * n;
  return out;
}

namespace {

class MeshBuilder {
 public:
  void add(const std::array<Vec3, 3>& tri, const Vec3& normal) {
    std::array<std::uint32_t, 3> idx{};
    for (int k = 0; k < 3; ++k) {
      const auto key = std::make_tuple(tri[k].x, tri[k].y, tri[k].z);
      auto [it, inserted] =
          index_.emplace(key, static_cast<std::uint32_t>(mesh_.vertices.size()));
      if (inserted) mesh_.vertices.push_back(tri[k]);
      idx[k] = it->second;
    }
    if (idx[0] == idx[1] || idx[1] == idx[2] || idx[0] == idx[2]) {
      ++dropped_;
      return;
    }
    mesh_.triangles.push_back(idx);
    mesh_.normals.push_back(normal);
  }

  TriangleMesh finish() {
    if (dropped_ > 0) spdlog::warn("dropped {} STL facets with repeated vertices", dropped_);
    return std::move(mesh_);
  }

 private:
  TriangleMesh mesh_;
  std::map<std::tuple<double, double, double>, std::uint32_t> index_;
  std::size_t dropped_ = 0;
};

float read_f32(const char* p) {
  float f;
  std::memcpy(&f, p, 4);
  return f;
}

TriangleMesh parse_binary(std::string_view bytes) {
  std::uint32_t count;
  std::memcpy(&count, bytes.data() + 80, 4);
  const std::size_t expected = 84 + 50ull * count;
  if (bytes.size() != expected) {
    throw CorruptStl("binary STL declares " + std::to_string(count) + " triangles (" +
                     std::to_string(expected) + " bytes) but file has " +
                     std::to_string(bytes.size()) + " bytes");
  }
  MeshBuilder b;
  for (std::uint32_t i = 0; i < count; ++i) {
    const char* p = bytes.data() + 84 + 50ull * i;
    auto v = [&](int k) {
      return Vec3{read_f32(p + 4 * k), read_f32(p + 4 * k + 4), read_f32(p + 4 * k + 8)};
    };
    b.add({v(3), v(6), v(9)}, v(0));
  }
  return b.finish();
}

TriangleMesh parse_ascii(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string tok;
  MeshBuilder b;
  auto number = [&](const char* what) {
    if (!(in >> tok)) throw StlFormatError(std::string("ASCII STL ends inside ") + what);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw StlFormatError("ASCII STL: expected a number in " + std::string(what) + ", got '" +
                           tok + "'");
    }
    return v;
  };
  auto expect = [&](std::string_view word) {
    if (!(in >> tok) || tok != word) {
      throw StlFormatError("ASCII STL: expected '" + std::string(word) + "'");
    }
  };
  in >> tok;  // solid
  std::getline(in, tok);  // optional name
  bool closed = false;
  while (in >> tok) {
    if (tok == "endsolid") {
      closed = true;
      break;
    }
    if (tok != "facet") throw StlFormatError("ASCII STL: expected 'facet', got '" + tok + "'");
    expect("normal");
    Vec3 n{number("normal"), number("normal"), number("normal")};
    expect("outer");
    expect("loop");
    std::array<Vec3, 3> tri;
    for (auto& v : tri) {
      expect("vertex");
      v = {number("vertex"), number("vertex"), number("vertex")};
    }
    expect("endloop");
    expect("endfacet");
    b.add(tri, n);
  }
  if (!closed) throw StlFormatError("ASCII STL: missing 'endsolid'");
  return b.finish();
}

}  // namespace

TriangleMesh parse_stl_bytes(std::string_view bytes) {
  const bool has_binary_header = bytes.size() >= 84;
  bool binary_consistent = false;
  if (has_binary_header) {
    std::uint32_t count;
    std::memcpy(&count, bytes.data() + 80, 4);
    binary_consistent = bytes.size() == 84 + 50ull * count;
  }
  if (binary_consistent) return parse_binary(bytes);

  std::string_view head = bytes.substr(0, std::min<std::size_t>(bytes.size(), 512));
  while (!head.empty() && std::isspace(static_cast<unsigned char>(head.front()))) {
    head.remove_prefix(1);
  }
  if (head.starts_with("solid")) {
    try {
      return parse_ascii(bytes);
    } catch (const StlFormatError& e) {
      if (!has_binary_header) throw;
      // A binary file whose 80-byte header happens to start with "solid".
      if (bytes.find("facet") == std::string_view::npos) return parse_binary(bytes);
      throw;
    }
  }
  if (has_binary_header) return parse_binary(bytes);  // throws CorruptStl
  throw StlFormatError("unrecognized STL data (" + std::to_string(bytes.size()) + " bytes)");
}

TriangleMesh parse_stl(const std::filesystem::path& path) {
  try {
    return parse_stl_bytes(read_file(path));
  } catch (const CorruptStl& e) {
    throw CorruptStl(path.string() + ": " + e.what());
  } catch (const StlFormatError& e) {
    throw StlFormatError(path.string() + ": " + e.what());
  }
}

std::string to_binary_stl(const TriangleMesh& mesh) {
  std::string out(80, '\0');
  const char title[] = "binary STL written by hrtfmatch";
  std::memcpy(out.data(), title, sizeof(title) - 1);
  const auto count = static_cast<std::uint32_t>(mesh.triangles.size());
  out.append(reinterpret_cast<const char*>(&count), 4);
  auto put = [&](const Vec3& v) {
    const float f[3] = {static_cast<float>(v.x), static_cast<float>(v.y), static_cast<float>(v.z)};
    out.append(reinterpret_cast<const char*>(f), 12);
  };
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto& t = mesh.triangles[i];
    const Vec3 n = i < mesh.normals.size()
                       ? mesh.normals[i]
                       : (mesh.vertices[t[1]] - mesh.vertices[t[0]])
                             .cross(mesh.vertices[t[2]] - mesh.vertices[t[0]])
                             .normalized();
    put(n);
    for (auto idx : t) put(mesh.vertices[idx]);
    out.append(2, '\0');
  }
  return out;
}

std::string to_ascii_stl(const TriangleMesh& mesh, std::string_view name) {
  std::ostringstream os;
  os.precision(17);
  os << "solid " << name << "\n";
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto& t = mesh.triangles[i];
    const Vec3 n = (mesh.vertices[t[1]] - mesh.vertices[t[0]])
                       .cross(mesh.vertices[t[2]] - mesh.vertices[t[0]])
                       .normalized();
    os << "  facet normal " << n.x << ' ' << n.y << ' ' << n.z << "\n    outer loop\n";
    for (auto idx : t) {
      const auto& v = mesh.vertices[idx];
      os << "      vertex " << v.x << ' ' << v.y << ' ' << v.z << "\n";
    }
    os << "    endloop\n  endfacet\n";
  }
  os << "endsolid " << name << "\n";
  return os.str();
}

}  // namespace hrtf
