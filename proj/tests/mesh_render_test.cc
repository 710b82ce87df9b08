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

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>
#include <opencv2/core.hpp>

#include "hrtf/atomic_file.h"
#include "hrtf/errors.h"
#include "hrtf/mesh.h"
#include "hrtf/render.h"
#include "support.h"

namespace hrtf {
namespace {

CameraSpec front_camera(double distance) {
  CameraSpec c;
  c.distance = distance;
  return c;
}

TEST(Stl, BinaryRoundTripMergesVertices) {
  auto cube = testing::make_cube(2.0);
  auto bytes = to_binary_stl(cube);
  EXPECT_EQ(bytes.size(), 84u + 50u * 12u);
  auto back = parse_stl_bytes(bytes);
  EXPECT_EQ(back.triangles.size(), 12u);
  EXPECT_EQ(back.vertices.size(), 8u);
  EXPECT_NEAR(back.surface_area(), 24.0, 1e-9);
}

TEST(Stl, AsciiRoundTrip) {
  auto cube = testing::make_cube(1.5, {1, 2, 3});
  auto back = parse_stl_bytes(to_ascii_stl(cube, "cube"));
  EXPECT_EQ(back.triangles.size(), 12u);
  EXPECT_NEAR(back.surface_area(), 6 * 1.5 * 1.5, 1e-9);
  auto b = back.bounds();
  EXPECT_NEAR(b.min.x, 1.0, 1e-6);
  EXPECT_NEAR(b.max.z, 4.5, 1e-6);
}

TEST(Stl, RejectsDamage) {
  auto bytes = to_binary_stl(testing::make_cube(1.0));
  EXPECT_THROW(parse_stl_bytes(bytes.substr(0, bytes.size() - 7)), CorruptStl);
  EXPECT_THROW(parse_stl_bytes("garbage"), StlFormatError);
  EXPECT_THROW(parse_stl_bytes("solid x\nfacet normal 0 0 1\nouter loop\nvertex 0 0\n"), StlFormatError);
  testing::TempDir dir;
  EXPECT_THROW(parse_stl(dir / "none.stl"), IoError);
}

TEST(Stl, DropsDegenerateFacets) {
  TriangleMesh m = testing::make_cube(1.0);
  m.triangles.push_back({0, 0, 1});
  auto back = parse_stl_bytes(to_binary_stl(m));
  EXPECT_EQ(back.triangles.size(), 12u);
}

TEST(Mesh, RotationKeepsArea) {
  auto s = testing::make_sphere(1.0, 2);
  auto r = s.rotated(Mat3::rotation({0, 0, 1}, 0.7) * Mat3::rotation({1, 0, 0}, -0.3));
  EXPECT_NEAR(r.surface_area(), s.surface_area(), 1e-9);
  auto id = Mat3::rotation({0, 1, 0}, 0.4) * Mat3::rotation({0, 1, 0}, 0.4).transposed();
  for (int i = 0; i < 9; ++i) EXPECT_NEAR(id.m[i], i % 4 == 0 ? 1.0 : 0.0, 1e-15);
}

TEST(Render, SphereSilhouetteMatchesDisc) {
  const double r = 1.0, d = 5.0;
  auto cam = front_camera(d);
  auto img = render_ear(testing::make_sphere(r, 4), cam, Side::right);
  const double rho = cam.focal() * r / std::sqrt(d * d - r * r);
  const double expected = std::numbers::pi * rho * rho * cam.width * cam.height / 4.0;
  const double area = cv::countNonZero(img.mask);
  EXPECT_NEAR(area / expected, 1.0, 0.02);
}

TEST(Render, FacingTriangleIsFullyLit) {
  auto img = render_ear(testing::make_sphere(1.0, 3), front_camera(5.0), Side::right);
  EXPECT_GE(img.image.at<uchar>(112, 112), 250);
}

TEST(Render, NearerSurfaceWins) {
  // Far square faces the camera (shade 255); the near one is tilted to a
  // cosine of 0.6 (shade 153). The near one must win regardless of draw order.
  TriangleMesh far_q, near_q;
  far_q.vertices = {{-2, -2, -1}, {2, -2, -1}, {2, 2, -1}, {-2, 2, -1}};
  far_q.triangles = {{0, 1, 2}, {0, 2, 3}};
  const double c = 0.6, s = 0.8;
  for (auto p : std::vector<Vec3>{{-0.3, -0.3, 0}, {0.3, -0.3, 0}, {0.3, 0.3, 0}, {-0.3, 0.3, 0}}) {
    near_q.vertices.push_back({p.x, p.y * c, 1.0 + p.y * s});
  }
  near_q.triangles = {{0, 1, 2}, {0, 2, 3}};
  for (int order = 0; order < 2; ++order) {
    TriangleMesh m;
    const auto& first = order == 0 ? far_q : near_q;
    const auto& second = order == 0 ? near_q : far_q;
    m.vertices = first.vertices;
    m.triangles = first.triangles;
    const auto off = static_cast<std::uint32_t>(m.vertices.size());
    m.vertices.insert(m.vertices.end(), second.vertices.begin(), second.vertices.end());
    for (auto t : second.triangles) m.triangles.push_back({t[0] + off, t[1] + off, t[2] + off});
    auto img = render_ear(m, front_camera(6.0), Side::right);
    EXPECT_EQ(img.image.at<uchar>(112, 112), 153) << "order " << order;
    EXPECT_EQ(img.image.at<uchar>(112, 30), 255) << "order " << order;
  }
}

TEST(Render, LeftIsMirrorOfRight) {
  auto mesh = testing::make_cube(1.0, {-0.2, -0.5, -0.5}).rotated(Mat3::rotation({0, 1, 0}, 0.5));
  auto cam = front_camera(4.0);
  auto right = render_ear(mesh, cam, Side::right);
  auto left = render_ear(mesh, cam, Side::left);
  cv::Mat flipped;
  cv::flip(left.image, flipped, 1);
  EXPECT_EQ(cv::norm(flipped, right.image, cv::NORM_INF), 0.0);
  cv::flip(flipped, flipped, 1);
  EXPECT_EQ(cv::norm(flipped, left.image, cv::NORM_INF), 0.0);
}

TEST(Render, ForEarFramesTheBox) {
  auto head = testing::make_sphere(8.0, 3);
  Box3 right_ear{{-2, -9, -3}, {2, -7, 3}};
  auto cam = CameraSpec::for_ear(Side::right, right_ear, 0.8);
  auto img = render_ear(head, cam, Side::right);
  EXPECT_EQ(img.mask.at<uchar>(112, 112), 255);
  EXPECT_THROW(CameraSpec::for_ear(Side::left, right_ear, 0.0), InvalidArgument);
  EXPECT_THROW(render_ear(TriangleMesh{}, cam, Side::left), EmptyMesh);
}

TEST(Render, BatchIsDeterministicAndReportsFailures) {
  testing::TempDir dir;
  std::filesystem::create_directories(dir / "meshes");
  for (int i = 0; i < 3; ++i) {
    write_file_atomic(dir / ("meshes/" + std::to_string(i) + ".stl"),
                      to_binary_stl(testing::make_sphere(1.0 + 0.1 * i, 2)));
  }
  write_file_atomic(dir / "meshes/bad.stl", "not an stl");
  auto a = batch_render(dir / "meshes", {}, dir / "a");
  auto b = batch_render(dir / "meshes", {}, dir / "b");
  EXPECT_EQ(a.images, 6u);
  ASSERT_EQ(a.failures.size(), 1u);
  EXPECT_EQ(a.failures[0].first.filename(), "bad.stl");
  for (const char* name : {"0_L.png", "0_R.png", "2_L.png"}) {
    EXPECT_EQ(read_file(dir / (std::string("a/") + name)), read_file(dir / (std::string("b/") + name)));
  }
  const auto manifest = read_file(a.manifest);
  EXPECT_EQ(manifest.rfind("subject_id,side,image_path\n0,left,0_L.png\n", 0), 0u) << manifest;
}

}  // namespace
}  // namespace hrtf
