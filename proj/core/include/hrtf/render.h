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

// Software rasterizer that turns head meshes into framed ear images:
// perspective projection, z-buffer, flat Lambertian shading from a
// directional light, and left-ear mirroring.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "hrtf/matcher.h"
#include "hrtf/mesh.h"

namespace hrtf {

/// Pinhole camera. The camera sits at the origin of its own frame and looks
/// down -z; world points map to camera space as
///   p_cam = rotation * (p - target) - (0, 0, distance).
struct CameraSpec {
  Mat3 rotation;
  Vec3 target;
  double distance = 1.0;
  double fov_y_deg = 30.0;
  /// Multiplies the focal length; 2 halves the visible extent.
  double zoom = 1.0;
  /// Unit vector toward the light, in camera coordinates. The default
  /// points back at the camera, i.e. perpendicular to a face-on ear.
  Vec3 light_direction{0.0, 0.0, 1.0};
  int width = 224;
  int height = 224;

  /// Focal length in normalized device units (zoom / tan(fov/2)).
  double focal() const;

  /// Looks at `ear_box` from the matching side of an interaural-aligned head
  /// (x forward, y toward the left ear, z up), choosing the distance so the
  /// box's larger visible extent fills `fill` of the frame.
  static CameraSpec for_ear(Side side, const Box3& ear_box, double fill = 0.8,
                            double fov_y_deg = 30.0, double zoom = 1.0);
};

struct RenderResult {
  cv::Mat image;  // CV_8UC1 shade
  cv::Mat mask;   // CV_8UC1, 255 where any triangle covers the pixel
};

/// Throws EmptyMesh. Left-side renders are mirrored about the vertical axis.
RenderResult render_ear(const TriangleMesh& mesh, const CameraSpec& camera, Side side);

struct BatchRenderOptions {
  std::optional<Box3> left_ear_box;   // defaults to the mesh bounds
  std::optional<Box3> right_ear_box;  // defaults to the mesh bounds
  double fill = 0.8;
  double fov_y_deg = 30.0;
  double zoom = 1.0;
};

struct BatchRenderReport {
  std::size_t images = 0;
  std::vector<std::pair<std::filesystem::path, std::string>> failures;
  std::filesystem::path manifest;
};

/// Renders every *.stl under `mesh_dir` (sorted by name) to
/// <out_dir>/<subject>_L.png and <subject>_R.png plus manifest.csv
/// (subject_id,side,image_path). Per-file failures are collected.
BatchRenderReport batch_render(const std::filesystem::path& mesh_dir,
                               const BatchRenderOptions& options,
                               const std::filesystem::path& out_dir);

}  // namespace hrtf
