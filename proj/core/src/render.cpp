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

#include "hrtf/render.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <opencv2/imgcodecs.hpp>
#include <spdlog/spdlog.h>

#include "hrtf/atomic_file.h"
#include "hrtf/csv.h"
#include "hrtf/errors.h"

namespace hrtf {

namespace fs = std::filesystem;

namespace {

constexpr double kNear = 1e-9;

struct ScreenVertex {
  double u, v;   // pixel coordinates, pixel (i, j) centred at (i + 0.5, j + 0.5)
  double inv_w;  // 1 / depth, interpolates linearly in screen space
};

double edge(const ScreenVertex& a, const ScreenVertex& b, double px, double py) {
  return (b.u - a.u) * (py - a.v) - (b.v - a.v) * (px - a.u);
}

// Tie rule for pixels exactly on an edge, so that two triangles sharing an
// edge never both claim the pixel.
bool owns_edge(const ScreenVertex& a, const ScreenVertex& b) {
  const double dx = b.u - a.u, dy = b.v - a.v;
  return dy > 0.0 || (dy == 0.0 && dx < 0.0);
}

}  // namespace

double CameraSpec::focal() const {
  return zoom / std::tan(fov_y_deg * std::numbers::pi / 360.0);
}

CameraSpec CameraSpec::for_ear(Side side, const Box3& ear_box, double fill, double fov_y_deg,
                               double zoom) {
  if (!(fill > 0.0) || !(fov_y_deg > 0.0 && fov_y_deg < 180.0) || !(zoom > 0.0)) {
    throw InvalidArgument("camera fill, field of view and zoom must be positive");
  }
  CameraSpec cam;
  const Vec3 up{0, 0, 1};
  if (side == Side::right) {
    // Standing on the -y side looking toward +y: the nose (+x) is on the right.
    cam.rotation = Mat3::from_rows({1, 0, 0}, up, {0, -1, 0});
  } else {
    cam.rotation = Mat3::from_rows({-1, 0, 0}, up, {0, 1, 0});
  }
  const Vec3 ext = ear_box.extent();
  cam.target = ear_box.center();
  cam.fov_y_deg = fov_y_deg;
  cam.zoom = zoom;
  const double half_visible = 0.5 * std::max(ext.x, ext.z);
  const double half_depth = 0.5 * ext.y;
  cam.distance = half_depth + half_visible * zoom /
                                  (fill * std::tan(fov_y_deg * std::numbers::pi / 360.0));
  if (!(cam.distance > 0.0)) cam.distance = 1.0;
  return cam;
}

RenderResult render_ear(const TriangleMesh& mesh, const CameraSpec& camera, Side side) {
  if (mesh.empty()) throw EmptyMesh("cannot render an empty mesh");
  if (camera.width <= 0 || camera.height <= 0) throw InvalidArgument("raster size must be positive");
  const int W = camera.width, H = camera.height;
  const double f = camera.focal();
  const Vec3 light = camera.light_direction.normalized();

  std::vector<Vec3> cam_pts(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    cam_pts[i] = camera.rotation * (mesh.vertices[i] - camera.target) - Vec3{0, 0, camera.distance};
  }

  cv::Mat image(H, W, CV_8UC1, cv::Scalar(0));
  cv::Mat mask(H, W, CV_8UC1, cv::Scalar(0));
  std::vector<double> depth(static_cast<std::size_t>(W) * H, 0.0);  // stores 1/w, 0 = far

  for (const auto& tri : mesh.triangles) {
    const Vec3& p0 = cam_pts[tri[0]];
    const Vec3& p1 = cam_pts[tri[1]];
    const Vec3& p2 = cam_pts[tri[2]];
    if (-p0.z <= kNear || -p1.z <= kNear || -p2.z <= kNear) continue;

    const Vec3 n = (p1 - p0).cross(p2 - p0);
    const double n_len = n.norm();
    if (n_len == 0.0) continue;
    const Vec3 normal = n * (1.0 / n_len);
    // Facing the viewer means the normal points toward the camera at origin.
    const bool front = normal.dot(p0 * -1.0) > 0.0;
    const double shade = front ? std::clamp(normal.dot(light), 0.0, 1.0) : 0.0;
    const auto level = static_cast<uchar>(std::lround(255.0 * shade));

    ScreenVertex s[3];
    const Vec3* pts[3] = {&p0, &p1, &p2};
    for (int k = 0; k < 3; ++k) {
      const double w = -pts[k]->z;
      s[k] = {(f * pts[k]->x / w + 1.0) * 0.5 * W, (1.0 - f * pts[k]->y / w) * 0.5 * H, 1.0 / w};
    }
    double area = edge(s[0], s[1], s[2].u, s[2].v);
    if (area == 0.0) continue;
    if (area < 0.0) {
      std::swap(s[1], s[2]);
      area = -area;
    }
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min({s[0].u, s[1].u, s[2].u}) - 0.5)));
    const int x1 = std::min(W - 1, static_cast<int>(std::ceil(std::max({s[0].u, s[1].u, s[2].u}) - 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min({s[0].v, s[1].v, s[2].v}) - 0.5)));
    const int y1 = std::min(H - 1, static_cast<int>(std::ceil(std::max({s[0].v, s[1].v, s[2].v}) - 0.5)));
    const bool own12 = owns_edge(s[1], s[2]);
    const bool own20 = owns_edge(s[2], s[0]);
    const bool own01 = owns_edge(s[0], s[1]);

    for (int y = y0; y <= y1; ++y) {
      const double py = y + 0.5;
      uchar* img_row = image.ptr<uchar>(y);
      uchar* mask_row = mask.ptr<uchar>(y);
      for (int x = x0; x <= x1; ++x) {
        const double px = x + 0.5;
        const double e0 = edge(s[1], s[2], px, py);
        const double e1 = edge(s[2], s[0], px, py);
        const double e2 = edge(s[0], s[1], px, py);
        if (e0 < 0.0 || e1 < 0.0 || e2 < 0.0) continue;
        if ((e0 == 0.0 && !own12) || (e1 == 0.0 && !own20) || (e2 == 0.0 && !own01)) continue;
        const double inv_w = (e0 * s[0].inv_w + e1 * s[1].inv_w + e2 * s[2].inv_w) / area;
        double& z = depth[static_cast<std::size_t>(y) * W + x];
        if (inv_w <= z) continue;
        z = inv_w;
        img_row[x] = level;
        mask_row[x] = 255;
      }
    }
  }

  if (side == Side::left) {
    cv::flip(image, image, 1);
    cv::flip(mask, mask, 1);
  }
  return {image, mask};
}

BatchRenderReport batch_render(const fs::path& mesh_dir, const BatchRenderOptions& options,
                               const fs::path& out_dir) {
  if (!fs::is_directory(mesh_dir)) throw IoError("mesh directory not found: " + mesh_dir.string());
  std::vector<fs::path> meshes;
  for (const auto& entry : fs::directory_iterator(mesh_dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".stl") meshes.push_back(entry.path());
  }
  std::sort(meshes.begin(), meshes.end());

  fs::create_directories(out_dir);
  BatchRenderReport report;
  std::string manifest = "subject_id,side,image_path\n";
  for (const auto& path : meshes) {
    const std::string subject = path.stem().string();
    try {
      const TriangleMesh mesh = parse_stl(path);
      for (Side side : {Side::left, Side::right}) {
        const auto& box_opt = side == Side::left ? options.left_ear_box : options.right_ear_box;
        const Box3 box = box_opt.value_or(mesh.bounds());
        const CameraSpec cam =
            CameraSpec::for_ear(side, box, options.fill, options.fov_y_deg, options.zoom);
        const RenderResult r = render_ear(mesh, cam, side);
        const std::string name = subject + (side == Side::left ? "_L.png" : "_R.png");
        std::vector<uchar> png;
        if (!cv::imencode(".png", r.image, png)) throw IoError("PNG encoding failed");
        write_file_atomic(out_dir / name,
                          std::string_view(reinterpret_cast<const char*>(png.data()), png.size()));
        manifest += csv::join({subject, std::string(to_string(side)), name}) + "\n";
        ++report.images;
      }
    } catch (const Error& e) {
      spdlog::warn("render failed for {}: {}", path.string(), e.what());
      report.failures.emplace_back(path, e.what());
    }
  }
  report.manifest = out_dir / "manifest.csv";
  write_file_atomic(report.manifest, manifest);
  return report;
}

}  // namespace hrtf
