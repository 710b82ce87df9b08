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

#include "hrtf/dataset.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <spdlog/spdlog.h>

#include "hrtf/atomic_file.h"
#include "hrtf/errors.h"
#include "hrtf/landmark_io.h"

namespace hrtf {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kImageExtensions{".png", ".jpg", ".jpeg", ".bmp"};

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

cv::Mat to_bgr8(const cv::Mat& image) {
  cv::Mat out = image;
  if (out.depth() != CV_8U) {
    cv::Mat tmp;
    out.convertTo(tmp, CV_8U, out.depth() == CV_32F || out.depth() == CV_64F ? 255.0 : 1.0);
    out = tmp;
  }
  if (out.channels() == 1) {
    cv::Mat tmp;
    cv::cvtColor(out, tmp, cv::COLOR_GRAY2BGR);
    out = tmp;
  } else if (out.channels() == 4) {
    cv::Mat tmp;
    cv::cvtColor(out, tmp, cv::COLOR_BGRA2BGR);
    out = tmp;
  } else if (out.channels() != 3) {
    throw InvalidArgument("unsupported channel count " + std::to_string(out.channels()));
  }
  return out;
}

LandmarkSet transform_landmarks(const LandmarkSet& set, const cv::Mat& m, ImageSize size) {
  const double a = m.at<double>(0, 0), b = m.at<double>(0, 1), c = m.at<double>(0, 2);
  const double d = m.at<double>(1, 0), e = m.at<double>(1, 1), f = m.at<double>(1, 2);
  std::vector<Landmark> out;
  out.reserve(set.size());
  for (const auto& p : set.points()) {
    out.push_back({a * p.x + b * p.y + c, d * p.x + e * p.y + f, p.label});
  }
  return LandmarkSet(std::move(out), size);
}

cv::Mat warp(const cv::Mat& image, const cv::Mat& m) {
  cv::Mat out;
  cv::warpAffine(image, out, m, cv::Size(kFrameSize, kFrameSize), cv::INTER_LINEAR,
                 cv::BORDER_CONSTANT, cv::Scalar::all(0));
  return out;
}

struct SplitDirs {
  std::string name;
  fs::path images;
  fs::path landmarks;
};

void load_split(const SplitDirs& dirs, std::vector<Sample>& out, LoadReport& report,
                const ReframeOptions& options) {
  if (!fs::is_directory(dirs.images)) {
    report.issues.push_back({dirs.images, "image directory does not exist"});
    return;
  }
  std::map<std::string, fs::path> images, marks;
  for (const auto& entry : fs::directory_iterator(dirs.images)) {
    if (!entry.is_regular_file()) continue;
    if (kImageExtensions.count(lower(entry.path().extension().string()))) {
      images[entry.path().stem().string()] = entry.path();
    }
  }
  if (fs::is_directory(dirs.landmarks)) {
    for (const auto& entry : fs::directory_iterator(dirs.landmarks)) {
      if (!entry.is_regular_file()) continue;
      const auto ext = lower(entry.path().extension().string());
      if (ext == ".txt" || ext == ".pts") marks[entry.path().stem().string()] = entry.path();
    }
  }
  for (const auto& [stem, path] : marks) {
    if (!images.count(stem)) report.issues.push_back({path, "no matching image"});
  }
  for (const auto& [stem, image_path] : images) {
    auto it = marks.find(stem);
    if (it == marks.end()) {
      report.issues.push_back({image_path, "no matching landmark file"});
      continue;
    }
    try {
      cv::Mat image = cv::imread(image_path.string(), cv::IMREAD_COLOR);
      if (image.empty()) throw IoError("cannot decode image");
      const ImageSize size{image.cols, image.rows};
      LandmarkSet lm = lower(it->second.extension().string()) == ".pts"
                           ? read_pts(it->second, size)
                           : read_landmarks(it->second, size);
      if (!lm.is_complete()) {
        throw IncompleteLandmarkSet("expected 55 landmarks, got " + std::to_string(lm.size()));
      }
      out.push_back(reframe_to_ear(image, lm, options, stem));
      ++report.loaded;
    } catch (const Error& e) {
      report.issues.push_back({it->second, e.what()});
    } catch (const cv::Exception& e) {
      report.issues.push_back({image_path, e.what()});
    }
  }
}

}  // namespace

std::string_view to_string(AugmentKind kind) {
  switch (kind) {
    case AugmentKind::flip: return "flip";
    case AugmentKind::rot_left: return "rot_left";
    case AugmentKind::rot_right: return "rot_right";
    case AugmentKind::flip_rot_left: return "flip_rot_left";
    case AugmentKind::flip_rot_right: return "flip_rot_right";
  }
  return "?";
}

AugmentKind parse_augment_kind(std::string_view text) {
  for (auto k : kAllAugmentations) {
    if (to_string(k) == text) return k;
  }
  throw InvalidArgument("unknown augmentation '" + std::string(text) + "'");
}

std::string_view suffix(AugmentKind kind) {
  switch (kind) {
    case AugmentKind::flip: return "_f";
    case AugmentKind::rot_left: return "_rl";
    case AugmentKind::rot_right: return "_rr";
    case AugmentKind::flip_rot_left: return "_frl";
    case AugmentKind::flip_rot_right: return "_frr";
  }
  return "";
}

cv::Mat augment_matrix(AugmentKind kind, const AugmentOptions& options, ImageSize size) {
  const double cx = (size.width - 1) / 2.0;
  const double cy = (size.height - 1) / 2.0;
  // Mirror about the vertical axis: x -> width - 1 - x.
  cv::Matx33d flip(-1, 0, size.width - 1.0, 0, 1, 0, 0, 0, 1);
  auto rotation = [&](double deg) {
    // Positive angles turn the picture counter-clockwise as displayed.
    const double t = deg * std::numbers::pi / 180.0;
    const double c = std::cos(t), s = std::sin(t);
    return cv::Matx33d(c, s, (1 - c) * cx - s * cy, -s, c, s * cx + (1 - c) * cy, 0, 0, 1);
  };
  cv::Matx33d m;
  switch (kind) {
    case AugmentKind::flip: m = flip; break;
    case AugmentKind::rot_left: m = rotation(options.rotation_deg); break;
    case AugmentKind::rot_right: m = rotation(-options.rotation_deg); break;
    case AugmentKind::flip_rot_left: m = rotation(options.rotation_deg) * flip; break;
    case AugmentKind::flip_rot_right: m = rotation(-options.rotation_deg) * flip; break;
    default: throw InvalidArgument("unknown augmentation kind");
  }
  cv::Mat out(2, 3, CV_64F);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) out.at<double>(r, c) = m(r, c);
  return out;
}

Corpus load_corpus(const fs::path& image_dir, const fs::path& landmark_dir,
                   LoadReport* report, const ReframeOptions& options) {
  LoadReport local;
  LoadReport& rep = report ? *report : local;
  Corpus corpus;
  const bool split = fs::is_directory(image_dir / "train") || fs::is_directory(image_dir / "test");
  if (split) {
    load_split({"train", image_dir / "train", landmark_dir / "train"}, corpus.train, rep, options);
    load_split({"test", image_dir / "test", landmark_dir / "test"}, corpus.test, rep, options);
  } else {
    load_split({"train", image_dir, landmark_dir}, corpus.train, rep, options);
  }
  std::set<std::string> train_ids;
  for (const auto& s : corpus.train) train_ids.insert(s.source_id);
  std::erase_if(corpus.test, [&](const Sample& s) {
    if (!train_ids.count(s.source_id)) return false;
    rep.issues.push_back({s.source_id, "appears in both train and test; dropped from test"});
    return true;
  });
  for (const auto& issue : rep.issues) {
    spdlog::warn("skipped {}: {}", issue.path.string(), issue.message);
  }
  if (corpus.train.empty() && corpus.test.empty()) {
    throw EmptyCorpus("no image/landmark pairs found under " + image_dir.string());
  }
  return corpus;
}

Sample reframe_to_ear(const cv::Mat& image, const LandmarkSet& landmarks,
                      const ReframeOptions& options, std::string source_id) {
  if (image.empty()) throw ReframeError("empty source image");
  if (landmarks.size() < 2) throw ReframeError("need at least two landmarks to frame the ear");
  if (!(options.margin >= 0.0)) throw InvalidArgument("reframe margin must be non-negative");
  double x_min = INFINITY, y_min = INFINITY, x_max = -INFINITY, y_max = -INFINITY;
  for (const auto& p : landmarks.points()) {
    x_min = std::min(x_min, p.x);
    x_max = std::max(x_max, p.x);
    y_min = std::min(y_min, p.y);
    y_max = std::max(y_max, p.y);
  }
  const double w = x_max - x_min;
  const double h = y_max - y_min;
  if (!(w > 0.0) || !(h > 0.0)) throw ReframeError("landmark bounding box has zero area");
  if (!landmarks.out_of_frame_labels().empty()) {
    spdlog::warn("{}: landmarks outside the source image", source_id);
  }

  const double x0 = x_min - options.margin * w;
  const double y0 = y_min - options.margin * h;
  const double box_w = w * (1.0 + 2.0 * options.margin);
  const double box_h = h * (1.0 + 2.0 * options.margin);
  const double sx = kFrameSize / box_w;
  const double sy = kFrameSize / box_h;
  cv::Mat m = (cv::Mat_<double>(2, 3) << sx, 0, -x0 * sx, 0, sy, -y0 * sy);

  Sample s;
  s.image = warp(to_bgr8(image), m);
  s.landmarks = transform_landmarks(landmarks, m, {kFrameSize, kFrameSize});
  s.source_id = std::move(source_id);
  return s;
}

Sample augment(const Sample& sample, AugmentKind kind, const AugmentOptions& options) {
  if (sample.image.cols != kFrameSize || sample.image.rows != kFrameSize) {
    throw SizeMismatch("augmentation expects a 224x224 sample");
  }
  const cv::Mat m = augment_matrix(kind, options);
  Sample out;
  if (kind == AugmentKind::flip) {
    cv::flip(sample.image, out.image, 1);
  } else {
    out.image = warp(sample.image, m);
  }
  out.landmarks = transform_landmarks(sample.landmarks, m, {kFrameSize, kFrameSize});
  out.source_id = sample.source_id + std::string(suffix(kind));
  return out;
}

void for_each_expanded(const Sample& sample, const AugmentOptions& options,
                       const std::function<void(Sample&&)>& sink) {
  sink(Sample{sample.image, sample.landmarks, sample.source_id});
  for (auto kind : kAllAugmentations) sink(augment(sample, kind, options));
}

Corpus expand_corpus(const Corpus& corpus, const AugmentOptions& options) {
  Corpus out;
  out.train.reserve(corpus.train.size() * 6);
  out.test.reserve(corpus.test.size() * 6);
  for (const auto& s : corpus.train) {
    for_each_expanded(s, options, [&](Sample&& v) { out.train.push_back(std::move(v)); });
  }
  for (const auto& s : corpus.test) {
    for_each_expanded(s, options, [&](Sample&& v) { out.test.push_back(std::move(v)); });
  }
  return out;
}

void write_sample(const fs::path& root, std::string_view split, const Sample& s) {
  std::vector<uchar> png;
  if (!cv::imencode(".png", s.image, png)) throw IoError("PNG encoding failed for " + s.source_id);
  write_file_atomic(root / "images" / split / (s.source_id + ".png"),
                    std::string_view(reinterpret_cast<const char*>(png.data()), png.size()));
  write_landmarks(root / "landmarks" / split / (s.source_id + ".txt"), s.landmarks);
}

}  // namespace hrtf
