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

#include "hrtf/pipeline/annotation.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

#include "hrtf/atomic_file.h"
#include "hrtf/errors.h"

namespace hrtf::pipeline {

namespace fs = std::filesystem;

namespace {

std::optional<int> numeric_label(std::string_view label) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(label.data(), label.data() + label.size(), v);
  if (label.empty() || ec != std::errc() || ptr != label.data() + label.size()) return std::nullopt;
  return v;
}

bool safe_id(std::string_view id) {
  if (id.empty() || id.size() > 200 || id == "." || id == "..") return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

fs::path meta_path(const fs::path& dir, std::string_view id) {
  return dir / (std::string(id) + ".meta.json");
}

}  // namespace

std::vector<std::string> validate_annotation(const AnnotationDocument& doc) {
  std::vector<std::string> problems;
  if (!safe_id(doc.image_id)) {
    problems.push_back("image_id must be non-empty and use only letters, digits, '_', '-', '.'");
  }
  if (doc.points.empty()) problems.push_back("no points submitted");
  std::set<std::string> seen;
  bool ref_a = false;
  bool ref_b = false;
  for (const auto& p : doc.points) {
    if (!seen.insert(p.label).second) problems.push_back("duplicate label " + p.label);
    if (p.label == kRefA) {
      ref_a = true;
    } else if (p.label == kRefB) {
      ref_b = true;
    } else if (auto n = numeric_label(p.label); !n || *n < 0 || *n >= kNumLandmarks) {
      problems.push_back("label '" + p.label + "' is neither 0..54 nor REF_A/REF_B");
    }
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      problems.push_back("label " + p.label + " has a non-finite coordinate");
    } else if (p.x < 0 || p.y < 0 || p.x > kFrameSize || p.y > kFrameSize) {
      problems.push_back("label " + p.label + " lies outside the 224x224 frame");
    }
  }
  if (ref_a != ref_b) problems.push_back("REF_A and REF_B must be submitted together");
  if (doc.reference_length_cm) {
    if (!(std::isfinite(*doc.reference_length_cm) && *doc.reference_length_cm > 0)) {
      problems.push_back("reference_length_cm must be positive");
    }
    if (!ref_a) problems.push_back("reference_length_cm given without REF_A/REF_B");
  }
  return problems;
}

AnnotationDocument annotation_from_json(const nlohmann::json& j) {
  AnnotationDocument doc;
  std::vector<std::string> problems;
  if (!j.is_object()) throw InvalidArgument("annotation must be a JSON object");
  if (j.contains("image_id") && j["image_id"].is_string()) {
    doc.image_id = j["image_id"].get<std::string>();
  } else {
    problems.push_back("image_id must be a string");
  }
  if (!j.contains("points") || !j["points"].is_array()) {
    problems.push_back("points must be an array");
  } else {
    for (const auto& p : j["points"]) {
      LabeledPoint lp;
      if (!p.is_object() || !p.contains("label") || !p.contains("x") || !p.contains("y")) {
        problems.push_back("each point needs label, x and y");
        continue;
      }
      const auto& label = p["label"];
      if (label.is_number_integer()) {
        lp.label = std::to_string(label.get<long long>());
      } else if (label.is_string()) {
        lp.label = label.get<std::string>();
      } else {
        problems.push_back("label must be an integer or a string");
        continue;
      }
      if (!p["x"].is_number() || !p["y"].is_number()) {
        problems.push_back("label " + lp.label + ": x and y must be numbers");
        continue;
      }
      lp.x = p["x"].get<double>();
      lp.y = p["y"].get<double>();
      doc.points.push_back(std::move(lp));
    }
  }
  if (j.contains("reference_length_cm") && !j["reference_length_cm"].is_null()) {
    if (j["reference_length_cm"].is_number()) {
      doc.reference_length_cm = j["reference_length_cm"].get<double>();
    } else {
      problems.push_back("reference_length_cm must be a number");
    }
  }
  if (problems.empty()) problems = validate_annotation(doc);
  if (!problems.empty()) {
    std::string msg = "invalid annotation:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw InvalidArgument(msg);
  }
  return doc;
}

nlohmann::json annotation_to_json(const AnnotationDocument& doc) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : doc.points) {
    points.push_back({{"label", p.label}, {"x", p.x}, {"y", p.y}});
  }
  nlohmann::json j{{"image_id", doc.image_id}, {"points", points}};
  j["reference_length_cm"] =
      doc.reference_length_cm ? nlohmann::json(*doc.reference_length_cm) : nlohmann::json(nullptr);
  return j;
}

void save_annotation(const fs::path& dir, const AnnotationDocument& doc) {
  if (auto problems = validate_annotation(doc); !problems.empty()) {
    std::string msg = "invalid annotation:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw InvalidArgument(msg);
  }
  const fs::path point_dir = dir / doc.image_id;
  std::error_code ec;
  fs::create_directories(point_dir, ec);
  if (ec) throw IoError("cannot create " + point_dir.string() + ": " + ec.message());
  for (const auto& entry : fs::directory_iterator(point_dir)) {
    if (entry.path().extension() == ".json") fs::remove(entry.path(), ec);
  }
  for (const auto& p : doc.points) {
    nlohmann::json j{{"label", p.label}, {"x", p.x}, {"y", p.y}, {"image_id", doc.image_id}};
    write_file_atomic(point_dir / (p.label + ".json"), j.dump(2) + "\n");
  }
  if (doc.reference_length_cm) {
    nlohmann::json meta{{"image_id", doc.image_id},
                        {"reference_length_cm", *doc.reference_length_cm}};
    write_file_atomic(meta_path(dir, doc.image_id), meta.dump(2) + "\n");
  } else {
    fs::remove(meta_path(dir, doc.image_id), ec);
  }
  write_file_atomic(dir / (doc.image_id + ".txt"), format_labeled_points(doc.points));
}

AnnotationDocument load_annotation(const fs::path& dir, std::string_view image_id) {
  const fs::path txt = dir / (std::string(image_id) + ".txt");
  if (!fs::is_regular_file(txt)) {
    throw NotFound("no annotation for '" + std::string(image_id) + "'");
  }
  AnnotationDocument doc;
  doc.image_id = std::string(image_id);
  doc.points = parse_labeled_points(read_file(txt));
  const fs::path meta = meta_path(dir, image_id);
  if (fs::is_regular_file(meta)) {
    try {
      auto j = nlohmann::json::parse(read_file(meta));
      doc.reference_length_cm = j.at("reference_length_cm").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw LandmarkFormatError(meta.string() + ": " + e.what());
    }
  }
  return doc;
}

AnnotationDocument load_annotation_json_dir(const fs::path& dir, std::string_view image_id) {
  const fs::path point_dir = dir / std::string(image_id);
  if (!fs::is_directory(point_dir)) {
    throw NotFound("no annotation directory for '" + std::string(image_id) + "'");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(point_dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  AnnotationDocument doc;
  doc.image_id = std::string(image_id);
  for (const auto& f : files) {
    try {
      auto j = nlohmann::json::parse(read_file(f));
      doc.points.push_back({j.at("label").get<std::string>(), j.at("x").get<double>(),
                            j.at("y").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw LandmarkFormatError(f.string() + ": " + e.what());
    }
  }
  if (fs::is_regular_file(meta_path(dir, image_id))) {
    doc.reference_length_cm = load_annotation(dir, image_id).reference_length_cm;
  }
  return doc;
}

std::vector<std::string> list_annotations(const fs::path& dir) {
  std::vector<std::string> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      out.push_back(entry.path().stem().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

LandmarkSet to_landmark_set(const AnnotationDocument& doc) {
  std::vector<Landmark> pts;
  for (const auto& p : doc.points) {
    if (auto n = numeric_label(p.label)) pts.push_back({p.x, p.y, *n});
  }
  return LandmarkSet(std::move(pts));
}

std::optional<ReferenceDistance> reference_distance(const AnnotationDocument& doc) {
  if (!doc.reference_length_cm) return std::nullopt;
  const LabeledPoint* a = nullptr;
  const LabeledPoint* b = nullptr;
  for (const auto& p : doc.points) {
    if (p.label == kRefA) a = &p;
    if (p.label == kRefB) b = &p;
  }
  if (a == nullptr || b == nullptr) return std::nullopt;
  return ReferenceDistance{{a->x, a->y, 0}, {b->x, b->y, 0}, *doc.reference_length_cm};
}

}  // namespace hrtf::pipeline
