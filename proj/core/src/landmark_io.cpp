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

#include "hrtf/landmark_io.h"

#include <charconv>
#include <sstream>

#include "hrtf/atomic_file.h"
#include "hrtf/errors.h"

namespace hrtf {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_double(std::string_view s, double& v) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_int(std::string_view s, int& v) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    ++line_no;
    fn(line, line_no);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
}

LandmarkSet to_set(const std::vector<LabeledPoint>& pts, ImageSize size) {
  std::vector<Landmark> lms;
  lms.reserve(pts.size());
  for (const auto& p : pts) {
    int label = 0;
    if (!parse_int(p.label, label)) {
      throw LandmarkFormatError("non-numeric landmark label '" + p.label + "'");
    }
    lms.push_back({p.x, p.y, label});
  }
  return LandmarkSet(std::move(lms), size);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<LabeledPoint> parse_labeled_points(std::string_view text) {
  std::vector<LabeledPoint> out;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    auto tok = split_ws(line);
    if (tok.empty() || tok[0].front() == '#') return;
    LabeledPoint p;
    if (tok.size() != 3 || !parse_double(tok[1], p.x) || !parse_double(tok[2], p.y)) {
      throw LandmarkFormatError("line " + std::to_string(line_no) +
                                ": expected 'label x y'");
    }
    p.label = std::string(tok[0]);
    out.push_back(std::move(p));
  });
  return out;
}

std::string format_labeled_points(const std::vector<LabeledPoint>& points) {
  std::string out;
  for (const auto& p : points) {
    out += p.label;
    out += ' ';
    out += format_double(p.x);
    out += ' ';
    out += format_double(p.y);
    out += '\n';
  }
  return out;
}

LandmarkSet parse_landmarks(std::string_view text, ImageSize size) {
  return to_set(parse_labeled_points(text), size);
}

LandmarkSet read_landmarks(const std::filesystem::path& path, ImageSize size) {
  try {
    return parse_landmarks(read_file(path), size);
  } catch (const LandmarkFormatError& e) {
    throw LandmarkFormatError(path.string() + ": " + e.what());
  }
}

LandmarkSet read_pts(const std::filesystem::path& path, ImageSize size) {
  const std::string text = read_file(path);
  std::vector<Landmark> pts;
  int declared = -1;
  bool in_body = false;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    auto tok = split_ws(line);
    if (tok.empty()) return;
    if (!in_body) {
      if (tok[0] == "n_points:" && tok.size() == 2) parse_int(tok[1], declared);
      if (tok[0] == "{") in_body = true;
      return;
    }
    if (tok[0] == "}") {
      in_body = false;
      return;
    }
    Landmark p;
    if (tok.size() != 2 || !parse_double(tok[0], p.x) || !parse_double(tok[1], p.y)) {
      throw LandmarkFormatError(path.string() + ": line " + std::to_string(line_no) +
                                ": expected 'x y'");
    }
    p.label = static_cast<int>(pts.size());
    pts.push_back(p);
  });
  if (declared >= 0 && declared != static_cast<int>(pts.size())) {
    throw LandmarkFormatError(path.string() + ": n_points " + std::to_string(declared) +
                              " but " + std::to_string(pts.size()) + " points read");
  }
  return LandmarkSet(std::move(pts), size);
}

std::string format_landmarks(const LandmarkSet& set) {
  std::vector<LabeledPoint> pts;
  for (const auto& p : set.points()) pts.push_back({std::to_string(p.label), p.x, p.y});
  return format_labeled_points(pts);
}

void write_landmarks(const std::filesystem::path& path, const LandmarkSet& set) {
  write_file_atomic(path, format_landmarks(set));
}

}  // namespace hrtf
