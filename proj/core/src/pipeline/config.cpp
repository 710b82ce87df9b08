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

#include "hrtf/pipeline/config.h"

#include <cctype>
#include <charconv>
#include <functional>
#include <sstream>

#include "hrtf/atomic_file.h"
#include "hrtf/errors.h"

namespace hrtf::pipeline {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double to_number(std::string_view key, std::string_view value) {
  value = trim(value);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(value) + "'");
  }
  return v;
}

long to_integer(std::string_view key, std::string_view value, long min) {
  value = trim(value);
  long v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size() || v < min) {
    throw ConfigError(std::string(key) + ": expected an integer >= " + std::to_string(min) +
                      ", got '" + std::string(value) + "'");
  }
  return v;
}

bool to_bool(std::string_view key, std::string_view value) {
  value = trim(value);
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(std::string(key) + ": expected true/false, got '" + std::string(value) + "'");
}

std::vector<double> to_list(std::string_view key, std::string_view value, std::size_t n) {
  std::vector<double> out;
  std::string s(value);
  for (auto& c : s)
    if (c == ',') c = ' ';
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(to_number(key, tok));
  if (out.size() != n) {
    throw ConfigError(std::string(key) + ": expected " + std::to_string(n) + " numbers, got " +
                      std::to_string(out.size()));
  }
  return out;
}

Box3 to_box(std::string_view key, std::string_view value) {
  auto v = to_list(key, value, 6);
  Box3 b{{v[0], v[1], v[2]}, {v[3], v[4], v[5]}};
  if (!(b.max.x > b.min.x && b.max.y > b.min.y && b.max.z > b.min.z)) {
    throw ConfigError(std::string(key) + ": box max must exceed min on every axis");
  }
  return b;
}

double positive(std::string_view key, std::string_view value) {
  const double v = to_number(key, value);
  if (!(v > 0.0)) throw ConfigError(std::string(key) + ": must be positive");
  return v;
}

using Setter = std::function<void(PipelineConfig&, std::string_view, std::string_view)>;

struct Entry {
  std::string description;
  Setter set;
};

const std::map<std::string, Entry>& table() {
  static const std::map<std::string, Entry> t = {
      {"corpus.images", {"directory of ear images (train/ and test/ optional)",
                         [](auto& c, auto, auto v) { c.corpus_images = std::string(trim(v)); }}},
      {"corpus.landmarks", {"directory of lm55 .txt / .pts landmark files",
                            [](auto& c, auto, auto v) { c.corpus_landmarks = std::string(trim(v)); }}},
      {"model", {"model container path", [](auto& c, auto, auto v) { c.model = std::string(trim(v)); }}},
      {"history", {"training history CSV path",
                   [](auto& c, auto, auto v) { c.history = std::string(trim(v)); }}},
      {"factors", {"conversion factors CSV (empty: built-in preset)",
                   [](auto& c, auto, auto v) { c.factors = std::string(trim(v)); }}},
      {"database", {"anthropometric database CSV",
                    [](auto& c, auto, auto v) { c.database = std::string(trim(v)); }}},
      {"mesh_dir", {"directory of head meshes (.stl)",
                    [](auto& c, auto, auto v) { c.mesh_dir = std::string(trim(v)); }}},
      {"seed", {"seed for initialization, shuffling and dropout",
                [](auto& c, auto k, auto v) { c.train.seed = to_integer(k, v, 0); }}},
      {"train.learning_rate", {"Adam learning rate",
                               [](auto& c, auto k, auto v) { c.train.learning_rate = to_number(k, v); }}},
      {"train.beta1", {"Adam first-moment decay",
                       [](auto& c, auto k, auto v) { c.train.beta1 = to_number(k, v); }}},
      {"train.beta2", {"Adam second-moment decay",
                       [](auto& c, auto k, auto v) { c.train.beta2 = to_number(k, v); }}},
      {"train.epsilon", {"Adam epsilon",
                         [](auto& c, auto k, auto v) { c.train.epsilon = positive(k, v); }}},
      {"train.decay", {"inverse-time learning-rate decay",
                       [](auto& c, auto k, auto v) { c.train.decay = to_number(k, v); }}},
      {"train.epochs", {"number of epochs",
                        [](auto& c, auto k, auto v) { c.train.epochs = static_cast<int>(to_integer(k, v, 0)); }}},
      {"train.batch_size", {"mini-batch size",
                            [](auto& c, auto k, auto v) { c.train.batch_size = static_cast<int>(to_integer(k, v, 1)); }}},
      {"train.limit", {"use only the first N training samples",
                       [](auto& c, auto k, auto v) { c.limit = static_cast<std::size_t>(to_integer(k, v, 1)); }}},
      {"train.augment", {"train on the sixfold augmented corpus",
                         [](auto& c, auto k, auto v) { c.train_augment = to_bool(k, v); }}},
      {"train.architecture", {"canonical | compact",
                              [](auto& c, auto k, auto v) {
                                auto s = std::string(trim(v));
                                if (s != "canonical" && s != "compact") {
                                  throw ConfigError(std::string(k) + ": expected canonical or compact");
                                }
                                c.architecture = s;
                              }}},
      {"augment.rotation_deg", {"rotation angle of rot_left / rot_right",
                                [](auto& c, auto k, auto v) { c.augment.rotation_deg = to_number(k, v); }}},
      {"reframe.margin", {"ear crop padding as a fraction of the landmark box",
                          [](auto& c, auto k, auto v) {
                            c.reframe.margin = to_number(k, v);
                            if (c.reframe.margin < 0) throw ConfigError(std::string(k) + ": must be >= 0");
                          }}},
      {"render.fov_deg", {"vertical field of view in degrees",
                          [](auto& c, auto k, auto v) { c.render.fov_y_deg = positive(k, v); }}},
      {"render.zoom", {"focal length multiplier",
                       [](auto& c, auto k, auto v) { c.render.zoom = positive(k, v); }}},
      {"render.fill", {"fraction of the frame covered by the ear box",
                       [](auto& c, auto k, auto v) { c.render.fill = positive(k, v); }}},
      {"render.left_ear_box", {"xmin ymin zmin xmax ymax zmax of the left pinna",
                               [](auto& c, auto k, auto v) { c.render.left_ear_box = to_box(k, v); }}},
      {"render.right_ear_box", {"xmin ymin zmin xmax ymax zmax of the right pinna",
                                [](auto& c, auto k, auto v) { c.render.right_ear_box = to_box(k, v); }}},
      {"match.side", {"restrict matches to left | right | any",
                      [](auto& c, auto, auto v) {
                        auto s = trim(v);
                        if (s == "any" || s.empty()) {
                          c.match.side_filter.reset();
                        } else {
                          try {
                            c.match.side_filter = parse_side(s);
                          } catch (const InvalidArgument& e) {
                            throw ConfigError(std::string("match.side: ") + e.what());
                          }
                        }
                      }}},
      {"match.top_k", {"ranking entries in reports",
                       [](auto& c, auto k, auto v) { c.top_k = static_cast<std::size_t>(to_integer(k, v, 1)); }}},
      {"match.weights", {"seven non-negative component weights",
                         [](auto& c, auto k, auto v) {
                           auto w = to_list(k, v, kNumDistances);
                           std::array<double, kNumDistances> a{};
                           for (int j = 0; j < kNumDistances; ++j) {
                             if (!(w[j] >= 0.0)) throw ConfigError(std::string(k) + ": weights must be >= 0");
                             a[j] = w[j];
                           }
                           c.match.weights = a;
                         }}},
      {"eval.pck_px", {"PCK radius in pixels",
                       [](auto& c, auto k, auto v) {
                         c.pck_threshold_px = positive(k, v);
                         c.train.pck_threshold_px = c.pck_threshold_px;
                       }}},
  };
  return t;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    out[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
  }
  return out;
}

void apply_setting(PipelineConfig& config, std::string_view key, std::string_view value) {
  const auto& t = table();
  auto it = t.find(std::string(key));
  if (it == t.end()) throw ConfigError("unknown setting '" + std::string(key) + "'");
  it->second.set(config, key, value);
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError&) {
    throw ConfigError("cannot read config file " + path.string());
  }
  PipelineConfig config;
  for (const auto& [k, v] : parse_key_values(text)) apply_setting(config, k, v);
  return config;
}

const std::map<std::string, std::string>& setting_descriptions() {
  static const std::map<std::string, std::string> d = [] {
    std::map<std::string, std::string> out;
    for (const auto& [k, e] : table()) out[k] = e.description;
    return out;
  }();
  return d;
}

void require_file(const std::filesystem::path& path, std::string_view what) {
  if (path.empty()) {
    throw ConfigError(std::string(what) + " is not set; pass --" + std::string(what) +
                      " or set '" + std::string(what) + " = <path>' in the config file");
  }
  if (!std::filesystem::is_regular_file(path)) {
    throw ConfigError(std::string(what) + " file not found: " + path.string());
  }
}

void require_dir(const std::filesystem::path& path, std::string_view what) {
  if (path.empty()) throw ConfigError(std::string(what) + " is not set");
  if (!std::filesystem::is_directory(path)) {
    throw ConfigError(std::string(what) + " directory not found: " + path.string());
  }
}

}  // namespace hrtf::pipeline
