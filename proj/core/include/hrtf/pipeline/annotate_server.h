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

// Local HTTP service backing the browser annotation tool.
//
//   GET  /api/images              {"images": [{"id", "file"}]}
//   GET  /api/images/<id>         raw image bytes
//   GET  /api/annotations         {"annotations": [ids]}
//   GET  /api/annotations/<id>    stored document
//   POST /api/annotations         submit {image_id, points, reference_length_cm?}
//
// Anything else is served from the UI asset directory when one is given.

#include <filesystem>
#include <memory>
#include <string>

namespace hrtf::pipeline {

struct AnnotateServerOptions {
  std::filesystem::path images_dir;
  std::filesystem::path annotations_dir;
  std::filesystem::path ui_dir;  // optional static assets
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
};

class AnnotateServer {
 public:
  /// Throws ConfigError when the images directory is missing.
  explicit AnnotateServer(AnnotateServerOptions options);
  ~AnnotateServer();
  AnnotateServer(const AnnotateServer&) = delete;
  AnnotateServer& operator=(const AnnotateServer&) = delete;

  /// Binds the socket and returns the bound port. Throws IoError when the
  /// port is in use.
  int bind();
  /// Serves until stop(). Requires bind().
  void run();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hrtf::pipeline
