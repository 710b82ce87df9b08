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

#include "hrtf/pipeline/annotate_server.h"

#include <algorithm>
#include <map>
#include <mutex>

#include <sys/socket.h>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "hrtf/atomic_file.h"
#include "hrtf/errors.h"
#include "hrtf/pipeline/annotation.h"

namespace hrtf::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kImageExtensions[] = {".png", ".jpg", ".jpeg", ".bmp"};

bool is_image(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return std::find(std::begin(kImageExtensions), std::end(kImageExtensions), ext) !=
         std::end(kImageExtensions);
}

std::string content_type(const fs::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".png") return "image/png";
  if (ext == ".bmp") return "image/bmp";
  return "image/jpeg";
}

const char* kFallbackPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>hrtfmatch annotate</title></head>
<body><h1>hrtfmatch annotation service</h1>
<p>No UI directory configured. The JSON API lives under /api.</p></body></html>
)";

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(2), "application/json");
}

}  // namespace

struct AnnotateServer::Impl {
  AnnotateServerOptions options;
  httplib::Server server;
  int port = -1;

  std::mutex locks_mutex;
  std::map<std::string, std::shared_ptr<std::mutex>> file_locks;

  std::shared_ptr<std::mutex> lock_for(const std::string& id) {
    std::lock_guard<std::mutex> g(locks_mutex);
    auto& m = file_locks[id];
    if (!m) m = std::make_shared<std::mutex>();
    return m;
  }

  std::map<std::string, fs::path> images() const {
    std::map<std::string, fs::path> out;
    for (const auto& entry : fs::directory_iterator(options.images_dir)) {
      if (entry.is_regular_file() && is_image(entry.path())) {
        out.emplace(entry.path().stem().string(), entry.path());
      }
    }
    return out;
  }

  void routes() {
    server.Get("/api/images", [this](const httplib::Request&, httplib::Response& res) {
      json list = json::array();
      for (const auto& [id, path] : images()) {
        list.push_back({{"id", id}, {"file", path.filename().string()}});
      }
      send_json(res, 200, {{"images", list}});
    });

    server.Get(R"(/api/images/([^/]+))", [this](const httplib::Request& req,
                                                 httplib::Response& res) {
      const auto all = images();
      auto it = all.find(req.matches[1].str());
      if (it == all.end()) {
        send_json(res, 404, {{"error", "unknown image"}});
        return;
      }
      res.set_content(read_file(it->second), content_type(it->second));
    });

    server.Get("/api/annotations", [this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, {{"annotations", list_annotations(options.annotations_dir)}});
    });

    server.Get(R"(/api/annotations/([^/]+))", [this](const httplib::Request& req,
                                                      httplib::Response& res) {
      const std::string id = req.matches[1].str();
      auto lock = lock_for(id);
      std::lock_guard<std::mutex> g(*lock);
      try {
        send_json(res, 200, annotation_to_json(load_annotation(options.annotations_dir, id)));
      } catch (const NotFound& e) {
        send_json(res, 404, {{"error", e.what()}});
      }
    });

    server.Post("/api/annotations", [this](const httplib::Request& req,
                                           httplib::Response& res) {
      json body;
      try {
        body = json::parse(req.body);
      } catch (const json::parse_error& e) {
        send_json(res, 400, {{"error", "malformed JSON"}, {"detail", e.what()}});
        return;
      }
      AnnotationDocument doc;
      try {
        doc = annotation_from_json(body);
      } catch (const InvalidArgument&) {
        AnnotationDocument partial;
        std::vector<std::string> details;
        try {
          if (body.is_object() && body.contains("image_id") && body["image_id"].is_string()) {
            partial.image_id = body["image_id"].get<std::string>();
          }
          if (body.is_object() && body.contains("points") && body["points"].is_array()) {
            for (const auto& p : body["points"]) {
              LabeledPoint lp;
              if (!p.is_object() || !p.contains("label")) continue;
              lp.label = p["label"].is_string() ? p["label"].get<std::string>()
                                                : p["label"].dump();
              if (p.contains("x") && p["x"].is_number()) lp.x = p["x"].get<double>();
              if (p.contains("y") && p["y"].is_number()) lp.y = p["y"].get<double>();
              partial.points.push_back(lp);
            }
          }
          details = validate_annotation(partial);
        } catch (const json::exception&) {
        }
        if (details.empty()) details.push_back("payload does not match {image_id, points: [{label, x, y}]}");
        send_json(res, 422, {{"error", "validation failed"}, {"details", details}});
        return;
      }
      if (!images().contains(doc.image_id)) {
        send_json(res, 404, {{"error", "unknown image"}, {"image_id", doc.image_id}});
        return;
      }
      auto lock = lock_for(doc.image_id);
      std::lock_guard<std::mutex> g(*lock);
      try {
        save_annotation(options.annotations_dir, doc);
      } catch (const Error& e) {
        send_json(res, 500, {{"error", e.what()}});
        return;
      }
      spdlog::info("stored {} points for {}", doc.points.size(), doc.image_id);
      send_json(res, 201, {{"image_id", doc.image_id},
                           {"points", doc.points.size()},
                           {"file", (options.annotations_dir / (doc.image_id + ".txt")).string()}});
    });

    if (!options.ui_dir.empty()) {
      server.set_mount_point("/", options.ui_dir.string());
    } else {
      server.Get("/", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(kFallbackPage, "text/html");
      });
    }
  }
};

AnnotateServer::AnnotateServer(AnnotateServerOptions options) : impl_(std::make_unique<Impl>()) {
  if (!fs::is_directory(options.images_dir)) {
    throw ConfigError("images directory not found: " + options.images_dir.string());
  }
  if (options.annotations_dir.empty()) options.annotations_dir = options.images_dir / "annotations";
  std::error_code ec;
  fs::create_directories(options.annotations_dir, ec);
  if (ec) throw ConfigError("cannot create " + options.annotations_dir.string());
  if (!options.ui_dir.empty() && !fs::is_directory(options.ui_dir)) {
    throw ConfigError("UI directory not found: " + options.ui_dir.string());
  }
  impl_->options = std::move(options);
  // Plain SO_REUSEADDR: a second server on a busy port must fail to bind.
  impl_->server.set_socket_options([](int sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  impl_->routes();
}

AnnotateServer::~AnnotateServer() { stop(); }

int AnnotateServer::bind() {
  const auto& o = impl_->options;
  if (o.port == 0) {
    impl_->port = impl_->server.bind_to_any_port(o.host);
  } else {
    impl_->port = impl_->server.bind_to_port(o.host, o.port) ? o.port : -1;
  }
  if (impl_->port < 0) {
    throw IoError("cannot bind " + o.host + ":" + std::to_string(o.port) +
                  " (port in use?)");
  }
  return impl_->port;
}

void AnnotateServer::run() {
  if (impl_->port < 0) throw InvalidArgument("bind() must succeed before run()");
  impl_->server.listen_after_bind();
}

void AnnotateServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

bool AnnotateServer::running() const { return impl_->server.is_running(); }

}  // namespace hrtf::pipeline
