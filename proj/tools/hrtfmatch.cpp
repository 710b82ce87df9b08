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

// hrtfmatch: command-line front end for the individualization pipeline.

#include <csignal>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "hrtf/atomic_file.h"
#include "hrtf/errors.h"
#include "hrtf/landmark_io.h"
#include "hrtf/pipeline/annotate_server.h"
#include "hrtf/pipeline/commands.h"
#include "hrtf/pipeline/config.h"

namespace {

using namespace hrtf;
using namespace hrtf::pipeline;

pipeline::AnnotateServer* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

std::vector<double> parse_numbers(const std::string& text, std::size_t n, const char* what) {
  std::vector<double> out;
  std::string s = text;
  for (auto& c : s)
    if (c == ',') c = ' ';
  std::istringstream in(s);
  double v = 0;
  while (in >> v) out.push_back(v);
  if (!in.eof() || out.size() != n) {
    throw ConfigError(fmt::format("{} expects {} comma-separated numbers", what, n));
  }
  return out;
}

struct Globals {
  std::string config_file;
  std::vector<std::string> settings;
  std::map<std::string, std::string> flags;  // key -> value from dedicated options
  bool verbose = false;
};

PipelineConfig resolve(const Globals& g) {
  PipelineConfig config = g.config_file.empty() ? PipelineConfig{} : load_config(g.config_file);
  for (const auto& s : g.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
  }
  for (const auto& [k, v] : g.flags) apply_setting(config, k, v);
  return config;
}

/// Adds "--<flag>" as an alias for config key `key`.
void alias(CLI::App* app, Globals& g, const std::string& flag, const std::string& key,
           const std::string& help) {
  app->add_option_function<std::string>(
      "--" + flag, [&g, key](const std::string& v) { g.flags[key] = v; }, help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HRTF individualization from ear images"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("-c,--config", g.config_file, "key = value configuration file");
  app.add_option("--set", g.settings, "override a configuration key (key=value)");
  app.add_flag("-v,--verbose", g.verbose, "debug logging");
  app.add_flag_callback(
      "--list-settings",
      [] {
        for (const auto& [k, d] : setting_descriptions()) std::cout << fmt::format("{:<24} {}\n", k, d);
        throw CLI::Success();
      },
      "print every configuration key");

  // train
  auto* train = app.add_subcommand("train", "train the landmark network");
  alias(train, g, "images", "corpus.images", "image directory");
  alias(train, g, "landmarks", "corpus.landmarks", "landmark directory");
  alias(train, g, "model", "model", "output model path");
  alias(train, g, "history", "history", "history CSV path");
  alias(train, g, "epochs", "train.epochs", "epochs");
  alias(train, g, "batch-size", "train.batch_size", "batch size");
  alias(train, g, "lr", "train.learning_rate", "learning rate");
  alias(train, g, "limit", "train.limit", "use the first N training samples");
  alias(train, g, "seed", "seed", "random seed");
  alias(train, g, "architecture", "train.architecture", "canonical | compact");
  train->add_flag_callback("--augment", [&g] { g.flags["train.augment"] = "true"; },
                           "train on the sixfold augmented corpus");

  // match
  auto* match = app.add_subcommand("match", "find the closest database ear");
  MatchRequest request;
  std::string image, landmarks, vector, ref_points;
  double ref_length = 0;
  std::string json_out;
  match->add_option("--image", image, "framed ear image");
  match->add_option("--landmarks", landmarks, "label x y landmark file");
  match->add_option("--vector", vector, "seven comma-separated centimetre values");
  match->add_option("--ref-points", ref_points, "ax,ay,bx,by of a reference segment");
  match->add_option("--ref-length", ref_length, "reference segment length in cm");
  match->add_option("--json", json_out, "write the JSON report here ('-' for stdout)");
  alias(match, g, "model", "model", "model path");
  alias(match, g, "factors", "factors", "conversion factors CSV");
  alias(match, g, "database", "database", "anthropometric database CSV");
  alias(match, g, "side", "match.side", "left | right | any");
  alias(match, g, "top-k", "match.top_k", "ranking entries to report");
  alias(match, g, "weights", "match.weights", "seven component weights");

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "derive conversion factors");
  std::string annotations_dir, cm_table, factors_out, records_out;
  calibrate->add_option("--annotations", annotations_dir, "annotation directory")->required();
  calibrate->add_option("--cm-table", cm_table, "CSV with ear_id,d1_cm..d7_cm")->required();
  calibrate->add_option("--out", factors_out, "factors CSV to write")->required();
  calibrate->add_option("--records", records_out, "optional per-ear calibration CSV");

  // render
  auto* render = app.add_subcommand("render", "render ear images from head meshes");
  std::string render_out;
  alias(render, g, "meshes", "mesh_dir", "directory of .stl meshes");
  alias(render, g, "fov", "render.fov_deg", "vertical field of view");
  alias(render, g, "zoom", "render.zoom", "focal multiplier");
  render->add_option("--out", render_out, "output directory")->required();

  // augment
  auto* augment = app.add_subcommand("augment", "write the sixfold augmented corpus");
  std::string augment_out;
  alias(augment, g, "images", "corpus.images", "image directory");
  alias(augment, g, "landmarks", "corpus.landmarks", "landmark directory");
  alias(augment, g, "rotation", "augment.rotation_deg", "rotation angle in degrees");
  augment->add_option("--out", augment_out, "output directory")->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "score a model on the corpus");
  alias(evaluate, g, "images", "corpus.images", "image directory");
  alias(evaluate, g, "landmarks", "corpus.landmarks", "landmark directory");
  alias(evaluate, g, "model", "model", "model path");
  alias(evaluate, g, "pck", "eval.pck_px", "PCK radius in pixels");
  alias(evaluate, g, "limit", "train.limit", "evaluate the first N samples");

  // annotate-serve
  auto* serve = app.add_subcommand("annotate-serve", "serve the annotation tool locally");
  AnnotateServerOptions serve_options;
  std::string serve_images, serve_annotations, serve_ui;
  serve->add_option("--images", serve_images, "image directory")->required();
  serve->add_option("--annotations", serve_annotations, "where submissions are stored");
  serve->add_option("--ui", serve_ui, "static UI asset directory");
  serve->add_option("--host", serve_options.host, "bind address")->capture_default_str();
  serve->add_option("--port", serve_options.port, "port (0 picks a free one)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfigError;
  }
  spdlog::set_level(g.verbose ? spdlog::level::debug : spdlog::level::warn);

  try {
    const PipelineConfig config = resolve(g);

    if (*train) {
      auto out = cmd_train(config, std::cout);
      std::cout << "model: " << out.model_path.string() << "\nhistory: " << out.history_path.string()
                << "\n";
    } else if (*match) {
      if (!image.empty()) request.image = image;
      if (!landmarks.empty()) request.landmarks = landmarks;
      if (!vector.empty()) {
        auto v = parse_numbers(vector, kNumDistances, "--vector");
        AnthroVector a;
        std::copy(v.begin(), v.end(), a.d.begin());
        request.vector = a;
      }
      if (ref_length != 0) request.reference_length_cm = ref_length;
      if (!ref_points.empty()) {
        auto p = parse_numbers(ref_points, 4, "--ref-points");
        if (!(ref_length > 0)) throw ConfigError("--ref-points needs a positive --ref-length");
        request.reference = ReferenceDistance{{p[0], p[1], 0}, {p[2], p[3], 0}, ref_length};
      }
      auto report = cmd_match(request, config);
      const std::string doc =
          json_out.empty() ? std::string() : report.to_json(config.top_k).dump(2) + "\n";
      if (json_out == "-") {
        std::cout << doc;
      } else {
        std::cout << report.to_text(config.top_k);
        if (!json_out.empty()) write_file_atomic(json_out, doc);
      }
    } else if (*calibrate) {
      auto out = cmd_calibrate(annotations_dir, cm_table, factors_out, records_out);
      std::cout << format_factors_csv(out.factors);
      std::cout << fmt::format("ears used: {}, skipped: {}\n", out.records.size(), out.skipped.size());
      for (const auto& [id, why] : out.skipped) std::cout << "  skipped " << id << ": " << why << "\n";
    } else if (*render) {
      auto out = cmd_render(config, render_out);
      std::cout << fmt::format("rendered {} images, {} failures\nmanifest: {}\n", out.images,
                               out.failures.size(), out.manifest.string());
      for (const auto& [p, why] : out.failures) std::cout << "  failed " << p.string() << ": " << why << "\n";
      if (!out.failures.empty()) return kExitStageFailure;
    } else if (*augment) {
      auto out = cmd_augment(config, augment_out);
      std::cout << fmt::format("train {} test {} (skipped inputs: {})\nmanifest: {}\n", out.train,
                               out.test, out.skipped_inputs, out.manifest.string());
    } else if (*evaluate) {
      auto out = cmd_evaluate(config);
      const auto& e = out.evaluation;
      std::cout << fmt::format("split={} samples={} loss={} mre_px={:.4f} pck@{}px={:.4f}\n", out.split,
                               e.samples, format_double(e.loss), e.mean_radial_error_px,
                               format_double(config.pck_threshold_px), e.pck);
    } else if (*serve) {
      serve_options.images_dir = serve_images;
      serve_options.annotations_dir = serve_annotations;
      serve_options.ui_dir = serve_ui;
      AnnotateServer server(serve_options);
      const int port = server.bind();
      std::cout << fmt::format("serving http://{}:{}/\n", serve_options.host, port) << std::flush;
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      server.run();
      g_server = nullptr;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitOk;
}
