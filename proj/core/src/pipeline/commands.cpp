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

#include "hrtf/pipeline/commands.h"

#include <algorithm>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <spdlog/spdlog.h>

#include "hrtf/atomic_file.h"
#include "hrtf/csv.h"
#include "hrtf/dataset.h"
#include "hrtf/landmark_io.h"
#include "hrtf/net/landmarks.h"
#include "hrtf/net/model_io.h"
#include "hrtf/pipeline/annotation.h"

namespace hrtf::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(const std::exception& e) {
  return dynamic_cast<const ConfigError*>(&e) != nullptr ? kExitConfigError : kExitStageFailure;
}

namespace {

net::Model build_model(const PipelineConfig& config) {
  return config.architecture == "compact" ? net::build_compact_model(config.train.seed)
                                          : net::build_canonical_model(config.train.seed);
}

Corpus load_configured_corpus(const PipelineConfig& config, LoadReport* report) {
  require_dir(config.corpus_images, "corpus.images");
  require_dir(config.corpus_landmarks, "corpus.landmarks");
  return run_stage("dataset", [&] {
    return load_corpus(config.corpus_images, config.corpus_landmarks, report, config.reframe);
  });
}

json vec_json(const std::array<double, kNumDistances>& v) { return json(v); }

ConversionFactors configured_factors(const PipelineConfig& config) {
  if (config.factors.empty()) return load_reference_factors();
  require_file(config.factors, "factors");
  return run_stage("calibration", [&] { return read_factors_csv(config.factors); });
}

}  // namespace

// train ---------------------------------------------------------------------

std::string run_header(const PipelineConfig& config) {
  const auto& t = config.train;
  return fmt::format(
      "architecture={} lr={} beta1={} beta2={} epsilon={} decay={} batch={} epochs={} seed={} "
      "augment={}",
      config.architecture, format_double(t.learning_rate), format_double(t.beta1),
      format_double(t.beta2), format_double(t.epsilon), format_double(t.decay), t.batch_size,
      t.epochs, t.seed, config.train_augment ? "x6" : "off");
}

std::string format_history_csv(const net::TrainHistory& history) {
  std::string out = "epoch,loss,mean_radial_error_px,pck\n";
  for (const auto& e : history.epochs) {
    out += fmt::format("{},{},{},{}\n", e.epoch, format_double(e.loss),
                       format_double(e.mean_radial_error_px), format_double(e.pck));
  }
  return out;
}

fs::path history_path_for(const PipelineConfig& config) {
  if (!config.history.empty()) return config.history;
  fs::path p = config.model;
  p.replace_extension(".history.csv");
  return p;
}

TrainOutcome cmd_train(const PipelineConfig& config, std::ostream& log) {
  if (config.model.empty()) throw ConfigError("model is not set; pass --model <path>");
  Corpus corpus = load_configured_corpus(config, nullptr);
  std::vector<Sample> train = std::move(corpus.train);
  if (train.empty()) throw StageError("dataset", "corpus has no training samples");
  if (config.limit && train.size() > *config.limit) train.resize(*config.limit);
  if (config.train_augment) {
    std::vector<Sample> expanded;
    expanded.reserve(train.size() * 6);
    for (const auto& s : train) {
      for_each_expanded(s, config.augment, [&](Sample&& v) { expanded.push_back(std::move(v)); });
    }
    train = std::move(expanded);
  }

  TrainOutcome out;
  out.samples = train.size();
  out.model_path = config.model;
  out.history_path = history_path_for(config);

  log << run_header(config) << " samples=" << train.size() << "\n";
  net::Model model = run_stage("landmark-net", [&] { return build_model(config); });
  net::SampleSource source(train);
  net::TrainConfig tc = config.train;
  tc.pck_threshold_px = config.pck_threshold_px;

  auto on_epoch = [&](const net::EpochRecord& e) {
    out.history.epochs.push_back(e);
    log << fmt::format("epoch {}/{} loss={} mre_px={:.4f} pck={:.4f}\n", e.epoch, tc.epochs,
                       format_double(e.loss), e.mean_radial_error_px, e.pck)
        << std::flush;
    write_file_atomic(out.history_path, format_history_csv(out.history));
  };

  try {
    net::train(model, source, tc, on_epoch);
  } catch (const net::DivergenceError& e) {
    net::save_model(model, out.model_path);
    throw StageError("landmark-net", e.what());
  }
  run_stage("landmark-net", [&] { net::save_model(model, out.model_path); });
  write_file_atomic(out.history_path, format_history_csv(out.history));
  return out;
}

// match ---------------------------------------------------------------------

json MatchReport::to_json(std::size_t top_k) const {
  json j;
  j["input"] = {{"kind", input_kind}, {"source", input}};
  if (landmarks) {
    json pts = json::array();
    for (const auto& p : landmarks->points()) {
      pts.push_back({{"label", p.label}, {"x", p.x}, {"y", p.y}});
    }
    j["landmarks"] = pts;
  } else {
    j["landmarks"] = nullptr;
  }
  j["px"] = px ? vec_json(px->d) : json(nullptr);
  j["cm"] = vec_json(cm.d);
  if (factors) {
    j["factors"] = {{"values", vec_json(factors->factor)},
                    {"overall_average", factors->overall_average},
                    {"n_ears", factors->n_ears},
                    {"provenance", factors->provenance},
                    {"unvalidated", factors->unvalidated}};
  } else {
    j["factors"] = nullptr;
  }
  if (reference) {
    j["reference"] = {{"a", {reference->point_a.x, reference->point_a.y}},
                      {"b", {reference->point_b.x, reference->point_b.y}},
                      {"length_cm", reference->physical_length_cm}};
  } else {
    j["reference"] = nullptr;
  }
  j["match"] = match_to_json(match, top_k);
  j["hrtf"] = {{"ref", hrtf ? json(*hrtf) : json(nullptr)},
               {"error", hrtf_error.empty() ? json(nullptr) : json(hrtf_error)}};
  return j;
}

std::string MatchReport::to_text(std::size_t top_k) const {
  std::ostringstream os;
  os << "input: " << input_kind << " " << input << "\n";
  auto line = [&](std::string_view name, const std::array<double, kNumDistances>& v) {
    os << name << ":";
    for (double x : v) os << " " << fmt::format("{:.6f}", x);
    os << "\n";
  };
  if (px) line("px", px->d);
  line("cm", cm.d);
  if (factors) {
    line("factors", factors->factor);
    os << "factors provenance: " << factors->provenance
       << (factors->unvalidated ? " (unvalidated)" : "") << "\n";
  }
  os << format_match_report(match, top_k);
  if (!hrtf_error.empty()) os << "hrtf warning: " << hrtf_error << "\n";
  return os.str();
}

MatchReport cmd_match(const MatchRequest& request, const PipelineConfig& config) {
  const int inputs = int{request.image.has_value()} + int{request.landmarks.has_value()} +
                     int{request.vector.has_value()};
  if (inputs != 1) throw ConfigError("match needs exactly one of --image, --landmarks, --vector");
  require_file(config.database, "database");

  MatchReport report;
  std::optional<ReferenceDistance> reference = request.reference;

  if (request.vector) {
    report.input_kind = "vector";
    report.input = "";
    for (double v : request.vector->d) report.input += (report.input.empty() ? "" : ",") + format_double(v);
    if (!request.vector->is_finite()) throw StageError("input", "query vector must be finite");
    report.cm = *request.vector;
  } else {
    LandmarkSet full;
    if (request.image) {
      report.input_kind = "image";
      report.input = request.image->string();
      require_file(config.model, "model");
      if (!fs::is_regular_file(*request.image)) {
        throw ConfigError("image file not found: " + request.image->string());
      }
      cv::Mat image = cv::imread(request.image->string(), cv::IMREAD_COLOR);
      if (image.empty()) throw StageError("input", "cannot decode " + request.image->string());
      if (image.cols != kFrameSize || image.rows != kFrameSize) {
        spdlog::warn("resizing {}x{} input to 224x224", image.cols, image.rows);
        cv::resize(image, image, {kFrameSize, kFrameSize}, 0, 0, cv::INTER_AREA);
      }
      full = run_stage("landmark-net", [&] {
        net::Model model = net::load_model(config.model);
        return net::predict_landmarks(model, image);
      });
    } else {
      report.input_kind = "landmarks";
      report.input = request.landmarks->string();
      require_file(*request.landmarks, "landmarks");
      AnnotationDocument doc = run_stage("input", [&] {
        AnnotationDocument d;
        d.image_id = "query";
        d.points = parse_labeled_points(read_file(*request.landmarks));
        d.reference_length_cm = request.reference_length_cm;
        return d;
      });
      full = run_stage("anthro", [&] { return to_landmark_set(doc); });
      if (!reference) reference = reference_distance(doc);
    }
    run_stage("anthro", [&] {
      report.landmarks = select_relevant(full);
      report.px = measure_distances(*report.landmarks);
    });
    if (reference) {
      const double scale = run_stage("calibration", [&] { return scale_from_reference(*reference); });
      report.factors = ConversionFactors::uniform(scale, "reference-distance");
      report.reference = reference;
    } else {
      report.factors = configured_factors(config);
    }
    report.cm = run_stage("calibration", [&] { return to_centimetres(*report.px, *report.factors); });
  }

  AnthroDatabase db = run_stage("matcher", [&] { return load_database(config.database); });
  report.match = run_stage("matcher", [&] { return best_match(report.cm, db, config.match); });
  try {
    report.hrtf = resolve_hrtf(report.match, db.source_dir());
  } catch (const Error& e) {
    report.hrtf_error = e.what();
  }
  return report;
}

// calibrate -----------------------------------------------------------------

CalibrateOutcome cmd_calibrate(const fs::path& annotations_dir, const fs::path& cm_table,
                               const fs::path& factors_out, const fs::path& records_out) {
  require_dir(annotations_dir, "annotations");
  require_file(cm_table, "cm table");
  if (factors_out.empty()) throw ConfigError("factors output path is not set");

  const auto cm = run_stage("calibration", [&] { return read_cm_table(cm_table); });

  std::set<std::string> ids;
  for (const auto& id : list_annotations(annotations_dir)) ids.insert(id);
  for (const auto& entry : fs::directory_iterator(annotations_dir)) {
    if (entry.is_directory()) ids.insert(entry.path().filename().string());
  }

  CalibrateOutcome out;
  for (const auto& id : ids) {
    auto it = cm.find(id);
    if (it == cm.end()) {
      out.skipped.emplace_back(id, "no row in the cm table");
      continue;
    }
    try {
      const bool has_txt = fs::is_regular_file(annotations_dir / (id + ".txt"));
      AnnotationDocument doc = has_txt ? load_annotation(annotations_dir, id)
                                       : load_annotation_json_dir(annotations_dir, id);
      CalibrationRecord rec{id, it->second, measure_distances(to_landmark_set(doc))};
      per_ear_factors(rec);
      out.records.push_back(std::move(rec));
    } catch (const Error& e) {
      out.skipped.emplace_back(id, e.what());
    }
  }
  for (const auto& [id, v] : cm) {
    if (!ids.count(id)) out.skipped.emplace_back(id, "no annotation");
  }
  for (const auto& [id, why] : out.skipped) spdlog::warn("ear {} skipped: {}", id, why);
  if (out.records.empty()) throw StageError("calibration", "no ear has both annotation and cm row");

  out.factors = run_stage("calibration", [&] { return average_factors(out.records); });
  run_stage("calibration", [&] {
    write_factors_csv(factors_out, out.factors);
    if (!records_out.empty()) write_calibration_csv(records_out, out.records);
  });
  return out;
}

// render / augment / evaluate -----------------------------------------------

BatchRenderReport cmd_render(const PipelineConfig& config, const fs::path& out_dir) {
  require_dir(config.mesh_dir, "mesh_dir");
  if (out_dir.empty()) throw ConfigError("render output directory is not set");
  return run_stage("mesh-render", [&] { return batch_render(config.mesh_dir, config.render, out_dir); });
}

AugmentOutcome cmd_augment(const PipelineConfig& config, const fs::path& out_dir) {
  if (out_dir.empty()) throw ConfigError("augment output directory is not set");
  LoadReport load_report;
  Corpus corpus = load_configured_corpus(config, &load_report);
  AugmentOutcome out;
  out.skipped_inputs = load_report.issues.size();
  std::string manifest = "split,id,image,landmarks\n";
  auto emit = [&](std::string_view split, std::size_t& count) {
    return [&, split](Sample&& s) {
      write_sample(out_dir, split, s);
      manifest += fmt::format("{},{},images/{}/{}.png,landmarks/{}/{}.txt\n", split,
                              csv::escape(s.source_id), split, s.source_id, split, s.source_id);
      ++count;
    };
  };
  run_stage("dataset", [&] {
    for (const auto& s : corpus.train) for_each_expanded(s, config.augment, emit("train", out.train));
    for (const auto& s : corpus.test) for_each_expanded(s, config.augment, emit("test", out.test));
    out.manifest = out_dir / "manifest.csv";
    write_file_atomic(out.manifest, manifest);
  });
  return out;
}

EvaluateOutcome cmd_evaluate(const PipelineConfig& config) {
  require_file(config.model, "model");
  Corpus corpus = load_configured_corpus(config, nullptr);
  EvaluateOutcome out;
  out.split = corpus.test.empty() ? "train" : "test";
  std::vector<Sample>& samples = corpus.test.empty() ? corpus.train : corpus.test;
  if (config.limit && samples.size() > *config.limit) samples.resize(*config.limit);
  net::Model model = run_stage("landmark-net", [&] { return net::load_model(config.model); });
  out.evaluation = run_stage("landmark-net", [&] {
    net::SampleSource source(samples, model.input_shape());
    return net::evaluate(model, source, config.pck_threshold_px, config.train.batch_size);
  });
  return out;
}

}  // namespace hrtf::pipeline
