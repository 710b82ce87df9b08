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

// Acceptance suite: one PASS/FAIL line per primary criterion. Exit status is
// the number of failing criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <spdlog/spdlog.h>

#include "hrtf/anthro.h"
#include "hrtf/atomic_file.h"
#include "hrtf/calibration.h"
#include "hrtf/dataset.h"
#include "hrtf/landmark_io.h"
#include "hrtf/matcher.h"
#include "hrtf/mesh.h"
#include "hrtf/net/landmarks.h"
#include "hrtf/net/model.h"
#include "hrtf/net/model_io.h"
#include "hrtf/net/train.h"
#include "hrtf/pipeline/commands.h"
#include "hrtf/render.h"
#include "support.h"

namespace {

using namespace hrtf;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome check(bool ok, std::string detail) { return {ok, std::move(detail)}; }

// ---------------------------------------------------------------------------

Outcome parameter_counts() {
  net::Model m = net::build_canonical_model(0);
  const auto c = m.param_counts();
  std::vector<std::size_t> layers;
  for (const auto& s : m.summary()) {
    if (s.params.total > 0) layers.push_back(s.params.total);
  }
  const std::vector<std::size_t> expected{448,     4640,    18496, 73856,   512,   819456,
                                          3277312, 2048,    4719616, 4096, 112750};
  return check(c.total == 9033230 && c.trainable == 9029902 && c.non_trainable == 3328 &&
                   layers == expected,
               fmt::format("total={} trainable={} non_trainable={}", c.total, c.trainable,
                           c.non_trainable));
}

Outcome shape_trace() {
  const std::vector<std::string> expected{
      "(222, 222, 16)", "(220, 220, 32)", "(110, 110, 32)", "(108, 108, 64)", "(54, 54, 64)",
      "(52, 52, 128)",  "(52, 52, 128)",  "(26, 26, 128)",  "(26, 26, 128)",  "(22, 22, 256)",
      "(11, 11, 256)",  "(7, 7, 512)",    "(7, 7, 512)",    "(3, 3, 512)",    "(3, 3, 512)",
      "(4608)",         "(1024)",         "(1024)",         "(1024)",         "(110)"};
  net::Model m = net::build_canonical_model(1);
  net::Tensor x({1, 224, 224, 3}, 0.5);
  std::vector<std::string> got;
  for (std::size_t i = 0; i < m.num_layers(); ++i) {
    x = m.layer(i).forward(x, net::Mode::infer);
    got.push_back(x.shape.str());
  }
  return check(got == expected && x.data.size() == 110, "final " + got.back());
}

Outcome gradients() {
  using net::LayerSpec;
  using net::Activation;
  const net::Shape in{3, 10, 10, 2};
  net::Model model({LayerSpec::conv(3, 3, Activation::relu), LayerSpec::batchnorm(),
                    LayerSpec::maxpool(2), LayerSpec::conv(4, 2, Activation::linear),
                    LayerSpec::flatten(), LayerSpec::dense(5, Activation::relu),
                    LayerSpec::batchnorm(), LayerSpec::dense(3, Activation::linear)},
                   in, 11);
  net::Rng rng(12);
  for (auto* p : model.parameters())
    if (p->trainable)
      for (auto& v : p->value) v += rng.uniform(-0.2, 0.2);
  net::Tensor x(in), r({3, 1, 1, 3});
  for (auto& v : x.data) v = rng.uniform(-1, 1);
  for (auto& v : r.data) v = rng.uniform(-1, 1);
  auto params = model.parameters();
  std::vector<std::vector<double>> frozen;
  for (auto* p : params) frozen.push_back(p->value);
  auto reset = [&] {
    for (std::size_t k = 0; k < params.size(); ++k)
      if (!params[k]->trainable) params[k]->value = frozen[k];
  };
  auto loss = [&](const net::Tensor& in_x) {
    auto y = model.forward(in_x, net::Mode::train);
    reset();
    return std::inner_product(y.data.begin(), y.data.end(), r.data.begin(), 0.0);
  };
  model.zero_grad();
  loss(x);
  net::Tensor dx = model.backward(r);
  const double h = 1e-6;
  double worst = 0;
  for (auto* p : params) {
    if (!p->trainable) continue;
    double n2 = 0, d2 = 0;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double o = p->value[i];
      p->value[i] = o + h;
      const double lp = loss(x);
      p->value[i] = o - h;
      const double lm = loss(x);
      p->value[i] = o;
      const double num = (lp - lm) / (2 * h);
      n2 += (num - p->grad[i]) * (num - p->grad[i]);
      d2 += num * num + p->grad[i] * p->grad[i];
    }
    worst = std::max(worst, std::sqrt(n2 / d2));
  }
  double n2 = 0, d2 = 0;
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    net::Tensor xp = x, xm = x;
    xp.data[i] += h;
    xm.data[i] -= h;
    const double num = (loss(xp) - loss(xm)) / (2 * h);
    n2 += (num - dx.data[i]) * (num - dx.data[i]);
    d2 += num * num + dx.data[i] * dx.data[i];
  }
  worst = std::max(worst, std::sqrt(n2 / d2));
  // Dropout: backward must apply exactly the mask used in forward.
  net::Rng drng(13);
  auto drop = net::make_layer(LayerSpec::dropout(0.5), {1, 1, 1, 64}, drng);
  net::Tensor ones({1, 1, 1, 64}, 1.0), g({1, 1, 1, 64}, 3.0);
  auto y = drop->forward(ones, net::Mode::train);
  auto gd = drop->backward(g);
  bool dropout_ok = true;
  for (std::size_t i = 0; i < 64; ++i) dropout_ok &= gd.data[i] == 3.0 * y.data[i];
  return check(worst < 1e-4 && dropout_ok, fmt::format("max relative error {:.2e}", worst));
}

Outcome desk_training() {
  std::mt19937_64 rng(21);
  std::vector<Sample> samples;
  for (unsigned i = 0; i < 8; ++i) {
    auto lm = testing::random_landmarks(rng, 30, 194);
    samples.push_back({testing::synthetic_image(lm, 100 + i), lm, "s" + std::to_string(i)});
  }
  net::Model model = net::build_compact_model(5);
  net::SampleSource source(samples);
  net::TrainConfig c;
  c.epochs = 700;
  c.batch_size = 1;
  c.seed = 5;
  net::train(model, source, c);
  auto e = net::evaluate(model, source);
  return check(e.loss < 1e-3, fmt::format("8 samples, batch 1, {} epochs, final MSE {:.3e}", c.epochs, e.loss));
}

cv::Mat flat_image(unsigned seed) {
  cv::Mat img(160, 160, CV_8UC3, cv::Scalar(90, 120, 150));
  cv::circle(img, {40 + static_cast<int>(seed % 60), 70}, 12, cv::Scalar(20, 200, 60), cv::FILLED);
  return img;
}

Outcome augmentation() {
  testing::TempDir dir;
  std::mt19937_64 rng(31);
  for (const auto& [split, n] : {std::pair<std::string, int>{"train", 500}, {"test", 105}}) {
    fs::create_directories(dir / ("in/images/" + split));
    fs::create_directories(dir / ("in/landmarks/" + split));
    for (int i = 0; i < n; ++i) {
      const std::string id = split + std::to_string(i);
      cv::imwrite((dir / ("in/images/" + split + "/" + id + ".png")).string(), flat_image(i));
      auto lm = testing::random_landmarks(rng, 20, 140);
      write_landmarks(dir / ("in/landmarks/" + split + "/" + id + ".txt"),
                      LandmarkSet(std::vector<Landmark>(lm.points().begin(), lm.points().end()),
                                  {160, 160}));
    }
  }
  pipeline::PipelineConfig c;
  c.corpus_images = dir / "in/images";
  c.corpus_landmarks = dir / "in/landmarks";
  auto out = pipeline::cmd_augment(c, dir / "out");

  auto corpus = load_corpus(c.corpus_images, c.corpus_landmarks);
  double flip_err = 0, iso_err = 0;
  bool flip_image_exact = true;
  for (std::size_t k = 0; k < 20; ++k) {
    const Sample& s = corpus.train[k];
    auto twice = augment(augment(s, AugmentKind::flip), AugmentKind::flip);
    flip_image_exact &= cv::norm(twice.image, s.image, cv::NORM_INF) == 0.0;
    for (int i = 0; i < kNumLandmarks; ++i) {
      flip_err = std::max(flip_err, std::abs(twice.landmarks.at(i).x - s.landmarks.at(i).x));
    }
    for (auto kind : kAllAugmentations) {
      auto a = augment(s, kind);
      for (int i = 0; i + 1 < kNumLandmarks; ++i) {
        iso_err = std::max(iso_err, std::abs(euclidean_distance(a.landmarks.at(i), a.landmarks.at(i + 1)) -
                                             euclidean_distance(s.landmarks.at(i), s.landmarks.at(i + 1))));
      }
    }
  }
  return check(out.train == 3000 && out.test == 630 && flip_image_exact && flip_err <= 1e-12 &&
                   iso_err <= 1e-9,
               fmt::format("(500, 105) -> ({}, {}); flip error {:.1e}; isometry error {:.1e}",
                           out.train, out.test, flip_err, iso_err));
}

Outcome distance_pipeline() {
  const int pairs[7][2] = {{20, 39}, {20, 48}, {37, 43}, {25, 48}, {4, 18}, {33, 37}, {38, 40}};
  std::mt19937_64 rng(41);
  double worst = 0;
  for (int k = 0; k < 1000; ++k) {
    auto s = testing::random_landmarks(rng, 0, 224);
    auto d = measure_distances(s);
    for (int j = 0; j < 7; ++j) {
      const auto& a = s.points()[pairs[j][0]];
      const auto& b = s.points()[pairs[j][1]];
      const long double dx = static_cast<long double>(a.x) - b.x, dy = static_cast<long double>(a.y) - b.y;
      const double o = static_cast<double>(std::sqrt(dx * dx + dy * dy) / 316.0L);
      worst = std::max(worst, std::abs(d.d[j] - o));
    }
  }
  return check(worst <= 1e-12 && PixelDistanceVector::normalization_constant == 316.0,
               fmt::format("1000 sets, max deviation {:.1e}, normalization {}", worst,
                           PixelDistanceVector::normalization_constant));
}

Outcome calibration_round_trip() {
  const std::array<double, 7> f{7.25, 12.5, 9.125, 10.0, 8.75, 11.375, 13.0};
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(0.02, 0.7);
  std::vector<CalibrationRecord> recs;
  for (int e = 0; e < 116; ++e) {
    CalibrationRecord r;
    r.ear_id = std::to_string(e / 2 + 1) + (e % 2 ? "_R" : "_L");
    for (int j = 0; j < 7; ++j) {
      r.px.d[j] = u(rng);
      r.cm.d[j] = f[j] * r.px.d[j];
    }
    recs.push_back(r);
  }
  auto got = average_factors(recs);
  double worst = 0;
  for (int j = 0; j < 7; ++j) worst = std::max(worst, std::abs(got.factor[j] - f[j]));
  const auto preset = load_reference_factors();
  const std::array<double, 7> table{10.129765, 13.442287, 11.625544, 9.539581,
                                    8.621989,  11.824525, 10.532984};
  testing::TempDir dir;
  write_factors_csv(dir / "p.csv", preset);
  const auto reread = read_factors_csv(dir / "p.csv");
  return check(worst <= 1e-12 && preset.factor == table && preset.overall_average == 10.313797 &&
                   reread.factor == table && reread.overall_average == 10.313797,
               fmt::format("116 ears, max deviation {:.1e}; preset average {}", worst,
                           format_double(preset.overall_average)));
}

Outcome matcher() {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(0.2, 4.0);
  int disagreements = 0;
  bool members_zero = true;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<EarRecord> recs;
    for (int i = 0; i < 116; ++i) {
      EarRecord r{std::to_string(i / 2), i % 2 ? Side::right : Side::left, {}, std::nullopt};
      for (auto& v : r.anthro.d) v = u(rng);
      recs.push_back(r);
    }
    AnthroDatabase db(recs);
    AnthroVector q;
    for (auto& v : q.d) v = u(rng);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < recs.size(); ++i) {
      double s = 0;
      for (int j = 0; j < 7; ++j) s += std::pow(q.d[j] - recs[i].anthro.d[j], 2);
      if (s < best_d) {
        best_d = s;
        best = i;
      }
    }
    if (best_match(q, db).best_row != best) ++disagreements;
    const std::size_t member = static_cast<std::size_t>(trial) % recs.size();
    auto m = best_match(recs[member].anthro, db);
    members_zero &= m.distance == 0.0 && m.best_row == member;
  }
  std::vector<EarRecord> dup;
  for (int i = 0; i < 6; ++i) {
    EarRecord r{"s" + std::to_string(i), Side::left, {{1.0 + i, 1, 1, 1, 1, 1, 1}}, std::nullopt};
    dup.push_back(r);
  }
  dup.push_back({"copy_of_3", Side::right, dup[3].anthro, std::nullopt});
  dup.push_back({"copy_of_1", Side::right, dup[1].anthro, std::nullopt});
  AnthroDatabase ddb(dup);
  bool ties = true;
  for (int rep = 0; rep < 5; ++rep) {
    ties &= best_match(dup[3].anthro, ddb).best_row == 3 && best_match(dup[1].anthro, ddb).best_row == 1;
  }
  return check(disagreements == 0 && members_zero && ties,
               fmt::format("200 queries x 116 rows, {} disagreements", disagreements));
}

Outcome mesh_rendering() {
  testing::TempDir dir;
  fs::create_directories(dir / "meshes");
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(0.6, 1.4);
  const auto sphere = testing::make_sphere(1.0, 3);
  for (int s = 0; s < 58; ++s) {
    TriangleMesh m = sphere;
    const Vec3 scale{u(rng) * 9, u(rng) * 8, u(rng) * 11};
    for (auto& v : m.vertices) v = {v.x * scale.x, v.y * scale.y, v.z * scale.z};
    write_file_atomic(dir / fmt::format("meshes/{:03}.stl", s + 1), to_binary_stl(m));
  }
  pipeline::PipelineConfig c;
  c.mesh_dir = dir / "meshes";
  auto a = pipeline::cmd_render(c, dir / "a");
  auto b = pipeline::cmd_render(c, dir / "b");
  bool identical = a.images == b.images;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    identical &= read_file(e.path()) == read_file(dir / "b" / e.path().filename());
  }

  CameraSpec cam;
  cam.distance = 5.0;
  auto disc = render_ear(testing::make_sphere(1.0, 4), cam, Side::right);
  const double rho = cam.focal() / std::sqrt(24.0);
  const double expected = std::numbers::pi * rho * rho * cam.width * cam.height / 4.0;
  const double ratio = cv::countNonZero(disc.mask) / expected;

  auto head = sphere.rotated(Mat3::rotation({0.3, 1, 0.2}, 0.8));
  auto left = render_ear(head, cam, Side::left);
  auto right = render_ear(head, cam, Side::right);
  cv::Mat once, twice;
  cv::flip(left.image, once, 1);
  cv::flip(once, twice, 1);
  const bool mirror = cv::norm(once, right.image, cv::NORM_INF) == 0.0 &&
                      cv::norm(twice, left.image, cv::NORM_INF) == 0.0;
  return check(a.images == 116 && a.failures.empty() && identical && std::abs(ratio - 1.0) <= 0.02 && mirror,
               fmt::format("58 meshes -> {} images; re-run identical: {}; disc area ratio {:.4f}",
                           a.images, identical ? "yes" : "no", ratio));
}

Outcome end_to_end() {
  testing::TempDir dir;
  std::mt19937_64 rng(81);
  auto planted = testing::random_landmarks(rng, 40, 184);
  const cv::Mat image = testing::synthetic_image(planted, 81);
  cv::imwrite((dir / "query.png").string(), image);

  // Desk-scale landmark model trained on the single planted image.
  net::Model model = net::build_compact_model(8);
  std::vector<Sample> one{{image, planted, "query"}};
  net::SampleSource source(one);
  net::TrainConfig tc;
  tc.epochs = 400;
  tc.batch_size = 1;
  net::train(model, source, tc);
  net::save_model(model, dir / "model.hrtfnet");

  const ConversionFactors factors =
      ConversionFactors::from_values({9.5, 12.0, 10.5, 8.0, 7.5, 11.0, 9.0}, 116, "synthetic");
  write_factors_csv(dir / "factors.csv", factors);
  const AnthroVector truth = to_centimetres(measure_distances(planted), factors);

  const std::size_t planted_row = 57;
  std::string db = "subject_id,side,d1,d2,d3,d4,d5,d6,d7,hrtf_ref\n";
  std::normal_distribution<double> n(0, 1);
  for (std::size_t i = 0; i < 116; ++i) {
    AnthroVector v = truth;
    if (i != planted_row) {
      // Rows at least 0.5 cm from the truth in a random direction.
      std::array<double, 7> dir_v;
      double norm = 0;
      for (auto& x : dir_v) {
        x = n(rng);
        norm += x * x;
      }
      const double radius = 0.5 + 1.5 * std::uniform_real_distribution<double>(0, 1)(rng);
      for (int j = 0; j < 7; ++j) v.d[j] = std::max(0.05, truth.d[j] + radius * dir_v[j] / std::sqrt(norm));
    }
    db += fmt::format("{},{}", i / 2 + 1, i % 2 ? "right" : "left");
    for (double x : v.d) db += "," + format_double(x);
    db += fmt::format(",hrtf/{}.sofa\n", i);
  }
  write_file_atomic(dir / "db.csv", db);

  pipeline::PipelineConfig c;
  c.model = dir / "model.hrtfnet";
  c.factors = dir / "factors.csv";
  c.database = dir / "db.csv";
  pipeline::MatchRequest req;
  req.image = dir / "query.png";
  auto report = pipeline::cmd_match(req, c);
  double landmark_err = 0;
  for (const auto& p : report.landmarks->points()) {
    landmark_err = std::max(landmark_err, std::hypot(p.x - planted.at(p.label).x, p.y - planted.at(p.label).y));
  }
  return check(report.match.best_row == planted_row,
               fmt::format("best row {} (planted {}), distance {:.4f} cm, max landmark error {:.2f} px",
                           report.match.best_row, planted_row, report.match.distance, landmark_err));
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"parameter-count identity", parameter_counts},
      {"shape trace", shape_trace},
      {"gradient correctness", gradients},
      {"desk-scale training", desk_training},
      {"augmentation counts", augmentation},
      {"distance pipeline", distance_pipeline},
      {"calibration round-trip", calibration_round_trip},
      {"matcher oracle equivalence", matcher},
      {"mesh rendering", mesh_rendering},
      {"end-to-end synthetic match", end_to_end},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << fmt::format("{} {:<28} {:7.2f}s  {}\n", o.pass ? "PASS" : "FAIL", name, secs, o.detail)
              << std::flush;
    failures += o.pass ? 0 : 1;
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures;
}
