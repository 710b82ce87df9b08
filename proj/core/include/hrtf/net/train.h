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

// Adam training on mean-squared error, plus evaluation metrics for
// landmark regression outputs.

#include <functional>
#include <span>
#include <vector>

#include "hrtf/errors.h"
#include "hrtf/net/model.h"

namespace hrtf::net {

struct TrainConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
  /// Inverse-time learning-rate decay per iteration; 0 disables it.
  double decay = 0.0;
  int epochs = 300;
  int batch_size = 64;
  std::uint64_t seed = 0;
  bool shuffle = true;
  /// Radius for the PCK metric, in pixels of the 224x224 frame.
  double pck_threshold_px = 10.0;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double loss = 0.0;
  double mean_radial_error_px = 0.0;
  double pck = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

/// Thrown when a batch loss is not finite. The model has already been
/// rolled back to the parameters held at the start of `epoch`.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int epoch, std::vector<double> last_good)
      : Error(what), epoch_(epoch), last_good_(std::move(last_good)) {}
  int epoch() const noexcept { return epoch_; }
  const std::vector<double>& last_good() const noexcept { return last_good_; }

 private:
  int epoch_;
  std::vector<double> last_good_;
};

/// Supplies (input, target) batches by index.
class BatchSource {
 public:
  virtual ~BatchSource() = default;
  virtual std::size_t size() const = 0;
  virtual Shape input_shape() const = 0;  // per sample
  virtual int target_size() const = 0;
  virtual void fill(std::span<const std::size_t> indices, Tensor& inputs,
                    Tensor& targets) const = 0;
};

/// In-memory inputs and targets; targets are laid out as (n, 1, 1, k).
class TensorSource final : public BatchSource {
 public:
  TensorSource(Tensor inputs, Tensor targets);
  std::size_t size() const override { return static_cast<std::size_t>(inputs_.shape.n); }
  Shape input_shape() const override;
  int target_size() const override { return targets_.shape.c; }
  void fill(std::span<const std::size_t> indices, Tensor& inputs,
            Tensor& targets) const override;

 private:
  Tensor inputs_;
  Tensor targets_;
};

class Adam {
 public:
  explicit Adam(const TrainConfig& config) : config_(config) {}
  /// One bias-corrected update of every trainable tensor from its gradient.
  void step(Model& model);
  long iterations() const { return t_; }

 private:
  TrainConfig config_;
  long t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

/// Interleaved (x, y) targets normalized by 224.
struct LandmarkMetrics {
  double mean_radial_error_px = 0.0;
  double pck = 0.0;
};
LandmarkMetrics landmark_metrics(std::span<const double> pred, std::span<const double> target,
                                 double pck_threshold_px);

using EpochCallback = std::function<void(const EpochRecord&)>;

TrainHistory train(Model& model, const BatchSource& data, const TrainConfig& config,
                   const EpochCallback& on_epoch = {});

struct Evaluation {
  double loss = 0.0;
  double mean_radial_error_px = 0.0;
  double pck = 0.0;
  std::size_t samples = 0;
};

/// Inference-mode metrics over every sample. Throws EmptyCorpus when empty.
Evaluation evaluate(Model& model, const BatchSource& data, double pck_threshold_px = 10.0,
                    int batch_size = 64);

}  // namespace hrtf::net
