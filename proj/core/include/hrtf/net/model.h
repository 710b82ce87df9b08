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

// Sequential network: an ordered list of layers over a fixed input shape.

#include <cstdint>
#include <memory>
#include <vector>

#include "hrtf/net/layers.h"

namespace hrtf::net {

struct ParamCounts {
  std::size_t total = 0;
  std::size_t trainable = 0;
  std::size_t non_trainable = 0;
  friend bool operator==(const ParamCounts&, const ParamCounts&) = default;
};

struct LayerSummary {
  std::string name;
  LayerKind kind;
  Shape output;
  ParamCounts params;
};

class Model {
 public:
  /// `input` gives per-sample extents; its n is ignored.
  Model(std::vector<LayerSpec> specs, Shape input, std::uint64_t seed);

  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;

  Tensor forward(const Tensor& x, Mode mode);
  /// Backpropagates d(loss)/d(output) through every layer, accumulating
  /// parameter gradients. Must follow a train-mode forward().
  Tensor backward(const Tensor& dy);
  void zero_grad();

  const std::vector<LayerSpec>& specs() const { return specs_; }
  Shape input_shape() const { return input_; }
  Shape output_shape() const;
  std::uint64_t seed() const { return seed_; }

  std::size_t num_layers() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_[i]; }
  const Layer& layer(std::size_t i) const { return *layers_[i]; }

  ParamCounts param_counts() const;
  std::vector<LayerSummary> summary() const;

  /// Every parameter tensor in layer order (trainable and not).
  std::vector<ParamTensor*> parameters();
  std::vector<const ParamTensor*> parameters() const;

  /// All parameter values concatenated in layer order.
  std::vector<double> snapshot() const;
  void restore(const std::vector<double>& values);

 private:
  std::vector<LayerSpec> specs_;
  Shape input_;
  std::uint64_t seed_;
  std::vector<std::unique_ptr<Layer>> layers_;
};

/// The 20-layer landmark regressor over 224x224x3 inputs with 110 outputs.
std::vector<LayerSpec> canonical_layers();
Model build_canonical_model(std::uint64_t seed);

/// Desk-scale variant on the same 224x224x3 input (about 0.18M parameters).
std::vector<LayerSpec> compact_layers();
Model build_compact_model(std::uint64_t seed);

/// Per-sample shapes after each layer, without allocating parameters.
std::vector<Shape> shape_trace(const std::vector<LayerSpec>& specs, Shape input);

double loss_mse(std::span<const double> pred, std::span<const double> target);

}  // namespace hrtf::net
