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

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hrtf/net/tensor.h"

namespace hrtf::net {

enum class LayerKind : std::uint32_t { conv2d = 0, maxpool2d, batchnorm, dropout, flatten, dense };
enum class Activation : std::uint32_t { linear = 0, relu };
enum class Mode { train, infer };

std::string_view to_string(LayerKind kind);

/// Declarative description of one layer. Convolutions are "valid" with
/// stride 1; pooling windows are square with stride equal to the window.
struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  int filters = 0;  // conv2d
  int kernel = 0;   // conv2d
  int pool = 0;     // maxpool2d
  double rate = 0.0;  // dropout
  int units = 0;      // dense
  Activation activation = Activation::linear;  // conv2d, dense
  double momentum = 0.99;  // batchnorm running statistics
  double epsilon = 1e-3;   // batchnorm
  std::string name;

  static LayerSpec conv(int filters, int kernel, Activation act = Activation::relu);
  static LayerSpec maxpool(int pool);
  static LayerSpec batchnorm();
  static LayerSpec dropout(double rate);
  static LayerSpec flatten();
  static LayerSpec dense(int units, Activation act);
  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct ParamTensor {
  std::string name;
  std::vector<double> value;
  std::vector<double> grad;  // empty for non-trainable tensors
  bool trainable = true;
};

class Layer {
 public:
  virtual ~Layer() = default;

  const LayerSpec& spec() const { return spec_; }
  Shape input_shape() const { return input_; }
  Shape output_shape() const { return output_; }

  /// Caches what backward() needs when mode is train.
  virtual Tensor forward(const Tensor& x, Mode mode) = 0;
  /// Accumulates parameter gradients and returns d(loss)/d(input).
  virtual Tensor backward(const Tensor& dy) = 0;

  std::span<ParamTensor> params() { return params_; }
  std::span<const ParamTensor> params() const { return params_; }

 protected:
  Layer(LayerSpec spec, Shape input, Shape output)
      : spec_(std::move(spec)), input_(input), output_(output) {}
  void check_input(const Tensor& x) const;

  LayerSpec spec_;
  Shape input_;   // n is ignored
  Shape output_;  // n is ignored
  std::vector<ParamTensor> params_;
};

/// Per-sample output extents of `spec` applied to `input`; throws ShapeError
/// naming the layer when the input cannot be consumed.
Shape infer_output_shape(const LayerSpec& spec, Shape input);

/// Builds a layer with fan-in scaled uniform weights, zero biases and
/// identity batch-norm parameters. `rng` also seeds dropout masks.
std::unique_ptr<Layer> make_layer(const LayerSpec& spec, Shape input, Rng& rng);

}  // namespace hrtf::net
