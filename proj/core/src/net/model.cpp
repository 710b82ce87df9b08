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

#include "hrtf/net/model.h"

#include <map>

#include "hrtf/errors.h"

namespace hrtf::net {

Model::Model(std::vector<LayerSpec> specs, Shape input, std::uint64_t seed)
    : specs_(std::move(specs)), input_(input), seed_(seed) {
  input_.n = 1;
  if (input_.h <= 0 || input_.w <= 0 || input_.c <= 0) {
    throw ShapeError("model input shape must be positive, got " + input_.str());
  }
  std::map<LayerKind, int> counters;
  Rng rng(seed);
  Shape shape = input_;
  for (auto& spec : specs_) {
    if (spec.name.empty()) {
      const int k = ++counters[spec.kind];
      spec.name = std::string(to_string(spec.kind)) + "_" + std::to_string(k);
    }
    layers_.push_back(make_layer(spec, shape, rng));
    shape = layers_.back()->output_shape();
  }
}

Tensor Model::forward(const Tensor& x, Mode mode) {
  if (x.shape.h != input_.h || x.shape.w != input_.w || x.shape.c != input_.c) {
    throw ShapeError("model input: expected " + input_.str() + ", got " + x.shape.str());
  }
  Tensor t = x;
  for (auto& layer : layers_) t = layer->forward(t, mode);
  return t;
}

Tensor Model::backward(const Tensor& dy) {
  Tensor g = dy;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

void Model::zero_grad() {
  for (auto* p : parameters()) std::fill(p->grad.begin(), p->grad.end(), 0.0);
}

Shape Model::output_shape() const {
  return layers_.empty() ? input_ : layers_.back()->output_shape();
}

ParamCounts Model::param_counts() const {
  ParamCounts c;
  for (const auto& s : summary()) {
    c.total += s.params.total;
    c.trainable += s.params.trainable;
    c.non_trainable += s.params.non_trainable;
  }
  return c;
}

std::vector<LayerSummary> Model::summary() const {
  std::vector<LayerSummary> out;
  for (const auto& layer : layers_) {
    LayerSummary s{layer->spec().name, layer->spec().kind, layer->output_shape(), {}};
    for (const auto& p : layer->params()) {
      s.params.total += p.value.size();
      (p.trainable ? s.params.trainable : s.params.non_trainable) += p.value.size();
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ParamTensor*> Model::parameters() {
  std::vector<ParamTensor*> out;
  for (auto& layer : layers_)
    for (auto& p : layer->params()) out.push_back(&p);
  return out;
}

std::vector<const ParamTensor*> Model::parameters() const {
  std::vector<const ParamTensor*> out;
  for (const auto& layer : layers_)
    for (const auto& p : std::as_const(*layer).params()) out.push_back(&p);
  return out;
}

std::vector<double> Model::snapshot() const {
  std::vector<double> out;
  for (const auto* p : parameters()) out.insert(out.end(), p->value.begin(), p->value.end());
  return out;
}

void Model::restore(const std::vector<double>& values) {
  std::size_t offset = 0;
  auto params = parameters();
  std::size_t total = 0;
  for (const auto* p : params) total += p->value.size();
  if (values.size() != total) throw ShapeError("snapshot size does not match model");
  for (auto* p : params) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(offset), p->value.size(),
                p->value.begin());
    offset += p->value.size();
  }
}

std::vector<LayerSpec> canonical_layers() {
  using A = Activation;
  return {
      LayerSpec::conv(16, 3, A::relu),
      LayerSpec::conv(32, 3, A::relu),
      LayerSpec::maxpool(2),
      LayerSpec::conv(64, 3, A::relu),
      LayerSpec::maxpool(2),
      LayerSpec::conv(128, 3, A::relu),
      LayerSpec::batchnorm(),
      LayerSpec::maxpool(2),
      LayerSpec::dropout(0.3),
      LayerSpec::conv(256, 5, A::relu),
      LayerSpec::maxpool(2),
      LayerSpec::conv(512, 5, A::relu),
      LayerSpec::batchnorm(),
      LayerSpec::maxpool(2),
      LayerSpec::dropout(0.5),
      LayerSpec::flatten(),
      LayerSpec::dense(1024, A::relu),
      LayerSpec::batchnorm(),
      LayerSpec::dropout(0.7),
      LayerSpec::dense(110, A::linear),
  };
}

Model build_canonical_model(std::uint64_t seed) {
  return Model(canonical_layers(), {1, 224, 224, 3}, seed);
}

std::vector<LayerSpec> compact_layers() {
  using A = Activation;
  return {
      LayerSpec::conv(8, 3, A::relu),
      LayerSpec::maxpool(4),
      LayerSpec::conv(16, 3, A::relu),
      LayerSpec::maxpool(4),
      LayerSpec::flatten(),
      LayerSpec::dense(64, A::relu),
      LayerSpec::dense(110, A::linear),
  };
}

Model build_compact_model(std::uint64_t seed) {
  return Model(compact_layers(), {1, 224, 224, 3}, seed);
}

std::vector<Shape> shape_trace(const std::vector<LayerSpec>& specs, Shape input) {
  std::vector<Shape> out;
  input.n = 1;
  for (const auto& spec : specs) {
    input = infer_output_shape(spec, input);
    out.push_back(input);
  }
  return out;
}

double loss_mse(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) {
    throw ShapeError("loss_mse: length mismatch " + std::to_string(pred.size()) + " vs " +
                     std::to_string(target.size()));
  }
  if (pred.empty()) throw ShapeError("loss_mse: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    sum += d * d;
  }
  return sum / static_cast<double>(pred.size());
}

}  // namespace hrtf::net
