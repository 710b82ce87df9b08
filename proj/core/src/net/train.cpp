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

#include "hrtf/net/train.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hrtf/anthro.h"

namespace hrtf::net {

TensorSource::TensorSource(Tensor inputs, Tensor targets)
    : inputs_(std::move(inputs)), targets_(std::move(targets)) {
  if (inputs_.shape.n != targets_.shape.n) {
    throw ShapeError("inputs and targets disagree on sample count");
  }
}

Shape TensorSource::input_shape() const {
  Shape s = inputs_.shape;
  s.n = 1;
  return s;
}

void TensorSource::fill(std::span<const std::size_t> indices, Tensor& inputs,
                        Tensor& targets) const {
  Shape in = inputs_.shape;
  in.n = static_cast<int>(indices.size());
  Shape out = targets_.shape;
  out.n = in.n;
  inputs = Tensor(in);
  targets = Tensor(out);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const int src = static_cast<int>(indices[i]);
    std::copy_n(inputs_.sample(src), in.per_sample(), inputs.sample(static_cast<int>(i)));
    std::copy_n(targets_.sample(src), out.per_sample(), targets.sample(static_cast<int>(i)));
  }
}

void Adam::step(Model& model) {
  auto params = model.parameters();
  if (m_.empty()) {
    for (auto* p : params) {
      m_.emplace_back(p->grad.size(), 0.0);
      v_.emplace_back(p->grad.size(), 0.0);
    }
  }
  ++t_;
  const double lr = config_.learning_rate / (1.0 + config_.decay * static_cast<double>(t_ - 1));
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto* p = params[k];
    if (!p->trainable) continue;
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double g = p->grad[i];
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p->value[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

LandmarkMetrics landmark_metrics(std::span<const double> pred, std::span<const double> target,
                                 double pck_threshold_px) {
  if (pred.size() != target.size() || pred.size() % 2 != 0 || pred.empty()) {
    throw ShapeError("landmark metrics need equal-length interleaved (x, y) vectors");
  }
  const std::size_t points = pred.size() / 2;
  double sum = 0.0;
  std::size_t within = 0;
  for (std::size_t i = 0; i < points; ++i) {
    const double dx = (pred[2 * i] - target[2 * i]) * kFrameSize;
    const double dy = (pred[2 * i + 1] - target[2 * i + 1]) * kFrameSize;
    const double r = std::sqrt(dx * dx + dy * dy);
    sum += r;
    if (r <= pck_threshold_px) ++within;
  }
  return {sum / static_cast<double>(points),
          static_cast<double>(within) / static_cast<double>(points)};
}

TrainHistory train(Model& model, const BatchSource& data, const TrainConfig& config,
                   const EpochCallback& on_epoch) {
  if (data.size() == 0) throw EmptyCorpus("training set is empty");
  if (config.batch_size <= 0 || config.epochs < 0) {
    throw InvalidArgument("batch size must be positive and epochs non-negative");
  }
  if (data.input_shape() != model.input_shape()) {
    throw ShapeError("training inputs " + data.input_shape().str() + " do not fit model input " +
                     model.input_shape().str());
  }
  if (data.target_size() != static_cast<int>(model.output_shape().per_sample())) {
    throw ShapeError("training targets do not match model output size");
  }

  Adam adam(config);
  Rng shuffle_rng(config.seed ^ 0x5DEECE66DULL);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  TrainHistory history;
  const bool pairs = data.target_size() % 2 == 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.shuffle) {
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[shuffle_rng.next() % i]);
      }
    }
    const std::vector<double> epoch_start = model.snapshot();
    double loss_sum = 0.0;
    double radial_sum = 0.0;
    double pck_sum = 0.0;
    Tensor x, y;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      std::span<const std::size_t> idx(order.data() + begin, end - begin);
      data.fill(idx, x, y);

      model.zero_grad();
      Tensor pred = model.forward(x, Mode::train);
      const double loss = loss_mse(pred.data, y.data);
      if (!std::isfinite(loss)) {
        model.restore(epoch_start);
        throw DivergenceError("non-finite loss in epoch " + std::to_string(epoch), epoch,
                              epoch_start);
      }
      Tensor grad(pred.shape);
      const double scale = 2.0 / static_cast<double>(pred.data.size());
      for (std::size_t i = 0; i < grad.data.size(); ++i) {
        grad.data[i] = scale * (pred.data[i] - y.data[i]);
      }
      model.backward(grad);
      adam.step(model);

      const double weight = static_cast<double>(idx.size());
      loss_sum += loss * weight;
      if (pairs) {
        auto m = landmark_metrics(pred.data, y.data, config.pck_threshold_px);
        radial_sum += m.mean_radial_error_px * weight;
        pck_sum += m.pck * weight;
      }
    }
    const double n = static_cast<double>(order.size());
    EpochRecord rec{epoch, loss_sum / n, radial_sum / n, pck_sum / n};
    history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return history;
}

Evaluation evaluate(Model& model, const BatchSource& data, double pck_threshold_px,
                    int batch_size) {
  if (data.size() == 0) throw EmptyCorpus("evaluation set is empty");
  if (batch_size <= 0) throw InvalidArgument("batch size must be positive");
  Evaluation ev;
  std::vector<std::size_t> idx;
  Tensor x, y;
  double loss_sum = 0.0, radial_sum = 0.0, pck_sum = 0.0;
  for (std::size_t begin = 0; begin < data.size(); begin += batch_size) {
    idx.clear();
    for (std::size_t i = begin; i < std::min(data.size(), begin + batch_size); ++i) {
      idx.push_back(i);
    }
    data.fill(idx, x, y);
    Tensor pred = model.forward(x, Mode::infer);
    const std::size_t k = static_cast<std::size_t>(y.shape.c);
    for (std::size_t s = 0; s < idx.size(); ++s) {
      std::span<const double> p(pred.data.data() + s * k, k);
      std::span<const double> t(y.data.data() + s * k, k);
      loss_sum += loss_mse(p, t);
      auto m = landmark_metrics(p, t, pck_threshold_px);
      radial_sum += m.mean_radial_error_px;
      pck_sum += m.pck;
    }
  }
  ev.samples = data.size();
  const double n = static_cast<double>(ev.samples);
  ev.loss = loss_sum / n;
  ev.mean_radial_error_px = radial_sum / n;
  ev.pck = pck_sum / n;
  return ev;
}

}  // namespace hrtf::net
