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

#include "hrtf/net/layers.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "hrtf/errors.h"

namespace hrtf::net {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using VecMap = Eigen::Map<Eigen::RowVectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::RowVectorXd>;

std::string label(const LayerSpec& spec) {
  return spec.name.empty() ? std::string(to_string(spec.kind)) : spec.name;
}

ParamTensor make_param(std::string name, std::size_t size, bool trainable, double fill = 0.0) {
  ParamTensor p;
  p.name = std::move(name);
  p.value.assign(size, fill);
  if (trainable) p.grad.assign(size, 0.0);
  p.trainable = trainable;
  return p;
}

void fill_uniform(std::vector<double>& v, double limit, Rng& rng) {
  for (auto& x : v) x = rng.uniform(-limit, limit);
}

double init_limit(int fan_in, Activation act) {
  // He-uniform for ReLU layers, LeCun-uniform for linear ones.
  return std::sqrt((act == Activation::relu ? 6.0 : 3.0) / fan_in);
}

Tensor with_batch(Shape per_sample, int n) {
  per_sample.n = n;
  return Tensor(per_sample);
}

class Conv2D final : public Layer {
 public:
  Conv2D(const LayerSpec& spec, Shape in, Rng& rng)
      : Layer(spec, in, infer_output_shape(spec, in)) {
    const int fan_in = spec.kernel * spec.kernel * in.c;
    params_.push_back(make_param("kernel", static_cast<std::size_t>(fan_in) * spec.filters, true));
    params_.push_back(make_param("bias", spec.filters, true));
    fill_uniform(params_[0].value, init_limit(fan_in, spec.activation), rng);
  }

  Tensor forward(const Tensor& x, Mode mode) override {
    check_input(x);
    const int n = x.shape.n;
    const int k_dim = patch_size();
    const int p_dim = output_.h * output_.w;
    Tensor y = with_batch(output_, n);
    ConstMatMap w(params_[0].value.data(), k_dim, spec_.filters);
    ConstVecMap b(params_[1].value.data(), spec_.filters);
    RowMat col(p_dim, k_dim);
    for (int i = 0; i < n; ++i) {
      im2col(x.sample(i), col);
      MatMap out(y.sample(i), p_dim, spec_.filters);
      out.noalias() = col * w;
      out.rowwise() += b;
      if (spec_.activation == Activation::relu) out = out.cwiseMax(0.0);
    }
    if (mode == Mode::train) {
      input_cache_ = x;
      output_cache_ = y;
    }
    return y;
  }

  Tensor backward(const Tensor& dy_in) override {
    const int n = dy_in.shape.n;
    const int k_dim = patch_size();
    const int p_dim = output_.h * output_.w;
    Tensor dx = with_batch(input_, n);
    ConstMatMap w(params_[0].value.data(), k_dim, spec_.filters);
    MatMap dw(params_[0].grad.data(), k_dim, spec_.filters);
    VecMap db(params_[1].grad.data(), spec_.filters);
    RowMat col(p_dim, k_dim);
    RowMat dy(p_dim, spec_.filters);
    RowMat dcol(p_dim, k_dim);
    for (int i = 0; i < n; ++i) {
      dy = ConstMatMap(dy_in.sample(i), p_dim, spec_.filters);
      if (spec_.activation == Activation::relu) {
        ConstMatMap y(output_cache_.sample(i), p_dim, spec_.filters);
        dy = (y.array() > 0.0).select(dy, 0.0);
      }
      im2col(input_cache_.sample(i), col);
      dw.noalias() += col.transpose() * dy;
      db += dy.colwise().sum();
      dcol.noalias() = dy * w.transpose();
      col2im(dcol, dx.sample(i));
    }
    return dx;
  }

 private:
  int patch_size() const { return spec_.kernel * spec_.kernel * input_.c; }

  // Row (i * out_w + j) holds the k x k x c patch at (i, j) in (dy, dx, c) order.
  void im2col(const double* x, RowMat& col) const {
    const int k = spec_.kernel;
    const int run = k * input_.c;
    for (int i = 0; i < output_.h; ++i) {
      for (int j = 0; j < output_.w; ++j) {
        double* dst = col.data() + static_cast<std::size_t>(i * output_.w + j) * col.cols();
        for (int di = 0; di < k; ++di) {
          const double* src = x + (static_cast<std::size_t>(i + di) * input_.w + j) * input_.c;
          std::copy(src, src + run, dst + di * run);
        }
      }
    }
  }

  void col2im(const RowMat& dcol, double* dx) const {
    const int k = spec_.kernel;
    const int run = k * input_.c;
    for (int i = 0; i < output_.h; ++i) {
      for (int j = 0; j < output_.w; ++j) {
        const double* src = dcol.data() + static_cast<std::size_t>(i * output_.w + j) * dcol.cols();
        for (int di = 0; di < k; ++di) {
          double* dst = dx + (static_cast<std::size_t>(i + di) * input_.w + j) * input_.c;
          for (int t = 0; t < run; ++t) dst[t] += src[di * run + t];
        }
      }
    }
  }

  Tensor input_cache_;
  Tensor output_cache_;
};

class MaxPool2D final : public Layer {
 public:
  MaxPool2D(const LayerSpec& spec, Shape in) : Layer(spec, in, infer_output_shape(spec, in)) {}

  Tensor forward(const Tensor& x, Mode mode) override {
    check_input(x);
    const int n = x.shape.n;
    const int p = spec_.pool;
    Tensor y = with_batch(output_, n);
    std::vector<std::size_t> argmax(y.data.size());
    std::size_t o = 0;
    for (int b = 0; b < n; ++b) {
      for (int i = 0; i < output_.h; ++i) {
        for (int j = 0; j < output_.w; ++j) {
          for (int c = 0; c < output_.c; ++c, ++o) {
            double best = -std::numeric_limits<double>::infinity();
            std::size_t best_idx = 0;
            for (int di = 0; di < p; ++di) {
              for (int dj = 0; dj < p; ++dj) {
                const std::size_t idx =
                    ((static_cast<std::size_t>(b) * input_.h + i * p + di) * input_.w + j * p + dj) *
                        input_.c + c;
                if (x.data[idx] > best) {
                  best = x.data[idx];
                  best_idx = idx;
                }
              }
            }
            y.data[o] = best;
            argmax[o] = best_idx;
          }
        }
      }
    }
    if (mode == Mode::train) argmax_ = std::move(argmax);
    return y;
  }

  Tensor backward(const Tensor& dy) override {
    Tensor dx = with_batch(input_, dy.shape.n);
    for (std::size_t o = 0; o < dy.data.size(); ++o) dx.data[argmax_[o]] += dy.data[o];
    return dx;
  }

 private:
  std::vector<std::size_t> argmax_;
};

// Normalizes over every axis except the last (channels, or features).
class BatchNorm final : public Layer {
 public:
  BatchNorm(const LayerSpec& spec, Shape in) : Layer(spec, in, in) {
    const std::size_t c = in.c;
    params_.push_back(make_param("gamma", c, true, 1.0));
    params_.push_back(make_param("beta", c, true, 0.0));
    params_.push_back(make_param("moving_mean", c, false, 0.0));
    params_.push_back(make_param("moving_variance", c, false, 1.0));
  }

  Tensor forward(const Tensor& x, Mode mode) override {
    check_input(x);
    const int c_dim = input_.c;
    const std::size_t rows = x.data.size() / c_dim;
    ConstMatMap xm(x.data.data(), static_cast<Eigen::Index>(rows), c_dim);
    const auto& gamma = params_[0].value;
    const auto& beta = params_[1].value;
    auto& run_mean = params_[2].value;
    auto& run_var = params_[3].value;

    Tensor y(x.shape);
    MatMap ym(y.data.data(), static_cast<Eigen::Index>(rows), c_dim);
    if (mode == Mode::infer) {
      for (int c = 0; c < c_dim; ++c) {
        const double inv = 1.0 / std::sqrt(run_var[c] + spec_.epsilon);
        ym.col(c) = ((xm.col(c).array() - run_mean[c]) * (inv * gamma[c]) + beta[c]).matrix();
      }
      return y;
    }
    xhat_ = Tensor(x.shape);
    MatMap xh(xhat_.data.data(), static_cast<Eigen::Index>(rows), c_dim);
    inv_std_.assign(c_dim, 0.0);
    for (int c = 0; c < c_dim; ++c) {
      const double mean = xm.col(c).mean();
      const double var = (xm.col(c).array() - mean).square().mean();
      inv_std_[c] = 1.0 / std::sqrt(var + spec_.epsilon);
      xh.col(c) = ((xm.col(c).array() - mean) * inv_std_[c]).matrix();
      ym.col(c) = (xh.col(c).array() * gamma[c] + beta[c]).matrix();
      run_mean[c] = spec_.momentum * run_mean[c] + (1.0 - spec_.momentum) * mean;
      run_var[c] = spec_.momentum * run_var[c] + (1.0 - spec_.momentum) * var;
    }
    return y;
  }

  Tensor backward(const Tensor& dy) override {
    const int c_dim = input_.c;
    const std::size_t rows = dy.data.size() / c_dim;
    const double m = static_cast<double>(rows);
    ConstMatMap dym(dy.data.data(), static_cast<Eigen::Index>(rows), c_dim);
    ConstMatMap xh(xhat_.data.data(), static_cast<Eigen::Index>(rows), c_dim);
    Tensor dx(dy.shape);
    MatMap dxm(dx.data.data(), static_cast<Eigen::Index>(rows), c_dim);
    const auto& gamma = params_[0].value;
    for (int c = 0; c < c_dim; ++c) {
      const double sum_dy = dym.col(c).sum();
      const double sum_dy_xh = dym.col(c).dot(xh.col(c));
      params_[0].grad[c] += sum_dy_xh;
      params_[1].grad[c] += sum_dy;
      const double scale = gamma[c] * inv_std_[c] / m;
      dxm.col(c) =
          ((m * dym.col(c).array() - sum_dy - xh.col(c).array() * sum_dy_xh) * scale).matrix();
    }
    return dx;
  }

 private:
  Tensor xhat_;
  std::vector<double> inv_std_;
};

// Inverted dropout: kept units are scaled by 1 / (1 - rate) during training.
class Dropout final : public Layer {
 public:
  Dropout(const LayerSpec& spec, Shape in, Rng& rng)
      : Layer(spec, in, in), rng_(rng.next()) {}

  Tensor forward(const Tensor& x, Mode mode) override {
    check_input(x);
    if (mode == Mode::infer || spec_.rate == 0.0) {
      mask_.assign(x.data.size(), 1.0);
      return x;
    }
    const double keep = 1.0 - spec_.rate;
    mask_.resize(x.data.size());
    Tensor y(x.shape);
    for (std::size_t i = 0; i < x.data.size(); ++i) {
      mask_[i] = rng_.uniform() < keep ? 1.0 / keep : 0.0;
      y.data[i] = x.data[i] * mask_[i];
    }
    return y;
  }

  Tensor backward(const Tensor& dy) override {
    Tensor dx(dy.shape);
    for (std::size_t i = 0; i < dy.data.size(); ++i) dx.data[i] = dy.data[i] * mask_[i];
    return dx;
  }

 private:
  Rng rng_;
  std::vector<double> mask_;
};

class Flatten final : public Layer {
 public:
  Flatten(const LayerSpec& spec, Shape in) : Layer(spec, in, infer_output_shape(spec, in)) {}

  Tensor forward(const Tensor& x, Mode) override {
    check_input(x);
    Tensor y = x;
    y.shape = {x.shape.n, 1, 1, output_.c};
    return y;
  }

  Tensor backward(const Tensor& dy) override {
    Tensor dx = dy;
    dx.shape = {dy.shape.n, input_.h, input_.w, input_.c};
    return dx;
  }
};

class Dense final : public Layer {
 public:
  Dense(const LayerSpec& spec, Shape in, Rng& rng)
      : Layer(spec, in, infer_output_shape(spec, in)) {
    params_.push_back(make_param("kernel", static_cast<std::size_t>(in.c) * spec.units, true));
    params_.push_back(make_param("bias", spec.units, true));
    fill_uniform(params_[0].value, init_limit(in.c, spec.activation), rng);
  }

  Tensor forward(const Tensor& x, Mode mode) override {
    check_input(x);
    const int n = x.shape.n;
    Tensor y = with_batch(output_, n);
    ConstMatMap xm(x.data.data(), n, input_.c);
    ConstMatMap w(params_[0].value.data(), input_.c, spec_.units);
    ConstVecMap b(params_[1].value.data(), spec_.units);
    MatMap ym(y.data.data(), n, spec_.units);
    ym.noalias() = xm * w;
    ym.rowwise() += b;
    if (spec_.activation == Activation::relu) ym = ym.cwiseMax(0.0);
    if (mode == Mode::train) {
      input_cache_ = x;
      output_cache_ = y;
    }
    return y;
  }

  Tensor backward(const Tensor& dy_in) override {
    const int n = dy_in.shape.n;
    RowMat dy = ConstMatMap(dy_in.data.data(), n, spec_.units);
    if (spec_.activation == Activation::relu) {
      ConstMatMap y(output_cache_.data.data(), n, spec_.units);
      dy = (y.array() > 0.0).select(dy, 0.0);
    }
    ConstMatMap xm(input_cache_.data.data(), n, input_.c);
    ConstMatMap w(params_[0].value.data(), input_.c, spec_.units);
    MatMap dw(params_[0].grad.data(), input_.c, spec_.units);
    VecMap db(params_[1].grad.data(), spec_.units);
    dw.noalias() += xm.transpose() * dy;
    db += dy.colwise().sum();
    Tensor dx = with_batch(input_, n);
    MatMap dxm(dx.data.data(), n, input_.c);
    dxm.noalias() = dy * w.transpose();
    return dx;
  }

 private:
  Tensor input_cache_;
  Tensor output_cache_;
};

}  // namespace

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::maxpool2d: return "max_pooling2d";
    case LayerKind::batchnorm: return "batch_normalization";
    case LayerKind::dropout: return "dropout";
    case LayerKind::flatten: return "flatten";
    case LayerKind::dense: return "dense";
  }
  return "unknown";
}

LayerSpec LayerSpec::conv(int filters, int kernel, Activation act) {
  LayerSpec s;
  s.kind = LayerKind::conv2d;
  s.filters = filters;
  s.kernel = kernel;
  s.activation = act;
  return s;
}

LayerSpec LayerSpec::maxpool(int pool) {
  LayerSpec s;
  s.kind = LayerKind::maxpool2d;
  s.pool = pool;
  return s;
}

LayerSpec LayerSpec::batchnorm() {
  LayerSpec s;
  s.kind = LayerKind::batchnorm;
  return s;
}

LayerSpec LayerSpec::dropout(double rate) {
  LayerSpec s;
  s.kind = LayerKind::dropout;
  s.rate = rate;
  return s;
}

LayerSpec LayerSpec::flatten() {
  LayerSpec s;
  s.kind = LayerKind::flatten;
  return s;
}

LayerSpec LayerSpec::dense(int units, Activation act) {
  LayerSpec s;
  s.kind = LayerKind::dense;
  s.units = units;
  s.activation = act;
  return s;
}

void Layer::check_input(const Tensor& x) const {
  if (x.shape.h != input_.h || x.shape.w != input_.w || x.shape.c != input_.c || x.shape.n < 1 ||
      x.data.size() != x.shape.elements()) {
    throw ShapeError(label(spec_) + ": expected input " + input_.str() + ", got " +
                     x.shape.str());
  }
}

Shape infer_output_shape(const LayerSpec& spec, Shape in) {
  const std::string who = label(spec);
  auto flat = [&] {
    if (in.h != 1 || in.w != 1) {
      throw ShapeError(who + ": expects a flat input, got " + in.str() + " (missing flatten?)");
    }
  };
  switch (spec.kind) {
    case LayerKind::conv2d:
      if (spec.filters <= 0 || spec.kernel <= 0) throw ShapeError(who + ": invalid filter spec");
      if (in.h < spec.kernel || in.w < spec.kernel) {
        throw ShapeError(who + ": kernel " + std::to_string(spec.kernel) +
                         " larger than input " + in.str());
      }
      return {in.n, in.h - spec.kernel + 1, in.w - spec.kernel + 1, spec.filters};
    case LayerKind::maxpool2d:
      if (spec.pool <= 0) throw ShapeError(who + ": invalid pool size");
      if (in.h < spec.pool || in.w < spec.pool) {
        throw ShapeError(who + ": pool " + std::to_string(spec.pool) + " larger than input " +
                         in.str());
      }
      return {in.n, in.h / spec.pool, in.w / spec.pool, in.c};
    case LayerKind::batchnorm:
      return in;
    case LayerKind::dropout:
      if (!(spec.rate >= 0.0 && spec.rate < 1.0)) throw ShapeError(who + ": rate must be in [0,1)");
      return in;
    case LayerKind::flatten:
      return {in.n, 1, 1, static_cast<int>(in.per_sample())};
    case LayerKind::dense:
      flat();
      if (spec.units <= 0) throw ShapeError(who + ": invalid unit count");
      return {in.n, 1, 1, spec.units};
  }
  throw ShapeError(who + ": unknown layer kind");
}

std::unique_ptr<Layer> make_layer(const LayerSpec& spec, Shape input, Rng& rng) {
  switch (spec.kind) {
    case LayerKind::conv2d: return std::make_unique<Conv2D>(spec, input, rng);
    case LayerKind::maxpool2d: return std::make_unique<MaxPool2D>(spec, input);
    case LayerKind::batchnorm: return std::make_unique<BatchNorm>(spec, input);
    case LayerKind::dropout: return std::make_unique<Dropout>(spec, input, rng);
    case LayerKind::flatten: return std::make_unique<Flatten>(spec, input);
    case LayerKind::dense: return std::make_unique<Dense>(spec, input, rng);
  }
  throw ShapeError("unknown layer kind");
}

}  // namespace hrtf::net
