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

#include "hrtf/net/landmarks.h"

#include <opencv2/imgproc.hpp>

#include "hrtf/errors.h"

namespace hrtf::net {

void image_to_input(const cv::Mat& image, double* out, Shape per_sample) {
  if (image.cols != per_sample.w || image.rows != per_sample.h) {
    throw ShapeError("image " + std::to_string(image.cols) + "x" + std::to_string(image.rows) +
                     " does not match network input " + per_sample.str());
  }
  if (per_sample.c != 3 && per_sample.c != 1) {
    throw ShapeError("network input must have 1 or 3 channels");
  }
  cv::Mat src = image;
  if (src.channels() == 1 && per_sample.c == 3) {
    cv::cvtColor(src, src, cv::COLOR_GRAY2BGR);
  } else if (src.channels() == 3 && per_sample.c == 1) {
    cv::cvtColor(src, src, cv::COLOR_BGR2GRAY);
  } else if (src.channels() != per_sample.c) {
    throw ShapeError("unsupported image channel count " + std::to_string(src.channels()));
  }
  cv::Mat f;
  const double scale = src.depth() == CV_8U ? 1.0 / 255.0 : 1.0;
  src.convertTo(f, CV_64F, scale);
  const int c = per_sample.c;
  for (int y = 0; y < f.rows; ++y) {
    const double* row = f.ptr<double>(y);
    for (int x = 0; x < f.cols; ++x) {
      double* dst = out + (static_cast<std::size_t>(y) * f.cols + x) * c;
      if (c == 3) {
        // BGR storage, RGB network order.
        dst[0] = row[3 * x + 2];
        dst[1] = row[3 * x + 1];
        dst[2] = row[3 * x + 0];
      } else {
        dst[0] = row[x];
      }
    }
  }
}

Tensor images_to_tensor(std::span<const cv::Mat> images, Shape per_sample) {
  per_sample.n = static_cast<int>(images.size());
  Tensor t(per_sample);
  for (std::size_t i = 0; i < images.size(); ++i) {
    image_to_input(images[i], t.sample(static_cast<int>(i)), per_sample);
  }
  return t;
}

std::vector<double> pack_landmarks(const LandmarkSet& set) {
  if (!set.is_complete()) {
    throw IncompleteLandmarkSet("network targets need all 55 landmarks");
  }
  std::vector<double> v;
  v.reserve(2 * kNumLandmarks);
  for (const auto& p : set.points()) {
    v.push_back(p.x / kFrameSize);
    v.push_back(p.y / kFrameSize);
  }
  return v;
}

LandmarkSet unpack_landmarks(std::span<const double> values) {
  std::vector<double> xy(values.begin(), values.end());
  for (auto& v : xy) v *= kFrameSize;
  return LandmarkSet::from_xy(xy, {kFrameSize, kFrameSize});
}

SampleSource::SampleSource(std::span<const Sample> samples, Shape per_sample)
    : samples_(samples), shape_(per_sample) {
  shape_.n = 1;
}

void SampleSource::fill(std::span<const std::size_t> indices, Tensor& inputs,
                        Tensor& targets) const {
  Shape in = shape_;
  in.n = static_cast<int>(indices.size());
  inputs = Tensor(in);
  targets = Tensor({in.n, 1, 1, 2 * kNumLandmarks});
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const Sample& s = samples_[indices[i]];
    image_to_input(s.image, inputs.sample(static_cast<int>(i)), shape_);
    const auto t = pack_landmarks(s.landmarks);
    std::copy(t.begin(), t.end(), targets.sample(static_cast<int>(i)));
  }
}

LandmarkSet predict_landmarks(Model& model, const cv::Mat& image) {
  Shape in = model.input_shape();
  in.n = 1;
  Tensor x(in);
  image_to_input(image, x.sample(0), in);
  Tensor y = model.forward(x, Mode::infer);
  if (y.data.size() != 2 * kNumLandmarks) {
    throw ShapeError("model emits " + std::to_string(y.data.size()) +
                     " values, landmark prediction needs 110");
  }
  return unpack_landmarks(y.data);
}

}  // namespace hrtf::net
