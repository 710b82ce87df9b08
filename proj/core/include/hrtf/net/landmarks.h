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

// Glue between corpora of ear images and the regression network: input
// scaling, target packing, batch sources and landmark prediction.

#include <span>
#include <vector>

#include <opencv2/core.hpp>

#include "hrtf/anthro.h"
#include "hrtf/dataset.h"
#include "hrtf/net/train.h"

namespace hrtf::net {

/// RGB, values scaled to [0,1]. Accepts 8-bit or float BGR/gray images.
void image_to_input(const cv::Mat& image, double* out, Shape per_sample);
Tensor images_to_tensor(std::span<const cv::Mat> images, Shape per_sample);

/// Interleaved (x0, y0, x1, y1, ...) coordinates divided by 224.
std::vector<double> pack_landmarks(const LandmarkSet& set);
/// Inverse of pack_landmarks: multiplies by 224 and assigns labels 0..54.
LandmarkSet unpack_landmarks(std::span<const double> values);

/// Streams Sample images and landmark targets without holding a tensor of
/// the whole corpus in memory.
class SampleSource final : public BatchSource {
 public:
  SampleSource(std::span<const Sample> samples, Shape per_sample = {1, 224, 224, 3});
  std::size_t size() const override { return samples_.size(); }
  Shape input_shape() const override { return shape_; }
  int target_size() const override { return 2 * kNumLandmarks; }
  void fill(std::span<const std::size_t> indices, Tensor& inputs,
            Tensor& targets) const override;

 private:
  std::span<const Sample> samples_;
  Shape shape_;
};

/// Inference on one image sized to the model input.
LandmarkSet predict_landmarks(Model& model, const cv::Mat& image);

}  // namespace hrtf::net
