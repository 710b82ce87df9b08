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

#include <cmath>

#include <gtest/gtest.h>

#include "hrtf/net/landmarks.h"
#include "support.h"

namespace hrtf::net {
namespace {

Model tiny_regressor(std::uint64_t seed) {
  return Model({LayerSpec::flatten(), LayerSpec::dense(16, Activation::relu),
                LayerSpec::dense(4, Activation::linear)},
               {1, 2, 2, 2}, seed);
}

TensorSource tiny_data(int n, std::uint64_t seed) {
  Rng rng(seed);
  Tensor x({n, 2, 2, 2}), y({n, 1, 1, 4});
  for (auto& v : x.data) v = rng.uniform(-1, 1);
  for (auto& v : y.data) v = rng.uniform(0.2, 0.8);
  return TensorSource(x, y);
}

TEST(Adam, FirstTwoStepsByHand) {
  Model m({LayerSpec::dense(1, Activation::linear)}, {1, 1, 1, 1}, 0);
  auto params = m.parameters();
  params[0]->value = {0.5};
  params[1]->value = {0.0};
  TrainConfig c;
  c.learning_rate = 0.1;
  Adam adam(c);
  params[0]->grad = {2.0};
  params[1]->grad = {-0.5};
  adam.step(m);
  // Bias correction makes the first step lr * g / (|g| + eps).
  EXPECT_NEAR(params[0]->value[0], 0.5 - 0.1 * 2.0 / (2.0 + 1e-7), 1e-15);
  EXPECT_NEAR(params[1]->value[0], 0.0 + 0.1 * 0.5 / (0.5 + 1e-7), 1e-15);
  params[0]->grad = {1.0};
  adam.step(m);
  const double m2 = 0.9 * 0.2 + 0.1 * 1.0;
  const double v2 = 0.999 * 0.004 + 0.001 * 1.0;
  const double mh = m2 / (1 - 0.81), vh = v2 / (1 - 0.999 * 0.999);
  EXPECT_NEAR(params[0]->value[0], 0.5 - 0.1 * 2.0 / (2.0 + 1e-7) - 0.1 * mh / (std::sqrt(vh) + 1e-7),
              1e-14);
}

TEST(Adam, InverseTimeDecay) {
  Model m({LayerSpec::dense(1, Activation::linear)}, {1, 1, 1, 1}, 0);
  auto params = m.parameters();
  params[0]->value = {0.0};
  TrainConfig c;
  c.learning_rate = 1.0;
  c.decay = 1.0;
  c.epsilon = 0.0;
  Adam adam(c);
  params[0]->grad = {1.0};
  params[1]->grad = {0.0};
  adam.step(m);
  adam.step(m);
  // Constant gradient: each corrected step has magnitude lr_t = 1 / (1 + t - 1).
  EXPECT_NEAR(params[0]->value[0], -1.5, 1e-12);
}

TEST(Train, DeterministicGivenSeed) {
  auto data = tiny_data(10, 1);
  TrainConfig c;
  c.epochs = 5;
  c.batch_size = 3;
  c.seed = 77;
  Model a = tiny_regressor(1), b = tiny_regressor(1);
  auto ha = train(a, data, c);
  auto hb = train(b, data, c);
  EXPECT_EQ(a.snapshot(), b.snapshot());
  ASSERT_EQ(ha.epochs.size(), 5u);
  EXPECT_EQ(ha.epochs.back().loss, hb.epochs.back().loss);
}

TEST(Train, LossFallsOnTinyProblem) {
  auto data = tiny_data(8, 2);
  TrainConfig c;
  c.epochs = 300;
  c.batch_size = 8;
  c.learning_rate = 0.01;
  Model m = tiny_regressor(3);
  auto h = train(m, data, c);
  EXPECT_LT(h.epochs.back().loss, 0.1 * h.epochs.front().loss);
}

TEST(Train, DivergenceRollsBack) {
  auto data = tiny_data(4, 3);
  TrainConfig c;
  c.epochs = 20;
  c.batch_size = 2;
  c.learning_rate = 1e150;
  Model m = tiny_regressor(4);
  const auto before = m.snapshot();
  try {
    train(m, data, c);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GE(e.epoch(), 1);
    EXPECT_EQ(m.snapshot(), e.last_good());
    if (e.epoch() == 1) {
      EXPECT_EQ(m.snapshot(), before);
    }
  }
}

TEST(Train, RejectsMismatchedData) {
  auto data = tiny_data(4, 3);
  Model m({LayerSpec::flatten(), LayerSpec::dense(3, Activation::linear)}, {1, 2, 2, 2}, 0);
  EXPECT_THROW(train(m, data, TrainConfig{}), ShapeError);
}

TEST(Metrics, RadialErrorAndPck) {
  std::vector<double> target{0.5, 0.5, 0.1, 0.1};
  std::vector<double> pred{0.5 + 3.0 / 224, 0.5 + 4.0 / 224, 0.1 + 20.0 / 224, 0.1};
  auto m = landmark_metrics(pred, target, 10.0);
  EXPECT_NEAR(m.mean_radial_error_px, (5.0 + 20.0) / 2, 1e-9);
  EXPECT_DOUBLE_EQ(m.pck, 0.5);
}

TEST(Landmarks, PackUnpackAndChannelOrder) {
  std::mt19937_64 rng(5);
  auto lm = testing::random_landmarks(rng);
  auto packed = pack_landmarks(lm);
  ASSERT_EQ(packed.size(), 110u);
  EXPECT_DOUBLE_EQ(packed[2], lm.at(1).x / 224);
  auto back = unpack_landmarks(packed);
  for (int i = 0; i < kNumLandmarks; ++i) EXPECT_NEAR(back.at(i).y, lm.at(i).y, 1e-12);

  cv::Mat img(224, 224, CV_8UC3, cv::Scalar(255, 0, 51));  // BGR
  std::vector<double> buf(224 * 224 * 3);
  image_to_input(img, buf.data(), {1, 224, 224, 3});
  EXPECT_DOUBLE_EQ(buf[0], 0.2);  // red
  EXPECT_DOUBLE_EQ(buf[2], 1.0);  // blue
  EXPECT_THROW(image_to_input(cv::Mat(10, 10, CV_8UC3), buf.data(), {1, 224, 224, 3}), ShapeError);
}

}  // namespace
}  // namespace hrtf::net
