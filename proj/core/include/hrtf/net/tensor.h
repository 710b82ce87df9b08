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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hrtf::net {

/// NHWC extents. Flat (dense) activations use h = w = 1.
struct Shape {
  int n = 0;
  int h = 0;
  int w = 0;
  int c = 0;

  std::size_t per_sample() const {
    return static_cast<std::size_t>(h) * static_cast<std::size_t>(w) * static_cast<std::size_t>(c);
  }
  std::size_t elements() const { return static_cast<std::size_t>(n) * per_sample(); }
  std::string str() const;  // "(h, w, c)" or "(c)" when flat
  friend bool operator==(const Shape&, const Shape&) = default;
};

struct Tensor {
  Shape shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(Shape s, double fill = 0.0) : shape(s), data(s.elements(), fill) {}

  double* sample(int i) { return data.data() + static_cast<std::size_t>(i) * shape.per_sample(); }
  const double* sample(int i) const {
    return data.data() + static_cast<std::size_t>(i) * shape.per_sample();
  }
  double& at(int n, int y, int x, int ch) {
    return data[((static_cast<std::size_t>(n) * shape.h + y) * shape.w + x) * shape.c + ch];
  }
  double at(int n, int y, int x, int ch) const {
    return data[((static_cast<std::size_t>(n) * shape.h + y) * shape.w + x) * shape.c + ch];
  }
};

/// Small deterministic generator (splitmix64) so that initialization and
/// dropout masks do not depend on the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}
  std::uint64_t next();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

}  // namespace hrtf::net
