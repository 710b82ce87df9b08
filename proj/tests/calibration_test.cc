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

#include "hrtf/calibration.h"

#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "hrtf/atomic_file.h"
#include "hrtf/errors.h"
#include "support.h"

namespace hrtf {
namespace {

std::vector<CalibrationRecord> synthetic_records(const std::array<double, 7>& f, int n,
                                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 0.6);
  std::vector<CalibrationRecord> out;
  for (int i = 0; i < n; ++i) {
    CalibrationRecord r;
    r.ear_id = "ear" + std::to_string(i);
    for (int j = 0; j < 7; ++j) {
      r.px.d[j] = u(rng);
      r.cm.d[j] = f[j] * r.px.d[j];
    }
    out.push_back(r);
  }
  return out;
}

TEST(Calibration, RecoversKnownFactors) {
  const std::array<double, 7> f{10.1, 13.4, 11.6, 9.5, 8.6, 11.8, 10.5};
  auto recs = synthetic_records(f, 116, 1);
  auto got = average_factors(recs);
  for (int j = 0; j < 7; ++j) EXPECT_NEAR(got.factor[j], f[j], 1e-12);
  EXPECT_EQ(got.n_ears, 116u);
}

TEST(Calibration, SingleEarGivesItsQuotients) {
  auto recs = synthetic_records({1, 2, 3, 4, 5, 6, 7}, 1, 2);
  recs[0].cm.d[2] = 0.77;
  auto got = average_factors(recs);
  EXPECT_EQ(got.factor[2], 0.77 / recs[0].px.d[2]);
}

TEST(Calibration, OrderInvariant) {
  auto recs = synthetic_records({3, 3, 3, 3, 3, 3, 3}, 50, 3);
  for (auto& r : recs) r.cm.d[0] *= 1.0 + 1e-3 * r.px.d[1];
  auto a = average_factors(recs);
  std::mt19937_64 rng(4);
  std::shuffle(recs.begin(), recs.end(), rng);
  auto b = average_factors(recs);
  EXPECT_EQ(a.factor, b.factor);
}

TEST(Calibration, DegenerateReportsComponent) {
  auto recs = synthetic_records({1, 1, 1, 1, 1, 1, 1}, 3, 5);
  recs[1].px.d[4] = 0.0;
  try {
    average_factors(recs);
    FAIL();
  } catch (const CalibrationDegenerate& e) {
    EXPECT_EQ(e.component(), 4u);
  }
}

TEST(Calibration, ReferencePresetVerbatim) {
  auto f = load_reference_factors();
  const std::array<double, 7> table{10.129765, 13.442287, 11.625544, 9.539581,
                                    8.621989,  11.824525, 10.532984};
  EXPECT_EQ(f.factor, table);
  EXPECT_EQ(f.overall_average, 10.313797);
  EXPECT_TRUE(f.unvalidated);
  EXPECT_EQ(f.n_ears, 116u);
}

TEST(Calibration, ToCentimetres) {
  PixelDistanceVector px{{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7}};
  auto cm = to_centimetres(px, ConversionFactors::uniform(2.0, "test"));
  EXPECT_DOUBLE_EQ(cm.d[6], 1.4);
}

TEST(Calibration, ReferenceScaleIsFrameInvariant) {
  // 3 cm across 158 px in the 224 frame means 6 cm per normalized unit.
  ReferenceDistance ref{{10, 20, 0}, {10, 178, 0}, 3.0};
  EXPECT_NEAR(scale_from_reference(ref), 6.0, 1e-12);
  ReferenceDistance big{{20, 40, 0}, {20, 356, 0}, 3.0};
  EXPECT_NEAR(scale_from_reference(big, {448, 448}), 6.0, 1e-12);
  ref.point_b = ref.point_a;
  EXPECT_THROW(scale_from_reference(ref), InvalidArgument);
}

TEST(CalibrationCsv, FactorsAndRecordsRoundTrip) {
  testing::TempDir dir;
  auto recs = synthetic_records({1, 2, 3, 4, 5, 6, 7}, 5, 6);
  write_calibration_csv(dir / "cal.csv", recs);
  auto back = read_calibration_csv(dir / "cal.csv");
  ASSERT_EQ(back.size(), 5u);
  EXPECT_EQ(back[3].px, recs[3].px);
  EXPECT_EQ(back[3].cm, recs[3].cm);

  auto f = average_factors(recs);
  write_factors_csv(dir / "f.csv", f);
  auto g = read_factors_csv(dir / "f.csv");
  EXPECT_EQ(g.factor, f.factor);
  EXPECT_EQ(g.overall_average, f.overall_average);
  const auto text = read_file(dir / "f.csv");
  EXPECT_EQ(text.rfind("distance,factor_cm_per_unit\n", 0), 0u);
  EXPECT_NE(text.find("overall_average,"), std::string::npos);

  write_factors_csv(dir / "p.csv", load_reference_factors());
  EXPECT_EQ(read_factors_csv(dir / "p.csv").overall_average, 10.313797);

  write_file_atomic(dir / "bad.csv", "distance,factor_cm_per_unit\nd1,abc\n");
  EXPECT_THROW(read_factors_csv(dir / "bad.csv"), MalformedRow);
}

TEST(CalibrationCsv, CmTable) {
  testing::TempDir dir;
  write_file_atomic(dir / "cm.csv",
                    "ear_id,d1_cm,d2_cm,d3_cm,d4_cm,d5_cm,d6_cm,d7_cm,extra\n"
                    "1_L,1,2,3,4,5,6,7,x\n");
  auto t = read_cm_table(dir / "cm.csv");
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.at("1_L").d[6], 7.0);
}

}  // namespace
}  // namespace hrtf
