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

#include "hrtf/matcher.h"

#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "hrtf/atomic_file.h"
#include "hrtf/errors.h"
#include "support.h"

namespace hrtf {
namespace {

AnthroDatabase random_db(int rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.3, 3.0);
  std::vector<EarRecord> recs;
  for (int i = 0; i < rows; ++i) {
    EarRecord r{"s" + std::to_string(i / 2), i % 2 ? Side::right : Side::left, {}, std::nullopt};
    for (auto& v : r.anthro.d) v = u(rng);
    recs.push_back(r);
  }
  return AnthroDatabase(recs);
}

TEST(Matcher, AgreesWithQuadraticScan) {
  auto db = random_db(116, 1);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.3, 3.0);
  for (int q = 0; q < 200; ++q) {
    AnthroVector v;
    for (auto& x : v.d) x = u(rng);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < db.size(); ++i) {
      double s = 0;
      for (int j = 0; j < 7; ++j) s += (v.d[j] - db.records()[i].anthro.d[j]) * (v.d[j] - db.records()[i].anthro.d[j]);
      if (std::sqrt(s) < best_d) {
        best_d = std::sqrt(s);
        best = i;
      }
    }
    auto m = best_match(v, db);
    EXPECT_EQ(m.best_row, best);
    EXPECT_NEAR(m.distance, best_d, 1e-12);
    EXPECT_EQ(m.ranking.size(), db.size());
  }
}

TEST(Matcher, ExactMemberHasZeroDistance) {
  auto db = random_db(20, 3);
  auto m = best_match(db.records()[13].anthro, db);
  EXPECT_EQ(m.best_row, 13u);
  EXPECT_EQ(m.distance, 0.0);
}

TEST(Matcher, TiesGoToLowestRow) {
  auto base = random_db(6, 4).records();
  base.push_back({"dup", Side::left, base[4].anthro, std::nullopt});
  AnthroDatabase db(base);
  auto m = best_match(base[4].anthro, db);
  EXPECT_EQ(m.best_row, 4u);
  EXPECT_EQ(m.ranking[1].row, 6u);
}

TEST(Matcher, SideFilterAndWeights) {
  auto db = random_db(30, 5);
  MatchOptions opt;
  opt.side_filter = Side::right;
  auto m = best_match(db.records()[4].anthro, db, opt);
  EXPECT_EQ(m.best.side, Side::right);
  for (const auto& r : m.ranking) EXPECT_EQ(r.record.side, Side::right);

  AnthroVector a{{1, 1, 1, 1, 1, 1, 1}}, b{{2, 1, 1, 1, 1, 1, 3}};
  std::array<double, 7> w{4, 1, 1, 1, 1, 1, 0};
  EXPECT_DOUBLE_EQ(vector_distance(a, b, w), 2.0);
  EXPECT_DOUBLE_EQ(vector_distance(a, b), std::sqrt(5.0));
}

TEST(Matcher, EmptyAndInvalid) {
  EXPECT_THROW(best_match({}, AnthroDatabase{}), EmptyDatabase);
  auto recs = random_db(2, 6).records();
  recs[1] = recs[0];
  EXPECT_THROW(AnthroDatabase{recs}, DuplicateRecord);
  recs = random_db(2, 6).records();
  recs[0].anthro.d[0] = -1;
  EXPECT_THROW(AnthroDatabase{recs}, InvalidArgument);
}

TEST(Database, LoadsCsvWithOptionalRef) {
  testing::TempDir dir;
  write_file_atomic(dir / "db.csv",
                    "subject_id,side,d1,d2,d3,d4,d5,d6,d7,hrtf_ref\n"
                    "1,left,1,2,3,4,5,6,7,hrtf/1_L.sofa\n"
                    "1,R,1,2,3,4,5,6,7.5,\n");
  auto db = load_database(dir / "db.csv");
  ASSERT_EQ(db.size(), 2u);
  EXPECT_EQ(db.records()[0].hrtf_ref, "hrtf/1_L.sofa");
  EXPECT_FALSE(db.records()[1].hrtf_ref);
  EXPECT_EQ(db.records()[1].side, Side::right);

  auto m = best_match(db.records()[0].anthro, db);
  EXPECT_THROW(resolve_hrtf(m, dir.path()), NotFound);
  std::filesystem::create_directories(dir / "hrtf");
  write_file_atomic(dir / "hrtf/1_L.sofa", "x");
  EXPECT_EQ(resolve_hrtf(m, dir.path()), "hrtf/1_L.sofa");
  auto m2 = best_match(db.records()[1].anthro, db);
  EXPECT_THROW(resolve_hrtf(m2, dir.path()), NoHrtfAttached);

  auto j = match_to_json(m, 1);
  EXPECT_EQ(j["row"], 0);
  EXPECT_EQ(j["ranking"].size(), 1u);
}

TEST(Database, MalformedRowCarriesLine) {
  testing::TempDir dir;
  write_file_atomic(dir / "db.csv",
                    "subject_id,side,d1,d2,d3,d4,d5,d6,d7\n"
                    "1,left,1,2,3,4,5,6,7\n"
                    "2,left,1,2,x,4,5,6,7\n");
  try {
    load_database(dir / "db.csv");
    FAIL();
  } catch (const MalformedRow& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  write_file_atomic(dir / "db2.csv", "subject_id,side,d1,d2,d3,d4,d5,d6,d7\n1,up,1,2,3,4,5,6,7\n");
  EXPECT_THROW(load_database(dir / "db2.csv"), MalformedRow);
}

}  // namespace
}  // namespace hrtf
