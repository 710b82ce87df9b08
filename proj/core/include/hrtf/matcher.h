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

// Nearest-ear search over a database of anthropometric vectors.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hrtf/anthro.h"

namespace hrtf {

enum class Side { left, right };

std::string_view to_string(Side side);
/// Accepts "left"/"right"/"L"/"R" (case-insensitive).
Side parse_side(std::string_view text);

struct EarRecord {
  std::string subject_id;
  Side side = Side::left;
  AnthroVector anthro;
  std::optional<std::string> hrtf_ref;
  friend bool operator==(const EarRecord&, const EarRecord&) = default;
};

/// Ordered, immutable once built. Row order is the tie-break order.
class AnthroDatabase {
 public:
  AnthroDatabase() = default;
  /// Validates every record and rejects duplicate (subject_id, side) pairs.
  explicit AnthroDatabase(std::vector<EarRecord> records,
                          std::filesystem::path source_dir = {});

  const std::vector<EarRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  /// Directory relative hrtf_ref paths are resolved against.
  const std::filesystem::path& source_dir() const { return source_dir_; }

 private:
  std::vector<EarRecord> records_;
  std::filesystem::path source_dir_;
};

struct RankedRecord {
  std::size_t row = 0;  // index into AnthroDatabase::records()
  EarRecord record;
  double distance = 0.0;
};

struct MatchResult {
  EarRecord best;
  std::size_t best_row = 0;
  double distance = 0.0;
  std::vector<RankedRecord> ranking;  // ascending distance, ties by row
};

struct MatchOptions {
  /// Per-component weights on squared differences; all ones when absent.
  std::optional<std::array<double, kNumDistances>> weights;
  /// Restricts candidates to one ear side when set.
  std::optional<Side> side_filter;
};

/// CSV with header "subject_id,side,d1,...,d7[,hrtf_ref]".
AnthroDatabase load_database(const std::filesystem::path& path);

double vector_distance(const AnthroVector& a, const AnthroVector& b);
double vector_distance(const AnthroVector& a, const AnthroVector& b,
                       const std::array<double, kNumDistances>& weights);

/// Exhaustive scan. Throws EmptyDatabase when no candidate remains.
MatchResult best_match(const AnthroVector& query, const AnthroDatabase& db,
                       const MatchOptions& options = {});

/// Returns the stored reference verbatim. Local paths (relative ones are
/// taken against `base_dir`) must exist; URIs with a scheme are not checked.
std::string resolve_hrtf(const MatchResult& result, const std::filesystem::path& base_dir = {});

std::string format_match_report(const MatchResult& result, std::size_t top_k);
nlohmann::json match_to_json(const MatchResult& result, std::size_t top_k);

}  // namespace hrtf
