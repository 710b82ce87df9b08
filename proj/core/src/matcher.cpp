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

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "hrtf/atomic_file.h"
#include "hrtf/csv.h"
#include "hrtf/errors.h"

namespace hrtf {

std::string_view to_string(Side side) { return side == Side::left ? "left" : "right"; }

Side parse_side(std::string_view text) {
  std::string s;
  for (char c : text) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "left" || s == "l") return Side::left;
  if (s == "right" || s == "r") return Side::right;
  throw InvalidArgument("unknown ear side '" + std::string(text) + "'");
}

AnthroDatabase::AnthroDatabase(std::vector<EarRecord> records,
                               std::filesystem::path source_dir)
    : records_(std::move(records)), source_dir_(std::move(source_dir)) {
  std::set<std::pair<std::string, Side>> seen;
  for (const auto& r : records_) {
    r.anthro.validate();
    if (!seen.emplace(r.subject_id, r.side).second) {
      throw DuplicateRecord("duplicate ear record (" + r.subject_id + ", " +
                            std::string(to_string(r.side)) + ")");
    }
  }
}

AnthroDatabase load_database(const std::filesystem::path& path) {
  const auto rows = csv::parse(read_file(path));
  if (rows.empty()) throw MalformedRow(path.string() + ": missing header", 1);

  const auto& header = rows.front().fields;
  const bool has_ref = header.size() == 10;
  bool header_ok = (header.size() == 9 || has_ref) && header[0] == "subject_id" &&
                   header[1] == "side" && (!has_ref || header[9] == "hrtf_ref");
  for (int j = 0; header_ok && j < kNumDistances; ++j) {
    header_ok = header[2 + j] == "d" + std::to_string(j + 1);
  }
  if (!header_ok) {
    throw MalformedRow(path.string() + ": expected header subject_id,side,d1..d7[,hrtf_ref]", 1);
  }

  std::vector<EarRecord> records;
  std::set<std::pair<std::string, Side>> seen;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.fields.size() != header.size()) {
      throw MalformedRow(fmt::format("{}: line {}: expected {} fields, got {}", path.string(),
                                     row.line, header.size(), row.fields.size()),
                         row.line);
    }
    EarRecord rec;
    rec.subject_id = row.fields[0];
    if (rec.subject_id.empty()) {
      throw MalformedRow(fmt::format("{}: line {}: empty subject_id", path.string(), row.line),
                         row.line);
    }
    try {
      rec.side = parse_side(row.fields[1]);
    } catch (const InvalidArgument& e) {
      throw MalformedRow(fmt::format("{}: line {}: {}", path.string(), row.line, e.what()),
                         row.line);
    }
    for (int j = 0; j < kNumDistances; ++j) {
      rec.anthro.d[j] = csv::to_double(row.fields[2 + j], row.line, header[2 + j]);
      if (rec.anthro.d[j] <= 0.0) {
        throw MalformedRow(fmt::format("{}: line {}: d{} must be positive", path.string(),
                                       row.line, j + 1),
                           row.line);
      }
    }
    if (has_ref && !row.fields[9].empty()) rec.hrtf_ref = row.fields[9];
    if (!seen.emplace(rec.subject_id, rec.side).second) {
      throw DuplicateRecord(fmt::format("{}: line {}: duplicate ear ({}, {})", path.string(),
                                        row.line, rec.subject_id, to_string(rec.side)));
    }
    records.push_back(std::move(rec));
  }
  return AnthroDatabase(std::move(records), path.parent_path());
}

double vector_distance(const AnthroVector& a, const AnthroVector& b) {
  if (!a.is_finite() || !b.is_finite()) {
    throw InvalidArgument("vector_distance on non-finite components");
  }
  double sum = 0.0;
  for (int j = 0; j < kNumDistances; ++j) {
    const double diff = a.d[j] - b.d[j];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

double vector_distance(const AnthroVector& a, const AnthroVector& b,
                       const std::array<double, kNumDistances>& weights) {
  if (!a.is_finite() || !b.is_finite()) {
    throw InvalidArgument("vector_distance on non-finite components");
  }
  double sum = 0.0;
  for (int j = 0; j < kNumDistances; ++j) {
    if (!std::isfinite(weights[j]) || weights[j] < 0.0) {
      throw InvalidArgument("match weights must be finite and non-negative");
    }
    const double diff = a.d[j] - b.d[j];
    sum += weights[j] * diff * diff;
  }
  return std::sqrt(sum);
}

MatchResult best_match(const AnthroVector& query, const AnthroDatabase& db,
                       const MatchOptions& options) {
  if (!query.is_finite()) throw InvalidArgument("query vector has non-finite components");
  MatchResult result;
  const auto& records = db.records();
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (options.side_filter && records[i].side != *options.side_filter) continue;
    const double d = options.weights ? vector_distance(query, records[i].anthro, *options.weights)
                                     : vector_distance(query, records[i].anthro);
    result.ranking.push_back({i, records[i], d});
  }
  if (result.ranking.empty()) throw EmptyDatabase("no database records to match against");
  std::sort(result.ranking.begin(), result.ranking.end(),
            [](const RankedRecord& a, const RankedRecord& b) {
              if (a.distance != b.distance) return a.distance < b.distance;
              return a.row < b.row;
            });
  result.best = result.ranking.front().record;
  result.best_row = result.ranking.front().row;
  result.distance = result.ranking.front().distance;
  return result;
}

std::string resolve_hrtf(const MatchResult& result, const std::filesystem::path& base_dir) {
  if (!result.best.hrtf_ref) {
    throw NoHrtfAttached("ear (" + result.best.subject_id + ", " +
                         std::string(to_string(result.best.side)) + ") has no HRTF reference");
  }
  const std::string& ref = *result.best.hrtf_ref;
  if (ref.find("://") != std::string::npos) return ref;
  std::filesystem::path p = ref;
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  if (!std::filesystem::exists(p)) throw NotFound("HRTF file not found: " + p.string());
  return ref;
}

std::string format_match_report(const MatchResult& result, std::size_t top_k) {
  std::ostringstream os;
  os << fmt::format("best match: subject {} ({} ear), distance {:.6f} cm\n",
                    result.best.subject_id, to_string(result.best.side), result.distance);
  os << "hrtf: " << result.best.hrtf_ref.value_or("(none)") << "\n";
  const std::size_t n = std::min(top_k, result.ranking.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = result.ranking[i];
    os << fmt::format("{:>4}  {:<12} {:<5} {:.6f}\n", i + 1, r.record.subject_id,
                      to_string(r.record.side), r.distance);
  }
  return os.str();
}

nlohmann::json match_to_json(const MatchResult& result, std::size_t top_k) {
  nlohmann::json ranking = nlohmann::json::array();
  const std::size_t n = std::min(top_k, result.ranking.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = result.ranking[i];
    ranking.push_back({{"row", r.row},
                       {"subject_id", r.record.subject_id},
                       {"side", to_string(r.record.side)},
                       {"distance", r.distance}});
  }
  nlohmann::json j;
  j["subject_id"] = result.best.subject_id;
  j["side"] = to_string(result.best.side);
  j["row"] = result.best_row;
  j["distance"] = result.distance;
  j["hrtf_ref"] = result.best.hrtf_ref ? nlohmann::json(*result.best.hrtf_ref) : nlohmann::json();
  j["ranking"] = std::move(ranking);
  return j;
}

}  // namespace hrtf
