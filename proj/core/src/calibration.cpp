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
#include <cmath>

#include "hrtf/atomic_file.h"
#include "hrtf/csv.h"
#include "hrtf/errors.h"
#include "hrtf/landmark_io.h"

namespace hrtf {

namespace {

constexpr std::array<double, kNumDistances> kPublishedFactors{
    10.129765, 13.442287, 11.625544, 9.539581, 8.621989, 11.824525, 10.532984};
constexpr double kPublishedOverallAverage = 10.313797;
constexpr std::size_t kPublishedEars = 116;

std::size_t column_index(const csv::Row& header, std::string_view name,
                         const std::filesystem::path& path) {
  for (std::size_t i = 0; i < header.fields.size(); ++i) {
    if (header.fields[i] == name) return i;
  }
  throw MalformedRow(path.string() + ": missing column '" + std::string(name) + "'",
                     header.line);
}

const std::string& field(const csv::Row& row, std::size_t i) {
  if (i >= row.fields.size()) {
    throw MalformedRow("line " + std::to_string(row.line) + ": expected at least " +
                           std::to_string(i + 1) + " fields",
                       row.line);
  }
  return row.fields[i];
}

}  // namespace

ConversionFactors ConversionFactors::from_values(
    const std::array<double, kNumDistances>& factor, std::size_t n_ears,
    std::string provenance) {
  ConversionFactors f;
  f.factor = factor;
  double sum = 0.0;
  for (double v : factor) sum += v;
  f.overall_average = sum / kNumDistances;
  f.n_ears = n_ears;
  f.provenance = std::move(provenance);
  f.validate();
  return f;
}

ConversionFactors ConversionFactors::uniform(double scale, std::string provenance) {
  std::array<double, kNumDistances> f;
  f.fill(scale);
  return from_values(f, 0, std::move(provenance));
}

void ConversionFactors::validate() const {
  for (int j = 0; j < kNumDistances; ++j) {
    if (!std::isfinite(factor[j]) || factor[j] <= 0.0) {
      throw InvalidArgument("conversion factor F" + std::to_string(j + 1) +
                            " must be finite and positive");
    }
  }
  if (!std::isfinite(overall_average) || overall_average <= 0.0) {
    throw InvalidArgument("overall average factor must be finite and positive");
  }
}

std::array<double, kNumDistances> per_ear_factors(const CalibrationRecord& record) {
  std::array<double, kNumDistances> f{};
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double px = record.px.d[j];
    if (!(px > 0.0) || !std::isfinite(px)) {
      throw CalibrationDegenerate("ear '" + record.ear_id + "': d" +
                                      std::to_string(j + 1) +
                                      " pixel distance must be positive",
                                  j);
    }
    f[j] = record.cm.d[j] / px;
  }
  return f;
}

ConversionFactors average_factors(std::span<const CalibrationRecord> records) {
  if (records.empty()) throw InvalidArgument("no calibration records to average");
  std::array<std::vector<double>, kNumDistances> columns;
  for (const auto& r : records) {
    auto f = per_ear_factors(r);
    for (int j = 0; j < kNumDistances; ++j) columns[j].push_back(f[j]);
  }
  std::array<double, kNumDistances> mean{};
  for (int j = 0; j < kNumDistances; ++j) {
    std::sort(columns[j].begin(), columns[j].end());
    double sum = 0.0;
    for (double v : columns[j]) sum += v;
    mean[j] = sum / static_cast<double>(records.size());
  }
  return ConversionFactors::from_values(mean, records.size(), "computed");
}

ConversionFactors load_reference_factors() {
  ConversionFactors f;
  f.factor = kPublishedFactors;
  // Published as-is; it is not the arithmetic mean of the seven rows.
  f.overall_average = kPublishedOverallAverage;
  f.n_ears = kPublishedEars;
  f.provenance = "hutubs-reference-preset";
  f.unvalidated = true;
  return f;
}

AnthroVector to_centimetres(const PixelDistanceVector& px,
                            const ConversionFactors& factors) {
  AnthroVector cm;
  for (int j = 0; j < kNumDistances; ++j) cm.d[j] = px.d[j] * factors.factor[j];
  return cm;
}

double scale_from_reference(const ReferenceDistance& ref, ImageSize image_size) {
  if (!std::isfinite(ref.physical_length_cm) || ref.physical_length_cm <= 0.0) {
    throw InvalidArgument("reference length must be finite and positive");
  }
  if (image_size.width <= 0 || image_size.height <= 0) {
    throw InvalidArgument("image size must be positive");
  }
  const double sx = static_cast<double>(kFrameSize) / image_size.width;
  const double sy = static_cast<double>(kFrameSize) / image_size.height;
  Landmark a{ref.point_a.x * sx, ref.point_a.y * sy, 0};
  Landmark b{ref.point_b.x * sx, ref.point_b.y * sy, 1};
  const double px = euclidean_distance(a, b);
  if (px == 0.0) throw InvalidArgument("reference points coincide");
  return ref.physical_length_cm / (px / kNormalization);
}

std::vector<CalibrationRecord> read_calibration_csv(const std::filesystem::path& path) {
  auto rows = csv::parse(read_file(path));
  if (rows.empty()) throw MalformedRow(path.string() + ": missing header", 1);
  const auto& header = rows.front();
  const std::size_t id_col = column_index(header, "ear_id", path);
  std::array<std::size_t, kNumDistances> cm_col{}, px_col{};
  for (int j = 0; j < kNumDistances; ++j) {
    cm_col[j] = column_index(header, "d" + std::to_string(j + 1) + "_cm", path);
    px_col[j] = column_index(header, "d" + std::to_string(j + 1) + "_px", path);
  }
  std::vector<CalibrationRecord> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    CalibrationRecord rec;
    rec.ear_id = field(row, id_col);
    for (int j = 0; j < kNumDistances; ++j) {
      rec.cm.d[j] = csv::to_double(field(row, cm_col[j]), row.line, header.fields[cm_col[j]]);
      rec.px.d[j] = csv::to_double(field(row, px_col[j]), row.line, header.fields[px_col[j]]);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

void write_calibration_csv(const std::filesystem::path& path,
                           std::span<const CalibrationRecord> records) {
  std::vector<std::string> header{"ear_id"};
  for (int j = 1; j <= kNumDistances; ++j) header.push_back("d" + std::to_string(j) + "_cm");
  for (int j = 1; j <= kNumDistances; ++j) header.push_back("d" + std::to_string(j) + "_px");
  std::string out = csv::join(header) + "\n";
  for (const auto& r : records) {
    std::vector<std::string> f{r.ear_id};
    for (double v : r.cm.d) f.push_back(format_double(v));
    for (double v : r.px.d) f.push_back(format_double(v));
    out += csv::join(f) + "\n";
  }
  write_file_atomic(path, out);
}

ConversionFactors read_factors_csv(const std::filesystem::path& path) {
  auto rows = csv::parse(read_file(path));
  if (rows.empty() || rows.front().fields.size() < 2 ||
      rows.front().fields[0] != "distance" ||
      rows.front().fields[1] != "factor_cm_per_unit") {
    throw MalformedRow(path.string() + ": expected header 'distance,factor_cm_per_unit'", 1);
  }
  ConversionFactors f;
  std::array<bool, kNumDistances> seen{};
  bool have_average = false;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string& key = field(row, 0);
    const double v = csv::to_double(field(row, 1), row.line, "factor_cm_per_unit");
    if (key == "overall_average") {
      f.overall_average = v;
      have_average = true;
      continue;
    }
    if (key.size() == 2 && key[0] == 'd' && key[1] >= '1' && key[1] <= '7') {
      const int j = key[1] - '1';
      if (seen[j]) {
        throw MalformedRow("line " + std::to_string(row.line) + ": duplicate " + key, row.line);
      }
      seen[j] = true;
      f.factor[j] = v;
      continue;
    }
    throw MalformedRow("line " + std::to_string(row.line) + ": unknown distance '" + key + "'",
                       row.line);
  }
  for (int j = 0; j < kNumDistances; ++j) {
    if (!seen[j]) {
      throw MalformedRow(path.string() + ": missing d" + std::to_string(j + 1), rows.back().line);
    }
  }
  if (!have_average) {
    double sum = 0.0;
    for (double v : f.factor) sum += v;
    f.overall_average = sum / kNumDistances;
  }
  f.provenance = "file:" + path.filename().string();
  f.validate();
  return f;
}

std::string format_factors_csv(const ConversionFactors& factors) {
  std::string out = "distance,factor_cm_per_unit\n";
  for (int j = 0; j < kNumDistances; ++j) {
    out += "d" + std::to_string(j + 1) + "," + format_double(factors.factor[j]) + "\n";
  }
  out += "overall_average," + format_double(factors.overall_average) + "\n";
  return out;
}

void write_factors_csv(const std::filesystem::path& path, const ConversionFactors& factors) {
  write_file_atomic(path, format_factors_csv(factors));
}

std::map<std::string, AnthroVector> read_cm_table(const std::filesystem::path& path) {
  auto rows = csv::parse(read_file(path));
  if (rows.empty()) throw MalformedRow(path.string() + ": missing header", 1);
  const auto& header = rows.front();
  const std::size_t id_col = column_index(header, "ear_id", path);
  std::array<std::size_t, kNumDistances> cm_col{};
  for (int j = 0; j < kNumDistances; ++j) {
    cm_col[j] = column_index(header, "d" + std::to_string(j + 1) + "_cm", path);
  }
  std::map<std::string, AnthroVector> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    AnthroVector v;
    for (int j = 0; j < kNumDistances; ++j) {
      v.d[j] = csv::to_double(field(row, cm_col[j]), row.line, header.fields[cm_col[j]]);
    }
    if (!out.emplace(field(row, id_col), v).second) {
      throw DuplicateRecord(path.string() + ": duplicate ear_id '" + field(row, id_col) + "'");
    }
  }
  return out;
}

}  // namespace hrtf
