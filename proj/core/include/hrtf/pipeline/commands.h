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

// One function per subcommand. Each is deterministic given its config.

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hrtf/calibration.h"
#include "hrtf/errors.h"
#include "hrtf/matcher.h"
#include "hrtf/net/train.h"
#include "hrtf/pipeline/config.h"
#include "hrtf/render.h"

namespace hrtf::pipeline {

inline constexpr int kExitOk = 0;
inline constexpr int kExitStageFailure = 1;
inline constexpr int kExitConfigError = 2;

/// A library error annotated with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// 2 for ConfigError, 1 for anything else.
int exit_code_for(const std::exception& e);

/// Calls `f`, rethrowing library errors as StageError(stage). ConfigError
/// and StageError pass through unchanged.
template <typename F>
auto run_stage(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e.what());
  }
}

// train ---------------------------------------------------------------------

struct TrainOutcome {
  net::TrainHistory history;
  std::filesystem::path model_path;
  std::filesystem::path history_path;
  std::size_t samples = 0;
};

/// One line echoing architecture and optimizer settings.
std::string run_header(const PipelineConfig& config);
/// "epoch,loss,mean_radial_error_px,pck" followed by one row per epoch.
std::string format_history_csv(const net::TrainHistory& history);
std::filesystem::path history_path_for(const PipelineConfig& config);

/// Writes the model container and the history CSV; progress goes to `log`
/// one line per epoch.
TrainOutcome cmd_train(const PipelineConfig& config, std::ostream& log);

// match ---------------------------------------------------------------------

struct MatchRequest {
  std::optional<std::filesystem::path> image;
  /// "label x y" file in the 224x224 frame; REF_A/REF_B lines are honoured
  /// together with `reference_length_cm`.
  std::optional<std::filesystem::path> landmarks;
  std::optional<AnthroVector> vector;
  std::optional<ReferenceDistance> reference;
  std::optional<double> reference_length_cm;
};

struct MatchReport {
  std::string input_kind;  // image | landmarks | vector
  std::string input;
  std::optional<LandmarkSet> landmarks;  // the selected subset
  std::optional<PixelDistanceVector> px;
  AnthroVector cm;
  std::optional<ConversionFactors> factors;
  std::optional<ReferenceDistance> reference;
  MatchResult match;
  std::optional<std::string> hrtf;
  std::string hrtf_error;

  /// Same keys on every run; unavailable stages are null.
  nlohmann::json to_json(std::size_t top_k) const;
  std::string to_text(std::size_t top_k) const;
};

/// Exactly one input must be set. Vector input skips the model and factors.
MatchReport cmd_match(const MatchRequest& request, const PipelineConfig& config);

// calibrate -----------------------------------------------------------------

struct CalibrateOutcome {
  ConversionFactors factors;
  std::vector<CalibrationRecord> records;
  std::vector<std::pair<std::string, std::string>> skipped;  // ear id, reason
};

/// Pairs annotated ears (aggregated .txt or per-landmark .json directory)
/// with the cm table by ear id. Unpaired or degenerate ears are skipped and
/// reported. Writes the factors CSV and, when `records_out` is non-empty,
/// the per-ear calibration CSV.
CalibrateOutcome cmd_calibrate(const std::filesystem::path& annotations_dir,
                               const std::filesystem::path& cm_table,
                               const std::filesystem::path& factors_out,
                               const std::filesystem::path& records_out = {});

// render / augment / evaluate -----------------------------------------------

BatchRenderReport cmd_render(const PipelineConfig& config, const std::filesystem::path& out_dir);

struct AugmentOutcome {
  std::size_t train = 0;
  std::size_t test = 0;
  std::filesystem::path manifest;
  std::size_t skipped_inputs = 0;
};

/// Streams every sample and its five variants to disk under `out_dir`
/// (images/<split>, landmarks/<split>, manifest.csv).
AugmentOutcome cmd_augment(const PipelineConfig& config, const std::filesystem::path& out_dir);

struct EvaluateOutcome {
  net::Evaluation evaluation;
  std::string split;  // "test", or "train" when the corpus has no test split
};

EvaluateOutcome cmd_evaluate(const PipelineConfig& config);

}  // namespace hrtf::pipeline
