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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hrtf {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// anthro-core
class InvalidLandmark : public Error {
 public:
  using Error::Error;
};
class IncompleteLandmarkSet : public Error {
 public:
  using Error::Error;
};
class SizeMismatch : public Error {
 public:
  using Error::Error;
};
class LandmarkFormatError : public Error {
 public:
  using Error::Error;
};

// dataset
class ReframeError : public Error {
 public:
  using Error::Error;
};
class EmptyCorpus : public Error {
 public:
  using Error::Error;
};

// landmark-net
class ShapeError : public Error {
 public:
  using Error::Error;
};
class ModelFormatError : public Error {
 public:
  using Error::Error;
};
class VersionMismatch : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};
class TruncatedFile : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};
class ChecksumMismatch : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};

// calibration
class CalibrationDegenerate : public Error {
 public:
  CalibrationDegenerate(const std::string& what, std::size_t component)
      : Error(what), component_(component) {}
  /// Zero-based index of the offending distance (0 = d1).
  std::size_t component() const noexcept { return component_; }

 private:
  std::size_t component_;
};

// matcher
class MalformedRow : public Error {
 public:
  MalformedRow(const std::string& what, std::size_t line)
      : Error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};
class DuplicateRecord : public Error {
 public:
  using Error::Error;
};
class EmptyDatabase : public Error {
 public:
  using Error::Error;
};
class NoHrtfAttached : public Error {
 public:
  using Error::Error;
};
class NotFound : public Error {
 public:
  using Error::Error;
};

// mesh-render
class StlFormatError : public Error {
 public:
  using Error::Error;
};
class CorruptStl : public StlFormatError {
 public:
  using StlFormatError::StlFormatError;
};
class EmptyMesh : public Error {
 public:
  using Error::Error;
};

// pipeline
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace hrtf
