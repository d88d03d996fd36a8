// Copyright 2026 The CFA Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace cfa {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid hyperparameters, shapes that contradict a configuration, bad
/// command-line or config-file input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Problems with on-disk data: unreadable files, malformed tensors,
/// inconsistent manifests, not enough samples for an episode.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Numerical failures: degenerate descriptors, non-finite losses.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Raised when an aggregated vector has (near) zero norm and cannot be
/// L2-normalized.
class DegenerateDescriptor : public NumericError {
 public:
  using NumericError::NumericError;
};

enum class TensorErrorKind {
  kIo,
  kBadMagic,
  kBadVersion,
  kBadShape,
  kTruncated,
  kPayloadMismatch,
  kNonFinite,
};

const char* to_string(TensorErrorKind kind);

class TensorFormatError : public DataError {
 public:
  TensorFormatError(TensorErrorKind kind, const std::string& what)
      : DataError(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  TensorErrorKind kind() const noexcept { return kind_; }

 private:
  TensorErrorKind kind_;
};

}  // namespace cfa
