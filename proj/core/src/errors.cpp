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

#include "cfa/errors.hpp"

namespace cfa {

const char* to_string(TensorErrorKind kind) {
  switch (kind) {
    case TensorErrorKind::kIo:
      return "io error";
    case TensorErrorKind::kBadMagic:
      return "bad magic";
    case TensorErrorKind::kBadVersion:
      return "bad version";
    case TensorErrorKind::kBadShape:
      return "bad shape";
    case TensorErrorKind::kTruncated:
      return "truncated file";
    case TensorErrorKind::kPayloadMismatch:
      return "payload mismatch";
    case TensorErrorKind::kNonFinite:
      return "non-finite value";
  }
  return "unknown tensor error";
}

}  // namespace cfa
