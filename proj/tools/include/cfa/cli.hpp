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

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace cfa::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kDataError = 3,
  kNumericError = 4,
};

/// Runs one subcommand (train, eval, baseline-eval, gradcheck,
/// gen-synthetic). Every failure is reported on `err` as a single line.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

int run(int argc, const char* const* argv);

/// Ordered key=value settings.
using Settings = std::map<std::string, std::string>;

/// Parses `key=value` lines; blank lines and `#` comments are skipped and
/// whitespace around keys and values is trimmed. Throws ConfigError on a
/// malformed line or a key outside `allowed`.
Settings parse_settings(const std::string& text, const std::string& origin,
                        const std::vector<std::string>& allowed);

Settings read_settings(const std::string& path,
                       const std::vector<std::string>& allowed);

/// One `key=value` line per entry, in key order.
std::string format_settings(const Settings& settings);

}  // namespace cfa::cli
