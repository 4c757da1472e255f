// Copyright 2026 The cyclegan-vc3 Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. run() is the whole program minus process exit, so
// tests can drive subcommands in-process.

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "cvc3/signal.hpp"

namespace cvc3::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kData = 3,
  kNumeric = 4,
};

std::string tool_version();

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Side-by-side heatmap of equally tall matrices as binary PPM (P6); each
/// panel is scaled to its own range, low mel bins at the bottom.
std::string render_ppm(const std::vector<MelSpectrogram>& spectrograms);

/// One CSV row per mel bin, one column per frame, 17 significant digits.
std::string matrix_csv(const Matrix& m);
Matrix parse_matrix_csv(const std::string& text);

}  // namespace cvc3::cli
