// Copyright 2026 The qdyn developers.
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
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qdyn::io {

// 17 significant digits: enough for double round trips, so equal runs
// produce byte-identical files.
std::string format_g17(double v);

// One CSV cell, already formatted. Implicit construction pins the formatting
// rules in a single place: doubles always go through format_g17.
struct Cell {
  std::string text;
  Cell(double v) : text(format_g17(v)) {}           // NOLINT(runtime/explicit)
  Cell(int v) : text(std::to_string(v)) {}          // NOLINT(runtime/explicit)
  Cell(long v) : text(std::to_string(v)) {}         // NOLINT(runtime/explicit)
  Cell(long long v) : text(std::to_string(v)) {}    // NOLINT(runtime/explicit)
  Cell(std::uint64_t v) : text(std::to_string(v)) {}  // NOLINT
  Cell(const char* v) : text(v) {}                  // NOLINT(runtime/explicit)
  Cell(std::string v) : text(std::move(v)) {}       // NOLINT(runtime/explicit)
};

using Row = std::vector<Cell>;

// Header line plus comma-joined rows, "\n" line ends, no trailing spaces.
std::string to_csv(const std::vector<std::string>& header,
                   const std::vector<Row>& rows);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace qdyn::io
