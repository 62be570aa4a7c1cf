/*
 * Copyright 2026 The waittime Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef WAITTIME_UTIL_H_
#define WAITTIME_UTIL_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace waittime {

// 64-bit FNV-1a, used for schema and model fingerprints.
uint64_t Fnv1a64(std::string_view data, uint64_t seed = 14695981039346656037ULL);
std::string HexFingerprint(std::string_view canonical);

// Shortest decimal text that parses back to the identical double.
std::string FormatDouble(double v);

// Splits one CSV line. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> SplitCsvLine(std::string_view line);
// Quotes a field when it contains a comma, quote or newline.
std::string CsvField(std::string_view field);

bool ParseInt64(std::string_view text, int64_t& out);
bool ParseDouble(std::string_view text, double& out);

// Writes `contents` to a temporary sibling of `path` and renames it over
// `path`, so readers never observe a partial file.
void WriteFileAtomic(const std::filesystem::path& path,
                     std::string_view contents);
std::string ReadFile(const std::filesystem::path& path);

// Floor division and non-negative modulo for possibly negative numerators.
inline int64_t FloorDiv(int64_t a, int64_t b) {
  int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}
inline int64_t FloorMod(int64_t a, int64_t b) { return a - FloorDiv(a, b) * b; }

}  // namespace waittime

#endif  // WAITTIME_UTIL_H_
