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

#ifndef WAITTIME_ERROR_H_
#define WAITTIME_ERROR_H_

#include <stdexcept>
#include <string>
#include <vector>

namespace waittime {

// Invalid configuration or parameters. Carries every violation found, not
// only the first one.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& message)
      : ConfigError(std::vector<std::string>{message}) {}
  explicit ConfigError(std::vector<std::string> violations);

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// Input data that cannot be used: malformed files, schema mismatches,
// non-finite features, fingerprint mismatches.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A coordinate or region id outside the configured grid.
class OutOfBounds : public DataError {
 public:
  using DataError::DataError;
};

// Unreadable or unwritable file or stream.
class IoError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace waittime

#endif  // WAITTIME_ERROR_H_
