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

#ifndef WAITTIME_TOOLS_CLI_H_
#define WAITTIME_TOOLS_CLI_H_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "waittime/config.h"
#include "waittime/feature_base.h"

namespace waittime::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitInternal = 4;

struct CommonOptions {
  std::optional<std::filesystem::path> config_path;
  int threads = 1;
  bool timestamp = true;

  // Defaults when no config file was given.
  RunConfig LoadConfig() const;
};

// Output file names inside command output directories.
inline constexpr const char* kConfigEcho = "config.json";
inline constexpr const char* kTripsCsv = "trips.csv";
inline constexpr const char* kTruthJson = "truth.json";
inline constexpr const char* kTrainFeatures = "train.csv";
inline constexpr const char* kTestFeatures = "test.csv";
inline constexpr const char* kRejectionsCsv = "rejections.csv";
inline constexpr const char* kModelJson = "model.json";
inline constexpr const char* kSummaryCsv = "summary.csv";

void CmdSynth(const CommonOptions& opts, const std::filesystem::path& out_dir);
void CmdFeaturize(const CommonOptions& opts, const std::filesystem::path& trips,
                  Task task, const std::filesystem::path& out_dir);
void CmdTrain(const CommonOptions& opts, const std::filesystem::path& features,
              const std::filesystem::path& out_dir);
void CmdPredict(const std::filesystem::path& model,
                const std::filesystem::path& features,
                const std::filesystem::path& out_csv);
// Writes reports/<model>_<task>.json, models/<model>_<task>.json for the
// boosted models, and summary.csv.
void CmdEval(const CommonOptions& opts, const std::filesystem::path& trips,
             const std::filesystem::path& out_dir);
void CmdExplain(const std::filesystem::path& model,
                const std::filesystem::path& out_csv);

// Parses argv, dispatches, and maps exceptions to exit codes. Failures print
// one line to `err`: "error kind=<config|data|internal> code=<n> msg=<text>".
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace waittime::cli

#endif  // WAITTIME_TOOLS_CLI_H_
