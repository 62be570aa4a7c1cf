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

#include "cli.h"

#include <chrono>
#include <ctime>
#include <exception>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "waittime/error.h"
#include "waittime/experiment.h"
#include "waittime/featurizer.h"
#include "waittime/gbt.h"
#include "waittime/synth.h"
#include "waittime/trip_data.h"
#include "waittime/util.h"

namespace waittime::cli {

namespace fs = std::filesystem;

namespace {

std::optional<std::string> Timestamp(const CommonOptions& opts) {
  if (!opts.timestamp) return std::nullopt;
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string(buf);
}

void EchoConfig(const RunConfig& config, const fs::path& out_dir) {
  WriteFileAtomic(out_dir / kConfigEcho, config.ToJson().dump(2) + "\n");
}

std::vector<LabeledTrip> LoadTrips(const fs::path& path, const RegionGrid& grid,
                                   std::vector<Rejection>* rejections) {
  ParseResult parsed = ParseTripsFile(path.string(), grid);
  if (parsed.trips.empty()) {
    throw DataError("no valid trips in " + path.string());
  }
  if (rejections != nullptr) *rejections = std::move(parsed.rejections);
  return std::move(parsed.trips);
}

std::string FileStem(const std::string& model, Task task) {
  return model + "_" + std::string(TaskName(task));
}

std::string OneLine(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

RunConfig CommonOptions::LoadConfig() const {
  if (config_path) return RunConfig::Load(*config_path);
  RunConfig config;
  config.Validate();
  return config;
}

void CmdSynth(const CommonOptions& opts, const fs::path& out_dir) {
  RunConfig config = opts.LoadConfig();
  SynthOutput out = GenerateTrips(config.synth, config.grid.Make(), config.slots.Make());
  WriteFileAtomic(out_dir / kTripsCsv, TripsToCsv(std::span<const TripRecord>(out.trips)));
  WriteFileAtomic(out_dir / kTruthJson, TruthToJson(out).dump(1) + "\n");
  EchoConfig(config, out_dir);
}

void CmdFeaturize(const CommonOptions& opts, const fs::path& trips, Task task,
                  const fs::path& out_dir) {
  RunConfig config = opts.LoadConfig();
  RegionGrid grid = config.grid.Make();
  std::vector<Rejection> rejections;
  std::vector<LabeledTrip> all = LoadTrips(trips, grid, &rejections);
  SplitResult split = ChronoSplit(std::move(all), config.eval.train_frac);
  bool with_interactions = config.interactions.enabled;
  std::optional<InteractionConfig> ic;
  if (with_interactions) ic = config.interactions.config;
  Featurizer featurizer =
      Featurizer::Fit(split.train, grid, config.slots.Make(),
                      config.demand_supply.granularity_min, ic);
  SaveFeatureMatrix(featurizer.FeaturizeFitRows(split.train, task, with_interactions),
                    out_dir / kTrainFeatures);
  SaveFeatureMatrix(featurizer.Featurize(split.test, task, with_interactions),
                    out_dir / kTestFeatures);
  featurizer.Save(out_dir);
  WriteFileAtomic(out_dir / kRejectionsCsv, RejectionsToCsv(rejections));
  EchoConfig(config, out_dir);
}

void CmdTrain(const CommonOptions& opts, const fs::path& features,
              const fs::path& out_dir) {
  RunConfig config = opts.LoadConfig();
  FeatureMatrix fm = LoadFeatureMatrix(features);
  TrainOptions train_options;
  train_options.num_threads = opts.threads;
  GbtModel model = TrainGbt(fm, config.gbt, train_options);
  SaveModel(model, out_dir / kModelJson, Timestamp(opts));
  EchoConfig(config, out_dir);
}

void CmdPredict(const fs::path& model_path, const fs::path& features,
                const fs::path& out_csv) {
  GbtModel model = LoadModel(model_path);
  FeatureMatrix fm = LoadFeatureMatrix(features);
  std::vector<double> pred = PredictGbt(model, fm);
  std::string out = "order_id,wt_pred_s\n";
  for (size_t i = 0; i < pred.size(); ++i) {
    out += CsvField(fm.row_ids[i]);
    out += ',';
    out += FormatDouble(pred[i]);
    out += '\n';
  }
  WriteFileAtomic(out_csv, out);
}

void CmdEval(const CommonOptions& opts, const fs::path& trips,
             const fs::path& out_dir) {
  RunConfig config = opts.LoadConfig();
  std::vector<LabeledTrip> all = LoadTrips(trips, config.grid.Make(), nullptr);
  ExperimentOptions options;
  options.num_threads = opts.threads;
  ExperimentResult result = RunExperiment(config, std::move(all), options);
  for (const EvalReport& r : result.reports) {
    WriteFileAtomic(out_dir / "reports" / (FileStem(r.model_name, r.task) + ".json"),
                    r.ToJson().dump(2) + "\n");
  }
  for (Task task : {Task::kPre, Task::kPost}) {
    for (const char* name : {kModelGbtBase, kModelFixgb}) {
      const std::string key = std::string(name) + "/" + std::string(TaskName(task));
      SaveModel(result.models.at(key),
                out_dir / "models" / (FileStem(name, task) + ".json"),
                Timestamp(opts));
    }
  }
  WriteFileAtomic(out_dir / kSummaryCsv, SummaryCsv(result.reports));
  EchoConfig(config, out_dir);
}

void CmdExplain(const fs::path& model_path, const fs::path& out_csv) {
  GbtModel model = LoadModel(model_path);
  std::string out = "rank,feature,importance\n";
  int rank = 1;
  for (const auto& [name, value] : RankedImportance(model)) {
    out += std::to_string(rank++) + "," + CsvField(name) + "," + FormatDouble(value) + "\n";
  }
  WriteFileAtomic(out_csv, out);
}

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Ride-hailing waiting-time prediction pipeline", "waittime"};
  app.require_subcommand(1);

  CommonOptions common;
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  common.threads = hw > 0 ? hw : 1;
  std::string config_path;
  bool no_timestamp = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "RunConfig JSON file")->check(CLI::ExistingFile);
    sub->add_option("--threads", common.threads, "Worker threads")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--no-timestamp", no_timestamp, "Omit created_at from models");
  };

  std::string trips, features, model, out_path, task_name;

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic trip dataset");
  add_common(synth);
  synth->add_option("--out", out_path, "Output directory")->required();

  CLI::App* featurize = app.add_subcommand("featurize", "Build train/test feature matrices");
  add_common(featurize);
  featurize->add_option("--trips", trips, "Trip CSV")->required()->check(CLI::ExistingFile);
  featurize->add_option("--task", task_name, "pre or post")
      ->required()
      ->check(CLI::IsMember({"pre", "post"}));
  featurize->add_option("--out", out_path, "Output directory")->required();

  CLI::App* train = app.add_subcommand("train", "Train a boosted-tree model");
  add_common(train);
  train->add_option("--features", features, "Feature CSV")->required()->check(CLI::ExistingFile);
  train->add_option("--out", out_path, "Output directory")->required();

  CLI::App* predict = app.add_subcommand("predict", "Predict waiting times");
  predict->add_option("--model", model, "Model JSON")->required()->check(CLI::ExistingFile);
  predict->add_option("--features", features, "Feature CSV")->required()->check(CLI::ExistingFile);
  predict->add_option("--out", out_path, "Predictions CSV")->required();

  CLI::App* eval = app.add_subcommand("eval", "Run the full model x task experiment");
  add_common(eval);
  eval->add_option("--trips", trips, "Trip CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", out_path, "Output directory")->required();

  CLI::App* explain = app.add_subcommand("explain", "Rank feature importance of a model");
  explain->add_option("--model", model, "Model JSON")->required()->check(CLI::ExistingFile);
  explain->add_option("--out", out_path, "Importance CSV")->required();

  auto fail = [&err](const char* kind, int code, const std::string& msg) {
    err << "error kind=" << kind << " code=" << code << " msg=" << OneLine(msg) << "\n";
    return code;
  };

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    return fail("config", kExitConfig, e.what());
  }
  if (!config_path.empty()) common.config_path = config_path;
  common.timestamp = !no_timestamp;

  try {
    if (synth->parsed()) {
      CmdSynth(common, out_path);
    } else if (featurize->parsed()) {
      CmdFeaturize(common, trips, ParseTask(task_name), out_path);
    } else if (train->parsed()) {
      CmdTrain(common, features, out_path);
    } else if (predict->parsed()) {
      CmdPredict(model, features, out_path);
    } else if (eval->parsed()) {
      CmdEval(common, trips, out_path);
    } else if (explain->parsed()) {
      CmdExplain(model, out_path);
    }
  } catch (const ConfigError& e) {
    return fail("config", kExitConfig, e.what());
  } catch (const DataError& e) {
    return fail("data", kExitData, e.what());
  } catch (const std::exception& e) {
    return fail("internal", kExitInternal, e.what());
  } catch (...) {
    return fail("internal", kExitInternal, "unknown exception");
  }
  return kExitOk;
}

}  // namespace waittime::cli
