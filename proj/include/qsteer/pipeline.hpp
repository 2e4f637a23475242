/*
 * Copyright (c) 2026, the qsteer authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef QSTEER_PIPELINE_HPP
#define QSTEER_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qsteer/dataset.hpp"
#include "qsteer/learn.hpp"

namespace qsteer {

/// Everything one end-to-end run needs.  The master seed overrides the
/// seeds inside the split and mlp sub-configs so a single number pins the
/// whole run.
struct PipelineConfig {
  std::uint64_t seed = 1;
  int n_states = 1000;
  SchemeKind scheme = SchemeKind::FV1;
  SplitConfig split;
  MlpConfig mlp;
  SelfTrainConfig self_train;
  SdpConfig solver;
  int workers = 1;  // 0 = hardware concurrency
  std::string out_dir = ".";

  void validate() const;
};

/// Key/value header plus the per-iteration history block.
struct EvaluationReport {
  std::vector<std::pair<std::string, std::string>> header;
  TrainHistory history;

  /// First header value for key, or throws.
  const std::string& at(const std::string& key) const;
};

void save_report(const EvaluationReport& report, const std::string& path);
EvaluationReport load_report(const std::string& path);

/// A small named-column numeric table, the common shape of every figure
/// artifact (scatter, history, histogram, Werner sweep).
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void save_table(const Table& table, const std::string& path);
Table load_table(const std::string& path);

struct PipelineOutcome {
  EvaluationReport report;
  SelfTrainResult training;
  std::vector<DatasetRecord> test;  // with oracle labels
};

/// generate -> label -> featurize -> split -> self-train -> evaluate.
/// Writes report.txt, scatter.csv, history.csv and errors.csv into
/// cfg.out_dir; on failure removes whatever it had written and rethrows
/// with a stage-tagged message.
PipelineOutcome run_pipeline(const PipelineConfig& cfg);

struct WernerSweep {
  Table table;  // p, sw_sdp, sw_pred
  EvaluationReport report;
};

/// Trains on a Werner-family benchmark set (cfg.n_states evenly spaced
/// mixing weights, cfg fractions) and evaluates oracle vs prediction on
/// the given grid of mixing weights.
WernerSweep werner_sweep(const std::vector<double>& grid,
                         const PipelineConfig& cfg);

}  // namespace qsteer

#endif  // QSTEER_PIPELINE_HPP
