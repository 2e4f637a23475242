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

#include "qsteer/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "qsteer/steering.hpp"

namespace qsteer {

namespace {

namespace fs = std::filesystem;

// stream tag for sweep-grid feature extraction
constexpr std::uint64_t kGridSalt = 0x67726964;

const char* const kReportMagic = "qsteer report v1";
const char* const kHistoryColumns =
    "iteration,labeled_size,admitted,test_mse,test_r2";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Rethrows the current stage's exception with a stage-tagged message while
// keeping its type, so exit-code mapping still sees what went wrong.
template <typename F>
auto stage(const char* name, F&& body) {
  const auto tag = [name](const char* what) {
    return std::string(name) + ": " + what;
  };
  try {
    return body();
  } catch (const SolverError& e) {
    throw SolverError(tag(e.what()));
  } catch (const TrainError& e) {
    throw TrainError(tag(e.what()));
  } catch (const DataError& e) {
    throw DataError(tag(e.what()));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(tag(e.what()));
  } catch (const std::exception& e) {
    throw std::runtime_error(tag(e.what()));
  }
}

void partition(const std::vector<DatasetRecord>& records,
               std::vector<DatasetRecord>& labeled,
               std::vector<DatasetRecord>& unlabeled,
               std::vector<DatasetRecord>& test) {
  for (const auto& r : records) {
    switch (r.split) {
      case Split::Labeled: labeled.push_back(r); break;
      case Split::Unlabeled: unlabeled.push_back(r); break;
      case Split::Test: test.push_back(r); break;
    }
  }
}

EvaluationReport build_report(const PipelineConfig& cfg,
                              const SelfTrainResult& result) {
  const IterationStats& last = result.history.iterations.back();
  EvaluationReport rep;
  rep.header = {
      {"seed", std::to_string(cfg.seed)},
      {"n_states", std::to_string(cfg.n_states)},
      {"scheme", scheme_name(cfg.scheme)},
      {"test_fraction", fmt(cfg.split.test_fraction)},
      {"labeled_fraction", fmt(cfg.split.labeled_fraction_of_train)},
      {"iterations", std::to_string(cfg.self_train.iterations)},
      {"ensemble_size", std::to_string(cfg.self_train.ensemble_size)},
      {"final_labeled", std::to_string(last.labeled_size)},
      {"final_test_mse", fmt(last.test_mse)},
      {"final_test_r2", fmt(last.test_r2)},
  };
  rep.history = result.history;
  return rep;
}

Table error_histogram(const std::vector<double>& oracle,
                      const std::vector<double>& predicted) {
  constexpr int kBins = 100;
  constexpr double kLo = -1.0, kHi = 1.0;
  constexpr double kWidth = (kHi - kLo) / kBins;
  std::vector<int> counts(kBins, 0);
  for (std::size_t i = 0; i < oracle.size(); ++i) {
    const double d = predicted[i] - oracle[i];
    int bin = static_cast<int>(std::floor((d - kLo) / kWidth));
    if (bin < 0) bin = 0;
    if (bin >= kBins) bin = kBins - 1;
    ++counts[bin];
  }
  Table t;
  t.columns = {"error_lo", "error_hi", "count"};
  for (int b = 0; b < kBins; ++b)
    t.rows.push_back({kLo + b * kWidth, kLo + (b + 1) * kWidth,
                      static_cast<double>(counts[b])});
  return t;
}

}  // namespace

void PipelineConfig::validate() const {
  if (n_states < 5)
    throw std::invalid_argument("pipeline needs at least 5 states");
  if (workers < 0) throw std::invalid_argument("workers must be >= 0");
  if (out_dir.empty()) throw std::invalid_argument("output directory unset");
  split.validate();
  mlp.validate();
  self_train.validate();
}

const std::string& EvaluationReport::at(const std::string& key) const {
  for (const auto& [k, v] : header)
    if (k == key) return v;
  throw std::out_of_range("report has no key: " + key);
}

void save_report(const EvaluationReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << kReportMagic << "\n";
  for (const auto& [k, v] : report.header) out << k << " = " << v << "\n";
  out << "history = " << kHistoryColumns << "\n";
  for (const auto& it : report.history.iterations)
    out << it.iteration << ',' << it.labeled_size << ',' << it.admitted << ','
        << fmt(it.test_mse) << ',' << fmt(it.test_r2) << "\n";
  if (!out.flush()) throw DataError(path + ": write failed");
}

EvaluationReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open");
  std::string line;
  if (!std::getline(in, line) || line != kReportMagic)
    throw DataError(path + ": not a report file");
  EvaluationReport rep;
  bool in_history = false;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    if (!in_history) {
      const auto eq = line.find(" = ");
      if (eq == std::string::npos)
        throw DataError(where + ": expected 'key = value'");
      const std::string key = line.substr(0, eq);
      const std::string value = line.substr(eq + 3);
      if (key == "history") {
        if (value != kHistoryColumns)
          throw DataError(where + ": unexpected history columns");
        in_history = true;
      } else {
        rep.header.emplace_back(key, value);
      }
      continue;
    }
    IterationStats st;
    char comma = 0;
    std::istringstream row(line);
    if (!(row >> st.iteration >> comma >> st.labeled_size >> comma >>
          st.admitted >> comma >> st.test_mse >> comma >> st.test_r2))
      throw DataError(where + ": malformed history row");
    rep.history.iterations.push_back(std::move(st));
  }
  if (!in_history) throw DataError(path + ": missing history block");
  return rep;
}

void save_table(const Table& table, const std::string& path) {
  if (table.columns.empty())
    throw std::invalid_argument("table needs at least one column");
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    out << (c ? "," : "") << table.columns[c];
  out << "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw std::invalid_argument("table row width != column count");
    for (std::size_t c = 0; c < row.size(); ++c)
      out << (c ? "," : "") << fmt(row[c]);
    out << "\n";
  }
  if (!out.flush()) throw DataError(path + ": write failed");
}

Table load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open");
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  Table t;
  std::istringstream head(line);
  std::string col;
  while (std::getline(head, col, ',')) t.columns.push_back(col);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw DataError(path + ":" + std::to_string(lineno) +
                        ": bad numeric cell '" + cell + "'");
      }
    }
    if (row.size() != t.columns.size())
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": row width != column count");
    t.rows.push_back(std::move(row));
  }
  return t;
}

PipelineOutcome run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw DataError(cfg.out_dir + ": cannot create output directory");

  auto states = stage("generate", [&] {
    return generate_states(cfg.n_states, cfg.seed);
  });
  stage("label", [&] {
    label_states(states, cfg.seed, cfg.solver, cfg.workers);
    return 0;
  });
  auto scheme = FeatureScheme::make(cfg.scheme, cfg.seed);
  auto records = stage("featurize", [&] {
    return featurize_states(states, scheme, cfg.seed);
  });
  stage("split", [&] {
    SplitConfig sc = cfg.split;
    sc.seed = cfg.seed;
    split_dataset(records, sc);
    return 0;
  });

  std::vector<DatasetRecord> labeled, unlabeled, test;
  partition(records, labeled, unlabeled, test);
  MlpConfig mlp = cfg.mlp;
  mlp.seed = cfg.seed;
  mlp.input_dim = scheme.dim();
  auto training = stage("train", [&] {
    return self_train(labeled, unlabeled, test, cfg.self_train, mlp);
  });

  PipelineOutcome out;
  out.training = std::move(training);
  out.report = build_report(cfg, out.training);
  out.test = std::move(test);

  std::vector<double> oracle, predicted;
  oracle.reserve(out.test.size());
  for (const auto& r : out.test) oracle.push_back(*r.label);
  predicted = predict_ensemble(out.training.ensemble, out.test);

  Table scatter;
  scatter.columns = {"sw_sdp", "sw_pred"};
  for (std::size_t i = 0; i < oracle.size(); ++i)
    scatter.rows.push_back({oracle[i], predicted[i]});

  Table history;
  history.columns = {"iteration", "mse", "r2"};
  for (const auto& it : out.report.history.iterations)
    history.rows.push_back(
        {static_cast<double>(it.iteration), it.test_mse, it.test_r2});

  // written last so a failed run leaves no partial artifact set behind
  std::vector<fs::path> written;
  try {
    const auto emit = [&](const fs::path& name, auto&& saver) {
      const fs::path p = fs::path(cfg.out_dir) / name;
      saver(p.string());
      written.push_back(p);
    };
    emit("report.txt",
         [&](const std::string& p) { save_report(out.report, p); });
    emit("scatter.csv", [&](const std::string& p) { save_table(scatter, p); });
    emit("history.csv", [&](const std::string& p) { save_table(history, p); });
    emit("errors.csv", [&](const std::string& p) {
      save_table(error_histogram(oracle, predicted), p);
    });
  } catch (...) {
    for (const auto& p : written) fs::remove(p, ec);
    throw;
  }
  return out;
}

WernerSweep werner_sweep(const std::vector<double>& grid,
                         const PipelineConfig& cfg) {
  cfg.validate();
  for (double p : grid)
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("werner grid value outside [0, 1]");

  const auto scheme = FeatureScheme::make(cfg.scheme, cfg.seed);

  // Benchmark set: evenly spaced mixing weights.  Labeled directly (no
  // retry/regeneration — the family is fixed, a solver failure is final).
  std::vector<LabeledState> states(cfg.n_states);
  auto training = stage("werner-train", [&] {
    for (int i = 0; i < cfg.n_states; ++i) {
      const double p =
          cfg.n_states == 1
              ? 0.0
              : static_cast<double>(i) / (cfg.n_states - 1);
      states[i].id = i;
      states[i].state = werner_state(p).matrix();
      states[i].label = label_state(DensityMatrix(states[i].state), cfg.solver);
    }
    auto records = featurize_states(states, scheme, cfg.seed);
    SplitConfig sc = cfg.split;
    sc.seed = cfg.seed;
    split_dataset(records, sc);
    std::vector<DatasetRecord> labeled, unlabeled, test;
    partition(records, labeled, unlabeled, test);
    MlpConfig mlp = cfg.mlp;
    mlp.seed = cfg.seed;
    mlp.input_dim = scheme.dim();
    return self_train(labeled, unlabeled, test, cfg.self_train, mlp);
  });

  WernerSweep sweep;
  sweep.table.columns = {"p", "sw_sdp", "sw_pred"};
  stage("werner-sweep", [&] {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const DensityMatrix rho = werner_state(grid[i]);
      const double sdp = label_state(rho, cfg.solver);
      RandomStream rng = RandomStream::substream(cfg.seed, i, kGridSalt);
      const FeatureVector fv = extract_features(rho, scheme, rng);
      const double pred = predict_ensemble(training.ensemble, fv);
      sweep.table.rows.push_back({grid[i], sdp, pred});
    }
    return 0;
  });
  sweep.report = build_report(cfg, training);
  return sweep;
}

}  // namespace qsteer
