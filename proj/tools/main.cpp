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

// qsteer command line: staged dataset commands (gen, label, featurize,
// split, train, eval), the fused pipeline (all), and the Werner sweep
// (werner).  Exit codes: 0 ok, 1 usage, 2 data/validation, 3 numerics.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qsteer/pipeline.hpp"
#include "qsteer/steering.hpp"

namespace fs = std::filesystem;
using namespace qsteer;

namespace {

struct CliState {
  PipelineConfig cfg;
  std::string scheme = "fv1";
  std::string optimizer = "adam";
  std::string states_path = "states.csv";
  std::string dataset_path = "dataset.csv";
  std::string models_dir;  // eval: where model_<k>.txt live; default out
  int grid_points = 101;
};

std::string iso_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path out_file(const CliState& st, const char* name) {
  fs::create_directories(st.cfg.out_dir);
  return fs::path(st.cfg.out_dir) / name;
}

void resolve_enums(CliState& st) {
  st.cfg.scheme = scheme_from_name(st.scheme);
  if (st.optimizer == "adam") {
    st.cfg.mlp.optimizer = Optimizer::Adam;
  } else if (st.optimizer == "sgd") {
    st.cfg.mlp.optimizer = Optimizer::Sgd;
  } else {
    throw std::invalid_argument("unknown optimizer: " + st.optimizer);
  }
}

void add_common(CLI::App* sub, CliState& st) {
  sub->set_config("--config", "", "key = value file; flags override");
  sub->add_option("--seed", st.cfg.seed, "master seed")
      ->capture_default_str();
  sub->add_option("-o,--out", st.cfg.out_dir, "output directory")
      ->capture_default_str();
}

void add_solver(CLI::App* sub, CliState& st) {
  sub->add_option("--feas-tol", st.cfg.solver.feas_tol,
                  "SDP feasibility tolerance")
      ->capture_default_str();
  sub->add_option("--gap-tol", st.cfg.solver.gap_tol, "SDP gap tolerance")
      ->capture_default_str();
  sub->add_option("--max-iter", st.cfg.solver.max_iter,
                  "SDP iteration budget")
      ->capture_default_str();
}

void add_scheme(CLI::App* sub, CliState& st) {
  sub->add_option("--scheme", st.scheme, "feature scheme fv1|fv2|fv3|fv4")
      ->capture_default_str();
}

void add_split(CLI::App* sub, CliState& st) {
  sub->add_option("--test-fraction", st.cfg.split.test_fraction,
                  "test share of all records")
      ->capture_default_str();
  sub->add_option("--labeled-fraction",
                  st.cfg.split.labeled_fraction_of_train,
                  "labeled share of the training part")
      ->capture_default_str();
}

void add_learn(CLI::App* sub, CliState& st) {
  sub->add_option("--epochs", st.cfg.mlp.max_epochs, "max training epochs")
      ->capture_default_str();
  sub->add_option("--patience", st.cfg.mlp.patience,
                  "early-stopping patience (epochs)")
      ->capture_default_str();
  sub->add_option("--batch", st.cfg.mlp.batch_size, "minibatch size")
      ->capture_default_str();
  sub->add_option("--lr", st.cfg.mlp.step_size, "optimizer step size")
      ->capture_default_str();
  sub->add_option("--val-fraction", st.cfg.mlp.validation_fraction,
                  "held-out share of the labeled set")
      ->capture_default_str();
  sub->add_option("--min-delta", st.cfg.mlp.min_delta,
                  "early-stopping improvement threshold")
      ->capture_default_str();
  sub->add_option("--optimizer", st.optimizer, "adam|sgd")
      ->capture_default_str();
  sub->add_option("--iterations", st.cfg.self_train.iterations,
                  "self-training iterations")
      ->capture_default_str();
  sub->add_option("--ensemble", st.cfg.self_train.ensemble_size,
                  "ensemble size")
      ->capture_default_str();
  sub->add_option("--quantile", st.cfg.self_train.quantile,
                  "admitted share of the pool per iteration")
      ->capture_default_str();
  sub->add_option("--std-cap", st.cfg.self_train.std_cap,
                  "max ensemble std for admission")
      ->capture_default_str();
  sub->add_option("--admission-cap", st.cfg.self_train.admission_cap,
                  "hard cap on admissions per iteration (0 = none)")
      ->capture_default_str();
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

DatasetMeta make_meta(const CliState& st, const FeatureScheme& scheme) {
  DatasetMeta meta;
  meta.seed = st.cfg.seed;
  meta.scheme = scheme_name(st.cfg.scheme);
  for (const auto& b : scheme.bases) meta.basis_tags.push_back(b.tag);
  meta.feas_tol = st.cfg.solver.feas_tol;
  meta.gap_tol = st.cfg.solver.gap_tol;
  meta.max_iter = st.cfg.solver.max_iter;
  meta.timestamp = iso_timestamp();
  return meta;
}

void cmd_gen(CliState& st) {
  auto states = generate_states(st.cfg.n_states, st.cfg.seed);
  const auto path = out_file(st, "states.csv");
  save_states(states, path.string());
  std::printf("wrote %s (%zu states)\n", path.string().c_str(), states.size());
}

void cmd_label(CliState& st) {
  auto states = load_states(st.states_path);
  label_states(states, st.cfg.seed, st.cfg.solver, st.cfg.workers);
  const auto path = out_file(st, "states.csv");
  save_states(states, path.string());
  std::printf("wrote %s (%zu labeled)\n", path.string().c_str(),
              states.size());
}

void cmd_featurize(CliState& st) {
  resolve_enums(st);
  auto states = load_states(st.states_path);
  const auto scheme = FeatureScheme::make(st.cfg.scheme, st.cfg.seed);
  auto records = featurize_states(states, scheme, st.cfg.seed);
  const auto path = out_file(st, "dataset.csv");
  save_dataset(records, path.string());
  save_metadata(make_meta(st, scheme), out_file(st, "dataset.meta").string());
  std::printf("wrote %s (%zu records, dim %d)\n", path.string().c_str(),
              records.size(), scheme.dim());
}

void cmd_split(CliState& st) {
  auto records = load_dataset(st.dataset_path);
  SplitConfig sc = st.cfg.split;
  sc.seed = st.cfg.seed;
  split_dataset(records, sc);
  const auto path = out_file(st, "dataset.csv");
  save_dataset(records, path.string());
  std::printf("wrote %s\n", path.string().c_str());
}

void cmd_train(CliState& st) {
  resolve_enums(st);
  auto records = load_dataset(st.dataset_path);
  if (records.empty()) throw DataError(st.dataset_path + ": empty dataset");
  std::vector<DatasetRecord> labeled, unlabeled, test;
  partition(records, labeled, unlabeled, test);
  MlpConfig mlp = st.cfg.mlp;
  mlp.seed = st.cfg.seed;
  mlp.input_dim = records.front().features.dim();
  auto result = self_train(labeled, unlabeled, test, st.cfg.self_train, mlp);
  for (std::size_t m = 0; m < result.ensemble.size(); ++m) {
    const auto name = "model_" + std::to_string(m) + ".txt";
    save_model(result.ensemble[m], out_file(st, name.c_str()).string());
  }
  PipelineConfig rc = st.cfg;
  rc.n_states = static_cast<int>(records.size());
  EvaluationReport rep;
  rep.header = {
      {"seed", std::to_string(rc.seed)},
      {"n_states", std::to_string(rc.n_states)},
      {"iterations", std::to_string(rc.self_train.iterations)},
      {"ensemble_size", std::to_string(rc.self_train.ensemble_size)},
      {"final_labeled",
       std::to_string(result.history.iterations.back().labeled_size)},
  };
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g",
                result.history.iterations.back().test_mse);
  rep.header.emplace_back("final_test_mse", buf);
  std::snprintf(buf, sizeof(buf), "%.17g",
                result.history.iterations.back().test_r2);
  rep.header.emplace_back("final_test_r2", buf);
  rep.history = result.history;
  save_report(rep, out_file(st, "report.txt").string());
  Table history;
  history.columns = {"iteration", "mse", "r2"};
  for (const auto& it : result.history.iterations)
    history.rows.push_back(
        {static_cast<double>(it.iteration), it.test_mse, it.test_r2});
  save_table(history, out_file(st, "history.csv").string());
  std::printf("trained %zu models; final r2 %.6f\n", result.ensemble.size(),
              result.history.iterations.back().test_r2);
}

void cmd_eval(CliState& st) {
  auto records = load_dataset(st.dataset_path);
  std::vector<DatasetRecord> labeled, unlabeled, test;
  partition(records, labeled, unlabeled, test);
  if (test.empty()) throw DataError(st.dataset_path + ": no test records");
  const std::string dir =
      st.models_dir.empty() ? st.cfg.out_dir : st.models_dir;
  std::vector<MlpModel> ensemble;
  for (std::size_t m = 0;; ++m) {
    const fs::path p = fs::path(dir) / ("model_" + std::to_string(m) + ".txt");
    if (!fs::exists(p)) break;
    ensemble.push_back(load_model(p.string()));
  }
  if (ensemble.empty())
    throw DataError(dir + ": no model_<k>.txt files found");
  std::vector<double> oracle, predicted;
  for (const auto& r : test) oracle.push_back(*r.label);
  predicted = predict_ensemble(ensemble, test);
  const double m = mse(oracle, predicted);
  const double r2 = r_squared(oracle, predicted);

  EvaluationReport rep;
  char buf[40];
  rep.header.emplace_back("n_test", std::to_string(test.size()));
  rep.header.emplace_back("ensemble_size", std::to_string(ensemble.size()));
  std::snprintf(buf, sizeof(buf), "%.17g", m);
  rep.header.emplace_back("test_mse", buf);
  std::snprintf(buf, sizeof(buf), "%.17g", r2);
  rep.header.emplace_back("test_r2", buf);
  save_report(rep, out_file(st, "eval_report.txt").string());

  Table scatter;
  scatter.columns = {"sw_sdp", "sw_pred"};
  for (std::size_t i = 0; i < oracle.size(); ++i)
    scatter.rows.push_back({oracle[i], predicted[i]});
  save_table(scatter, out_file(st, "scatter.csv").string());

  constexpr int kBins = 100;
  std::vector<int> counts(kBins, 0);
  for (std::size_t i = 0; i < oracle.size(); ++i) {
    int bin = static_cast<int>(std::floor((predicted[i] - oracle[i] + 1.0) /
                                          0.02));
    if (bin < 0) bin = 0;
    if (bin >= kBins) bin = kBins - 1;
    ++counts[bin];
  }
  Table errors;
  errors.columns = {"error_lo", "error_hi", "count"};
  for (int b = 0; b < kBins; ++b)
    errors.rows.push_back({-1.0 + b * 0.02, -1.0 + (b + 1) * 0.02,
                           static_cast<double>(counts[b])});
  save_table(errors, out_file(st, "errors.csv").string());
  std::printf("test mse %.6g r2 %.6f (%zu records)\n", m, r2, test.size());
}

void cmd_all(CliState& st) {
  resolve_enums(st);
  auto outcome = run_pipeline(st.cfg);
  const auto& last = outcome.report.history.iterations.back();
  std::printf("pipeline done: r2 %.6f mse %.6g (report in %s)\n", last.test_r2,
              last.test_mse, st.cfg.out_dir.c_str());
}

void cmd_werner(CliState& st) {
  resolve_enums(st);
  if (st.grid_points < 2)
    throw std::invalid_argument("werner sweep needs at least 2 grid points");
  std::vector<double> grid(st.grid_points);
  for (int i = 0; i < st.grid_points; ++i)
    grid[i] = static_cast<double>(i) / (st.grid_points - 1);
  auto sweep = werner_sweep(grid, st.cfg);
  save_table(sweep.table, out_file(st, "werner.csv").string());
  save_report(sweep.report, out_file(st, "werner_report.txt").string());
  std::printf("werner sweep done: benchmark r2 %.6f\n",
              sweep.report.history.iterations.back().test_r2);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"steerable-weight labeling and learning pipeline"};
  app.require_subcommand(1);

  CliState st;
  // werner gets its own copy: small benchmark set, longer training
  CliState wst;
  wst.cfg.n_states = 300;
  wst.cfg.mlp.max_epochs = 4000;
  wst.cfg.mlp.patience = 200;
  wst.cfg.mlp.min_delta = 1e-9;

  auto* gen = app.add_subcommand("gen", "draw random two-qubit states");
  add_common(gen, st);
  gen->add_option("-n,--n", st.cfg.n_states, "number of states")
      ->capture_default_str();
  gen->callback([&] { cmd_gen(st); });

  auto* label = app.add_subcommand("label", "attach steerable weights");
  add_common(label, st);
  add_solver(label, st);
  label->add_option("--states", st.states_path, "states file to label")
      ->capture_default_str();
  label->add_option("--workers", st.cfg.workers, "labeling threads (0 = all)")
      ->capture_default_str();
  label->callback([&] { cmd_label(st); });

  auto* feat = app.add_subcommand("featurize", "measure feature vectors");
  add_common(feat, st);
  add_scheme(feat, st);
  add_solver(feat, st);  // recorded in the sidecar
  feat->add_option("--states", st.states_path, "labeled states file")
      ->capture_default_str();
  feat->callback([&] { cmd_featurize(st); });

  auto* split = app.add_subcommand("split", "assign labeled/unlabeled/test");
  add_common(split, st);
  add_split(split, st);
  split->add_option("--dataset", st.dataset_path, "dataset file to split")
      ->capture_default_str();
  split->callback([&] { cmd_split(st); });

  auto* train = app.add_subcommand("train", "self-train the ensemble");
  add_common(train, st);
  add_learn(train, st);
  train->add_option("--dataset", st.dataset_path, "split dataset file")
      ->capture_default_str();
  train->callback([&] { cmd_train(st); });

  auto* eval = app.add_subcommand("eval", "score models on the test split");
  add_common(eval, st);
  eval->add_option("--dataset", st.dataset_path, "split dataset file")
      ->capture_default_str();
  eval->add_option("--models", st.models_dir,
                   "directory holding model_<k>.txt (default: --out)");
  eval->callback([&] { cmd_eval(st); });

  auto* all = app.add_subcommand("all", "full pipeline in one go");
  add_common(all, st);
  add_scheme(all, st);
  add_solver(all, st);
  add_split(all, st);
  add_learn(all, st);
  all->add_option("-n,--n", st.cfg.n_states, "number of states")
      ->capture_default_str();
  all->add_option("--workers", st.cfg.workers, "labeling threads (0 = all)")
      ->capture_default_str();
  all->callback([&] { cmd_all(st); });

  auto* werner = app.add_subcommand("werner", "Werner-family benchmark+sweep");
  add_common(werner, wst);
  add_scheme(werner, wst);
  add_solver(werner, wst);
  add_split(werner, wst);
  add_learn(werner, wst);
  werner->add_option("-n,--n", wst.cfg.n_states, "benchmark set size")
      ->capture_default_str();
  werner
      ->add_option("--grid-points", wst.grid_points,
                   "sweep grid resolution over p in [0,1]")
      ->capture_default_str();
  werner->callback([&] { cmd_werner(wst); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "error (numerics): %s\n", e.what());
    return 3;
  } catch (const TrainError& e) {
    std::fprintf(stderr, "error (training): %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
