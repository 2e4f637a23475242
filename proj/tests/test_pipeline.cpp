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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qsteer/pipeline.hpp"
#include "qsteer/steering.hpp"

using namespace qsteer;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "qsteer_test_pipeline";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

EvaluationReport sample_report() {
  EvaluationReport rep;
  rep.header = {{"seed", "7"}, {"scheme", "fv1"}, {"final_test_mse", "0.25"}};
  IterationStats a;
  a.iteration = 1;
  a.labeled_size = 10;
  a.admitted = 3;
  a.test_mse = 0.125;
  a.test_r2 = 0.75;
  IterationStats b;
  b.iteration = 2;
  b.labeled_size = 13;
  b.admitted = 0;
  b.test_mse = 1.0 / 3.0;  // not exactly representable in decimal
  b.test_r2 = -0.125;
  rep.history.iterations = {a, b};
  return rep;
}

// fast structural config: tiny ensemble, short training
PipelineConfig small_config(const fs::path& out) {
  PipelineConfig cfg;
  cfg.seed = 7;
  cfg.n_states = 200;
  cfg.scheme = SchemeKind::FV1;
  cfg.mlp.max_epochs = 50;
  cfg.mlp.patience = 5;
  cfg.self_train.iterations = 2;
  cfg.self_train.ensemble_size = 2;
  cfg.out_dir = out.string();
  return cfg;
}

}  // namespace

TEST_CASE("report roundtrip preserves header and history exactly") {
  const fs::path dir = scratch_dir();
  const EvaluationReport rep = sample_report();
  const std::string path = (dir / "report.txt").string();
  save_report(rep, path);
  const EvaluationReport back = load_report(path);

  REQUIRE(back.header.size() == rep.header.size());
  for (std::size_t i = 0; i < rep.header.size(); ++i) {
    CHECK(back.header[i].first == rep.header[i].first);
    CHECK(back.header[i].second == rep.header[i].second);
  }
  REQUIRE(back.history.iterations.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& got = back.history.iterations[i];
    const auto& want = rep.history.iterations[i];
    CHECK(got.iteration == want.iteration);
    CHECK(got.labeled_size == want.labeled_size);
    CHECK(got.admitted == want.admitted);
    CHECK(got.test_mse == want.test_mse);  // %.17g roundtrips doubles
    CHECK(got.test_r2 == want.test_r2);
  }
}

TEST_CASE("report key lookup") {
  const EvaluationReport rep = sample_report();
  CHECK(rep.at("scheme") == "fv1");
  CHECK(rep.at("seed") == "7");
  CHECK_THROWS_AS(rep.at("walrus"), std::out_of_range);
}

TEST_CASE("report loader rejects malformed files") {
  const fs::path dir = scratch_dir();
  CHECK_THROWS_AS(load_report((dir / "absent.txt").string()), DataError);

  const fs::path magic = dir / "magic.txt";
  write_file(magic, "qsteer report v2\nseed = 1\n");
  CHECK_THROWS_AS(load_report(magic.string()), DataError);

  const fs::path keyless = dir / "keyless.txt";
  write_file(keyless, "qsteer report v1\nseed: 1\n");
  CHECK_THROWS_AS(load_report(keyless.string()), DataError);

  const fs::path cols = dir / "cols.txt";
  write_file(cols, "qsteer report v1\nhistory = iteration,mse\n");
  CHECK_THROWS_AS(load_report(cols.string()), DataError);

  const fs::path row = dir / "row.txt";
  write_file(row,
             "qsteer report v1\n"
             "history = iteration,labeled_size,admitted,test_mse,test_r2\n"
             "1,10\n");
  CHECK_THROWS_AS(load_report(row.string()), DataError);

  const fs::path headless = dir / "headless.txt";
  write_file(headless, "qsteer report v1\nseed = 1\n");
  CHECK_THROWS_AS(load_report(headless.string()), DataError);
}

TEST_CASE("table roundtrip is exact") {
  const fs::path dir = scratch_dir();
  Table t;
  t.columns = {"p", "sw"};
  t.rows = {{0.0, 0.0}, {1.0 / 3.0, 0.1234567890123456789}, {1.0, 1.0}};
  const std::string path = (dir / "table.csv").string();
  save_table(t, path);
  const Table back = load_table(path);
  REQUIRE(back.columns == t.columns);
  REQUIRE(back.rows.size() == t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t c = 0; c < t.columns.size(); ++c)
      CHECK(back.rows[r][c] == t.rows[r][c]);
}

TEST_CASE("table writer and loader reject malformed shapes") {
  const fs::path dir = scratch_dir();

  Table empty;
  CHECK_THROWS_AS(save_table(empty, (dir / "x.csv").string()),
                  std::invalid_argument);

  Table ragged;
  ragged.columns = {"a", "b"};
  ragged.rows = {{1.0}};
  CHECK_THROWS_AS(save_table(ragged, (dir / "x.csv").string()),
                  std::invalid_argument);

  CHECK_THROWS_AS(load_table((dir / "absent.csv").string()), DataError);

  const fs::path blank = dir / "blank.csv";
  write_file(blank, "");
  CHECK_THROWS_AS(load_table(blank.string()), DataError);

  const fs::path alpha = dir / "alpha.csv";
  write_file(alpha, "a,b\n1.0,cheese\n");
  CHECK_THROWS_WITH_AS(load_table(alpha.string()),
                       doctest::Contains("bad numeric cell"), DataError);

  const fs::path wide = dir / "wide.csv";
  write_file(wide, "a,b\n1senate\n");  // stod eats "1", rejects suffix
  CHECK_THROWS_AS(load_table(wide.string()), DataError);

  const fs::path narrow = dir / "narrow.csv";
  write_file(narrow, "a,b\n1.0\n");
  CHECK_THROWS_WITH_AS(load_table(narrow.string()),
                       doctest::Contains("row width"), DataError);
}

TEST_CASE("pipeline config rejects nonsense") {
  PipelineConfig cfg;
  cfg.n_states = 4;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.n_states = 100;
  cfg.workers = -1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.workers = 1;
  cfg.out_dir.clear();
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.out_dir = ".";
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("end-to-end run writes consistent artifacts and is repeatable") {
  const fs::path dir = scratch_dir();
  const PipelineConfig cfg = small_config(dir / "run_a" / "deep");
  const PipelineOutcome out = run_pipeline(cfg);

  // nested output directory is created on demand
  for (const char* name :
       {"report.txt", "scatter.csv", "history.csv", "errors.csv"})
    CHECK(fs::exists(fs::path(cfg.out_dir) / name));

  // 200 states, test fraction 0.2
  CHECK(out.test.size() == 40);
  const Table scatter = load_table((fs::path(cfg.out_dir) / "scatter.csv").string());
  REQUIRE(scatter.columns == std::vector<std::string>{"sw_sdp", "sw_pred"});
  CHECK(scatter.rows.size() == out.test.size());
  for (const auto& row : scatter.rows) {
    CHECK(row[0] >= 0.0);
    CHECK(row[0] <= 1.0);
    CHECK(row[1] >= 0.0);
    CHECK(row[1] <= 1.0);
  }

  const Table history = load_table((fs::path(cfg.out_dir) / "history.csv").string());
  CHECK(history.rows.size() == 2);  // one row per self-training iteration

  const Table errors = load_table((fs::path(cfg.out_dir) / "errors.csv").string());
  REQUIRE(errors.columns.size() == 3);
  double total = 0;
  for (const auto& row : errors.rows) total += row[2];
  CHECK(total == doctest::Approx(static_cast<double>(out.test.size())));

  const EvaluationReport rep =
      load_report((fs::path(cfg.out_dir) / "report.txt").string());
  CHECK(rep.at("seed") == "7");
  CHECK(rep.at("scheme") == "fv1");
  REQUIRE(rep.history.iterations.size() == 2);
  CHECK(std::stod(rep.at("final_test_mse")) ==
        rep.history.iterations.back().test_mse);

  // identical config, fresh directory: byte-identical artifacts
  PipelineConfig cfg2 = cfg;
  cfg2.out_dir = (dir / "run_b").string();
  run_pipeline(cfg2);
  CHECK(read_file(fs::path(cfg.out_dir) / "report.txt") ==
        read_file(fs::path(cfg2.out_dir) / "report.txt"));
  CHECK(read_file(fs::path(cfg.out_dir) / "scatter.csv") ==
        read_file(fs::path(cfg2.out_dir) / "scatter.csv"));
}

TEST_CASE("failures are stage-tagged and leave no artifacts") {
  const fs::path dir = scratch_dir();
  PipelineConfig cfg = small_config(dir / "starved");
  cfg.solver.max_iter = 2;  // solver cannot converge in two sweeps
  bool threw = false;
  try {
    run_pipeline(cfg);
  } catch (const SolverError& e) {
    threw = true;
    CHECK(std::string(e.what()).rfind("label: ", 0) == 0);
  }
  CHECK(threw);
  for (const char* name :
       {"report.txt", "scatter.csv", "history.csv", "errors.csv"})
    CHECK(!fs::exists(fs::path(cfg.out_dir) / name));
}

TEST_CASE("werner sweep tracks the analytic boundary") {
  const fs::path dir = scratch_dir();
  PipelineConfig cfg;
  cfg.seed = 11;
  cfg.n_states = 40;
  cfg.scheme = SchemeKind::FV1;
  cfg.mlp.max_epochs = 300;
  cfg.mlp.patience = 30;
  cfg.self_train.iterations = 1;
  cfg.self_train.ensemble_size = 2;
  cfg.out_dir = dir.string();

  const std::vector<double> grid = {0.0, 0.2, 0.5, 0.7, 0.9, 1.0};
  const WernerSweep sweep = werner_sweep(grid, cfg);

  REQUIRE(sweep.table.columns ==
          std::vector<std::string>{"p", "sw_sdp", "sw_pred"});
  REQUIRE(sweep.table.rows.size() == grid.size());
  CHECK(sweep.table.rows.front()[1] <= 1e-6);   // p=0 unsteerable
  CHECK(sweep.table.rows.back()[1] >= 0.999);   // p=1 maximal
  for (std::size_t i = 1; i < sweep.table.rows.size(); ++i)
    CHECK(sweep.table.rows[i][1] >= sweep.table.rows[i - 1][1] - 1e-9);
  for (const auto& row : sweep.table.rows) {
    CHECK(row[2] >= 0.0);
    CHECK(row[2] <= 1.0);
  }
  CHECK(sweep.report.at("scheme") == "fv1");

  CHECK_THROWS_AS(werner_sweep({0.5, 1.2}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(werner_sweep({-0.1}, cfg), std::invalid_argument);
}
