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

#pragma once

#include "qsteer/dataset.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qsteer {

/// Thrown when training produces a non-finite loss.
struct TrainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Optimizer { Adam, Sgd };

struct MlpConfig {
  int input_dim = 12;
  std::vector<int> hidden = {128, 64};
  Optimizer optimizer = Optimizer::Adam;
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 128;
  int max_epochs = 500;
  double validation_fraction = 0.1;  // of the labeled set, held out
  int patience = 10;
  double min_delta = 1e-6;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Dense MLP with rectifier hidden layers and a linear scalar output.
/// weights[l] is (out x in); the loss during training is plain mean squared
/// error on the raw output (clamping happens only at prediction time).
struct MlpModel {
  MlpConfig config;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  int epochs_run = 0;
  double final_validation_loss = 0.0;

  void validate() const;  // shape consistency and finite parameters
};

/// Train on the labeled records: Adam (or plain gradient steps) over
/// shuffled mini-batches, halting early when the held-out validation loss
/// stops improving by min_delta for patience epochs. Deterministic in
/// cfg.seed.
MlpModel train_mlp(const std::vector<DatasetRecord>& labeled,
                   const MlpConfig& cfg);

/// Mean squared error of the raw (unclamped) output on a batch, plus its
/// gradient for every layer. inputs is (input_dim x batch), one sample per
/// column. Exposed so the backward pass can be checked against finite
/// differences.
double loss_and_gradient(const MlpModel& model, const Eigen::MatrixXd& inputs,
                         const Eigen::VectorXd& targets,
                         std::vector<Eigen::MatrixXd>& grad_w,
                         std::vector<Eigen::VectorXd>& grad_b);

/// Forward pass, clamped to [0, 1].
double predict(const MlpModel& model, const FeatureVector& x);
std::vector<double> predict(const MlpModel& model,
                            const std::vector<DatasetRecord>& records);

/// Mean over members of their clamped predictions.
double predict_ensemble(const std::vector<MlpModel>& ensemble,
                        const FeatureVector& x);
std::vector<double> predict_ensemble(const std::vector<MlpModel>& ensemble,
                                     const std::vector<DatasetRecord>& records);

double mse(const std::vector<double>& y, const std::vector<double>& yhat);

/// 1 - sum (y - yhat)^2 / sum (y - mean y)^2; negative for fits worse than
/// the mean predictor. Zero variance in y is an explicit error.
double r_squared(const std::vector<double>& y, const std::vector<double>& yhat);

struct SelfTrainConfig {
  int iterations = 20;
  int ensemble_size = 5;
  double quantile = 0.10;   // admit only the lowest-q fraction by ensemble std
  double std_cap = 0.02;    // and only below this absolute disagreement
  int admission_cap = 0;    // extra per-iteration cap; 0 means uncapped

  void validate() const;
};

struct IterationStats {
  int iteration = 0;     // 1-based
  int labeled_size = 0;  // size of the set the ensemble trained on
  double test_mse = 0.0;
  double test_r2 = 0.0;
  int admitted = 0;
  // Audit trail: (record id, pseudo-label) for this iteration's admissions.
  std::vector<std::pair<std::int64_t, double>> admitted_pseudo;
};

struct TrainHistory {
  std::vector<IterationStats> iterations;
};

struct SelfTrainResult {
  std::vector<MlpModel> ensemble;
  TrainHistory history;
};

/// Self-training: per round, train a fresh ensemble on the labeled set
/// (member m reseeded deterministically from mlp_cfg.seed), score the
/// unlabeled pool, admit the most concordant points with their ensemble mean
/// as pseudo-label, repeat. Hidden labels on unlabeled records are never
/// read. Rounds whose labeled set is unchanged reuse the previous ensemble.
SelfTrainResult self_train(const std::vector<DatasetRecord>& labeled,
                           const std::vector<DatasetRecord>& unlabeled,
                           const std::vector<DatasetRecord>& test,
                           const SelfTrainConfig& cfg,
                           const MlpConfig& mlp_cfg);

/// Text serialization with hexfloat parameters; a loaded model reproduces
/// predictions bitwise.
void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);

}  // namespace qsteer
