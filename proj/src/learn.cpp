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

#include "qsteer/learn.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace qsteer {

namespace {

constexpr std::uint64_t kMemberSalt = 0x6d6c70;  // ensemble member reseeding

std::uint64_t member_seed(std::uint64_t base, int member) {
  return RandomStream::substream(base, static_cast<std::uint64_t>(member),
                                 kMemberSalt)
      .next_u64();
}

void shuffle(std::vector<int>& v, RandomStream& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = rng.uniform_int(static_cast<std::uint32_t>(i));
    std::swap(v[i - 1], v[j]);
  }
}

// Forward pass on a batch; fills pre-activations z[l] (post-activation is
// z[l].cwiseMax(0) for hidden layers, z.back() is the raw output row).
void forward(const MlpModel& m, const Eigen::MatrixXd& x,
             std::vector<Eigen::MatrixXd>& z) {
  const std::size_t layers = m.weights.size();
  z.resize(layers);
  const Eigen::MatrixXd* a = &x;
  Eigen::MatrixXd act;
  for (std::size_t l = 0; l < layers; ++l) {
    z[l] = (m.weights[l] * (*a)).colwise() + m.biases[l];
    if (l + 1 < layers) {
      act = z[l].cwiseMax(0.0);
      a = &act;
    }
  }
}

Eigen::VectorXd raw_outputs(const MlpModel& m, const Eigen::MatrixXd& x) {
  std::vector<Eigen::MatrixXd> z;
  forward(m, x, z);
  return z.back().row(0).transpose();
}

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

Eigen::MatrixXd feature_matrix(const std::vector<DatasetRecord>& records,
                               int dim) {
  Eigen::MatrixXd x(dim, static_cast<Eigen::Index>(records.size()));
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].features.dim() != dim)
      throw std::invalid_argument(
          "feature dimension mismatch: record " + std::to_string(records[i].id) +
          " has " + std::to_string(records[i].features.dim()) + ", expected " +
          std::to_string(dim));
    for (int k = 0; k < dim; ++k)
      x(k, static_cast<Eigen::Index>(i)) = records[i].features.values[k];
  }
  return x;
}

std::string fmt_hex(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

}  // namespace

void MlpConfig::validate() const {
  if (input_dim < 1) throw std::invalid_argument("input_dim must be >= 1");
  if (hidden.empty()) throw std::invalid_argument("need at least one hidden layer");
  for (const int h : hidden)
    if (h < 1) throw std::invalid_argument("hidden sizes must be positive");
  if (!(step_size > 0)) throw std::invalid_argument("step_size must be > 0");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1))
    throw std::invalid_argument("Adam betas must lie in [0, 1)");
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be > 0");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
  if (!(validation_fraction > 0 && validation_fraction < 1))
    throw std::invalid_argument("validation_fraction must lie in (0, 1)");
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
  if (!(min_delta >= 0)) throw std::invalid_argument("min_delta must be >= 0");
}

void MlpModel::validate() const {
  const std::size_t layers = config.hidden.size() + 1;
  if (weights.size() != layers || biases.size() != layers)
    throw std::invalid_argument("model has wrong layer count");
  int in = config.input_dim;
  for (std::size_t l = 0; l < layers; ++l) {
    const int out =
        l + 1 < layers ? config.hidden[l] : 1;
    if (weights[l].rows() != out || weights[l].cols() != in ||
        biases[l].size() != out)
      throw std::invalid_argument("model layer " + std::to_string(l) +
                                  " has wrong shape");
    if (!weights[l].allFinite() || !biases[l].allFinite())
      throw std::invalid_argument("model parameters are not finite");
    in = out;
  }
}

double loss_and_gradient(const MlpModel& model, const Eigen::MatrixXd& inputs,
                         const Eigen::VectorXd& targets,
                         std::vector<Eigen::MatrixXd>& grad_w,
                         std::vector<Eigen::VectorXd>& grad_b) {
  const auto batch = inputs.cols();
  if (batch == 0 || targets.size() != batch)
    throw std::invalid_argument("loss_and_gradient: bad batch");
  if (inputs.rows() != model.config.input_dim)
    throw std::invalid_argument("loss_and_gradient: dimension mismatch");

  const std::size_t layers = model.weights.size();
  std::vector<Eigen::MatrixXd> z;
  forward(model, inputs, z);

  const Eigen::VectorXd resid = z.back().row(0).transpose() - targets;
  const double loss = resid.squaredNorm() / static_cast<double>(batch);

  grad_w.resize(layers);
  grad_b.resize(layers);
  // delta = dLoss/dz[l], walked backwards.
  Eigen::MatrixXd delta =
      (2.0 / static_cast<double>(batch)) * resid.transpose();
  for (std::size_t l = layers; l-- > 0;) {
    const Eigen::MatrixXd& below =
        l == 0 ? inputs : Eigen::MatrixXd(z[l - 1].cwiseMax(0.0));
    grad_w[l] = delta * below.transpose();
    grad_b[l] = delta.rowwise().sum();
    if (l > 0)
      delta = (model.weights[l].transpose() * delta)
                  .cwiseProduct((z[l - 1].array() > 0.0).cast<double>().matrix());
  }
  return loss;
}

MlpModel train_mlp(const std::vector<DatasetRecord>& labeled,
                   const MlpConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<int>(labeled.size());
  if (n < 2) throw std::invalid_argument("train_mlp: need at least 2 records");

  const Eigen::MatrixXd x = feature_matrix(labeled, cfg.input_dim);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    if (!labeled[i].label)
      throw std::invalid_argument("train_mlp: record " +
                                  std::to_string(labeled[i].id) +
                                  " has no label");
    y(i) = *labeled[i].label;
  }

  RandomStream rng(cfg.seed);

  // Held-out validation rows drive early stopping; tiny sets may leave none.
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  shuffle(idx, rng);
  const int val_n = static_cast<int>(cfg.validation_fraction * n);
  const int train_n = n - val_n;

  MlpModel model;
  model.config = cfg;
  {
    int in = cfg.input_dim;
    for (std::size_t l = 0; l <= cfg.hidden.size(); ++l) {
      const int out = l < cfg.hidden.size() ? cfg.hidden[l] : 1;
      Eigen::MatrixXd w(out, in);
      const double limit = std::sqrt(6.0 / in);  // fan-in scaled uniform
      for (int r = 0; r < out; ++r)
        for (int c = 0; c < in; ++c)
          w(r, c) = limit * (2.0 * rng.uniform() - 1.0);
      model.weights.push_back(std::move(w));
      model.biases.push_back(Eigen::VectorXd::Zero(out));
      in = out;
    }
  }

  Eigen::MatrixXd xval(cfg.input_dim, val_n);
  Eigen::VectorXd yval(val_n);
  for (int i = 0; i < val_n; ++i) {
    xval.col(i) = x.col(idx[static_cast<std::size_t>(i)]);
    yval(i) = y(idx[static_cast<std::size_t>(i)]);
  }

  const std::size_t layers = model.weights.size();
  std::vector<Eigen::MatrixXd> mw(layers), vw(layers), gw;
  std::vector<Eigen::VectorXd> mb(layers), vb(layers), gb;
  for (std::size_t l = 0; l < layers; ++l) {
    mw[l] = Eigen::MatrixXd::Zero(model.weights[l].rows(),
                                  model.weights[l].cols());
    vw[l] = mw[l];
    mb[l] = Eigen::VectorXd::Zero(model.biases[l].size());
    vb[l] = mb[l];
  }

  double best_val = std::numeric_limits<double>::infinity();
  double last_monitor = std::numeric_limits<double>::quiet_NaN();
  int stale = 0;
  long t = 0;
  Eigen::MatrixXd xb;
  Eigen::VectorXd yb;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    // Reshuffle the training rows (positions val_n.. of idx) each epoch.
    for (std::size_t i = static_cast<std::size_t>(n); i > static_cast<std::size_t>(val_n) + 1; --i) {
      const auto span = static_cast<std::uint32_t>(i - static_cast<std::size_t>(val_n));
      const auto j = static_cast<std::size_t>(val_n) + rng.uniform_int(span);
      std::swap(idx[i - 1], idx[j]);
    }

    double epoch_loss = 0.0;
    int batches = 0;
    for (int start = 0; start < train_n; start += cfg.batch_size) {
      const int b = std::min(cfg.batch_size, train_n - start);
      xb.resize(cfg.input_dim, b);
      yb.resize(b);
      for (int i = 0; i < b; ++i) {
        const int row = idx[static_cast<std::size_t>(val_n + start + i)];
        xb.col(i) = x.col(row);
        yb(i) = y(row);
      }
      const double loss = loss_and_gradient(model, xb, yb, gw, gb);
      if (!std::isfinite(loss))
        throw TrainError("train_mlp: non-finite loss at epoch " +
                         std::to_string(epoch));
      epoch_loss += loss;
      ++batches;

      ++t;
      if (cfg.optimizer == Optimizer::Adam) {
        const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
        for (std::size_t l = 0; l < layers; ++l) {
          mw[l] = cfg.beta1 * mw[l] + (1.0 - cfg.beta1) * gw[l];
          vw[l] = cfg.beta2 * vw[l] + (1.0 - cfg.beta2) * gw[l].cwiseAbs2();
          model.weights[l] -=
              cfg.step_size *
              ((mw[l] / bc1).array() / ((vw[l] / bc2).array().sqrt() + cfg.epsilon))
                  .matrix();
          mb[l] = cfg.beta1 * mb[l] + (1.0 - cfg.beta1) * gb[l];
          vb[l] = cfg.beta2 * vb[l] + (1.0 - cfg.beta2) * gb[l].cwiseAbs2();
          model.biases[l] -=
              cfg.step_size *
              ((mb[l] / bc1).array() / ((vb[l] / bc2).array().sqrt() + cfg.epsilon))
                  .matrix();
        }
      } else {
        for (std::size_t l = 0; l < layers; ++l) {
          model.weights[l] -= cfg.step_size * gw[l];
          model.biases[l] -= cfg.step_size * gb[l];
        }
      }
    }

    model.epochs_run = epoch;
    const double train_loss = epoch_loss / batches;
    double monitor = train_loss;
    if (val_n > 0) {
      const Eigen::VectorXd vout = raw_outputs(model, xval);
      monitor = (vout - yval).squaredNorm() / val_n;
    }
    if (!std::isfinite(monitor))
      throw TrainError("train_mlp: non-finite validation loss at epoch " +
                       std::to_string(epoch));
    last_monitor = monitor;
    if (val_n > 0) {
      if (monitor < best_val - cfg.min_delta) {
        best_val = monitor;
        stale = 0;
      } else if (++stale >= cfg.patience) {
        break;
      }
    }
  }

  model.final_validation_loss = last_monitor;
  return model;
}

double predict(const MlpModel& model, const FeatureVector& x) {
  if (x.dim() != model.config.input_dim)
    throw std::invalid_argument("predict: feature dimension " +
                                std::to_string(x.dim()) + " does not match model " +
                                std::to_string(model.config.input_dim));
  Eigen::MatrixXd col(model.config.input_dim, 1);
  for (int k = 0; k < x.dim(); ++k) col(k, 0) = x.values[static_cast<std::size_t>(k)];
  return clamp01(raw_outputs(model, col)(0));
}

std::vector<double> predict(const MlpModel& model,
                            const std::vector<DatasetRecord>& records) {
  if (records.empty()) return {};
  const Eigen::MatrixXd x = feature_matrix(records, model.config.input_dim);
  const Eigen::VectorXd raw = raw_outputs(model, x);
  std::vector<double> out(records.size());
  for (std::size_t i = 0; i < records.size(); ++i)
    out[i] = clamp01(raw(static_cast<Eigen::Index>(i)));
  return out;
}

double predict_ensemble(const std::vector<MlpModel>& ensemble,
                        const FeatureVector& x) {
  if (ensemble.empty()) throw std::invalid_argument("empty ensemble");
  double sum = 0.0;
  for (const MlpModel& m : ensemble) sum += predict(m, x);
  return sum / static_cast<double>(ensemble.size());
}

std::vector<double> predict_ensemble(const std::vector<MlpModel>& ensemble,
                                     const std::vector<DatasetRecord>& records) {
  if (ensemble.empty()) throw std::invalid_argument("empty ensemble");
  std::vector<double> acc(records.size(), 0.0);
  for (const MlpModel& m : ensemble) {
    const std::vector<double> p = predict(m, records);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += p[i];
  }
  for (double& v : acc) v /= static_cast<double>(ensemble.size());
  return acc;
}

double mse(const std::vector<double>& y, const std::vector<double>& yhat) {
  if (y.empty() || y.size() != yhat.size())
    throw std::invalid_argument("mse: empty or mismatched inputs");
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - yhat[i];
    sum += d * d;
  }
  return sum / static_cast<double>(y.size());
}

double r_squared(const std::vector<double>& y, const std::vector<double>& yhat) {
  if (y.empty() || y.size() != yhat.size())
    throw std::invalid_argument("r_squared: empty or mismatched inputs");
  double mean = 0.0;
  for (const double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  if (ss_tot <= 0.0)
    throw std::invalid_argument("r_squared: zero variance in reference values");
  return 1.0 - ss_res / ss_tot;
}

void SelfTrainConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (ensemble_size < 1) throw std::invalid_argument("ensemble_size must be >= 1");
  if (!(quantile > 0 && quantile < 1))
    throw std::invalid_argument("quantile must lie in (0, 1)");
  if (!(std_cap > 0)) throw std::invalid_argument("std_cap must be > 0");
  if (admission_cap < 0) throw std::invalid_argument("admission_cap must be >= 0");
}

SelfTrainResult self_train(const std::vector<DatasetRecord>& labeled,
                           const std::vector<DatasetRecord>& unlabeled,
                           const std::vector<DatasetRecord>& test,
                           const SelfTrainConfig& cfg,
                           const MlpConfig& mlp_cfg) {
  cfg.validate();
  mlp_cfg.validate();
  if (labeled.empty()) throw std::invalid_argument("self_train: empty labeled set");
  if (test.empty()) throw std::invalid_argument("self_train: empty test set");

  std::vector<double> y_test(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (!test[i].label)
      throw std::invalid_argument("self_train: test record without a label");
    y_test[i] = *test[i].label;
  }

  std::vector<DatasetRecord> cur = labeled;
  std::vector<DatasetRecord> pool = unlabeled;
  for (DatasetRecord& r : pool) r.label.reset();  // the learner stays blind

  SelfTrainResult res;
  std::size_t trained_on = 0;
  bool trained = false;

  for (int it = 1; it <= cfg.iterations; ++it) {
    if (!trained || cur.size() != trained_on) {
      res.ensemble.clear();
      for (int m = 0; m < cfg.ensemble_size; ++m) {
        MlpConfig mc = mlp_cfg;
        mc.seed = member_seed(mlp_cfg.seed, m);
        res.ensemble.push_back(train_mlp(cur, mc));
      }
      trained_on = cur.size();
      trained = true;
    }

    IterationStats st;
    st.iteration = it;
    st.labeled_size = static_cast<int>(trained_on);
    const std::vector<double> yhat = predict_ensemble(res.ensemble, test);
    st.test_mse = mse(y_test, yhat);
    st.test_r2 = r_squared(y_test, yhat);

    if (!pool.empty()) {
      const std::size_t p = pool.size();
      std::vector<double> means(p, 0.0), sq(p, 0.0);
      for (const MlpModel& m : res.ensemble) {
        const std::vector<double> pred = predict(m, pool);
        for (std::size_t i = 0; i < p; ++i) {
          means[i] += pred[i];
          sq[i] += pred[i] * pred[i];
        }
      }
      const auto e = static_cast<double>(res.ensemble.size());
      std::vector<double> stds(p);
      for (std::size_t i = 0; i < p; ++i) {
        means[i] /= e;
        stds[i] = std::sqrt(std::max(0.0, sq[i] / e - means[i] * means[i]));
      }

      // Lowest-q-quantile of ensemble disagreement, inside the absolute cap.
      std::vector<std::size_t> order(p);
      for (std::size_t i = 0; i < p; ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (stds[a] != stds[b]) return stds[a] < stds[b];
        return pool[a].id < pool[b].id;
      });
      std::size_t quota =
          static_cast<std::size_t>(cfg.quantile * static_cast<double>(p));
      if (cfg.admission_cap > 0)
        quota = std::min(quota, static_cast<std::size_t>(cfg.admission_cap));

      std::vector<bool> take(p, false);
      for (std::size_t r = 0; r < quota && r < p; ++r) {
        const std::size_t i = order[r];
        if (stds[i] > cfg.std_cap) break;  // order is ascending in std
        take[i] = true;
        DatasetRecord admitted = pool[i];
        admitted.label = means[i];
        admitted.split = Split::Labeled;
        cur.push_back(std::move(admitted));
        st.admitted_pseudo.emplace_back(pool[i].id, means[i]);
        ++st.admitted;
      }
      if (st.admitted > 0) {
        std::vector<DatasetRecord> rest;
        rest.reserve(p - static_cast<std::size_t>(st.admitted));
        for (std::size_t i = 0; i < p; ++i)
          if (!take[i]) rest.push_back(std::move(pool[i]));
        pool.swap(rest);
      }
    }

    res.history.iterations.push_back(std::move(st));
  }
  return res;
}

void save_model(const MlpModel& model, const std::string& path) {
  model.validate();
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << "qsteer-mlp v1\n";
  out << "input_dim = " << model.config.input_dim << "\n";
  out << "hidden =";
  for (std::size_t i = 0; i < model.config.hidden.size(); ++i)
    out << (i ? "," : " ") << model.config.hidden[i];
  out << "\n";
  out << "optimizer = "
      << (model.config.optimizer == Optimizer::Adam ? "adam" : "sgd") << "\n";
  out << "step_size = " << fmt_hex(model.config.step_size) << "\n";
  out << "beta1 = " << fmt_hex(model.config.beta1) << "\n";
  out << "beta2 = " << fmt_hex(model.config.beta2) << "\n";
  out << "epsilon = " << fmt_hex(model.config.epsilon) << "\n";
  out << "batch_size = " << model.config.batch_size << "\n";
  out << "max_epochs = " << model.config.max_epochs << "\n";
  out << "validation_fraction = " << fmt_hex(model.config.validation_fraction)
      << "\n";
  out << "patience = " << model.config.patience << "\n";
  out << "min_delta = " << fmt_hex(model.config.min_delta) << "\n";
  out << "seed = " << model.config.seed << "\n";
  out << "epochs_run = " << model.epochs_run << "\n";
  out << "final_validation_loss = " << fmt_hex(model.final_validation_loss)
      << "\n";
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    const auto& w = model.weights[l];
    out << "layer " << l << ' ' << w.rows() << ' ' << w.cols() << "\n";
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        out << fmt_hex(w(r, c)) << ' ';
      out << fmt_hex(model.biases[l](r)) << "\n";  // bias is the last column
    }
  }
  if (!out.flush()) throw DataError(path + ": write failed");
}

namespace {

double parse_model_double(const std::string& s, const std::string& path) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
    throw DataError(path + ": bad numeric field '" + s + "'");
  return v;
}

}  // namespace

MlpModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open for reading");
  std::string line;
  if (!std::getline(in, line) || line != "qsteer-mlp v1")
    throw DataError(path + ": not a qsteer-mlp v1 file");

  MlpModel model;
  auto need_value = [&](const std::string& text, const char* key) {
    const std::string prefix = std::string(key) + " = ";
    if (text.rfind(prefix, 0) != 0)
      throw DataError(path + ": expected '" + key + "', got '" + text + "'");
    return text.substr(prefix.size());
  };
  auto next_line = [&]() {
    if (!std::getline(in, line)) throw DataError(path + ": truncated file");
    return line;
  };

  model.config.input_dim =
      static_cast<int>(parse_model_double(need_value(next_line(), "input_dim"), path));
  {
    std::istringstream hs(need_value(next_line(), "hidden"));
    model.config.hidden.clear();
    std::string tok;
    while (std::getline(hs, tok, ','))
      model.config.hidden.push_back(
          static_cast<int>(parse_model_double(tok, path)));
  }
  {
    const std::string opt = need_value(next_line(), "optimizer");
    if (opt == "adam")
      model.config.optimizer = Optimizer::Adam;
    else if (opt == "sgd")
      model.config.optimizer = Optimizer::Sgd;
    else
      throw DataError(path + ": unknown optimizer '" + opt + "'");
  }
  model.config.step_size = parse_model_double(need_value(next_line(), "step_size"), path);
  model.config.beta1 = parse_model_double(need_value(next_line(), "beta1"), path);
  model.config.beta2 = parse_model_double(need_value(next_line(), "beta2"), path);
  model.config.epsilon = parse_model_double(need_value(next_line(), "epsilon"), path);
  model.config.batch_size =
      static_cast<int>(parse_model_double(need_value(next_line(), "batch_size"), path));
  model.config.max_epochs =
      static_cast<int>(parse_model_double(need_value(next_line(), "max_epochs"), path));
  model.config.validation_fraction =
      parse_model_double(need_value(next_line(), "validation_fraction"), path);
  model.config.patience =
      static_cast<int>(parse_model_double(need_value(next_line(), "patience"), path));
  model.config.min_delta = parse_model_double(need_value(next_line(), "min_delta"), path);
  model.config.seed = std::strtoull(need_value(next_line(), "seed").c_str(), nullptr, 10);
  model.epochs_run =
      static_cast<int>(parse_model_double(need_value(next_line(), "epochs_run"), path));
  model.final_validation_loss =
      parse_model_double(need_value(next_line(), "final_validation_loss"), path);

  const std::size_t layers = model.config.hidden.size() + 1;
  for (std::size_t l = 0; l < layers; ++l) {
    std::istringstream hs(next_line());
    std::string word;
    std::size_t li = 0;
    Eigen::Index rows = 0, cols = 0;
    if (!(hs >> word >> li >> rows >> cols) || word != "layer" || li != l)
      throw DataError(path + ": expected layer " + std::to_string(l) + " header");
    Eigen::MatrixXd w(rows, cols);
    Eigen::VectorXd b(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      std::istringstream row(next_line());
      std::string tok;
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (!(row >> tok)) throw DataError(path + ": short row in layer " + std::to_string(l));
        w(r, c) = parse_model_double(tok, path);
      }
      if (!(row >> tok)) throw DataError(path + ": missing bias in layer " + std::to_string(l));
      b(r) = parse_model_double(tok, path);
    }
    model.weights.push_back(std::move(w));
    model.biases.push_back(std::move(b));
  }
  model.validate();
  return model;
}

}  // namespace qsteer
