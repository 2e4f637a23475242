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

#include "qsteer/dataset.hpp"

#include "qsteer/steering.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace qsteer {

namespace {

// Retries per record after the first solve attempt; beyond that the pipeline
// aborts rather than ship a silently mislabeled state.
constexpr int kRetryBudget = 3;

// Substream index for the split shuffle; record ids can never reach it.
constexpr std::uint64_t kShuffleStream = ~std::uint64_t{0};

// Record substream salts: 2a for the state draw of attempt a, 2a+1 for the
// feature draws belonging to that attempt.
RandomStream state_stream(std::uint64_t seed, std::int64_t id, int attempt) {
  return RandomStream::substream(seed, static_cast<std::uint64_t>(id),
                                 2 * static_cast<std::uint64_t>(attempt));
}
RandomStream feature_stream(std::uint64_t seed, std::int64_t id, int attempt) {
  return RandomStream::substream(seed, static_cast<std::uint64_t>(id),
                                 2 * static_cast<std::uint64_t>(attempt) + 1);
}

// The ensemble is two intersecting families.  Bulk (4 of 5 draws): a singlet
// seen through local frames tilted up to 40 degrees, mixed with white noise
// of uniform strength -- labels sweep the full range and track the noise.
// Shell (1 of 5): pure singlets at wide misalignment, 30..90 degrees -- label
// pinned at 1, but their fixed-frame reads land inside the bulk's range, so a
// small set of product-basis probes cannot separate the two families.
constexpr double kShellFraction = 0.20;
constexpr double kBulkTiltRadians = 40.0 * M_PI / 180.0;
constexpr double kShellMinRadians = 30.0 * M_PI / 180.0;
constexpr double kShellMaxRadians = 90.0 * M_PI / 180.0;

// A local frame rotated away from identity by an angle drawn uniformly from
// [lo, hi], about a uniformly random axis.
Matrix2c tilted_frame(RandomStream& rng, double lo, double hi) {
  const double z = 2.0 * rng.uniform() - 1.0;
  const double az = 2.0 * M_PI * rng.uniform();
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double nx = r * std::cos(az), ny = r * std::sin(az), nz = z;
  const double half = 0.5 * (lo + (hi - lo) * rng.uniform());
  const Complex i(0.0, 1.0);
  Matrix2c axis;
  axis << nz, Complex(nx, -ny), Complex(nx, ny), -nz;
  return std::cos(half) * Matrix2c::Identity() - i * std::sin(half) * axis;
}

Matrix4c draw_state(std::uint64_t seed, std::int64_t id, int attempt) {
  RandomStream rng = state_stream(seed, id, attempt);
  const bool shell = rng.uniform() < kShellFraction;
  const double lo = shell ? kShellMinRadians : 0.0;
  const double hi = shell ? kShellMaxRadians : kBulkTiltRadians;
  const Matrix2c u = tilted_frame(rng, lo, hi);
  const Matrix2c v = tilted_frame(rng, lo, hi);
  const double s = 1.0 / std::sqrt(2.0);
  Vector4c singlet;
  singlet << 0.0, s, -s, 0.0;
  const Vector4c psi = kron(u, v) * singlet;
  const double p = shell ? 1.0 : rng.uniform();
  return p * (psi * psi.adjoint()) +
         (1.0 - p) * 0.25 * Matrix4c::Identity();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

[[noreturn]] void parse_fail(const std::string& path, std::size_t lineno,
                             const std::string& what) {
  throw DataError(path + ":" + std::to_string(lineno) + ": " + what);
}

double parse_double(const std::string& s, const std::string& path,
                    std::size_t lineno, const char* what) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
    parse_fail(path, lineno, std::string("bad ") + what + " '" + s + "'");
  return v;
}

std::int64_t parse_id(const std::string& s, const std::string& path,
                      std::size_t lineno) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
    parse_fail(path, lineno, "bad id '" + s + "'");
  return v;
}

std::optional<double> parse_label(const std::string& s, const std::string& path,
                                  std::size_t lineno) {
  if (s.empty()) return std::nullopt;
  const double v = parse_double(s, path, lineno, "label");
  if (!std::isfinite(v) || v < 0.0 || v > 1.0)
    parse_fail(path, lineno, "label " + s + " outside [0, 1]");
  return v;
}

// Whole file as lines, tolerant of CRLF and a missing final newline.
std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open for reading");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  return out;
}

}  // namespace

const char* split_name(Split s) {
  switch (s) {
    case Split::Labeled: return "labeled";
    case Split::Unlabeled: return "unlabeled";
    case Split::Test: return "test";
  }
  throw std::invalid_argument("split_name: bad enum value");
}

Split split_from_name(const std::string& name) {
  if (name == "labeled") return Split::Labeled;
  if (name == "unlabeled") return Split::Unlabeled;
  if (name == "test") return Split::Test;
  throw std::invalid_argument("unknown split '" + name + "'");
}

void SplitConfig::validate() const {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw std::invalid_argument("test_fraction must lie in (0, 1)");
  if (!(labeled_fraction_of_train > 0.0 && labeled_fraction_of_train < 1.0))
    throw std::invalid_argument(
        "labeled_fraction_of_train must lie in (0, 1)");
}

std::vector<LabeledState> generate_states(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate_states: n must be >= 1");
  std::vector<LabeledState> states(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    states[i].id = i;
    states[i].attempt = 0;
    states[i].state = draw_state(seed, i, 0);
  }
  return states;
}

void label_states(std::vector<LabeledState>& states, std::uint64_t seed,
                  const SdpConfig& solver, int workers) {
  if (workers < 1) {
    workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
  }
  const auto meas = pauli_measurements();

  std::atomic<std::size_t> cursor{0};
  std::mutex fail_mutex;
  std::vector<std::string> failures;

  auto work = [&]() {
    for (std::size_t i = cursor.fetch_add(1); i < states.size();
         i = cursor.fetch_add(1)) {
      LabeledState& st = states[i];
      Matrix4c m = st.state;
      std::string diag;
      bool done = false;
      for (int attempt = st.attempt; attempt <= kRetryBudget; ++attempt) {
        try {
          const DensityMatrix rho(m);
          const SteeringResult r =
              steerable_weight(compute_assemblage(rho, meas), solver);
          if (r.solution.converged) {
            st.state = m;
            st.attempt = attempt;
            st.label = r.sw;
            done = true;
            break;
          }
          std::ostringstream os;
          os << "attempt " << attempt << ": residual "
             << r.solution.primal_residual << " after "
             << r.solution.iterations << " iterations";
          diag = os.str();
        } catch (const std::exception& e) {
          diag = "attempt " + std::to_string(attempt) + ": " + e.what();
        }
        if (attempt < kRetryBudget) m = draw_state(seed, st.id, attempt + 1);
      }
      if (!done) {
        std::lock_guard<std::mutex> lock(fail_mutex);
        failures.push_back("record " + std::to_string(st.id) + ": " + diag);
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();

  if (!failures.empty()) {
    std::sort(failures.begin(), failures.end());
    std::string msg = "labeling failed beyond the retry budget on " +
                      std::to_string(failures.size()) + " record(s):";
    const std::size_t shown = std::min<std::size_t>(failures.size(), 5);
    for (std::size_t i = 0; i < shown; ++i) msg += "\n  " + failures[i];
    if (failures.size() > shown) msg += "\n  ...";
    throw SolverError(msg);
  }
}

std::vector<DatasetRecord> featurize_states(
    const std::vector<LabeledState>& states, const FeatureScheme& scheme,
    std::uint64_t seed) {
  scheme.validate();
  std::vector<DatasetRecord> records;
  records.reserve(states.size());
  for (const LabeledState& st : states) {
    RandomStream rng = feature_stream(seed, st.id, st.attempt);
    DatasetRecord rec;
    rec.id = st.id;
    rec.features = extract_features(DensityMatrix(st.state), scheme, rng);
    rec.label = st.label;
    rec.split = Split::Labeled;
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<DatasetRecord> generate_and_label(int n,
                                              const FeatureScheme& scheme,
                                              std::uint64_t seed,
                                              const SdpConfig& solver,
                                              int workers) {
  auto states = generate_states(n, seed);
  label_states(states, seed, solver, workers);
  return featurize_states(states, scheme, seed);
}

void split_dataset(std::vector<DatasetRecord>& records,
                   const SplitConfig& cfg) {
  cfg.validate();
  const std::size_t n = records.size();
  if (n == 0) throw std::invalid_argument("split_dataset: no records");
  for (const DatasetRecord& r : records)
    if (!r.label)
      throw std::invalid_argument("split_dataset: record " +
                                  std::to_string(r.id) + " has no label");

  const auto n_test =
      static_cast<std::size_t>(std::llround(cfg.test_fraction * n));
  const std::size_t n_train = n - n_test;
  const auto n_labeled = static_cast<std::size_t>(
      std::llround(cfg.labeled_fraction_of_train * n_train));
  if (n_test == 0 || n_labeled == 0 || n_labeled >= n_train)
    throw std::invalid_argument(
        "split_dataset: fractions leave an empty partition for n = " +
        std::to_string(n));

  // Deterministic in (ids, seed): order by id, then one seeded shuffle.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return records[a].id < records[b].id;
  });
  for (std::size_t i = 1; i < n; ++i)
    if (records[order[i - 1]].id == records[order[i]].id)
      throw std::invalid_argument("split_dataset: duplicate id " +
                                  std::to_string(records[order[i]].id));
  RandomStream rng = RandomStream::substream(cfg.seed, kShuffleStream);
  for (std::size_t i = n - 1; i > 0; --i) {
    const auto j = rng.uniform_int(static_cast<std::uint32_t>(i + 1));
    std::swap(order[i], order[j]);
  }

  for (std::size_t i = 0; i < n; ++i) {
    Split s = Split::Unlabeled;
    if (i < n_test)
      s = Split::Test;
    else if (i < n_test + n_labeled)
      s = Split::Labeled;
    records[order[i]].split = s;
  }
}

void save_dataset(const std::vector<DatasetRecord>& records,
                  const std::string& path, bool learner_view) {
  int dim = 0;
  for (const DatasetRecord& r : records) {
    if (dim == 0) dim = r.features.dim();
    if (r.features.dim() != dim || dim == 0)
      throw std::invalid_argument(
          "save_dataset: inconsistent or empty feature dimensions");
  }
  std::ofstream out = open_out(path);
  out << "id,split,label";
  for (int k = 1; k <= dim; ++k) out << ",f" << k;
  out << "\n";
  for (const DatasetRecord& r : records) {
    out << r.id << ',' << split_name(r.split) << ',';
    const bool hide = learner_view && r.split == Split::Unlabeled;
    if (r.label && !hide) out << fmt(*r.label);
    for (const double v : r.features.values) out << ',' << fmt(v);
    out << "\n";
  }
  if (!out.flush()) throw DataError(path + ": write failed");
}

std::vector<DatasetRecord> load_dataset(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) return {};

  const std::vector<std::string> head = split_fields(lines[0]);
  if (head.size() < 3 || head[0] != "id" || head[1] != "split" ||
      head[2] != "label")
    parse_fail(path, 1, "expected header id,split,label,f1,...");
  const std::size_t dim = head.size() - 3;

  std::vector<DatasetRecord> records;
  records.reserve(lines.size() - 1);
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const std::vector<std::string> f = split_fields(lines[ln]);
    if (f.size() != head.size())
      parse_fail(path, ln + 1,
                 "expected " + std::to_string(head.size()) + " fields, got " +
                     std::to_string(f.size()));
    DatasetRecord rec;
    rec.id = parse_id(f[0], path, ln + 1);
    try {
      rec.split = split_from_name(f[1]);
    } catch (const std::invalid_argument& e) {
      parse_fail(path, ln + 1, e.what());
    }
    rec.label = parse_label(f[2], path, ln + 1);
    if (rec.split == Split::Test && !rec.label)
      parse_fail(path, ln + 1, "test record without a label");
    rec.features.values.resize(dim);
    for (std::size_t k = 0; k < dim; ++k)
      rec.features.values[k] = parse_double(f[3 + k], path, ln + 1, "feature");
    records.push_back(std::move(rec));
  }
  return records;
}

void save_states(const std::vector<LabeledState>& states,
                 const std::string& path) {
  std::ofstream out = open_out(path);
  out << "id,attempt,label";
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out << ",m" << r << c << "re,m" << r << c
                                    << "im";
  out << "\n";
  for (const LabeledState& st : states) {
    out << st.id << ',' << st.attempt << ',';
    if (st.label) out << fmt(*st.label);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c)
        out << ',' << fmt(st.state(r, c).real()) << ','
            << fmt(st.state(r, c).imag());
    out << "\n";
  }
  if (!out.flush()) throw DataError(path + ": write failed");
}

std::vector<LabeledState> load_states(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) return {};
  constexpr std::size_t kFields = 3 + 32;

  const std::vector<std::string> head = split_fields(lines[0]);
  if (head.size() != kFields || head[0] != "id" || head[1] != "attempt" ||
      head[2] != "label" || head[3] != "m00re")
    parse_fail(path, 1, "expected header id,attempt,label,m00re,...");

  std::vector<LabeledState> states;
  states.reserve(lines.size() - 1);
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const std::vector<std::string> f = split_fields(lines[ln]);
    if (f.size() != kFields)
      parse_fail(path, ln + 1,
                 "expected " + std::to_string(kFields) + " fields, got " +
                     std::to_string(f.size()));
    LabeledState st;
    st.id = parse_id(f[0], path, ln + 1);
    st.attempt = static_cast<int>(parse_id(f[1], path, ln + 1));
    if (st.attempt < 0) parse_fail(path, ln + 1, "negative attempt");
    st.label = parse_label(f[2], path, ln + 1);
    std::size_t k = 3;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) {
        const double re = parse_double(f[k++], path, ln + 1, "entry");
        const double im = parse_double(f[k++], path, ln + 1, "entry");
        st.state(r, c) = Complex(re, im);
      }
    states.push_back(st);
  }
  return states;
}

void save_metadata(const DatasetMeta& meta, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "seed = " << meta.seed << "\n";
  out << "scheme = " << meta.scheme << "\n";
  out << "basis_tags = ";
  for (std::size_t i = 0; i < meta.basis_tags.size(); ++i)
    out << (i ? "," : "") << meta.basis_tags[i];
  out << "\n";
  out << "feas_tol = " << fmt(meta.feas_tol) << "\n";
  out << "gap_tol = " << fmt(meta.gap_tol) << "\n";
  out << "max_iter = " << meta.max_iter << "\n";
  out << "timestamp = " << meta.timestamp << "\n";
  if (!out.flush()) throw DataError(path + ": write failed");
}

DatasetMeta load_metadata(const std::string& path) {
  DatasetMeta meta;
  const std::vector<std::string> lines = read_lines(path);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string& line = lines[ln];
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) parse_fail(path, ln + 1, "expected key = value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "seed")
      meta.seed = static_cast<std::uint64_t>(
          std::strtoull(val.c_str(), nullptr, 10));
    else if (key == "scheme")
      meta.scheme = val;
    else if (key == "basis_tags") {
      meta.basis_tags.clear();
      if (!val.empty())
        for (const std::string& t : split_fields(val))
          meta.basis_tags.push_back(
              static_cast<int>(parse_id(t, path, ln + 1)));
    } else if (key == "feas_tol")
      meta.feas_tol = parse_double(val, path, ln + 1, "feas_tol");
    else if (key == "gap_tol")
      meta.gap_tol = parse_double(val, path, ln + 1, "gap_tol");
    else if (key == "max_iter")
      meta.max_iter = static_cast<int>(parse_id(val, path, ln + 1));
    else if (key == "timestamp")
      meta.timestamp = val;
    else
      parse_fail(path, ln + 1, "unknown key '" + key + "'");
  }
  return meta;
}

}  // namespace qsteer
