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

#include "qsteer/features.hpp"
#include "qsteer/sdp.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsteer {

/// Thrown on malformed or invariant-violating data files.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Split { Labeled, Unlabeled, Test };

const char* split_name(Split s);
Split split_from_name(const std::string& name);

struct DatasetRecord {
  std::int64_t id = 0;
  FeatureVector features;
  std::optional<double> label;  // steerable weight in [0, 1]
  Split split = Split::Labeled;
};

struct SplitConfig {
  double test_fraction = 0.2;
  double labeled_fraction_of_train = 0.8;
  std::uint64_t seed = 0;

  void validate() const;  // fractions strictly inside (0, 1)
};

/// A drawn state plus its label and the draw attempt that produced it.
/// Regeneration after a solver stall bumps the attempt, so every stage can
/// reproduce the exact draw from (seed, id, attempt) alone.
struct LabeledState {
  std::int64_t id = 0;
  int attempt = 0;
  Matrix4c state = Matrix4c::Zero();
  std::optional<double> label;
};

/// Noisy rotated singlets (bulk, noise uniform in [0,1], tilt <= 40 deg) plus
/// a one-in-five shell of pure singlets at wide rotation (30..90 deg), one
/// record substream each.
std::vector<LabeledState> generate_states(int n, std::uint64_t seed);

/// Label every state with its steerable weight, data-parallel over records.
/// A state whose SDP fails to converge is redrawn from the same record
/// substream (next attempt), at most three retries; exhausting the budget
/// throws SolverError with per-record diagnostics. Output is identical for
/// any worker count. workers < 1 means one per hardware thread.
void label_states(std::vector<LabeledState>& states, std::uint64_t seed,
                  const SdpConfig& solver, int workers = 1);

/// Feature extraction over (typically labeled) states; random unitaries or
/// pool picks come from each record's feature substream, so staged and fused
/// pipelines agree bitwise.
std::vector<DatasetRecord> featurize_states(
    const std::vector<LabeledState>& states, const FeatureScheme& scheme,
    std::uint64_t seed);

/// generate -> label -> featurize in one call.
std::vector<DatasetRecord> generate_and_label(int n,
                                              const FeatureScheme& scheme,
                                              std::uint64_t seed,
                                              const SdpConfig& solver,
                                              int workers = 1);

/// Assign split tags: test_fraction of all records become test, the rest is
/// train, of which labeled_fraction_of_train stays labeled. The partition is
/// a function of (ids, seed) only. Requires every record to carry a label;
/// an empty partition is an argument error.
void split_dataset(std::vector<DatasetRecord>& records, const SplitConfig& cfg);

/// CSV persistence: header `id,split,label,f1,...,fD`, floats at 17
/// significant digits. With learner_view the label field of unlabeled rows
/// is written blank (the audit copy keeps them).
void save_dataset(const std::vector<DatasetRecord>& records,
                  const std::string& path, bool learner_view = false);
std::vector<DatasetRecord> load_dataset(const std::string& path);

/// Staged-pipeline intermediates: states (with attempt and optional label)
/// as CSV of the 16 complex entries.
void save_states(const std::vector<LabeledState>& states,
                 const std::string& path);
std::vector<LabeledState> load_states(const std::string& path);

/// Sidecar provenance written next to a dataset file.
struct DatasetMeta {
  std::uint64_t seed = 0;
  std::string scheme;
  std::vector<int> basis_tags;
  double feas_tol = 0.0;
  double gap_tol = 0.0;
  int max_iter = 0;
  std::string timestamp;  // ISO 8601, informational only
};

void save_metadata(const DatasetMeta& meta, const std::string& path);
DatasetMeta load_metadata(const std::string& path);

}  // namespace qsteer
