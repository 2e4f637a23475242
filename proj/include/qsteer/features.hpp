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

#include "qsteer/qlin.hpp"

#include <array>
#include <string>
#include <vector>

namespace qsteer {

/// An orthonormal four-vector basis of the two-qubit space.
struct ProjectiveBasis {
  std::vector<StateVector4> vectors;  // exactly 4, pairwise orthonormal
  int tag = 0;                        // builtin index 1..7, 0 for custom

  void validate() const;
};

enum class SchemeKind { FV1, FV2, FV3, FV4, Custom };

enum class UnitaryPolicy { FreshRandom, FixedPool, None };

/// A measurement-setting recipe: which bases to measure in and how local
/// unitaries are attached to them.  Builtin schemes from make() carry their
/// unitaries baked into the basis vectors (drawn once per scheme instance);
/// the FreshRandom / FixedPool policies instead consume rng per state and
/// are kept for custom experiments.
struct FeatureScheme {
  SchemeKind kind = SchemeKind::Custom;
  std::vector<ProjectiveBasis> bases;
  UnitaryPolicy policy = UnitaryPolicy::None;
  std::vector<Unitary2> pool;  // FixedPool only: exactly 20 members

  int dim() const { return 4 * static_cast<int>(bases.size()); }
  void validate() const;

  /// Builtin schemes; pool_seed seeds the frozen rotations (FV1/FV4) and
  /// the unitary pool plus its six picks (FV2).  FV3 ignores it.
  static FeatureScheme make(SchemeKind kind, std::uint64_t pool_seed = 0);
};

struct FeatureVector {
  std::vector<double> values;

  int dim() const { return static_cast<int>(values.size()); }
};

const char* scheme_name(SchemeKind kind);
SchemeKind scheme_from_name(const std::string& name);

/// The seven builtin bases (Bell; computational; |+/-,0/1>; i-phased Bell;
/// |0/1,H/V>; |H/V,0/1>; |0/1,+/->), j in 1..7.
ProjectiveBasis builtin_basis(int j);

/// Born probabilities P(i) = Tr[(U (x) V)|v_i><v_i|(U+ (x) V+) rho],
/// clamped to [0,1].
std::array<double, 4> measure_probabilities(const DensityMatrix& rho,
                                            const ProjectiveBasis& basis,
                                            const Unitary2& u,
                                            const Unitary2& v);

/// Concatenated per-basis probability quadruples; consumes from rng only
/// what the scheme's unitary policy requires.
FeatureVector extract_features(const DensityMatrix& rho,
                               const FeatureScheme& scheme, RandomStream& rng);

/// Twenty Haar-random unitaries, deterministic in seed.
std::vector<Unitary2> unitary_pool(std::uint64_t seed);

}  // namespace qsteer
