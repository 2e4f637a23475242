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
#include "qsteer/sdp.hpp"

#include <array>
#include <stdexcept>

namespace qsteer {

/// Thrown when an operation requires a converged SDP solve and the solver
/// reported non-convergence.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A two-outcome measurement on Alice's qubit: effects summing to identity.
class Measurement {
 public:
  Measurement(const Matrix2c& m0, const Matrix2c& m1);

  const Matrix2c& effect(int a) const { return effects_[a]; }

 private:
  std::array<Matrix2c, 2> effects_;
};

/// Bob's unnormalized conditional states sigma_{a|x} for three settings
/// x in {0,1,2} and two outcomes a in {0,1}.
class Assemblage {
 public:
  explicit Assemblage(const std::array<Matrix2c, 6>& members);

  const Matrix2c& at(int x, int a) const { return members_[2 * x + a]; }
  /// Bob's reduced state sum_a sigma_{a|x} (independent of x).
  Matrix2c reduced() const;

  static constexpr int kSettings = 3;
  static constexpr int kOutcomes = 2;

 private:
  std::array<Matrix2c, 6> members_;
};

/// All 2^3 deterministic response functions for three binary settings.
/// Convention: bit x of lambda is the outcome assigned to setting x.
class StrategyTable {
 public:
  static constexpr int kStrategies = 8;

  int outcome(int x, int lambda) const { return (lambda >> x) & 1; }
  double d(int a, int x, int lambda) const {
    return outcome(x, lambda) == a ? 1.0 : 0.0;
  }
};

struct SteeringResult {
  double sw = 0.0;
  SdpSolution solution;
};

/// Projective measurements along Pauli X, Y, Z: effects (I +- P)/2.
std::array<Measurement, 3> pauli_measurements();

/// sigma_{a|x} = Tr_A[(M^a_x (x) I) rho].
Assemblage compute_assemblage(const DensityMatrix& rho,
                              const std::array<Measurement, 3>& meas);

StrategyTable deterministic_strategies();

/// Steerable weight of an assemblage: 1 minus the maximal trace of an LHS
/// part expressible through deterministic strategies, clamped to [0,1].
/// Non-convergence is flagged on the embedded solution, not thrown.
SteeringResult steerable_weight(const Assemblage& assemblage,
                                const SdpConfig& cfg = {});

/// Steerable weight of a state under the Pauli X/Y/Z measurements.
/// Throws SolverError if the SDP fails to converge.
double label_state(const DensityMatrix& rho, const SdpConfig& cfg = {});

}  // namespace qsteer
