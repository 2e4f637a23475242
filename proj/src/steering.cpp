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

#include "qsteer/steering.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qsteer {

namespace {
constexpr double kAssemblageTol = 1e-10;
}

Measurement::Measurement(const Matrix2c& m0, const Matrix2c& m1)
    : effects_{m0, m1} {
  for (const auto& m : effects_) {
    if (!is_hermitian(m, kHermitianTol))
      throw std::invalid_argument("measurement effect not Hermitian");
    if (hermitian_eigenvalues(m).lo < kEigenvalueFloor)
      throw std::invalid_argument("measurement effect not PSD");
  }
  const Matrix2c sum = m0 + m1 - Matrix2c::Identity();
  if (sum.cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("measurement effects do not sum to identity");
}

Assemblage::Assemblage(const std::array<Matrix2c, 6>& members)
    : members_(members) {
  Matrix2c rho_b = Matrix2c::Zero();
  for (int x = 0; x < kSettings; ++x) {
    Matrix2c row_sum = Matrix2c::Zero();
    for (int a = 0; a < kOutcomes; ++a) {
      const Matrix2c& s = at(x, a);
      if (!is_hermitian(s, 1e-11))
        throw std::invalid_argument("assemblage member not Hermitian");
      if (hermitian_eigenvalues(hermitized(s)).lo < -kAssemblageTol)
        throw std::invalid_argument("assemblage member not PSD");
      row_sum += s;
    }
    if (x == 0) {
      rho_b = row_sum;
    } else if ((row_sum - rho_b).cwiseAbs().maxCoeff() > kAssemblageTol) {
      throw std::invalid_argument("assemblage rows have different sums");
    }
  }
  if (std::abs(rho_b.trace().real() - 1.0) > kAssemblageTol ||
      std::abs(rho_b.trace().imag()) > kAssemblageTol)
    throw std::invalid_argument("assemblage reduced state trace is not 1");
}

Matrix2c Assemblage::reduced() const {
  return hermitized(Matrix2c(members_[0] + members_[1]));
}

std::array<Measurement, 3> pauli_measurements() {
  const Complex i(0.0, 1.0);
  Matrix2c px, py, pz, id;
  px << 0, 1, 1, 0;
  py << 0, -i, i, 0;
  pz << 1, 0, 0, -1;
  id = Matrix2c::Identity();
  auto split = [&](const Matrix2c& p) {
    return Measurement(0.5 * (id + p), 0.5 * (id - p));
  };
  return {split(px), split(py), split(pz)};
}

Assemblage compute_assemblage(const DensityMatrix& rho,
                              const std::array<Measurement, 3>& meas) {
  const Matrix2c eye = Matrix2c::Identity();
  std::array<Matrix2c, 6> members;
  for (int x = 0; x < Assemblage::kSettings; ++x) {
    for (int a = 0; a < Assemblage::kOutcomes; ++a) {
      const Matrix4c op = kron(meas[x].effect(a), eye) * rho.matrix();
      members[2 * x + a] = hermitized(partial_trace_A(op));
    }
  }
  return Assemblage(members);
}

StrategyTable deterministic_strategies() { return {}; }

SteeringResult steerable_weight(const Assemblage& assemblage,
                                const SdpConfig& cfg) {
  const StrategyTable table = deterministic_strategies();
  BlockSdpProblem problem;
  problem.objective.assign(StrategyTable::kStrategies, Matrix2c::Identity());
  problem.constraints.reserve(6);
  for (int x = 0; x < Assemblage::kSettings; ++x) {
    for (int a = 0; a < Assemblage::kOutcomes; ++a) {
      SdpConstraint con;
      con.constant = assemblage.at(x, a);
      con.weights.resize(StrategyTable::kStrategies);
      for (int lam = 0; lam < StrategyTable::kStrategies; ++lam)
        con.weights(lam) = table.d(a, x, lam);
      problem.constraints.push_back(std::move(con));
    }
  }
  SteeringResult res;
  res.solution = solve_block_sdp(problem, cfg);
  res.sw = std::clamp(1.0 - res.solution.value, 0.0, 1.0);
  return res;
}

double label_state(const DensityMatrix& rho, const SdpConfig& cfg) {
  const SteeringResult res =
      steerable_weight(compute_assemblage(rho, pauli_measurements()), cfg);
  if (!res.solution.converged) {
    std::ostringstream msg;
    msg << "steering SDP did not converge: residual="
        << res.solution.primal_residual
        << " iterations=" << res.solution.iterations;
    throw SolverError(msg.str());
  }
  return res.sw;
}

}  // namespace qsteer
