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

#include <vector>

namespace qsteer {

/// One affine constraint: constant - sum_b weights[b] * sigma_b >= 0.
struct SdpConstraint {
  Matrix2c constant;
  Eigen::VectorXd weights;
};

/// Maximize sum_b Re Tr(objective[b] * sigma_b) over 2x2 Hermitian blocks
/// sigma_b subject to the affine PSD constraints and sigma_b >= 0.
struct BlockSdpProblem {
  std::vector<Matrix2c> objective;
  std::vector<SdpConstraint> constraints;

  int nblocks() const { return static_cast<int>(objective.size()); }
  void validate() const;
};

struct SdpConfig {
  double feas_tol = 1e-8;
  double gap_tol = 1e-7;
  int max_iter = 50000;
};

struct SdpSolution {
  std::vector<Matrix2c> blocks;  // optimal sigma_b, each exactly PSD
  double value = 0.0;            // objective at blocks
  double primal_residual = 0.0;  // worst PSD violation over all constraints
  int iterations = 0;
  bool converged = false;
};

/// ADMM over the product of 2x2 PSD cones with over-relaxation. Convergence
/// is declared only once a scaled dual certificate brackets the objective to
/// within gap_tol and the primal PSD violation is at most feas_tol; a final
/// projection pass makes the returned blocks exactly PSD.
SdpSolution solve_block_sdp(const BlockSdpProblem& problem,
                            const SdpConfig& cfg = {});

/// Frobenius-nearest PSD matrix: eigendecompose, clamp negatives, rebuild.
/// Throws if the input is not Hermitian.
Matrix2c psd_project(const Matrix2c& m);
MatrixXc psd_project(const MatrixXc& m);

/// Smallest eigenvalue of a Hermitian matrix; closed form for 2x2.
double min_eigenvalue(const MatrixXc& m);

}  // namespace qsteer
