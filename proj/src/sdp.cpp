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

#include "qsteer/sdp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace qsteer {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;

using RowVec4 = Eigen::Matrix<double, 1, 4>;
using MatX4 = Eigen::Matrix<double, Eigen::Dynamic, 4>;
using Mat4 = Eigen::Matrix4d;

// Isometric vectorization of 2x2 Hermitian matrices: the Euclidean inner
// product of svecs equals the Frobenius inner product of the matrices.
RowVec4 svec(const Matrix2c& h) {
  RowVec4 s;
  s << h(0, 0).real(), h(1, 1).real(), kSqrt2 * h(0, 1).real(),
      kSqrt2 * h(0, 1).imag();
  return s;
}

Matrix2c smat(const RowVec4& s) {
  const Complex b(s(2) / kSqrt2, s(3) / kSqrt2);
  Matrix2c h;
  h << Complex(s(0), 0.0), b, std::conj(b), Complex(s(1), 0.0);
  return h;
}

// Coefficients of the Hermitian part of an arbitrary 2x2 matrix in the svec
// basis; agrees with svec() on Hermitian input.
RowVec4 hcoeff(const Matrix2c& a) {
  RowVec4 s;
  s << a(0, 0).real(), a(1, 1).real(),
      (a(0, 1).real() + a(1, 0).real()) / kSqrt2,
      (a(0, 1).imag() - a(1, 0).imag()) / kSqrt2;
  return s;
}

struct Eigs2 {
  double lo = 0.0;
  double hi = 0.0;
};

Eigs2 eigs_svec(const RowVec4& s) {
  const double t = 0.5 * (s(0) + s(1));
  const double d = 0.5 * (s(0) - s(1));
  const double r = std::sqrt(d * d + 0.5 * (s(2) * s(2) + s(3) * s(3)));
  return {t - r, t + r};
}

// In-place projection of an svec row onto the PSD cone; returns the smallest
// eigenvalue before projection.
double project_svec(RowVec4& s) {
  const double t = 0.5 * (s(0) + s(1));
  const double d = 0.5 * (s(0) - s(1));
  const double r = std::sqrt(d * d + 0.5 * (s(2) * s(2) + s(3) * s(3)));
  const double lo = t - r;
  if (lo >= 0.0) return lo;
  const double hi = t + r;
  if (hi <= 0.0) {
    s.setZero();
    return lo;
  }
  // Keep hi times the projector onto its eigenvector: r > 0 here.
  const double f = hi / (2.0 * r);
  s(0) = f * (r + d);
  s(1) = f * (r - d);
  s(2) *= f;
  s(3) *= f;
  return lo;
}

// Smallest s >= 0 with s*M - C >= 0, for PSD M (svec rows). Returns false
// when no finite scale exists (M near-singular where C is positive).
bool min_scale(const RowVec4& m, const RowVec4& c, double* s_out) {
  const Eigs2 ec = eigs_svec(c);
  if (ec.hi <= 0.0) {  // C <= 0: s = 0 already works
    *s_out = 0.0;
    return true;
  }
  const Eigs2 em = eigs_svec(m);
  const double scale = std::max({em.hi, ec.hi, 1e-30});
  if (em.lo <= 1e-14 * scale) return false;
  const double det_m = m(0) * m(1) - 0.5 * (m(2) * m(2) + m(3) * m(3));
  const double det_c = c(0) * c(1) - 0.5 * (c(2) * c(2) + c(3) * c(3));
  const double q = m(0) * c(1) + m(1) * c(0) - (m(2) * c(2) + m(3) * c(3));
  if (det_m <= 1e-16 * scale * scale) {
    *s_out = ec.hi / em.lo;  // sufficient: s*lmin(M) >= lmax(C)
    return true;
  }
  const double disc = std::max(0.0, q * q - 4.0 * det_m * det_c);
  *s_out = std::max(0.0, (q + std::sqrt(disc)) / (2.0 * det_m));
  return true;
}

// Shared problem data in svec form.
struct SvecProblem {
  int nb = 0;
  int nc = 0;
  Eigen::MatrixXd w;  // nc x nb constraint weights
  MatX4 kmat;         // constraint constants
  MatX4 cmat;         // objective coefficients
};

// Certify a primal/dual iterate pair: project the sigma rows onto the cone,
// measure the worst slack violation, repair the dual by a uniform scale, and
// accept when the violation and the certified gap both meet the tolerances.
// Fills blocks/value/primal_residual of *out unconditionally.
bool certify(const SvecProblem& p, const MatX4& sigma_rows,
             const MatX4& dual_rows, const SdpConfig& cfg, SdpSolution* out) {
  MatX4 shat = sigma_rows;
  for (int b = 0; b < p.nb; ++b) {
    RowVec4 row = shat.row(b);
    project_svec(row);
    shat.row(b) = row;
  }
  double pval = 0.0;
  for (int b = 0; b < p.nb; ++b)
    pval += p.cmat.row(b).dot(shat.row(b));
  double viol = 0.0;
  MatX4 slack = p.kmat;
  slack.noalias() -= p.w * shat;
  for (int j = 0; j < p.nc; ++j)
    viol = std::max(viol, -eigs_svec(RowVec4(slack.row(j))).lo);
  viol = std::max(viol, 0.0);

  MatX4 y(p.nc, 4);
  for (int j = 0; j < p.nc; ++j) {
    RowVec4 row = dual_rows.row(j);
    project_svec(row);
    y.row(j) = row;
  }
  bool cert = true;
  double s_star = 0.0;
  for (int b = 0; b < p.nb && cert; ++b) {
    RowVec4 m = RowVec4::Zero();
    for (int j = 0; j < p.nc; ++j) m += p.w(j, b) * y.row(j);
    const Eigs2 em = eigs_svec(m);
    if (em.lo < -1e-12 * std::max(1.0, em.hi)) {
      cert = false;  // indefinite aggregate (negative weights): no repair
      break;
    }
    double s_b = 0.0;
    if (!min_scale(m, RowVec4(p.cmat.row(b)), &s_b)) {
      cert = false;
      break;
    }
    s_star = std::max(s_star, s_b);
  }
  double dval = std::numeric_limits<double>::infinity();
  if (cert) {
    double ky = 0.0;
    for (int j = 0; j < p.nc; ++j) ky += p.kmat.row(j).dot(y.row(j));
    dval = s_star * ky;
  }

  out->blocks.resize(p.nb);
  for (int b = 0; b < p.nb; ++b) out->blocks[b] = smat(RowVec4(shat.row(b)));
  out->value = pval;
  out->primal_residual = viol;
  return viol <= cfg.feas_tol && dval - pval <= cfg.gap_tol;
}

// First-order phase: ADMM with over-relaxation on the consensus splitting
// z = [sigma; K - W sigma], both halves in the PSD cone. Converges quickly
// on well-conditioned instances; budget-limited because degenerate ones
// (rank-deficient constants) make it crawl.
bool admm_phase(const SvecProblem& p, const SdpConfig& cfg, int budget,
                SdpSolution* sol) {
  const int nb = p.nb, nc = p.nc, nz = nb + nc;

  Eigen::MatrixXd gram = Eigen::MatrixXd::Identity(nb, nb);
  gram.noalias() += p.w.transpose() * p.w;
  const Eigen::LLT<Eigen::MatrixXd> llt(gram);

  MatX4 x = MatX4::Zero(nb, 4);
  MatX4 z = MatX4::Zero(nz, 4), u = MatX4::Zero(nz, 4);
  MatX4 v(nz, 4), vhat(nz, 4), znew(nz, 4), rhs(nb, 4), dz(nz, 4);

  double rho = 1.0;
  const double alpha = 1.6;  // over-relaxation
  const int check_every = 25;
  const int rho_every = 50;

  int iter = 0;
  while (iter < budget) {
    ++iter;
    // x-update: (I + W^T W) x = A^T (z - u - k) + c / rho
    rhs = z.topRows(nb) - u.topRows(nb);
    dz.bottomRows(nc) = z.bottomRows(nc) - u.bottomRows(nc) - p.kmat;
    rhs.noalias() -= p.w.transpose() * dz.bottomRows(nc);
    rhs += p.cmat / rho;
    x = llt.solve(rhs);

    v.topRows(nb) = x;
    v.bottomRows(nc) = p.kmat;
    v.bottomRows(nc).noalias() -= p.w * x;

    vhat = alpha * v + (1.0 - alpha) * z;
    znew = vhat + u;
    for (int i = 0; i < nz; ++i) {
      RowVec4 row = znew.row(i);
      project_svec(row);
      znew.row(i) = row;
    }
    u += vhat - znew;
    dz = znew - z;
    z.swap(znew);

    if (iter % check_every == 0 || iter == budget) {
      // u rows are NSD right after the projection, so -rho*u is the natural
      // PSD dual candidate.
      if (certify(p, x, MatX4(-rho * u.bottomRows(nc)), cfg, sol)) {
        sol->iterations += iter;
        return true;
      }
    }

    if (iter % rho_every == 0) {
      const double r_prim = (v - z).norm();
      rhs = dz.topRows(nb);
      rhs.noalias() -= p.w.transpose() * dz.bottomRows(nc);
      const double r_dual = rho * rhs.norm();
      if (r_prim > 10.0 * r_dual && rho < 1e6) {
        rho *= 2.0;
        u *= 0.5;
      } else if (r_dual > 10.0 * r_prim && rho > 1e-6) {
        rho *= 0.5;
        u *= 2.0;
      }
    }
  }
  sol->iterations += iter;
  return false;
}

// 2x2 Hermitian inverse via the adjugate.
Matrix2c inv2(const Matrix2c& m) {
  const Complex det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  Matrix2c out;
  out << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return out / det;
}

// Largest step a in [0, cap] keeping every block of s + a*ds PSD.
double max_step(const std::vector<Matrix2c>& s,
                const std::vector<Matrix2c>& ds, double cap) {
  double a = cap;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Matrix2c g = inv2(s[i]) * ds[i];  // real eigenvalues
    const double tr = g.trace().real();
    const double det = (g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0)).real();
    const double disc = std::max(0.0, tr * tr - 4.0 * det);
    const double lo = 0.5 * (tr - std::sqrt(disc));
    if (lo < 0.0) a = std::min(a, -1.0 / lo);
  }
  return a;
}

// Second phase: dense primal-dual interior-point refinement (HKM directions
// with a Mehrotra corrector) on the same block problem, written as the LMI
//   G(y) = F0 + sum_i y_i F_i >= 0,
// G block-diagonal over the nb variable and nc slack slots. Robust on the
// degenerate instances that stall the first-order phase.
bool ipm_phase(const SvecProblem& p, const SdpConfig& cfg, int max_rounds,
               SdpSolution* sol) {
  const int nb = p.nb, nc = p.nc, nz = nb + nc, nvar = 4 * nb;

  // Iterates: y (svec rows), slack blocks s, dual blocks xd.
  MatX4 y = MatX4::Zero(nb, 4);
  std::vector<Matrix2c> s(nz), xd(nz), ds(nz), dx(nz), ds_aff(nz), dx_aff(nz);
  double s0 = 1.0, x0 = 1.0;
  for (int j = 0; j < nc; ++j)
    s0 = std::max(s0, eigs_svec(RowVec4(p.kmat.row(j))).hi);
  for (int b = 0; b < nb; ++b)
    x0 = std::max(x0, std::abs(eigs_svec(RowVec4(p.cmat.row(b))).hi));
  for (int i = 0; i < nz; ++i) {
    s[i] = s0 * Matrix2c::Identity();
    xd[i] = x0 * Matrix2c::Identity();
  }

  // <F_i, Q> for all i, given per-slot coefficient rows of Q.
  const auto gather = [&](const MatX4& q) {
    Eigen::MatrixXd g = q.topRows(nb);
    g.noalias() -= p.w.transpose() * q.bottomRows(nc);
    return g;
  };

  const std::array<Matrix2c, 4> ebasis = {
      smat(RowVec4(1, 0, 0, 0)), smat(RowVec4(0, 1, 0, 0)),
      smat(RowVec4(0, 0, 1, 0)), smat(RowVec4(0, 0, 0, 1))};

  Eigen::MatrixXd big(nvar, nvar);
  MatX4 rp(nz, 4), q_sinv(nz, 4), q_spx(nz, 4), q_corr(nz, 4);
  std::vector<Matrix2c> sinv(nz), rpm(nz);

  for (int round = 0; round < max_rounds; ++round) {
    // Residuals: rp = G(y) - s per slot.
    rp.topRows(nb) = y;
    rp.bottomRows(nc) = p.kmat;
    rp.bottomRows(nc).noalias() -= p.w * y;
    for (int i = 0; i < nz; ++i) {
      rpm[i] = smat(RowVec4(rp.row(i))) - s[i];
      rp.row(i) = svec(rpm[i]);
      sinv[i] = hermitized(inv2(s[i]));
    }
    double mu = 0.0;
    for (int i = 0; i < nz; ++i)
      mu += (s[i] * xd[i]).trace().real();
    mu /= 2.0 * nz;
    if (!std::isfinite(mu) || mu <= 0.0) break;

    // Schur complement M_{ik} = <F_i, S^-1 F_k X>, assembled from per-slot
    // 4x4 kernels T_s(t,t') = hcoeff(S^-1 E_t' X)_t.
    big.setZero();
    for (int slot = 0; slot < nz; ++slot) {
      Mat4 t;
      for (int tp = 0; tp < 4; ++tp) {
        const Matrix2c a = sinv[slot] * ebasis[tp] * xd[slot];
        t.col(tp) = hcoeff(a).transpose();
      }
      if (slot < nb) {
        big.block<4, 4>(4 * slot, 4 * slot) += t;
      } else {
        const int j = slot - nb;
        for (int b = 0; b < nb; ++b) {
          if (p.w(j, b) == 0.0) continue;
          for (int bp = 0; bp < nb; ++bp) {
            if (p.w(j, bp) == 0.0) continue;
            big.block<4, 4>(4 * b, 4 * bp) += p.w(j, b) * p.w(j, bp) * t;
          }
        }
      }
    }
    big = 0.5 * (big + big.transpose()).eval();
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(big);
    if (ldlt.info() != Eigen::Success) break;

    for (int i = 0; i < nz; ++i) {
      q_sinv.row(i) = svec(sinv[i]);
      q_spx.row(i) = hcoeff(sinv[i] * rpm[i] * xd[i]);
    }

    MatX4 dy_rows(nb, 4);
    const auto solve_direction = [&](double sigma_mu, bool corrector) {
      MatX4 rhs_rows = -q_spx + sigma_mu * q_sinv;
      if (corrector) rhs_rows -= q_corr;
      const Eigen::MatrixXd rhs = p.cmat + gather(rhs_rows);
      Eigen::VectorXd rhsv(nvar);
      for (int b = 0; b < nb; ++b)
        rhsv.segment<4>(4 * b) = rhs.row(b).transpose();
      const Eigen::VectorXd dyv = ldlt.solve(rhsv);
      for (int b = 0; b < nb; ++b)
        dy_rows.row(b) = dyv.segment<4>(4 * b).transpose();
      MatX4 dsv(nz, 4);
      dsv.topRows(nb) = dy_rows;
      dsv.bottomRows(nc).setZero();
      dsv.bottomRows(nc).noalias() -= p.w * dy_rows;
      dsv += rp;
      for (int i = 0; i < nz; ++i) {
        ds[i] = smat(RowVec4(dsv.row(i)));
        Matrix2c d = sigma_mu * sinv[i] - xd[i] - sinv[i] * ds[i] * xd[i];
        if (corrector) d -= sinv[i] * ds_aff[i] * dx_aff[i];
        dx[i] = hermitized(d);
      }
    };

    // Predictor.
    solve_direction(0.0, false);
    ds_aff = ds;
    dx_aff = dx;
    const double ap_aff = max_step(s, ds, 1.0);
    const double ad_aff = max_step(xd, dx, 1.0);
    double mu_aff = 0.0;
    for (int i = 0; i < nz; ++i)
      mu_aff += ((s[i] + ap_aff * ds[i]) * (xd[i] + ad_aff * dx[i]))
                    .trace()
                    .real();
    mu_aff /= 2.0 * nz;
    const double ratio = std::clamp(mu_aff / mu, 0.0, 1.0);
    const double sigma = std::clamp(ratio * ratio * ratio, 1e-6, 1.0);

    // Corrector.
    for (int i = 0; i < nz; ++i)
      q_corr.row(i) = hcoeff(sinv[i] * ds_aff[i] * dx_aff[i]);
    solve_direction(sigma * mu, true);

    const double ap = 0.98 * max_step(s, ds, 1.0 / 0.98);
    const double ad = 0.98 * max_step(xd, dx, 1.0 / 0.98);
    for (int i = 0; i < nz; ++i) {
      s[i] = hermitized(Matrix2c(s[i] + ap * ds[i]));
      xd[i] = hermitized(Matrix2c(xd[i] + ad * dx[i]));
    }
    y += ap * dy_rows;

    sol->iterations += 1;

    MatX4 dual_rows(nc, 4);
    for (int j = 0; j < nc; ++j) dual_rows.row(j) = svec(xd[nb + j]);
    if (certify(p, y, dual_rows, cfg, sol)) return true;
  }
  return false;
}

}  // namespace

void BlockSdpProblem::validate() const {
  if (objective.empty()) throw std::invalid_argument("sdp: no blocks");
  for (const auto& c : objective) {
    if (!is_hermitian(c, kHermitianTol))
      throw std::invalid_argument("sdp: objective block not Hermitian");
  }
  const int nb = nblocks();
  for (const auto& con : constraints) {
    if (!is_hermitian(con.constant, kHermitianTol))
      throw std::invalid_argument("sdp: constraint constant not Hermitian");
    if (con.weights.size() != nb)
      throw std::invalid_argument("sdp: constraint weight count mismatch");
    if (!con.weights.allFinite())
      throw std::invalid_argument("sdp: constraint weights not finite");
  }
}

SdpSolution solve_block_sdp(const BlockSdpProblem& problem,
                            const SdpConfig& cfg) {
  problem.validate();
  if (!(cfg.feas_tol > 0.0) || !(cfg.gap_tol > 0.0))
    throw std::invalid_argument("sdp: tolerances must be positive");
  if (cfg.max_iter < 1)
    throw std::invalid_argument("sdp: max_iter must be at least 1");

  SvecProblem p;
  p.nb = problem.nblocks();
  p.nc = static_cast<int>(problem.constraints.size());
  p.w.resize(p.nc, p.nb);
  p.kmat.resize(p.nc, 4);
  p.cmat.resize(p.nb, 4);
  for (int j = 0; j < p.nc; ++j) {
    p.w.row(j) = problem.constraints[j].weights.transpose();
    p.kmat.row(j) = svec(problem.constraints[j].constant);
  }
  for (int b = 0; b < p.nb; ++b) p.cmat.row(b) = svec(problem.objective[b]);

  SdpSolution sol;
  sol.blocks.assign(p.nb, Matrix2c::Zero());
  sol.iterations = 0;

  const int kAdmmBudget = 6000;
  const int budget = std::min(cfg.max_iter, kAdmmBudget);
  if (admm_phase(p, cfg, budget, &sol)) {
    sol.converged = true;
    return sol;
  }
  if (cfg.max_iter > sol.iterations + 100) {
    if (ipm_phase(p, cfg, 100, &sol)) {
      sol.converged = true;
      return sol;
    }
  }
  sol.converged = false;
  return sol;
}

Matrix2c psd_project(const Matrix2c& m) {
  if (!is_hermitian(m, 1e-9))
    throw std::invalid_argument("psd_project: matrix not Hermitian");
  RowVec4 s = svec(hermitized(m));
  project_svec(s);
  return smat(s);
}

MatrixXc psd_project(const MatrixXc& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("psd_project: matrix not square");
  if (!is_hermitian(m, 1e-9))
    throw std::invalid_argument("psd_project: matrix not Hermitian");
  const MatrixXc h = hermitized(m);
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(h);
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  MatrixXc out =
      es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
  return hermitized(out);
}

double min_eigenvalue(const MatrixXc& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("min_eigenvalue: matrix not square");
  if (m.rows() == 2) {
    const Matrix2c h = hermitized(Matrix2c(m));
    return hermitian_eigenvalues(h).lo;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(hermitized(m),
                                             Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace qsteer
