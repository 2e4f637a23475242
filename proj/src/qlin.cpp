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

#include "qsteer/qlin.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qsteer {

std::uint64_t RandomStream::mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint32_t RandomStream::uniform_int(std::uint32_t n) {
  if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
  // Rejection sampling on the top 32 bits to avoid modulo bias.
  const std::uint64_t span = 0x100000000ULL;
  const std::uint64_t limit = span - span % n;
  for (;;) {
    const std::uint64_t v = next_u64() >> 32;
    if (v < limit) return static_cast<std::uint32_t>(v % n);
  }
}

double RandomStream::gaussian() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  double u1 = uniform();
  while (u1 <= 0x1.0p-1022) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  cached_ = r * std::sin(a);
  has_cached_ = true;
  return r * std::cos(a);
}

bool is_hermitian(const MatrixXc& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

Matrix4c kron(const Matrix2c& a, const Matrix2c& b) {
  Matrix4c out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

Eig2 hermitian_eigenvalues(const Matrix2c& h) {
  const double t = (h(0, 0).real() + h(1, 1).real()) / 2.0;
  const double d = (h(0, 0).real() - h(1, 1).real()) / 2.0;
  const double r = std::sqrt(d * d + std::norm(h(0, 1)));
  return {t - r, t + r};
}

Eigen::Vector4d hermitian_eigenvalues(const Matrix4c& h) {
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

StateVector4::StateVector4(const Vector4c& amps) : amps_(amps) {
  if (std::abs(amps_.norm() - 1.0) > kHermitianTol)
    throw std::invalid_argument("StateVector4: amplitudes must have unit norm");
}

Unitary2::Unitary2(const Matrix2c& m) : m_(m) {
  if ((m_ * m_.adjoint() - Matrix2c::Identity()).norm() > kHermitianTol)
    throw std::invalid_argument("Unitary2: U U^dagger differs from identity");
}

DensityMatrix::DensityMatrix(const Matrix4c& m) : m_(m) {
  if (!is_hermitian(m_, kHermitianTol))
    throw std::invalid_argument("DensityMatrix: matrix is not Hermitian");
  if (std::abs(m_.trace().real() - 1.0) > kUnitTraceTol ||
      std::abs(m_.trace().imag()) > kUnitTraceTol)
    throw std::invalid_argument("DensityMatrix: trace differs from one");
  if (hermitian_eigenvalues(m_).minCoeff() < kEigenvalueFloor)
    throw std::invalid_argument("DensityMatrix: negative eigenvalue");
}

Unitary2 haar_unitary(RandomStream& rng) {
  for (;;) {
    Matrix2c g;
    g(0, 0) = rng.complex_gaussian();
    g(0, 1) = rng.complex_gaussian();
    g(1, 0) = rng.complex_gaussian();
    g(1, 1) = rng.complex_gaussian();
    // Gram-Schmidt on the columns. Normalizing against positive column norms
    // fixes R's diagonal to be real positive, which yields Haar measure.
    const double n0 = g.col(0).norm();
    if (n0 < 1e-100) continue;
    Matrix2c u;
    u.col(0) = g.col(0) / n0;
    const Complex proj = u.col(0).dot(g.col(1));
    Eigen::Vector2cd c1 = g.col(1) - proj * u.col(0);
    const double n1 = c1.norm();
    if (n1 < 1e-100) continue;
    u.col(1) = c1 / n1;
    return Unitary2(u);
  }
}

DensityMatrix random_density(RandomStream& rng, int rank) {
  if (rank < 1 || rank > 4)
    throw std::invalid_argument("random_density: rank must be in 1..4");
  Eigen::Matrix<Complex, 4, Eigen::Dynamic> g(4, rank);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < rank; ++j) g(i, j) = rng.complex_gaussian();
  Matrix4c rho = g * g.adjoint();
  rho = hermitized(rho / rho.trace().real());
  return DensityMatrix(rho);
}

DensityMatrix werner_state(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("werner_state: p must be in [0, 1]");
  Vector4c w;
  w << 0.0, 1.0 / std::numbers::sqrt2, -1.0 / std::numbers::sqrt2, 0.0;
  const Matrix4c rho =
      p * (w * w.adjoint()) + (1.0 - p) / 4.0 * Matrix4c::Identity();
  return DensityMatrix(hermitized(rho));
}

Matrix2c partial_trace_A(const MatrixXc& m) {
  if (m.rows() != 4 || m.cols() != 4)
    throw std::invalid_argument("partial_trace_A: matrix must be 4x4");
  Matrix2c out;
  for (int j = 0; j < 2; ++j)
    for (int l = 0; l < 2; ++l) out(j, l) = m(j, l) + m(2 + j, 2 + l);
  return out;
}

Matrix4c projector(const StateVector4& v) {
  return v.amps() * v.amps().adjoint();
}

}  // namespace qsteer
