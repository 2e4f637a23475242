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

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>

namespace qsteer {

using Complex  = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;
using Vector4c = Eigen::Vector4cd;
using MatrixXc = Eigen::MatrixXcd;

inline constexpr double kHermitianTol    = 1e-12;
inline constexpr double kUnitTraceTol    = 1e-12;
inline constexpr double kEigenvalueFloor = -1e-10;

/// Deterministic random stream: mt19937_64 seeded through a splitmix64
/// finalizer, uniform doubles from the top 53 bits, normals via Box-Muller.
/// Substreams derived from (master, index, salt) are independent of
/// scheduling order, which keeps parallel consumers reproducible.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : gen_(mix(seed)) {}

  static RandomStream substream(std::uint64_t master, std::uint64_t index,
                                std::uint64_t salt = 0) {
    return RandomStream(mix(master) ^ mix(index + 0x517cc1b727220a95ULL) ^
                        mix(salt + 0x2545f4914f6cdd1dULL));
  }

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  std::uint32_t uniform_int(std::uint32_t n);

  /// Standard normal. Box-Muller with the second variate cached.
  double gaussian();

  Complex complex_gaussian() {
    const double re = gaussian();
    const double im = gaussian();
    return Complex(re, im);
  }

 private:
  static std::uint64_t mix(std::uint64_t z);

  std::mt19937_64 gen_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

bool is_hermitian(const MatrixXc& m, double tol = kHermitianTol);

/// Symmetrize (M + M^dagger)/2 to suppress round-off before spectral work.
template <typename Derived>
typename Derived::PlainObject hermitized(const Eigen::MatrixBase<Derived>& m) {
  return ((m + m.adjoint()) / 2.0).eval();
}

Matrix4c kron(const Matrix2c& a, const Matrix2c& b);

/// Eigenvalues of a 2x2 Hermitian matrix, closed form.
struct Eig2 {
  double lo = 0.0;
  double hi = 0.0;
};
Eig2 hermitian_eigenvalues(const Matrix2c& h);

/// Eigenvalues of a 4x4 Hermitian matrix, ascending.
Eigen::Vector4d hermitian_eigenvalues(const Matrix4c& h);

/// Two-qubit pure state: four complex amplitudes with unit Euclidean norm.
class StateVector4 {
 public:
  explicit StateVector4(const Vector4c& amps);
  const Vector4c& amps() const { return amps_; }

 private:
  Vector4c amps_;
};

/// 2x2 unitary, U U^dagger = I within 1e-12 in Frobenius norm.
class Unitary2 {
 public:
  explicit Unitary2(const Matrix2c& m);
  const Matrix2c& matrix() const { return m_; }

 private:
  Matrix2c m_;
};

/// Two-qubit density matrix: Hermitian, unit trace, eigenvalues >= -1e-10.
class DensityMatrix {
 public:
  explicit DensityMatrix(const Matrix4c& m);
  const Matrix4c& matrix() const { return m_; }
  double purity() const { return (m_ * m_).trace().real(); }

 private:
  Matrix4c m_;
};

/// Haar-distributed 2x2 unitary: QR of a complex Gaussian matrix with the
/// phases of R's diagonal normalized (Gram-Schmidt with positive real R).
Unitary2 haar_unitary(RandomStream& rng);

/// Hilbert-Schmidt random state of the given rank: G a 4 x rank complex
/// Gaussian matrix, rho = G G^dagger / Tr(G G^dagger).
DensityMatrix random_density(RandomStream& rng, int rank);

/// Werner state p |W><W| + (1-p) I/4 with the singlet |W> = (|01>-|10>)/sqrt2.
DensityMatrix werner_state(double p);

/// Trace over the first qubit of a 4x4 matrix; throws unless m is 4x4.
Matrix2c partial_trace_A(const MatrixXc& m);

/// Rank-1 projector |v><v|.
Matrix4c projector(const StateVector4& v);

}  // namespace qsteer
