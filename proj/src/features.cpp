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

#include "qsteer/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qsteer {

namespace {

constexpr double kOrthoTol = 1e-12;

// stream tag for the randomness a scheme freezes at construction
constexpr std::uint64_t kSchemeSalt = 0x736368;

Vector4c amp4(Complex a, Complex b, Complex c, Complex d) {
  Vector4c v;
  v << a, b, c, d;
  return v;
}

ProjectiveBasis rotate_basis(const ProjectiveBasis& basis, const Unitary2& u,
                             const Unitary2& v) {
  const Matrix4c w = kron(u.matrix(), v.matrix());
  ProjectiveBasis out;
  out.tag = basis.tag;
  for (const auto& vec : basis.vectors)
    out.vectors.emplace_back(Vector4c(w * vec.amps()));
  return out;
}

Vector4c product(const Eigen::Vector2cd& a, const Eigen::Vector2cd& b) {
  return amp4(a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1));
}

ProjectiveBasis make_basis(int tag, const std::array<Vector4c, 4>& vs) {
  ProjectiveBasis b;
  b.tag = tag;
  for (const auto& v : vs) b.vectors.emplace_back(v);
  return b;
}

}  // namespace

void ProjectiveBasis::validate() const {
  if (vectors.size() != 4)
    throw std::invalid_argument("projective basis needs exactly 4 vectors");
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      const Complex ov = vectors[i].amps().dot(vectors[j].amps());
      if (std::abs(ov) > kOrthoTol)
        throw std::invalid_argument("projective basis vectors not orthogonal");
    }
  }
}

void FeatureScheme::validate() const {
  if (bases.empty()) throw std::invalid_argument("feature scheme has no bases");
  for (const auto& b : bases) b.validate();
  switch (kind) {
    case SchemeKind::FV1:
    case SchemeKind::FV4:
      // rotations either baked into the basis vectors or drawn per state
      if (bases.size() != 3 || policy == UnitaryPolicy::FixedPool)
        throw std::invalid_argument("FV1/FV4 need 3 bases, no unitary pool");
      break;
    case SchemeKind::FV2:
      if (bases.size() != 3)
        throw std::invalid_argument("FV2 needs 3 bases");
      break;
    case SchemeKind::FV3:
      if (bases.size() != 7 || policy != UnitaryPolicy::None)
        throw std::invalid_argument("FV3 needs 7 bases and no unitaries");
      break;
    case SchemeKind::Custom:
      break;
  }
  if (policy == UnitaryPolicy::FixedPool) {
    if (pool.size() != 20)
      throw std::invalid_argument("unitary pool must hold exactly 20 members");
  } else if (!pool.empty()) {
    throw std::invalid_argument("unitary pool given without FixedPool policy");
  }
}

// Builtin schemes freeze their unitaries at construction: one (U_j, V_j)
// pair per basis, drawn once from the seed and baked into the basis
// vectors.  Every state in a dataset is then measured in the same frames,
// which is what makes the probabilities informative about the state rather
// than about the draw.  Per-state randomization remains available through
// the FreshRandom / FixedPool policies on custom schemes.
FeatureScheme FeatureScheme::make(SchemeKind kind, std::uint64_t pool_seed) {
  FeatureScheme s;
  s.kind = kind;
  s.policy = UnitaryPolicy::None;
  const auto rotated = [&](std::initializer_list<int> tags,
                           std::uint64_t index) {
    RandomStream rng = RandomStream::substream(pool_seed, index, kSchemeSalt);
    for (int tag : tags) {
      const Unitary2 u = haar_unitary(rng);
      const Unitary2 v = haar_unitary(rng);
      s.bases.push_back(rotate_basis(builtin_basis(tag), u, v));
    }
  };
  switch (kind) {
    case SchemeKind::FV1:
      rotated({1, 2, 3}, 1);
      break;
    case SchemeKind::FV2: {
      // twenty-member pool, six picks (U1,V1,U2,V2,U3,V3) in order
      const std::vector<Unitary2> pool = unitary_pool(pool_seed);
      RandomStream rng = RandomStream::substream(pool_seed, 2, kSchemeSalt);
      const auto n = static_cast<std::uint32_t>(pool.size());
      for (int tag : {1, 2, 3}) {
        const Unitary2 u = pool[rng.uniform_int(n)];
        const Unitary2 v = pool[rng.uniform_int(n)];
        s.bases.push_back(rotate_basis(builtin_basis(tag), u, v));
      }
      break;
    }
    case SchemeKind::FV3:
      for (int j = 1; j <= 7; ++j) s.bases.push_back(builtin_basis(j));
      break;
    case SchemeKind::FV4:
      rotated({7, 2, 3}, 4);
      break;
    case SchemeKind::Custom:
      throw std::invalid_argument("custom schemes are built by hand");
  }
  s.validate();
  return s;
}

const char* scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::FV1: return "fv1";
    case SchemeKind::FV2: return "fv2";
    case SchemeKind::FV3: return "fv3";
    case SchemeKind::FV4: return "fv4";
    case SchemeKind::Custom: return "custom";
  }
  return "custom";
}

SchemeKind scheme_from_name(const std::string& name) {
  if (name == "fv1") return SchemeKind::FV1;
  if (name == "fv2") return SchemeKind::FV2;
  if (name == "fv3") return SchemeKind::FV3;
  if (name == "fv4") return SchemeKind::FV4;
  if (name == "custom") return SchemeKind::Custom;
  throw std::invalid_argument("unknown feature scheme: " + name);
}

ProjectiveBasis builtin_basis(int j) {
  const double s = 1.0 / std::sqrt(2.0);
  const Complex i(0.0, 1.0);
  using V2 = Eigen::Vector2cd;
  const V2 k0 = V2(1, 0), k1 = V2(0, 1);
  const V2 plus = s * V2(1, 1), minus = s * V2(1, -1);
  const V2 h = s * V2(1, i), v = s * V2(1, -i);
  switch (j) {
    case 1:
      return make_basis(1, {amp4(s, 0, 0, s), amp4(s, 0, 0, -s),
                            amp4(0, s, s, 0), amp4(0, s, -s, 0)});
    case 2:
      return make_basis(2, {product(k0, k0), product(k0, k1), product(k1, k0),
                            product(k1, k1)});
    case 3:
      return make_basis(3, {product(plus, k0), product(plus, k1),
                            product(minus, k0), product(minus, k1)});
    case 4:
      return make_basis(4, {amp4(s, 0, 0, i * s), amp4(s, 0, 0, -i * s),
                            amp4(0, s, i * s, 0), amp4(0, s, -i * s, 0)});
    case 5:
      return make_basis(5, {product(k0, h), product(k0, v), product(k1, h),
                            product(k1, v)});
    case 6:
      return make_basis(6, {product(h, k0), product(h, k1), product(v, k0),
                            product(v, k1)});
    case 7:
      return make_basis(7, {product(k0, plus), product(k0, minus),
                            product(k1, plus), product(k1, minus)});
    default:
      throw std::invalid_argument("builtin basis index must be 1..7");
  }
}

std::array<double, 4> measure_probabilities(const DensityMatrix& rho,
                                            const ProjectiveBasis& basis,
                                            const Unitary2& u,
                                            const Unitary2& v) {
  const Matrix4c w = kron(u.matrix(), v.matrix());
  std::array<double, 4> out{};
  for (int k = 0; k < 4; ++k) {
    const Vector4c rotated = w * basis.vectors[k].amps();
    const double p = (rotated.adjoint() * rho.matrix() * rotated)(0).real();
    out[k] = std::clamp(p, 0.0, 1.0);
  }
  return out;
}

FeatureVector extract_features(const DensityMatrix& rho,
                               const FeatureScheme& scheme,
                               RandomStream& rng) {
  scheme.validate();
  FeatureVector fv;
  fv.values.reserve(scheme.dim());
  const Unitary2 eye{Matrix2c::Identity()};
  for (const auto& basis : scheme.bases) {
    Unitary2 u = eye, v = eye;
    switch (scheme.policy) {
      case UnitaryPolicy::FreshRandom:
        u = haar_unitary(rng);
        v = haar_unitary(rng);
        break;
      case UnitaryPolicy::FixedPool: {
        const auto n = static_cast<std::uint32_t>(scheme.pool.size());
        const auto iu = rng.uniform_int(n);
        const auto iv = rng.uniform_int(n);
        u = scheme.pool[iu];
        v = scheme.pool[iv];
        break;
      }
      case UnitaryPolicy::None:
        break;
    }
    const auto probs = measure_probabilities(rho, basis, u, v);
    fv.values.insert(fv.values.end(), probs.begin(), probs.end());
  }
  return fv;
}

std::vector<Unitary2> unitary_pool(std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<Unitary2> pool;
  pool.reserve(20);
  for (int k = 0; k < 20; ++k) pool.push_back(haar_unitary(rng));
  return pool;
}

}  // namespace qsteer
