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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qsteer/features.hpp"

#include <cmath>
#include <string>

using namespace qsteer;

namespace {

DensityMatrix maximally_mixed() {
  return DensityMatrix(Matrix4c(0.25 * Matrix4c::Identity()));
}

double reduced_purity(const StateVector4& v) {
  const Matrix4c proj = v.amps() * v.amps().adjoint();
  const Matrix2c red = partial_trace_A(proj);
  return (red * red).trace().real();
}

bool same_bases(const FeatureScheme& a, const FeatureScheme& b) {
  if (a.bases.size() != b.bases.size()) return false;
  for (std::size_t j = 0; j < a.bases.size(); ++j) {
    for (int i = 0; i < 4; ++i) {
      if (a.bases[j].vectors[i].amps() != b.bases[j].vectors[i].amps())
        return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("builtin basis 1 is the Bell basis") {
  const ProjectiveBasis b = builtin_basis(1);
  const double s = 1.0 / std::sqrt(2.0);
  Vector4c phi_plus;
  phi_plus << s, 0.0, 0.0, s;
  CHECK((b.vectors[0].amps() - phi_plus).norm() < 1e-15);
  CHECK(b.tag == 1);
}

TEST_CASE("builtin basis 2 is computational") {
  const ProjectiveBasis b = builtin_basis(2);
  for (int i = 0; i < 4; ++i) {
    Vector4c e = Vector4c::Zero();
    e(i) = 1.0;
    CHECK((b.vectors[i].amps() - e).norm() < 1e-15);
  }
}

TEST_CASE("all builtin bases are orthonormal") {
  for (int j = 1; j <= 7; ++j) {
    const ProjectiveBasis b = builtin_basis(j);
    for (int i = 0; i < 4; ++i) {
      for (int k = 0; k < 4; ++k) {
        const Complex g = b.vectors[i].amps().dot(b.vectors[k].amps());
        CHECK(std::abs(g - (i == k ? 1.0 : 0.0)) < 1e-12);
      }
    }
  }
  CHECK_THROWS_AS(builtin_basis(0), std::invalid_argument);
  CHECK_THROWS_AS(builtin_basis(8), std::invalid_argument);
}

TEST_CASE("bases 1 and 4 are entangled, the rest are product") {
  for (int j = 1; j <= 7; ++j) {
    const ProjectiveBasis b = builtin_basis(j);
    for (const auto& v : b.vectors) {
      const double purity = reduced_purity(v);
      if (j == 1 || j == 4) {
        CHECK(purity == doctest::Approx(0.5).epsilon(1e-12));
      } else {
        CHECK(purity == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("measurement probabilities: closed cases") {
  const Unitary2 id{Matrix2c::Identity()};

  const auto mixed = measure_probabilities(maximally_mixed(),
                                           builtin_basis(3), id, id);
  for (double p : mixed) CHECK(p == doctest::Approx(0.25).epsilon(1e-14));

  const double s = 1.0 / std::sqrt(2.0);
  Vector4c phi_plus;
  phi_plus << s, 0.0, 0.0, s;
  const DensityMatrix bell(Matrix4c(phi_plus * phi_plus.adjoint()));
  const auto eig = measure_probabilities(bell, builtin_basis(1), id, id);
  CHECK(eig[0] == doctest::Approx(1.0).epsilon(1e-14));
  for (int i = 1; i < 4; ++i)
    CHECK(eig[i] == doctest::Approx(0.0).epsilon(1e-14));

  RandomStream rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const DensityMatrix rho =
        random_density(rng, 1 + static_cast<int>(rng.uniform_int(4)));
    const Unitary2 u = haar_unitary(rng), v = haar_unitary(rng);
    const int tag = 1 + static_cast<int>(rng.uniform_int(7));
    const auto probs = measure_probabilities(rho, builtin_basis(tag), u, v);
    double sum = 0.0;
    for (double p : probs) {
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
      sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("scheme dimensions and validation") {
  CHECK(FeatureScheme::make(SchemeKind::FV1, 5).dim() == 12);
  CHECK(FeatureScheme::make(SchemeKind::FV2, 5).dim() == 12);
  CHECK(FeatureScheme::make(SchemeKind::FV3).dim() == 28);
  CHECK(FeatureScheme::make(SchemeKind::FV4, 5).dim() == 12);
  CHECK_THROWS_AS(FeatureScheme::make(SchemeKind::Custom),
                  std::invalid_argument);

  FeatureScheme bad = FeatureScheme::make(SchemeKind::FV1, 5);
  bad.bases.pop_back();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  FeatureScheme pooled = FeatureScheme::make(SchemeKind::FV1, 5);
  pooled.policy = UnitaryPolicy::FixedPool;  // builtin kinds bake rotations
  pooled.pool = unitary_pool(5);
  CHECK_THROWS_AS(pooled.validate(), std::invalid_argument);

  FeatureScheme stray = FeatureScheme::make(SchemeKind::FV3);
  stray.pool = unitary_pool(5);  // pool without FixedPool policy
  CHECK_THROWS_AS(stray.validate(), std::invalid_argument);
}

TEST_CASE("scheme names round-trip") {
  for (auto kind : {SchemeKind::FV1, SchemeKind::FV2, SchemeKind::FV3,
                    SchemeKind::FV4, SchemeKind::Custom})
    CHECK(scheme_from_name(scheme_name(kind)) == kind);
  CHECK_THROWS_AS(scheme_from_name("fv9"), std::invalid_argument);
}

TEST_CASE("maximally mixed state features are flat under every scheme") {
  RandomStream rng(11);
  for (auto kind : {SchemeKind::FV1, SchemeKind::FV2, SchemeKind::FV3,
                    SchemeKind::FV4}) {
    const FeatureScheme s = FeatureScheme::make(kind, 99);
    const FeatureVector f = extract_features(maximally_mixed(), s, rng);
    REQUIRE(f.dim() == s.dim());
    for (double v : f.values)
      CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
  }
}

TEST_CASE("per-basis quadruples sum to one") {
  RandomStream rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const DensityMatrix rho =
        random_density(rng, 1 + static_cast<int>(rng.uniform_int(4)));
    for (auto kind :
         {SchemeKind::FV1, SchemeKind::FV3, SchemeKind::FV4}) {
      const FeatureScheme s = FeatureScheme::make(kind, 3);
      const FeatureVector f = extract_features(rho, s, rng);
      for (int g = 0; g < f.dim() / 4; ++g) {
        double sum = 0.0;
        for (int i = 0; i < 4; ++i) sum += f.values[4 * g + i];
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("builtin schemes are frozen: deterministic in (kind, seed)") {
  for (auto kind : {SchemeKind::FV1, SchemeKind::FV2, SchemeKind::FV4}) {
    CHECK(same_bases(FeatureScheme::make(kind, 42),
                     FeatureScheme::make(kind, 42)));
    CHECK_FALSE(same_bases(FeatureScheme::make(kind, 42),
                           FeatureScheme::make(kind, 43)));
  }
  // FV3 carries the raw paper bases regardless of seed
  CHECK(same_bases(FeatureScheme::make(SchemeKind::FV3, 1),
                   FeatureScheme::make(SchemeKind::FV3, 2)));
}

TEST_CASE("two scheme seeds disagree on an entangled state, sums still hold") {
  const DensityMatrix rho = werner_state(0.9);
  RandomStream rng(13);
  const FeatureVector a =
      extract_features(rho, FeatureScheme::make(SchemeKind::FV1, 1), rng);
  const FeatureVector b =
      extract_features(rho, FeatureScheme::make(SchemeKind::FV1, 2), rng);
  double diff = 0.0;
  for (int i = 0; i < a.dim(); ++i) diff += std::abs(a.values[i] - b.values[i]);
  CHECK(diff > 1e-3);
}

TEST_CASE("frozen schemes do not consume randomness") {
  const DensityMatrix rho = werner_state(0.7);
  RandomStream used(21), fresh(21);
  for (auto kind : {SchemeKind::FV1, SchemeKind::FV2, SchemeKind::FV3,
                    SchemeKind::FV4})
    extract_features(rho, FeatureScheme::make(kind, 5), used);
  CHECK(used.next_u64() == fresh.next_u64());
}

TEST_CASE("FV3 features are a function of the state alone") {
  const DensityMatrix rho = werner_state(0.8);
  RandomStream r1(100), r2(200);
  const FeatureScheme s = FeatureScheme::make(SchemeKind::FV3);
  const FeatureVector a = extract_features(rho, s, r1);
  const FeatureVector b = extract_features(rho, s, r2);
  for (int i = 0; i < a.dim(); ++i) CHECK(a.values[i] == b.values[i]);
}

TEST_CASE("custom fresh-random schemes consume per-state randomness") {
  FeatureScheme s;
  s.kind = SchemeKind::Custom;
  s.policy = UnitaryPolicy::FreshRandom;
  for (int tag : {1, 2, 3}) s.bases.push_back(builtin_basis(tag));
  s.validate();

  const DensityMatrix rho = werner_state(0.9);
  RandomStream r1(5), r2(5), r3(6);
  const FeatureVector a = extract_features(rho, s, r1);
  const FeatureVector b = extract_features(rho, s, r2);
  const FeatureVector c = extract_features(rho, s, r3);
  for (int i = 0; i < a.dim(); ++i) CHECK(a.values[i] == b.values[i]);
  double diff = 0.0;
  for (int i = 0; i < a.dim(); ++i) diff += std::abs(a.values[i] - c.values[i]);
  CHECK(diff > 1e-3);
  CHECK(r1.next_u64() != RandomStream(5).next_u64());  // rng was consumed
}

TEST_CASE("custom fixed-pool schemes draw from the pool") {
  FeatureScheme s;
  s.kind = SchemeKind::Custom;
  s.policy = UnitaryPolicy::FixedPool;
  s.pool = unitary_pool(17);
  for (int tag : {1, 2, 3}) s.bases.push_back(builtin_basis(tag));
  s.validate();

  const DensityMatrix rho = werner_state(0.9);
  RandomStream r1(5), r2(5);
  const FeatureVector a = extract_features(rho, s, r1);
  const FeatureVector b = extract_features(rho, s, r2);
  for (int i = 0; i < a.dim(); ++i) CHECK(a.values[i] == b.values[i]);

  FeatureScheme empty = s;
  empty.pool.clear();
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
}

TEST_CASE("unitary pool: twenty deterministic Haar members") {
  const auto pool = unitary_pool(33);
  CHECK(pool.size() == 20);
  for (const auto& u : pool) {
    const Matrix2c m = u.matrix();
    CHECK((m * m.adjoint() - Matrix2c::Identity()).norm() < 1e-12);
  }
  const auto again = unitary_pool(33);
  for (int i = 0; i < 20; ++i)
    CHECK(pool[i].matrix() == again[i].matrix());
  const auto other = unitary_pool(34);
  CHECK((pool[0].matrix() - other[0].matrix()).norm() > 1e-6);
}
