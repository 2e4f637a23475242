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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qsteer/features.hpp"
#include "qsteer/learn.hpp"
#include "qsteer/steering.hpp"

namespace py = pybind11;
using namespace qsteer;

namespace {

// feature-extraction stream tag; only Custom schemes with fresh draws
// actually consume it
constexpr std::uint64_t kPySalt = 0x7079;

DensityMatrix as_density(const Matrix4c& rho) { return DensityMatrix(rho); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "steerable-weight labeling and feature extraction";
  m.attr("__version__") = "0.1.0";

  m.def("werner_state", [](double p) { return werner_state(p).matrix(); },
        py::arg("p"),
        "Werner state p|psi-><psi-| + (1-p) I/4 as a 4x4 complex array.");

  m.def(
      "random_density",
      [](std::uint64_t seed, int rank, std::uint64_t index) {
        RandomStream rng = RandomStream::substream(seed, index, 0);
        return random_density(rng, rank).matrix();
      },
      py::arg("seed"), py::arg("rank"), py::arg("index") = 0,
      "Random two-qubit density matrix of the given rank (1..4), "
      "deterministic in (seed, index).");

  m.def(
      "haar_unitary",
      [](std::uint64_t seed, std::uint64_t index) {
        RandomStream rng = RandomStream::substream(seed, index, 0);
        return haar_unitary(rng).matrix();
      },
      py::arg("seed"), py::arg("index") = 0,
      "Haar-random single-qubit unitary, deterministic in (seed, index).");

  m.def(
      "label_state",
      [](const Matrix4c& rho, double feas_tol, double gap_tol, int max_iter) {
        SdpConfig cfg;
        cfg.feas_tol = feas_tol;
        cfg.gap_tol = gap_tol;
        cfg.max_iter = max_iter;
        return label_state(as_density(rho), cfg);
      },
      py::arg("rho"), py::arg("feas_tol") = SdpConfig{}.feas_tol,
      py::arg("gap_tol") = SdpConfig{}.gap_tol,
      py::arg("max_iter") = SdpConfig{}.max_iter,
      "Steerable weight of a two-qubit state under the three Pauli "
      "measurements, via the block SDP.");

  m.def(
      "compute_assemblage",
      [](const Matrix4c& rho) {
        const Assemblage a = compute_assemblage(as_density(rho),
                                                pauli_measurements());
        std::vector<Matrix2c> out;
        for (int x = 0; x < Assemblage::kSettings; ++x)
          for (int o = 0; o < Assemblage::kOutcomes; ++o)
            out.push_back(a.at(x, o));
        return out;
      },
      py::arg("rho"),
      "Bob's unnormalized conditional states for Pauli X/Y/Z on Alice, "
      "ordered [(x=0,a=0), (x=0,a=1), (x=1,a=0), ...].");

  m.def(
      "extract_features",
      [](const Matrix4c& rho, const std::string& scheme, std::uint64_t seed) {
        const FeatureScheme fs = FeatureScheme::make(scheme_from_name(scheme),
                                                     seed);
        RandomStream rng = RandomStream::substream(seed, 0, kPySalt);
        return extract_features(as_density(rho), fs, rng).values;
      },
      py::arg("rho"), py::arg("scheme") = "fv1", py::arg("seed") = 0,
      "Measurement-probability feature vector under the named scheme; the "
      "scheme's bases are frozen from the seed.");

  m.def(
      "scheme_dim",
      [](const std::string& scheme) {
        return FeatureScheme::make(scheme_from_name(scheme), 0).dim();
      },
      py::arg("scheme"), "Feature dimension of the named scheme.");

  m.def("mse", &mse, py::arg("y"), py::arg("yhat"), "Mean squared error.");

  m.def("r_squared", &r_squared, py::arg("y"), py::arg("yhat"),
        "Coefficient of determination against the mean predictor.");
}
