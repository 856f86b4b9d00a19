// Copyright 2026 The QPF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qpf/fdlf.hpp"
#include "qpf/qsim.hpp"

namespace qpf {

struct HHLConfig;

/// Depolarizing gate noise, sampled as Pauli trajectories.
struct NoiseModel {
  double p_cnot = 0.0;
  double p_1q = 0.0;
  std::uint64_t seed = 0;

  /// p_1q defaults to a tenth of the two-qubit rate.
  static NoiseModel from_cnot_rate(double p_cnot, std::uint64_t seed = 0);
  void validate() const;
};

NoiseModel parse_noise_json(const std::string& text);
std::string noise_to_json(const NoiseModel& model);

struct NoisyRun {
  ShotHistogram histogram;
  /// Inserted two-qubit / single-qubit Paulis, one entry per trajectory.
  std::vector<int> two_qubit_errors;
  std::vector<int> single_qubit_errors;
};

/// One trajectory per shot. After every elementary two-qubit gate of the
/// decomposed circuit a uniformly random non-identity two-qubit Pauli is
/// inserted with probability p_cnot; after every single-qubit gate a random
/// X/Y/Z with probability p_1q. CONTROLLED_UNITARY blocks are applied whole
/// and followed by one p_cnot slot per estimated CNOT, acting on the first
/// control and a random target.
///
/// Measurement draws use the same stream as sample(state, shots, seed), and
/// error draws use per-trajectory derived seeds, so a zero-noise model
/// reproduces sample() bit-exactly and results do not depend on `workers`.
NoisyRun run_noisy_detailed(const QuantumCircuit& circuit, const NoiseModel& model,
                            std::uint64_t shots, std::uint64_t seed,
                            unsigned workers = 1);

ShotHistogram run_noisy(const QuantumCircuit& circuit, const NoiseModel& model,
                        std::uint64_t shots, std::uint64_t seed);

/// Number of p_cnot slots in the circuit (decomposed CNOTs plus block
/// estimates); the expected error count per trajectory is p_cnot times this.
long long noisy_two_qubit_slots(const QuantumCircuit& circuit);

/// Sampled-readout HHL solver whose circuits run under `model`. The solver
/// seed is model.seed; config.seed is ignored.
std::unique_ptr<LinearSolver> noisy_hhl_solver(const NoiseModel& model,
                                               const HHLConfig& config);

}  // namespace qpf
