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
#include <span>
#include <string>
#include <vector>

#include "qpf/fdlf.hpp"
#include "qpf/noise.hpp"
#include "qpf/qsim.hpp"
#include "qpf/types.hpp"

namespace qpf {

enum class ReadoutMode { kExactAmplitude, kSampled };
enum class SignPolicy { kReference, kPositive };

std::string readout_name(ReadoutMode mode);

struct HHLConfig {
  /// Eigenvalue register bits, read as a two's-complement signed integer.
  /// With grow_register this is a minimum (see eigenvalue_register_bits).
  int n_l = 3;
  bool grow_register = true;
  std::uint64_t shots = 1024;
  ReadoutMode readout = ReadoutMode::kExactAmplitude;
  SignPolicy signs = SignPolicy::kReference;
  double rotation_c = 1.0;
  /// Defaults to 2 pi / 2^bits, which puts integer eigenvalues on exact codes.
  std::optional<double> evolution_time;
  std::uint64_t seed = 0;

  double time() const;
  /// Eigenvalue represented by unsigned register code `code`.
  double code_eigenvalue(std::uint64_t code) const;
  void validate() const;
};

/// [[0, A], [A^T, 0]]; a square symmetric input is returned unchanged.
/// Register size used for an nb register of `nb_qubits`: n_l, or with
/// grow_register max(n_l, nb_qubits + 2), i.e. one magnitude bit more than
/// the data register plus a sign bit. Widths come out as 5, 7, 9, 11 for
/// 2, 4, 8, 16 unknowns at n_l = 3.
int eigenvalue_register_bits(const HHLConfig& config, int nb_qubits);

RealMatrix hermitian_embed(const RealMatrix& a);

struct RepresentabilityReport {
  RealVector eigenvalues;
  /// lambda * t * 2^n_l / (2 pi): the ideal register value of each eigenvalue.
  std::vector<double> register_values;
  std::vector<bool> exact;
  /// max |value - round(value)| in register units (infinity if out of range).
  double max_error = 0.0;
  bool all_exact() const;
};

/// Throws std::invalid_argument for non-symmetric input.
RepresentabilityReport check_representability(const RealMatrix& b, int n_l,
                                              double t);

/// exp(i * b * t * power) by eigendecomposition.
ComplexMatrix exact_unitary(const RealMatrix& b, double t, int power);

/// Amplitude encoding of b_vec / |b_vec| on `nb` (nb[0] least significant),
/// zero-padded to 2^|nb|, as a tree of MULTIPLEXED_RY gates. Signs of the
/// real amplitudes are preserved.
std::vector<Gate> prepare_state_b(const RealVector& b_vec, std::span<const int> nb);

/// Phase estimation of exp(i b t): H on nl, controlled exp(i b t 2^k) from
/// nl[k] onto nb, inverse QFT on nl.
std::vector<Gate> build_phase_estimation(const RealMatrix& b, double t,
                                         std::span<const int> nb,
                                         std::span<const int> nl);

/// Inversion rotation: RY on `na` by 2 asin(c / lambda(code)) for every
/// non-zero nl code, identity on code 0. Codes with |lambda| < c get the
/// saturated angle +-pi.
Gate build_inversion_rotation(const HHLConfig& config, std::span<const int> nl,
                              int na);

struct HHLCircuit {
  QuantumCircuit circuit;
  double b_norm = 0.0;
  int n_original = 0;
  int n_padded = 0;
  /// Effective configuration: n_l is the eigenvalue register actually built.
  HHLConfig config;
  /// Padded system matrix the circuit encodes.
  RealMatrix matrix;

  int nb_size() const;
  /// Basis index of the post-selected outcome (na=1, nl=0, nb=i).
  std::uint64_t solution_index(int i) const;
};

/// Qubit layout: nb = [0, log2 N_pad), nl next, na last. Non-power-of-two
/// systems are padded with -1 on the diagonal and zero right-hand side.
/// Throws std::invalid_argument when rotation_c exceeds the smallest
/// |eigenvalue|.
HHLCircuit build_hhl_circuit(const RealMatrix& b, const RealVector& b_vec,
                             const HHLConfig& config);

struct HHLSolution {
  RealVector x;
  /// Exact post-selection probability of the (noise-free) circuit.
  double success_probability = 0.0;
  /// Fraction of shots that survived post-selection; NaN for exact readout.
  double empirical_success_rate = 0.0;
  CircuitMetrics metrics;
  ReadoutMode readout = ReadoutMode::kExactAmplitude;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
};

/// Exact readout: post-selected amplitudes, global phase removed (modulo pi,
/// anchored on the largest component), scaled by b_norm / rotation_c. When
/// `reference` is given the overall sign is chosen to agree with it.
HHLSolution extract_solution(const StateVector& final_state, const HHLCircuit& hc,
                             const HHLConfig& config,
                             const RealVector* reference = nullptr);

/// Sampled readout: |x_i| = b_norm * sqrt(count_i / shots) / rotation_c over
/// outcomes with na=1, nl=0. Signs come from `sign_source` (the noise-free
/// final state) under SignPolicy::kReference, or are all positive.
HHLSolution extract_solution(const ShotHistogram& hist, const HHLCircuit& hc,
                             const HHLConfig& config,
                             const StateVector* sign_source);

/// Build, run (noise-free, or through run_noisy when `noise` is set) and
/// extract. Non-symmetric systems are solved through hermitian_embed.
HHLSolution hhl_solve(const RealMatrix& b, const RealVector& rhs,
                      const HHLConfig& config,
                      const std::optional<NoiseModel>& noise = std::nullopt);

/// LinearSolver backed by hhl_solve. Call k uses seed derive_seed(seed, k),
/// so consecutive solves draw independent shots.
class HHLLinearSolver final : public LinearSolver {
 public:
  HHLLinearSolver(HHLConfig config, std::optional<NoiseModel> noise);

  std::string label() const override;
  RealVector solve(const RealMatrix& b, const RealVector& rhs) override;

  const HHLSolution& last_solution() const { return last_; }
  std::uint64_t calls() const { return calls_; }

 private:
  HHLConfig config_;
  std::optional<NoiseModel> noise_;
  std::uint64_t calls_ = 0;
  HHLSolution last_;
};

std::unique_ptr<HHLLinearSolver> make_hhl_solver(
    const HHLConfig& config, std::optional<NoiseModel> noise = std::nullopt);

std::string solution_to_json(const HHLSolution& sol);

}  // namespace qpf
