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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qpf/types.hpp"

namespace qpf {

/// Dense statevector over n qubits. Basis index bit q is qubit q, so qubit 0
/// is the least significant bit of every bitstring.
class StateVector {
 public:
  /// |0...0> on `n_qubits` qubits.
  explicit StateVector(int n_qubits);
  /// Takes ownership of `amps`; the length must be a power of two and the
  /// norm 1 within 1e-10.
  explicit StateVector(std::vector<Complex> amps);

  static StateVector basis(int n_qubits, std::uint64_t index);

  int n_qubits() const { return n_qubits_; }
  std::size_t size() const { return amps_.size(); }
  std::span<const Complex> amps() const { return amps_; }
  std::span<Complex> amps() { return amps_; }
  Complex operator[](std::size_t i) const { return amps_[i]; }

  double norm_squared() const;
  double probability(std::uint64_t index) const { return std::norm(amps_[index]); }

 private:
  StateVector() = default;
  int n_qubits_ = 0;
  std::vector<Complex> amps_;
};

enum class GateKind {
  kH,
  kX,
  kY,
  kZ,
  kRY,
  kRZ,
  kPhase,
  kCNOT,
  kControlledPhase,
  kSwap,
  kMultiplexedRY,
  kControlledUnitary,
};

std::string gate_name(GateKind kind);

/// One gate of a circuit.
///
/// Single-qubit gates act on targets[0]; CNOT and CONTROLLED_PHASE use
/// controls[0] and targets[0]; SWAP swaps targets[0] and targets[1].
/// MULTIPLEXED_RY rotates targets[0] by angles[c], where c is the value of
/// the control qubits read with controls[0] as least significant bit.
/// CONTROLLED_UNITARY applies matrix^power to the targets (targets[0] least
/// significant) when every control is |1>.
struct Gate {
  GateKind kind = GateKind::kH;
  std::vector<int> targets;
  std::vector<int> controls;
  std::vector<double> angles;
  ComplexMatrix matrix;
  int power = 1;

  static Gate h(int q);
  static Gate x(int q);
  static Gate y(int q);
  static Gate z(int q);
  static Gate ry(int q, double angle);
  static Gate rz(int q, double angle);
  static Gate phase(int q, double angle);
  static Gate cnot(int control, int target);
  static Gate cphase(int control, int target, double angle);
  static Gate swap(int a, int b);
  static Gate multiplexed_ry(std::vector<int> controls, int target,
                             std::vector<double> angles);
  static Gate controlled_unitary(std::vector<int> controls,
                                 std::vector<int> targets, ComplexMatrix u,
                                 int power = 1);

  /// All qubits touched by the gate.
  std::vector<int> qubits() const;
};

/// Inverse of a single gate.
Gate adjoint(const Gate& gate);
/// Inverse of a gate sequence: reversed, each gate inverted.
std::vector<Gate> adjoint(std::span<const Gate> gates);

struct RegisterSlice {
  std::string name;
  int first = 0;
  int size = 0;
};

struct QuantumCircuit {
  int n_qubits = 0;
  std::vector<Gate> gates;
  std::vector<RegisterSlice> registers;

  void append(std::span<const Gate> more);
  const RegisterSlice& reg(const std::string& name) const;
};

/// Throws CircuitError if the gate does not fit an n-qubit register or its
/// payload is malformed (non-unitary to 1e-10, wrong angle table size, ...).
void validate_gate(const Gate& gate, int n_qubits);

/// In place; validates first.
void apply_gate(StateVector& state, const Gate& gate);
/// Skips validation; for replaying gates already checked by validate_gate.
void apply_gate_unchecked(StateVector& state, const Gate& gate);

StateVector run_circuit(const QuantumCircuit& circuit, StateVector initial);

/// Measurement outcome counts. Keys are bitstrings of length n_qubits with
/// qubit n-1 first and qubit 0 last.
struct ShotHistogram {
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  int n_qubits = 0;

  std::uint64_t count(const std::string& bits) const;
};

std::string to_bitstring(std::uint64_t index, int n_qubits);
std::uint64_t from_bitstring(const std::string& bits);

/// Cumulative distribution of |amp|^2, for inverse-transform sampling.
std::vector<double> cumulative_probabilities(const StateVector& state);
/// Basis index selected by a uniform draw u in [0, 1).
std::uint64_t select_outcome(std::span<const double> cdf, double u);

/// Draws `shots` terminal measurements. Shot i uses the i-th value of a
/// std::mt19937_64 stream seeded with `seed`, so results are bit-exact given
/// the seed.
ShotHistogram sample(const StateVector& state, std::uint64_t shots,
                     std::uint64_t seed);

/// Derives an independent 64-bit seed for sub-stream `index` of `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index,
                          std::uint64_t stream = 0);

/// Discrete Fourier transform |x> -> 2^{-n/2} sum_y e^{2 pi i x y / 2^n} |y>
/// on the listed qubits (qubits[0] least significant).
std::vector<Gate> build_qft(std::span<const int> qubits);
std::vector<Gate> build_inverse_qft(std::span<const int> qubits);

struct CircuitMetrics {
  int width = 0;
  int depth = 0;
  long long cnot_count = 0;
  long long total_gates = 0;
  /// True when CONTROLLED_UNITARY blocks contributed estimated counts.
  bool estimated = false;
};

/// CNOT estimate for a generic k-qubit block: round(0.75 * 4^k).
long long controlled_block_cnot_estimate(int block_qubits);

/// Elementary gate stream: MULTIPLEXED_RY, CONTROLLED_PHASE and SWAP are
/// rewritten into {CNOT, RY, PHASE}; other gates pass through unchanged.
/// The result acts identically on any state.
std::vector<Gate> decompose(std::span<const Gate> gates);

CircuitMetrics circuit_metrics(const QuantumCircuit& circuit);

std::string histogram_to_json(const ShotHistogram& hist);
std::string circuit_to_json(const QuantumCircuit& circuit);

}  // namespace qpf
