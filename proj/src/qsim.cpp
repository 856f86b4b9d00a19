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

#include "qpf/qsim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "json.hpp"

namespace qpf {

namespace {

constexpr double kNormTolerance = 1e-10;

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

using Mat2 = std::array<Complex, 4>;  // row-major

void apply_single(std::span<Complex> amps, int q, const Mat2& m) {
  const std::size_t bit = std::size_t{1} << q;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (i & bit) continue;
    const Complex a0 = amps[i];
    const Complex a1 = amps[i | bit];
    amps[i] = m[0] * a0 + m[1] * a1;
    amps[i | bit] = m[2] * a0 + m[3] * a1;
  }
}

Mat2 ry_matrix(double angle) {
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  return {Complex(c), Complex(-s), Complex(s), Complex(c)};
}

ComplexMatrix matrix_power(const ComplexMatrix& u, int power) {
  ComplexMatrix base = power < 0 ? ComplexMatrix(u.adjoint()) : u;
  int e = power < 0 ? -power : power;
  ComplexMatrix result = ComplexMatrix::Identity(u.rows(), u.cols());
  while (e > 0) {
    if (e & 1) result = result * base;
    e >>= 1;
    if (e > 0) base = base * base;
  }
  return result;
}

}  // namespace

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(int n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits < 0 || n_qubits > 30) {
    throw CircuitError("qubit count out of range");
  }
  amps_.assign(std::size_t{1} << n_qubits, Complex(0.0));
  amps_[0] = 1.0;
}

StateVector::StateVector(std::vector<Complex> amps) : amps_(std::move(amps)) {
  if (!is_power_of_two(amps_.size())) {
    throw CircuitError("amplitude count must be a power of two");
  }
  n_qubits_ = std::countr_zero(amps_.size());
  if (std::abs(norm_squared() - 1.0) > kNormTolerance) {
    throw CircuitError("state is not normalized");
  }
}

StateVector StateVector::basis(int n_qubits, std::uint64_t index) {
  StateVector s(n_qubits);
  if (index >= s.size()) throw CircuitError("basis index out of range");
  s.amps_[0] = 0.0;
  s.amps_[index] = 1.0;
  return s;
}

double StateVector::norm_squared() const {
  double total = 0.0;
  for (const auto& a : amps_) total += std::norm(a);
  return total;
}

// ---------------------------------------------------------------------------
// Gates

std::string gate_name(GateKind kind) {
  switch (kind) {
    case GateKind::kH: return "H";
    case GateKind::kX: return "X";
    case GateKind::kY: return "Y";
    case GateKind::kZ: return "Z";
    case GateKind::kRY: return "RY";
    case GateKind::kRZ: return "RZ";
    case GateKind::kPhase: return "PHASE";
    case GateKind::kCNOT: return "CNOT";
    case GateKind::kControlledPhase: return "CONTROLLED_PHASE";
    case GateKind::kSwap: return "SWAP";
    case GateKind::kMultiplexedRY: return "MULTIPLEXED_RY";
    case GateKind::kControlledUnitary: return "CONTROLLED_UNITARY";
  }
  return "?";
}

Gate Gate::h(int q) { return {GateKind::kH, {q}, {}, {}, {}, 1}; }
Gate Gate::x(int q) { return {GateKind::kX, {q}, {}, {}, {}, 1}; }
Gate Gate::y(int q) { return {GateKind::kY, {q}, {}, {}, {}, 1}; }
Gate Gate::z(int q) { return {GateKind::kZ, {q}, {}, {}, {}, 1}; }
Gate Gate::ry(int q, double angle) { return {GateKind::kRY, {q}, {}, {angle}, {}, 1}; }
Gate Gate::rz(int q, double angle) { return {GateKind::kRZ, {q}, {}, {angle}, {}, 1}; }
Gate Gate::phase(int q, double angle) {
  return {GateKind::kPhase, {q}, {}, {angle}, {}, 1};
}
Gate Gate::cnot(int control, int target) {
  return {GateKind::kCNOT, {target}, {control}, {}, {}, 1};
}
Gate Gate::cphase(int control, int target, double angle) {
  return {GateKind::kControlledPhase, {target}, {control}, {angle}, {}, 1};
}
Gate Gate::swap(int a, int b) { return {GateKind::kSwap, {a, b}, {}, {}, {}, 1}; }
Gate Gate::multiplexed_ry(std::vector<int> controls, int target,
                          std::vector<double> angles) {
  return {GateKind::kMultiplexedRY, {target}, std::move(controls),
          std::move(angles), {}, 1};
}
Gate Gate::controlled_unitary(std::vector<int> controls, std::vector<int> targets,
                              ComplexMatrix u, int power) {
  return {GateKind::kControlledUnitary, std::move(targets), std::move(controls),
          {}, std::move(u), power};
}

std::vector<int> Gate::qubits() const {
  std::vector<int> out = controls;
  out.insert(out.end(), targets.begin(), targets.end());
  return out;
}

Gate adjoint(const Gate& gate) {
  Gate inv = gate;
  switch (gate.kind) {
    case GateKind::kH:
    case GateKind::kX:
    case GateKind::kY:
    case GateKind::kZ:
    case GateKind::kCNOT:
    case GateKind::kSwap:
      break;
    case GateKind::kRY:
    case GateKind::kRZ:
    case GateKind::kPhase:
    case GateKind::kControlledPhase:
    case GateKind::kMultiplexedRY:
      for (auto& a : inv.angles) a = -a;
      break;
    case GateKind::kControlledUnitary:
      inv.matrix = gate.matrix.adjoint();
      break;
  }
  return inv;
}

std::vector<Gate> adjoint(std::span<const Gate> gates) {
  std::vector<Gate> out;
  out.reserve(gates.size());
  for (auto it = gates.rbegin(); it != gates.rend(); ++it) out.push_back(adjoint(*it));
  return out;
}

void QuantumCircuit::append(std::span<const Gate> more) {
  gates.insert(gates.end(), more.begin(), more.end());
}

const RegisterSlice& QuantumCircuit::reg(const std::string& name) const {
  for (const auto& r : registers) {
    if (r.name == name) return r;
  }
  throw CircuitError("no register named '" + name + "'");
}

void validate_gate(const Gate& gate, int n_qubits) {
  const auto qs = gate.qubits();
  std::set<int> distinct;
  for (int q : qs) {
    if (q < 0 || q >= n_qubits) throw CircuitError("qubit index out of range");
    if (!distinct.insert(q).second) {
      throw CircuitError("gate qubit indices are not distinct");
    }
  }
  auto expect = [&](std::size_t targets, std::size_t controls, std::size_t angles) {
    if (gate.targets.size() != targets || gate.controls.size() != controls ||
        gate.angles.size() != angles) {
      throw CircuitError("malformed " + gate_name(gate.kind) + " gate");
    }
  };
  switch (gate.kind) {
    case GateKind::kH:
    case GateKind::kX:
    case GateKind::kY:
    case GateKind::kZ:
      expect(1, 0, 0);
      break;
    case GateKind::kRY:
    case GateKind::kRZ:
    case GateKind::kPhase:
      expect(1, 0, 1);
      break;
    case GateKind::kCNOT:
      expect(1, 1, 0);
      break;
    case GateKind::kControlledPhase:
      expect(1, 1, 1);
      break;
    case GateKind::kSwap:
      expect(2, 0, 0);
      break;
    case GateKind::kMultiplexedRY:
      if (gate.targets.size() != 1 || gate.controls.size() > 20 ||
          gate.angles.size() != (std::size_t{1} << gate.controls.size())) {
        throw CircuitError("MULTIPLEXED_RY needs one target and 2^controls angles");
      }
      break;
    case GateKind::kControlledUnitary: {
      if (gate.targets.empty()) throw CircuitError("CONTROLLED_UNITARY needs targets");
      const auto dim = Eigen::Index{1} << gate.targets.size();
      if (gate.matrix.rows() != dim || gate.matrix.cols() != dim) {
        throw CircuitError("CONTROLLED_UNITARY matrix has wrong dimension");
      }
      const ComplexMatrix prod = gate.matrix * gate.matrix.adjoint();
      const double err = (prod - ComplexMatrix::Identity(dim, dim)).cwiseAbs().maxCoeff();
      if (err > kNormTolerance) throw CircuitError("CONTROLLED_UNITARY payload is not unitary");
      break;
    }
  }
}

void apply_gate(StateVector& state, const Gate& gate) {
  validate_gate(gate, state.n_qubits());
  apply_gate_unchecked(state, gate);
}

void apply_gate_unchecked(StateVector& state, const Gate& gate) {
  auto amps = state.amps();
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  const int t = gate.targets.empty() ? 0 : gate.targets[0];
  switch (gate.kind) {
    case GateKind::kH:
      apply_single(amps, t, {Complex(kInvSqrt2), Complex(kInvSqrt2),
                             Complex(kInvSqrt2), Complex(-kInvSqrt2)});
      return;
    case GateKind::kX: {
      const std::size_t bit = std::size_t{1} << t;
      for (std::size_t i = 0; i < amps.size(); ++i) {
        if (!(i & bit)) std::swap(amps[i], amps[i | bit]);
      }
      return;
    }
    case GateKind::kY:
      apply_single(amps, t, {Complex(0), Complex(0, -1), Complex(0, 1), Complex(0)});
      return;
    case GateKind::kZ: {
      const std::size_t bit = std::size_t{1} << t;
      for (std::size_t i = 0; i < amps.size(); ++i) {
        if (i & bit) amps[i] = -amps[i];
      }
      return;
    }
    case GateKind::kRY:
      apply_single(amps, t, ry_matrix(gate.angles[0]));
      return;
    case GateKind::kRZ: {
      const double h = gate.angles[0] / 2.0;
      apply_single(amps, t, {std::polar(1.0, -h), Complex(0), Complex(0),
                             std::polar(1.0, h)});
      return;
    }
    case GateKind::kPhase: {
      const std::size_t bit = std::size_t{1} << t;
      const Complex f = std::polar(1.0, gate.angles[0]);
      for (std::size_t i = 0; i < amps.size(); ++i) {
        if (i & bit) amps[i] *= f;
      }
      return;
    }
    case GateKind::kCNOT: {
      const std::size_t cbit = std::size_t{1} << gate.controls[0];
      const std::size_t tbit = std::size_t{1} << t;
      for (std::size_t i = 0; i < amps.size(); ++i) {
        if ((i & cbit) && !(i & tbit)) std::swap(amps[i], amps[i | tbit]);
      }
      return;
    }
    case GateKind::kControlledPhase: {
      const std::size_t mask =
          (std::size_t{1} << gate.controls[0]) | (std::size_t{1} << t);
      const Complex f = std::polar(1.0, gate.angles[0]);
      for (std::size_t i = 0; i < amps.size(); ++i) {
        if ((i & mask) == mask) amps[i] *= f;
      }
      return;
    }
    case GateKind::kSwap: {
      const std::size_t a = std::size_t{1} << gate.targets[0];
      const std::size_t b = std::size_t{1} << gate.targets[1];
      for (std::size_t i = 0; i < amps.size(); ++i) {
        if ((i & a) && !(i & b)) std::swap(amps[i], amps[(i & ~a) | b]);
      }
      return;
    }
    case GateKind::kMultiplexedRY: {
      const std::size_t tbit = std::size_t{1} << t;
      std::vector<Mat2> rotations;
      rotations.reserve(gate.angles.size());
      for (double a : gate.angles) rotations.push_back(ry_matrix(a));
      for (std::size_t i = 0; i < amps.size(); ++i) {
        if (i & tbit) continue;
        std::size_t sel = 0;
        for (std::size_t k = 0; k < gate.controls.size(); ++k) {
          if (i & (std::size_t{1} << gate.controls[k])) sel |= std::size_t{1} << k;
        }
        const Mat2& m = rotations[sel];
        const Complex a0 = amps[i];
        const Complex a1 = amps[i | tbit];
        amps[i] = m[0] * a0 + m[1] * a1;
        amps[i | tbit] = m[2] * a0 + m[3] * a1;
      }
      return;
    }
    case GateKind::kControlledUnitary: {
      const ComplexMatrix u =
          gate.power == 1 ? gate.matrix : matrix_power(gate.matrix, gate.power);
      std::size_t cmask = 0;
      for (int c : gate.controls) cmask |= std::size_t{1} << c;
      std::size_t tmask = 0;
      for (int q : gate.targets) tmask |= std::size_t{1} << q;
      const std::size_t dim = std::size_t{1} << gate.targets.size();
      std::vector<std::size_t> offsets(dim);
      for (std::size_t s = 0; s < dim; ++s) {
        std::size_t off = 0;
        for (std::size_t k = 0; k < gate.targets.size(); ++k) {
          if (s & (std::size_t{1} << k)) off |= std::size_t{1} << gate.targets[k];
        }
        offsets[s] = off;
      }
      ComplexVector in(static_cast<Eigen::Index>(dim));
      for (std::size_t i = 0; i < amps.size(); ++i) {
        if ((i & tmask) || (i & cmask) != cmask) continue;
        for (std::size_t s = 0; s < dim; ++s) {
          in(static_cast<Eigen::Index>(s)) = amps[i | offsets[s]];
        }
        const ComplexVector out = u * in;
        for (std::size_t s = 0; s < dim; ++s) {
          amps[i | offsets[s]] = out(static_cast<Eigen::Index>(s));
        }
      }
      return;
    }
  }
}

StateVector run_circuit(const QuantumCircuit& circuit, StateVector initial) {
  if (initial.n_qubits() != circuit.n_qubits) {
    throw CircuitError("initial state does not match circuit width");
  }
  for (const auto& g : circuit.gates) apply_gate(initial, g);
  return initial;
}

// ---------------------------------------------------------------------------
// Sampling

std::uint64_t ShotHistogram::count(const std::string& bits) const {
  auto it = counts.find(bits);
  return it == counts.end() ? 0 : it->second;
}

std::string to_bitstring(std::uint64_t index, int n_qubits) {
  std::string s(static_cast<std::size_t>(n_qubits), '0');
  for (int q = 0; q < n_qubits; ++q) {
    if (index & (std::uint64_t{1} << q)) s[static_cast<std::size_t>(n_qubits - 1 - q)] = '1';
  }
  return s;
}

std::uint64_t from_bitstring(const std::string& bits) {
  std::uint64_t v = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw CircuitError("bitstring must contain only 0/1");
    v = (v << 1) | static_cast<std::uint64_t>(c == '1');
  }
  return v;
}

std::vector<double> cumulative_probabilities(const StateVector& state) {
  std::vector<double> cdf(state.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    acc += state.probability(i);
    cdf[i] = acc;
  }
  return cdf;
}

std::uint64_t select_outcome(std::span<const double> cdf, double u) {
  const double target = u * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
  if (it == cdf.end()) {
    // Rounding pushed the draw past the total; take the last outcome with
    // non-zero probability.
    it = std::lower_bound(cdf.begin(), cdf.end(), cdf.back());
  }
  return static_cast<std::uint64_t>(it - cdf.begin());
}

ShotHistogram sample(const StateVector& state, std::uint64_t shots,
                     std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("shots must be >= 1");
  const auto cdf = cumulative_probabilities(state);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::uint64_t> tally(state.size(), 0);
  for (std::uint64_t s = 0; s < shots; ++s) ++tally[select_outcome(cdf, unit(rng))];

  ShotHistogram hist;
  hist.shots = shots;
  hist.seed = seed;
  hist.n_qubits = state.n_qubits();
  for (std::size_t i = 0; i < tally.size(); ++i) {
    if (tally[i] > 0) hist.counts[to_bitstring(i, state.n_qubits())] = tally[i];
  }
  return hist;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index,
                          std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

// ---------------------------------------------------------------------------
// Fourier transform

std::vector<Gate> build_qft(std::span<const int> qubits) {
  if (qubits.empty()) throw CircuitError("QFT needs at least one qubit");
  const int n = static_cast<int>(qubits.size());
  std::vector<Gate> gates;
  for (int j = n - 1; j >= 0; --j) {
    gates.push_back(Gate::h(qubits[j]));
    for (int k = j - 1; k >= 0; --k) {
      gates.push_back(Gate::cphase(qubits[k], qubits[j],
                                   std::numbers::pi / static_cast<double>(1 << (j - k))));
    }
  }
  for (int i = 0; i < n / 2; ++i) gates.push_back(Gate::swap(qubits[i], qubits[n - 1 - i]));
  return gates;
}

std::vector<Gate> build_inverse_qft(std::span<const int> qubits) {
  const auto forward = build_qft(qubits);
  return adjoint(forward);
}

// ---------------------------------------------------------------------------
// Decomposition and metrics

long long controlled_block_cnot_estimate(int block_qubits) {
  return std::llround(0.75 * std::pow(4.0, block_qubits));
}

namespace {

void decompose_multiplexed_ry(const Gate& g, std::vector<Gate>& out) {
  const int target = g.targets[0];
  const std::size_t k = g.controls.size();
  if (k == 0) {
    out.push_back(Gate::ry(target, g.angles[0]));
    return;
  }
  // Gray-code walk: RY(alpha_i) then a CNOT from the control whose bit flips
  // between gray(i) and gray(i+1). Angle x sees sum_i (-1)^{|x & gray(i)|}
  // alpha_i, so alpha = M^T theta / 2^k with M_xi = (-1)^{|x & gray(i)|}.
  const std::size_t n = std::size_t{1} << k;
  auto gray = [](std::size_t i) { return i ^ (i >> 1); };
  std::vector<double> alpha(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t x = 0; x < n; ++x) {
      const int sign = (std::popcount(x & gray(i)) & 1) ? -1 : 1;
      alpha[i] += sign * g.angles[x];
    }
    alpha[i] /= static_cast<double>(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(Gate::ry(target, alpha[i]));
    const std::size_t flip = gray(i) ^ gray((i + 1) % n);
    const int pos = std::countr_zero(flip);
    out.push_back(Gate::cnot(g.controls[static_cast<std::size_t>(pos)], target));
  }
}

}  // namespace

std::vector<Gate> decompose(std::span<const Gate> gates) {
  std::vector<Gate> out;
  for (const auto& g : gates) {
    switch (g.kind) {
      case GateKind::kMultiplexedRY:
        decompose_multiplexed_ry(g, out);
        break;
      case GateKind::kControlledPhase: {
        const int c = g.controls[0];
        const int t = g.targets[0];
        const double half = g.angles[0] / 2.0;
        out.push_back(Gate::phase(c, half));
        out.push_back(Gate::cnot(c, t));
        out.push_back(Gate::phase(t, -half));
        out.push_back(Gate::cnot(c, t));
        out.push_back(Gate::phase(t, half));
        break;
      }
      case GateKind::kSwap: {
        const int a = g.targets[0];
        const int b = g.targets[1];
        out.push_back(Gate::cnot(a, b));
        out.push_back(Gate::cnot(b, a));
        out.push_back(Gate::cnot(a, b));
        break;
      }
      default:
        out.push_back(g);
    }
  }
  return out;
}

CircuitMetrics circuit_metrics(const QuantumCircuit& circuit) {
  CircuitMetrics m;
  m.width = circuit.n_qubits;
  std::vector<long long> level(static_cast<std::size_t>(circuit.n_qubits), 0);
  for (const auto& g : decompose(circuit.gates)) {
    const auto qs = g.qubits();
    long long weight = 1;
    if (g.kind == GateKind::kControlledUnitary) {
      weight = controlled_block_cnot_estimate(static_cast<int>(qs.size()));
      m.cnot_count += weight;
      m.total_gates += weight;
      m.estimated = true;
    } else {
      if (g.kind == GateKind::kCNOT) ++m.cnot_count;
      ++m.total_gates;
    }
    long long start = 0;
    for (int q : qs) start = std::max(start, level[static_cast<std::size_t>(q)]);
    for (int q : qs) level[static_cast<std::size_t>(q)] = start + weight;
  }
  for (auto l : level) m.depth = std::max(m.depth, static_cast<int>(l));
  return m;
}

// ---------------------------------------------------------------------------
// JSON

std::string histogram_to_json(const ShotHistogram& hist) {
  nlohmann::ordered_json doc;
  doc["counts"] = nlohmann::ordered_json::object();
  for (const auto& [bits, c] : hist.counts) doc["counts"][bits] = c;
  doc["shots"] = hist.shots;
  doc["seed"] = hist.seed;
  return doc.dump(2);
}

std::string circuit_to_json(const QuantumCircuit& circuit) {
  nlohmann::ordered_json doc;
  doc["n_qubits"] = circuit.n_qubits;
  doc["registers"] = nlohmann::ordered_json::object();
  for (const auto& r : circuit.registers) {
    doc["registers"][r.name] = {{"first", r.first}, {"size", r.size}};
  }
  doc["gates"] = nlohmann::ordered_json::array();
  for (const auto& g : circuit.gates) {
    nlohmann::ordered_json j;
    j["kind"] = gate_name(g.kind);
    j["targets"] = g.targets;
    if (!g.controls.empty()) j["controls"] = g.controls;
    if (!g.angles.empty()) j["angles"] = g.angles;
    if (g.kind == GateKind::kControlledUnitary) {
      j["power"] = g.power;
      auto rows = nlohmann::ordered_json::array();
      for (Eigen::Index r = 0; r < g.matrix.rows(); ++r) {
        auto row = nlohmann::ordered_json::array();
        for (Eigen::Index c = 0; c < g.matrix.cols(); ++c) {
          row.push_back({g.matrix(r, c).real(), g.matrix(r, c).imag()});
        }
        rows.push_back(row);
      }
      j["matrix"] = rows;
    }
    doc["gates"].push_back(j);
  }
  return doc.dump(2);
}

}  // namespace qpf
