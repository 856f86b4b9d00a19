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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "json.hpp"
#include "qpf/hhl.hpp"
#include "test_util.hpp"

namespace qpf {
namespace {

using std::numbers::pi;

using Mat2 = std::array<std::array<Complex, 2>, 2>;

Mat2 single_matrix(const Gate& g) {
  const Complex i(0, 1);
  const double a = g.angles.empty() ? 0.0 : g.angles[0];
  const double r = 1.0 / std::sqrt(2.0);
  switch (g.kind) {
    case GateKind::kH: return {{{r, r}, {r, -r}}};
    case GateKind::kX: return {{{0, 1}, {1, 0}}};
    case GateKind::kY: return {{{0, -i}, {i, 0}}};
    case GateKind::kZ: return {{{1, 0}, {0, -1}}};
    case GateKind::kRY:
      return {{{std::cos(a / 2), -std::sin(a / 2)}, {std::sin(a / 2), std::cos(a / 2)}}};
    case GateKind::kRZ: return {{{std::exp(-i * a / 2.0), 0}, {0, std::exp(i * a / 2.0)}}};
    case GateKind::kPhase: return {{{1, 0}, {0, std::exp(i * a)}}};
    default: throw std::logic_error("not a single-qubit gate");
  }
}

std::size_t with_bit(std::size_t x, int q, int v) {
  return v ? (x | (std::size_t{1} << q)) : (x & ~(std::size_t{1} << q));
}
int bit(std::size_t x, int q) { return static_cast<int>((x >> q) & 1); }

// Full 2^n x 2^n matrix of a gate, assembled column by column from the gate
// definitions.
ComplexMatrix oracle_matrix(const Gate& g, int n) {
  const std::size_t dim = std::size_t{1} << n;
  ComplexMatrix u = ComplexMatrix::Zero(dim, dim);
  for (std::size_t j = 0; j < dim; ++j) {
    switch (g.kind) {
      case GateKind::kCNOT: {
        const std::size_t row = bit(j, g.controls[0]) ? j ^ (std::size_t{1} << g.targets[0]) : j;
        u(row, j) = 1;
        break;
      }
      case GateKind::kControlledPhase:
        u(j, j) = bit(j, g.controls[0]) && bit(j, g.targets[0]) ? std::polar(1.0, g.angles[0])
                                                                : Complex(1);
        break;
      case GateKind::kSwap: {
        const int a = g.targets[0], b = g.targets[1];
        u(with_bit(with_bit(j, a, bit(j, b)), b, bit(j, a)), j) = 1;
        break;
      }
      case GateKind::kMultiplexedRY: {
        std::size_t sel = 0;
        for (std::size_t k = 0; k < g.controls.size(); ++k) sel |= std::size_t(bit(j, g.controls[k])) << k;
        const Mat2 m = single_matrix(Gate::ry(0, g.angles[sel]));
        const int t = g.targets[0];
        for (int o = 0; o < 2; ++o) u(with_bit(j, t, o), j) += m[o][bit(j, t)];
        break;
      }
      case GateKind::kControlledUnitary: {
        bool on = true;
        for (int c : g.controls) on = on && bit(j, c);
        if (!on) {
          u(j, j) = 1;
          break;
        }
        ComplexMatrix p = ComplexMatrix::Identity(g.matrix.rows(), g.matrix.cols());
        for (int k = 0; k < g.power; ++k) p = p * g.matrix;
        std::size_t s = 0;
        for (std::size_t k = 0; k < g.targets.size(); ++k) s |= std::size_t(bit(j, g.targets[k])) << k;
        for (Eigen::Index r = 0; r < p.rows(); ++r) {
          std::size_t row = j;
          for (std::size_t k = 0; k < g.targets.size(); ++k) row = with_bit(row, g.targets[k], (r >> k) & 1);
          u(row, j) += p(r, s);
        }
        break;
      }
      default: {
        const Mat2 m = single_matrix(g);
        const int t = g.targets[0];
        for (int o = 0; o < 2; ++o) u(with_bit(j, t, o), j) += m[o][bit(j, t)];
      }
    }
  }
  return u;
}

ComplexVector to_vector(const StateVector& s) {
  ComplexVector v(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) v(i) = s[i];
  return v;
}

StateVector random_state(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<Complex> a(std::size_t{1} << n);
  double norm = 0.0;
  for (auto& c : a) {
    c = Complex(normal(rng), normal(rng));
    norm += std::norm(c);
  }
  for (auto& c : a) c /= std::sqrt(norm);
  return StateVector(std::move(a));
}

ComplexMatrix random_unitary(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  ComplexMatrix m(dim, dim);
  for (auto& c : m.reshaped()) c = Complex(normal(rng), normal(rng));
  // Gram-Schmidt on columns.
  for (int c = 0; c < dim; ++c) {
    for (int p = 0; p < c; ++p) m.col(c) -= m.col(p).dot(m.col(c)) * m.col(p);
    m.col(c).normalize();
  }
  return m;
}

Gate random_gate(int n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 11), qubit(0, n - 1);
  std::uniform_real_distribution<double> angle(-pi, pi);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  const int a = perm[0], b = perm[1], c = perm[2];
  switch (kind(rng)) {
    case 0: return Gate::h(a);
    case 1: return Gate::x(a);
    case 2: return Gate::y(a);
    case 3: return Gate::z(a);
    case 4: return Gate::ry(a, angle(rng));
    case 5: return Gate::rz(a, angle(rng));
    case 6: return Gate::phase(a, angle(rng));
    case 7: return Gate::cnot(a, b);
    case 8: return Gate::cphase(a, b, angle(rng));
    case 9: return Gate::swap(a, b);
    case 10: {
      std::vector<double> angles(4);
      for (auto& x : angles) x = angle(rng);
      return Gate::multiplexed_ry({a, b}, c, angles);
    }
    default: return Gate::controlled_unitary({a}, {b, c}, random_unitary(4, rng), 1 + qubit(rng) % 3);
  }
}

TEST(ApplyGate, HadamardOnZero) {
  StateVector s(1);
  apply_gate(s, Gate::h(0));
  EXPECT_NEAR(s[0].real(), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(s[1].real(), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(ApplyGate, CnotFlipsTarget) {
  auto s = StateVector::basis(2, from_bitstring("10"));
  apply_gate(s, Gate::cnot(1, 0));
  EXPECT_NEAR(s.probability(from_bitstring("11")), 1.0, 1e-15);
}

TEST(ApplyGate, ControlledUnitaryPower) {
  ComplexMatrix u = ComplexMatrix::Zero(2, 2);
  u(0, 0) = std::polar(1.0, -2 * pi / 8);
  u(1, 1) = std::polar(1.0, -2 * pi * 2 / 8);
  // Control qubit 1 in |1>, target qubit 0 in the eigenvector |0>.
  auto s = StateVector::basis(2, 0b10);
  apply_gate(s, Gate::controlled_unitary({1}, {0}, u, 2));
  const Complex want = std::polar(1.0, -4 * pi / 8);
  EXPECT_NEAR(std::abs(s[0b10] - want), 0.0, 1e-14);
  auto off = StateVector::basis(2, 0b00);
  apply_gate(off, Gate::controlled_unitary({1}, {0}, u, 2));
  EXPECT_NEAR(std::abs(off[0] - Complex(1)), 0.0, 1e-15);
}

TEST(ApplyGate, MatchesOracleMatrixForEveryKind) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const Gate g = random_gate(4, rng);
    StateVector s = random_state(4, rng);
    const ComplexVector want = oracle_matrix(g, 4) * to_vector(s);
    apply_gate(s, g);
    EXPECT_LT((to_vector(s) - want).norm(), 1e-12) << gate_name(g.kind);
  }
}

TEST(ApplyGate, Linearity) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const Gate g = random_gate(3, rng);
    auto s1 = random_state(3, rng);
    auto s2 = random_state(3, rng);
    const Complex alpha(0.6, 0.1), beta(-0.2, 0.5);
    ComplexVector mix = alpha * to_vector(s1) + beta * to_vector(s2);
    mix /= mix.norm();
    const double scale = (alpha * to_vector(s1) + beta * to_vector(s2)).norm();
    StateVector sm(std::vector<Complex>(mix.begin(), mix.end()));
    apply_gate(s1, g);
    apply_gate(s2, g);
    apply_gate(sm, g);
    const ComplexVector expect = (alpha * to_vector(s1) + beta * to_vector(s2)) / scale;
    EXPECT_LT((to_vector(sm) - expect).norm(), 1e-10);
  }
}

TEST(ApplyGate, NormPreservedOverRandomCircuits) {
  std::mt19937_64 rng(1);
  for (int circuit = 0; circuit < 10; ++circuit) {
    StateVector s(5);
    for (int k = 0; k < 200; ++k) {
      apply_gate(s, random_gate(5, rng));
      ASSERT_NEAR(s.norm_squared(), 1.0, 1e-10);
    }
  }
}

TEST(ApplyGate, AdjointUndoes) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const Gate g = random_gate(4, rng);
    auto s = random_state(4, rng);
    const auto before = to_vector(s);
    apply_gate(s, g);
    apply_gate(s, adjoint(g));
    EXPECT_LT((to_vector(s) - before).norm(), 1e-12) << gate_name(g.kind);
  }
}

TEST(ApplyGate, Validation) {
  StateVector s(2);
  EXPECT_THROW(apply_gate(s, Gate::h(2)), CircuitError);
  EXPECT_THROW(apply_gate(s, Gate::cnot(1, 1)), CircuitError);
  EXPECT_THROW(apply_gate(s, Gate::x(-1)), CircuitError);
  ComplexMatrix bad = ComplexMatrix::Identity(2, 2);
  bad(0, 0) = 2.0;
  EXPECT_THROW(apply_gate(s, Gate::controlled_unitary({1}, {0}, bad)), CircuitError);
  EXPECT_THROW(apply_gate(s, Gate::controlled_unitary({1}, {0}, ComplexMatrix::Identity(4, 4))),
               CircuitError);
  EXPECT_THROW(apply_gate(s, Gate::multiplexed_ry({1}, 0, {0.1})), CircuitError);
}

TEST(StateVectorTest, Construction) {
  EXPECT_THROW(StateVector(std::vector<Complex>{1, 0, 0}), CircuitError);
  EXPECT_THROW(StateVector(std::vector<Complex>{1, 1}), CircuitError);
  EXPECT_THROW(StateVector::basis(2, 4), CircuitError);
  StateVector s(3);
  EXPECT_EQ(s.size(), 8u);
  EXPECT_EQ(s[0], Complex(1));
}

TEST(RunCircuit, EmptyAndSelfInverse) {
  QuantumCircuit c;
  c.n_qubits = 1;
  const auto a = run_circuit(c, StateVector(1));
  EXPECT_EQ(a[0], Complex(1));
  c.gates = {Gate::h(0), Gate::h(0)};
  const auto b = run_circuit(c, StateVector(1));
  EXPECT_NEAR(std::abs(b[0] - Complex(1)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(b[1]), 0.0, 1e-15);
  EXPECT_THROW(run_circuit(c, StateVector(2)), CircuitError);
}

TEST(RunCircuit, ThreeBusHhlPostSelectedProbabilities) {
  const auto net = load_case(testing::data_file("case3.json"));
  const auto sets = build_b_matrices(net, build_ybus(net));
  RealVector rhs(2);
  rhs << 0.10, -0.15;
  const auto hc = build_hhl_circuit(sets.b_prime, rhs, HHLConfig{});
  const auto out = run_circuit(hc.circuit, StateVector(hc.circuit.n_qubits));
  const double p0 = out.probability(from_bitstring("10000"));
  const double p1 = out.probability(from_bitstring("10001"));
  // (x_i / b_norm)^2 with x = [-0.0375, 0.0875]
  EXPECT_NEAR(p0, 0.0375 * 0.0375 / 0.0325, 1e-12);
  EXPECT_NEAR(p1, 0.0875 * 0.0875 / 0.0325, 1e-12);
  EXPECT_NEAR(p0, 0.045, 0.003);
  EXPECT_NEAR(p1, 0.229, 0.007);
}

TEST(Sample, BasisStateIsDeterministic) {
  const auto h = sample(StateVector(1), 100, 9);
  ASSERT_EQ(h.counts.size(), 1u);
  EXPECT_EQ(h.count("0"), 100u);
  EXPECT_EQ(h.shots, 100u);
}

TEST(Sample, ReproducibleUnderSeed) {
  StateVector s(1);
  apply_gate(s, Gate::h(0));
  const auto a = sample(s, 1024, 42);
  const auto b = sample(s, 1024, 42);
  const auto c = sample(s, 1024, 43);
  EXPECT_EQ(a.counts, b.counts);
  EXPECT_NE(a.counts, c.counts);
  EXPECT_EQ(histogram_to_json(a), histogram_to_json(b));
  EXPECT_EQ(a.count("0") + a.count("1"), 1024u);
}

TEST(Sample, FrequenciesWithinThreeSigma) {
  std::mt19937_64 rng(77);
  const auto s = random_state(3, rng);
  const std::uint64_t shots = 10000;
  const auto h = sample(s, shots, 5);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double p = s.probability(i);
    const double sigma = std::sqrt(p * (1 - p) / shots);
    const double f = static_cast<double>(h.count(to_bitstring(i, 3))) / shots;
    EXPECT_LE(std::abs(f - p), 3 * sigma + 1e-12) << i;
    total += h.count(to_bitstring(i, 3));
  }
  EXPECT_EQ(total, shots);
}

TEST(Sample, RejectsZeroShots) { EXPECT_THROW(sample(StateVector(1), 0, 1), std::invalid_argument); }

TEST(SelectOutcome, SkipsZeroProbabilityTail) {
  const std::vector<double> cdf{0.5, 1.0 - 1e-17, 1.0 - 1e-17};
  EXPECT_EQ(select_outcome(cdf, 0.25), 0u);
  EXPECT_EQ(select_outcome(cdf, 0.75), 1u);
  EXPECT_EQ(select_outcome(cdf, 0.9999999999999999), 1u);
}

TEST(Bitstrings, MostSignificantFirst) {
  EXPECT_EQ(to_bitstring(1, 5), "00001");
  EXPECT_EQ(to_bitstring(16, 5), "10000");
  EXPECT_EQ(from_bitstring("10001"), 17u);
  EXPECT_THROW(from_bitstring("10a"), CircuitError);
}

TEST(DeriveSeed, DistinctStreams) {
  EXPECT_EQ(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
  EXPECT_NE(derive_seed(1, 2), derive_seed(1, 3));
  EXPECT_NE(derive_seed(1, 2), derive_seed(2, 2));
  EXPECT_NE(derive_seed(1, 2, 0), derive_seed(1, 2, 1));
}

// U_inv[j][k] = exp(-2 pi i j k / N) / sqrt(N)
ComplexMatrix inverse_dft(int n) {
  const int dim = 1 << n;
  ComplexMatrix f(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < dim; ++k)
      f(j, k) = std::polar(1.0 / std::sqrt(dim), -2 * pi * j * k / dim);
  return f;
}

ComplexMatrix circuit_matrix(std::span<const Gate> gates, int n) {
  ComplexMatrix u = ComplexMatrix::Identity(1 << n, 1 << n);
  for (const auto& g : gates) u = oracle_matrix(g, n) * u;
  return u;
}

TEST(Qft, SingleQubitIsHadamard) {
  const std::vector<int> q{0};
  const auto iqft = build_inverse_qft(q);
  ASSERT_EQ(iqft.size(), 1u);
  EXPECT_EQ(iqft[0].kind, GateKind::kH);
}

TEST(Qft, InverseMatchesDftMatrix) {
  for (int n = 1; n <= 4; ++n) {
    std::vector<int> q(n);
    std::iota(q.begin(), q.end(), 0);
    const auto u = circuit_matrix(build_inverse_qft(q), n);
    EXPECT_LT((u - inverse_dft(n)).norm(), 1e-12) << n;
    const auto f = circuit_matrix(build_qft(q), n);
    EXPECT_LT((f - inverse_dft(n).adjoint()).norm(), 1e-12) << n;
  }
  const std::vector<int> q2{0, 1};
  const auto u = circuit_matrix(build_inverse_qft(q2), 2);
  EXPECT_LT(std::abs(u(1, 3) - 0.5 * std::polar(1.0, -3 * pi / 2)), 1e-12);
}

TEST(Qft, RoundTripOnEveryBasisState) {
  const std::vector<int> q{0, 1, 2};
  QuantumCircuit c;
  c.n_qubits = 3;
  c.append(build_qft(q));
  c.append(build_inverse_qft(q));
  for (std::uint64_t k = 0; k < 8; ++k) {
    const auto out = run_circuit(c, StateVector::basis(3, k));
    for (std::uint64_t j = 0; j < 8; ++j) {
      EXPECT_NEAR(std::abs(out[j] - Complex(j == k ? 1.0 : 0.0)), 0.0, 1e-12);
    }
  }
}

TEST(Qft, WorksOnNonContiguousQubits) {
  const std::vector<int> q{3, 0, 2};
  QuantumCircuit c;
  c.n_qubits = 4;
  c.append(build_qft(q));
  c.append(build_inverse_qft(q));
  std::mt19937_64 rng(2);
  auto s = random_state(4, rng);
  const auto out = run_circuit(c, s);
  EXPECT_LT((to_vector(out) - to_vector(s)).norm(), 1e-12);
}

TEST(Decompose, SameUnitary) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const Gate g = random_gate(4, rng);
    const std::vector<Gate> one{g};
    const auto parts = decompose(one);
    for (const auto& p : parts) {
      EXPECT_TRUE(p.kind != GateKind::kMultiplexedRY && p.kind != GateKind::kControlledPhase &&
                  p.kind != GateKind::kSwap);
    }
    EXPECT_LT((circuit_matrix(parts, 4) - oracle_matrix(g, 4)).norm(), 1e-11) << gate_name(g.kind);
  }
}

TEST(Decompose, WideMultiplexor) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> angle(-pi, pi);
  std::vector<double> angles(16);
  for (auto& a : angles) a = angle(rng);
  const std::vector<Gate> one{Gate::multiplexed_ry({4, 0, 2, 1}, 3, angles)};
  const auto parts = decompose(one);
  EXPECT_LT((circuit_matrix(parts, 5) - oracle_matrix(one[0], 5)).norm(), 1e-11);
  const auto cnots = std::count_if(parts.begin(), parts.end(),
                                   [](const Gate& g) { return g.kind == GateKind::kCNOT; });
  EXPECT_EQ(cnots, 16);
}

TEST(Metrics, SingleCnot) {
  QuantumCircuit c;
  c.n_qubits = 2;
  c.gates = {Gate::cnot(0, 1)};
  const auto m = circuit_metrics(c);
  EXPECT_EQ(m.width, 2);
  EXPECT_EQ(m.depth, 1);
  EXPECT_EQ(m.cnot_count, 1);
  EXPECT_EQ(m.total_gates, 1);
  EXPECT_FALSE(m.estimated);
}

TEST(Metrics, ParallelGatesShareALayer) {
  QuantumCircuit c;
  c.n_qubits = 3;
  c.gates = {Gate::h(0), Gate::h(1), Gate::h(2), Gate::cnot(0, 1), Gate::x(2)};
  const auto m = circuit_metrics(c);
  EXPECT_EQ(m.depth, 2);
  EXPECT_EQ(m.total_gates, 5);
}

TEST(Metrics, BlockEstimate) {
  EXPECT_EQ(controlled_block_cnot_estimate(2), 12);
  EXPECT_EQ(controlled_block_cnot_estimate(3), 48);
  QuantumCircuit c;
  c.n_qubits = 3;
  c.gates = {Gate::controlled_unitary({0}, {1, 2}, ComplexMatrix::Identity(4, 4))};
  const auto m = circuit_metrics(c);
  EXPECT_TRUE(m.estimated);
  EXPECT_EQ(m.cnot_count, 48);
}

TEST(Metrics, HhlWidths) {
  const int want[] = {5, 7, 9, 11};
  std::mt19937_64 rng(6);
  for (int k = 1; k <= 4; ++k) {
    const int n = 1 << k;
    std::vector<double> eigs(n);
    for (int i = 0; i < n; ++i) eigs[i] = -1.0 - (i % 4);
    const auto b = testing::random_symmetric(eigs, rng);
    const auto hc = build_hhl_circuit(b, RealVector::Ones(n), HHLConfig{});
    EXPECT_EQ(circuit_metrics(hc.circuit).width, want[k - 1]) << n;
  }
}

TEST(Json, CircuitDump) {
  QuantumCircuit c;
  c.n_qubits = 2;
  c.registers = {{"nb", 0, 1}, {"na", 1, 1}};
  c.gates = {Gate::h(0), Gate::cphase(0, 1, 0.5)};
  const auto doc = nlohmann::json::parse(circuit_to_json(c));
  EXPECT_EQ(doc["n_qubits"], 2);
  EXPECT_EQ(doc["gates"].size(), 2u);
  EXPECT_EQ(doc["gates"][1]["kind"], "CONTROLLED_PHASE");
  EXPECT_EQ(c.reg("na").first, 1);
  EXPECT_THROW(c.reg("nl"), CircuitError);
}

}  // namespace
}  // namespace qpf
