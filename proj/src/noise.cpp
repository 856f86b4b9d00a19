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

#include "qpf/noise.hpp"

#include <algorithm>
#include <random>
#include <thread>

#include "json.hpp"
#include "qpf/hhl.hpp"

namespace qpf {

namespace {

// Seed stream id for error draws; stream 0 is used by HHL call seeds.
constexpr std::uint64_t kErrorStream = 0x4e4f495345;  // "NOISE"

enum class SlotKind { kSingle, kTwo };

// A place where an error may be inserted: after elementary gate `after`
// of the owning composite gate's expansion.
struct Slot {
  SlotKind kind;
  std::size_t after;
  int q0;
  int q1;             // -1 for single-qubit slots
  std::vector<int> block_targets;  // non-empty for block slots: random target
};

struct CompositeGate {
  std::vector<Gate> expansion;
  std::vector<Slot> slots;
};

std::vector<CompositeGate> plan(const QuantumCircuit& circuit) {
  std::vector<CompositeGate> out;
  out.reserve(circuit.gates.size());
  for (const auto& g : circuit.gates) {
    validate_gate(g, circuit.n_qubits);
    CompositeGate cg;
    cg.expansion = decompose(std::span<const Gate>(&g, 1));
    for (std::size_t k = 0; k < cg.expansion.size(); ++k) {
      const Gate& e = cg.expansion[k];
      if (e.kind == GateKind::kControlledUnitary) {
        const auto n = controlled_block_cnot_estimate(static_cast<int>(e.qubits().size()));
        const int anchor = e.controls.empty() ? e.targets[0] : e.controls[0];
        std::vector<int> others = e.targets;
        if (e.controls.empty()) others.erase(others.begin());
        if (others.empty()) {
          for (long long s = 0; s < n; ++s) cg.slots.push_back({SlotKind::kSingle, k, anchor, -1, {}});
        } else {
          for (long long s = 0; s < n; ++s) cg.slots.push_back({SlotKind::kTwo, k, anchor, -1, others});
        }
      } else if (e.kind == GateKind::kCNOT) {
        cg.slots.push_back({SlotKind::kTwo, k, e.controls[0], e.targets[0], {}});
      } else {
        cg.slots.push_back({SlotKind::kSingle, k, e.targets[0], -1, {}});
      }
    }
    out.push_back(std::move(cg));
  }
  return out;
}

// Pauli index 0..3 = I, X, Y, Z.
void apply_pauli(StateVector& s, int q, int pauli) {
  switch (pauli) {
    case 1: apply_gate_unchecked(s, Gate::x(q)); break;
    case 2: apply_gate_unchecked(s, Gate::y(q)); break;
    case 3: apply_gate_unchecked(s, Gate::z(q)); break;
    default: break;
  }
}

struct ErrorEvent {
  std::size_t gate;   // composite gate index
  std::size_t after;  // elementary position within the expansion
  int q0;
  int p0;
  int q1;
  int p1;
};

}  // namespace

NoiseModel NoiseModel::from_cnot_rate(double p_cnot, std::uint64_t seed) {
  return {p_cnot, p_cnot / 10.0, seed};
}

void NoiseModel::validate() const {
  if (!(p_cnot >= 0.0 && p_cnot <= 1.0) || !(p_1q >= 0.0 && p_1q <= 1.0)) {
    throw std::invalid_argument("noise probabilities must lie in [0, 1]");
  }
}

NoiseModel parse_noise_json(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  NoiseModel m;
  m.p_cnot = doc.at("p_cnot").get<double>();
  m.p_1q = doc.contains("p_1q") ? doc.at("p_1q").get<double>() : m.p_cnot / 10.0;
  m.seed = doc.value("seed", std::uint64_t{0});
  m.validate();
  return m;
}

std::string noise_to_json(const NoiseModel& model) {
  nlohmann::ordered_json doc;
  doc["p_cnot"] = model.p_cnot;
  doc["p_1q"] = model.p_1q;
  doc["seed"] = model.seed;
  return doc.dump();
}

long long noisy_two_qubit_slots(const QuantumCircuit& circuit) {
  long long n = 0;
  for (const auto& cg : plan(circuit)) {
    n += std::count_if(cg.slots.begin(), cg.slots.end(),
                       [](const Slot& s) { return s.kind == SlotKind::kTwo; });
  }
  return n;
}

NoisyRun run_noisy_detailed(const QuantumCircuit& circuit, const NoiseModel& model,
                            std::uint64_t shots, std::uint64_t seed, unsigned workers) {
  model.validate();
  if (shots < 1) throw std::invalid_argument("shots must be >= 1");
  const auto composites = plan(circuit);

  // Noise-free prefix states: prefix[g] is the state before composite gate g.
  std::vector<StateVector> prefix;
  prefix.reserve(composites.size() + 1);
  prefix.emplace_back(circuit.n_qubits);
  for (const auto& g : circuit.gates) {
    prefix.push_back(prefix.back());
    apply_gate_unchecked(prefix.back(), g);
  }
  const auto ideal_cdf = cumulative_probabilities(prefix.back());

  // Measurement draws, identical to sample().
  std::vector<double> uniforms(shots);
  {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (auto& u : uniforms) u = unit(rng);
  }

  NoisyRun run;
  run.two_qubit_errors.assign(shots, 0);
  run.single_qubit_errors.assign(shots, 0);
  std::vector<std::uint64_t> outcomes(shots, 0);

  auto trajectory = [&](std::uint64_t shot) {
    std::vector<ErrorEvent> events;
    if (model.p_cnot > 0.0 || model.p_1q > 0.0) {
      std::mt19937_64 rng(derive_seed(seed, shot, kErrorStream));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (std::size_t gi = 0; gi < composites.size(); ++gi) {
        for (const auto& slot : composites[gi].slots) {
          const double p = slot.kind == SlotKind::kTwo ? model.p_cnot : model.p_1q;
          if (p == 0.0 || unit(rng) >= p) continue;
          if (slot.kind == SlotKind::kTwo) {
            int q1 = slot.q1;
            if (!slot.block_targets.empty()) {
              std::uniform_int_distribution<std::size_t> pick(0, slot.block_targets.size() - 1);
              q1 = slot.block_targets[pick(rng)];
            }
            std::uniform_int_distribution<int> pauli(1, 15);
            const int code = pauli(rng);
            events.push_back({gi, slot.after, slot.q0, code & 3, q1, code >> 2});
            ++run.two_qubit_errors[shot];
          } else {
            std::uniform_int_distribution<int> pauli(1, 3);
            events.push_back({gi, slot.after, slot.q0, pauli(rng), -1, 0});
            ++run.single_qubit_errors[shot];
          }
        }
      }
    }
    if (events.empty()) {
      outcomes[shot] = select_outcome(ideal_cdf, uniforms[shot]);
      return;
    }

    StateVector s = prefix[events.front().gate];
    std::size_t next = 0;
    for (std::size_t gi = events.front().gate; gi < composites.size(); ++gi) {
      if (next >= events.size() || events[next].gate != gi) {
        apply_gate_unchecked(s, circuit.gates[gi]);
        continue;
      }
      const auto& expansion = composites[gi].expansion;
      for (std::size_t k = 0; k < expansion.size(); ++k) {
        apply_gate_unchecked(s, expansion[k]);
        while (next < events.size() && events[next].gate == gi && events[next].after == k) {
          const auto& ev = events[next++];
          apply_pauli(s, ev.q0, ev.p0);
          if (ev.q1 >= 0) apply_pauli(s, ev.q1, ev.p1);
        }
      }
    }
    const auto cdf = cumulative_probabilities(s);
    outcomes[shot] = select_outcome(cdf, uniforms[shot]);
  };

  workers = std::max(1u, workers);
  if (workers == 1 || shots < 2) {
    for (std::uint64_t s = 0; s < shots; ++s) trajectory(s);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::uint64_t s = w; s < shots; s += workers) trajectory(s);
      });
    }
    for (auto& t : pool) t.join();
  }

  run.histogram.shots = shots;
  run.histogram.seed = seed;
  run.histogram.n_qubits = circuit.n_qubits;
  for (auto o : outcomes) ++run.histogram.counts[to_bitstring(o, circuit.n_qubits)];
  return run;
}

ShotHistogram run_noisy(const QuantumCircuit& circuit, const NoiseModel& model,
                        std::uint64_t shots, std::uint64_t seed) {
  return run_noisy_detailed(circuit, model, shots, seed).histogram;
}

std::unique_ptr<LinearSolver> noisy_hhl_solver(const NoiseModel& model,
                                               const HHLConfig& config) {
  HHLConfig sampled = config;
  sampled.readout = ReadoutMode::kSampled;
  sampled.seed = model.seed;
  return make_hhl_solver(sampled, model);
}

}  // namespace qpf
