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

#include <string>
#include <string_view>
#include <vector>

#include "qpf/types.hpp"

namespace qpf {

enum class BusKind { kSlack, kPQ };

/// One bus of a case file. Powers are injections in MW / MVAr, angles in
/// degrees; conversion to per unit happens in the mismatch computation.
struct BusRecord {
  int id = 0;
  BusKind kind = BusKind::kPQ;
  double p_mw = 0.0;
  double q_mvar = 0.0;
  double vm_init = 1.0;
  double theta_init_deg = 0.0;
};

struct BranchRecord {
  int from_bus = 0;
  int to_bus = 0;
  double r_pu = 0.0;
  double x_pu = 0.0;
};

/// A validated network: unique bus ids, exactly one slack bus, every branch
/// endpoint known, connected.
struct PowerNetwork {
  double base_mva = 100.0;
  std::vector<BusRecord> buses;
  std::vector<BranchRecord> branches;

  /// Position of the bus with the given id in `buses`; throws CaseError.
  std::size_t index_of(int bus_id) const;
  std::size_t slack_index() const;
};

struct AdmittanceMatrix {
  ComplexMatrix y;
};

/// Constant decoupled Jacobians. `p_buses` and `q_buses` hold indices into
/// PowerNetwork::buses for the rows of b_prime and b_dprime respectively.
struct DecoupledMatrices {
  RealMatrix b_prime;
  RealMatrix b_dprime;
  std::vector<std::size_t> p_buses;
  std::vector<std::size_t> q_buses;
};

/// Checks the PowerNetwork invariants, throwing CaseError on the first
/// violation. parse_case calls this; programmatic builders should too.
void validate_network(const PowerNetwork& net);

PowerNetwork parse_case(std::string_view text);
PowerNetwork load_case(const std::string& path);
std::string dump_case(const PowerNetwork& net);

AdmittanceMatrix build_ybus(const PowerNetwork& net);
DecoupledMatrices build_b_matrices(const PowerNetwork& net,
                                   const AdmittanceMatrix& y);

}  // namespace qpf
