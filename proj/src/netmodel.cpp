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

#include "qpf/netmodel.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

#include "json.hpp"

namespace qpf {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw CaseError("unsupported field '" + key + "' in " + where);
    }
  }
}

template <typename T>
T required(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) {
    throw CaseError(std::string("missing field '") + key + "' in " + where);
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw CaseError(std::string("bad field '") + key + "' in " + where + ": " +
                    e.what());
  }
}

BusKind parse_kind(const std::string& s) {
  std::string lower = s;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "slack") return BusKind::kSlack;
  if (lower == "pq") return BusKind::kPQ;
  throw CaseError("unsupported bus kind '" + s + "' (only slack and pq)");
}

}  // namespace

std::size_t PowerNetwork::index_of(int bus_id) const {
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].id == bus_id) return i;
  }
  throw CaseError("unknown bus " + std::to_string(bus_id));
}

std::size_t PowerNetwork::slack_index() const {
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].kind == BusKind::kSlack) return i;
  }
  throw CaseError("missing slack bus");
}

void validate_network(const PowerNetwork& net) {
  if (!(net.base_mva > 0.0)) throw CaseError("non-positive base_mva");

  std::set<int> ids;
  int slack_count = 0;
  for (const auto& bus : net.buses) {
    if (!ids.insert(bus.id).second) {
      throw CaseError("duplicate bus id " + std::to_string(bus.id));
    }
    if (bus.kind == BusKind::kSlack) ++slack_count;
    if (!(bus.vm_init > 0.0)) {
      throw CaseError("bus " + std::to_string(bus.id) + " has vm <= 0");
    }
  }
  if (slack_count == 0) throw CaseError("missing slack bus");
  if (slack_count > 1) throw CaseError("more than one slack bus");

  for (const auto& br : net.branches) {
    if (!ids.count(br.from_bus) || !ids.count(br.to_bus)) {
      throw CaseError("branch " + std::to_string(br.from_bus) + "-" +
                      std::to_string(br.to_bus) + " references unknown bus");
    }
    if (br.from_bus == br.to_bus) {
      throw CaseError("branch from bus " + std::to_string(br.from_bus) +
                      " to itself");
    }
    if (br.r_pu < 0.0) throw CaseError("branch with negative resistance");
    if (br.x_pu == 0.0) throw CaseError("branch with zero reactance");
  }

  // Connectivity, breadth first from the first bus.
  const std::size_t n = net.buses.size();
  std::vector<std::vector<std::size_t>> adjacency(n);
  for (const auto& br : net.branches) {
    auto a = net.index_of(br.from_bus);
    auto b = net.index_of(br.to_bus);
    adjacency[a].push_back(b);
    adjacency[b].push_back(a);
  }
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    auto at = frontier.front();
    frontier.pop();
    for (auto next : adjacency[at]) {
      if (!seen[next]) {
        seen[next] = true;
        ++reached;
        frontier.push(next);
      }
    }
  }
  if (reached != n) throw CaseError("network is not connected");
}

PowerNetwork parse_case(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CaseError(std::string("case file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw CaseError("case file must be a JSON object");
  reject_unknown_keys(doc, {"base_mva", "buses", "branches", "name"}, "case");

  PowerNetwork net;
  if (doc.contains("base_mva")) net.base_mva = required<double>(doc, "base_mva", "case");

  const json buses = doc.value("buses", json::array());
  if (!buses.is_array()) throw CaseError("'buses' must be an array");
  for (const auto& b : buses) {
    reject_unknown_keys(b, {"id", "kind", "p_mw", "q_mvar", "vm", "theta_deg"},
                        "bus");
    BusRecord rec;
    rec.id = required<int>(b, "id", "bus");
    rec.kind = parse_kind(required<std::string>(b, "kind", "bus"));
    rec.p_mw = b.value("p_mw", 0.0);
    rec.q_mvar = b.value("q_mvar", 0.0);
    rec.vm_init = b.value("vm", 1.0);
    rec.theta_init_deg = b.value("theta_deg", 0.0);
    net.buses.push_back(rec);
  }

  const json branches = doc.value("branches", json::array());
  if (!branches.is_array()) throw CaseError("'branches' must be an array");
  for (const auto& br : branches) {
    reject_unknown_keys(br, {"from", "to", "r_pu", "x_pu"}, "branch");
    BranchRecord rec;
    rec.from_bus = required<int>(br, "from", "branch");
    rec.to_bus = required<int>(br, "to", "branch");
    rec.r_pu = br.value("r_pu", 0.0);
    rec.x_pu = required<double>(br, "x_pu", "branch");
    net.branches.push_back(rec);
  }

  if (net.buses.empty()) throw CaseError("missing slack bus (no buses)");
  validate_network(net);
  return net;
}

PowerNetwork load_case(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CaseError("cannot open case file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_case(buffer.str());
}

std::string dump_case(const PowerNetwork& net) {
  json doc;
  doc["base_mva"] = net.base_mva;
  doc["buses"] = json::array();
  for (const auto& b : net.buses) {
    doc["buses"].push_back({{"id", b.id},
                            {"kind", b.kind == BusKind::kSlack ? "slack" : "pq"},
                            {"p_mw", b.p_mw},
                            {"q_mvar", b.q_mvar},
                            {"vm", b.vm_init},
                            {"theta_deg", b.theta_init_deg}});
  }
  doc["branches"] = json::array();
  for (const auto& br : net.branches) {
    doc["branches"].push_back({{"from", br.from_bus},
                               {"to", br.to_bus},
                               {"r_pu", br.r_pu},
                               {"x_pu", br.x_pu}});
  }
  return doc.dump(2);
}

AdmittanceMatrix build_ybus(const PowerNetwork& net) {
  const auto n = static_cast<Eigen::Index>(net.buses.size());
  AdmittanceMatrix out{ComplexMatrix::Zero(n, n)};
  for (const auto& br : net.branches) {
    if (br.r_pu == 0.0 && br.x_pu == 0.0) {
      throw CaseError("branch with zero impedance");
    }
    const Complex y_series = 1.0 / Complex(br.r_pu, br.x_pu);
    const auto i = static_cast<Eigen::Index>(net.index_of(br.from_bus));
    const auto j = static_cast<Eigen::Index>(net.index_of(br.to_bus));
    out.y(i, i) += y_series;
    out.y(j, j) += y_series;
    out.y(i, j) -= y_series;
    out.y(j, i) -= y_series;
  }
  return out;
}

DecoupledMatrices build_b_matrices(const PowerNetwork& net,
                                   const AdmittanceMatrix& y) {
  DecoupledMatrices out;
  for (std::size_t i = 0; i < net.buses.size(); ++i) {
    if (net.buses[i].kind == BusKind::kSlack) continue;
    // Only slack and PQ buses exist, so the two sets coincide.
    out.p_buses.push_back(i);
    out.q_buses.push_back(i);
  }
  auto restrict = [&](const std::vector<std::size_t>& rows) {
    const auto m = static_cast<Eigen::Index>(rows.size());
    RealMatrix b(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
      for (Eigen::Index c = 0; c < m; ++c) {
        b(r, c) = y.y(static_cast<Eigen::Index>(rows[r]),
                      static_cast<Eigen::Index>(rows[c]))
                      .imag();
      }
    }
    return b;
  };
  out.b_prime = restrict(out.p_buses);
  out.b_dprime = restrict(out.q_buses);
  return out;
}

}  // namespace qpf
