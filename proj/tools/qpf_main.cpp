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

// qpf: power flow with classical or HHL linear solves.
//
//   qpf run case.json --solver hhl-sampled --seed 7 --out results/
//   qpf analyze condition case3.json case5.json
//   qpf analyze circuit case3.json case5.json
//   qpf analyze compare case3.json --solvers classical,hhl-ideal

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qpf/analysis.hpp"
#include "qpf/fdlf.hpp"
#include "qpf/format.hpp"
#include "qpf/hhl.hpp"
#include "qpf/netmodel.hpp"
#include "qpf/noise.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConverged = 0;
constexpr int kExitInputError = 1;
constexpr int kExitNotConverged = 2;

// Average CNOT error of the 5-qubit device the reference iterations ran on.
constexpr double kDefaultPCnot = 1.135e-2;

struct RunOptions {
  std::string case_path;
  std::string solver = "hhl-sampled";
  double tol = 1e-5;
  int max_iter = 200;
  std::uint64_t shots = 1024;
  int n_l = 3;
  double p_cnot = kDefaultPCnot;
  std::uint64_t seed = 0;
  std::string readout;  // empty: follow the solver
  std::string signs = "reference";
  std::string out = ".";
};

struct AnalyzeOptions {
  std::vector<std::string> cases;
  std::vector<std::string> solvers{"classical", "hhl-ideal"};
  double tol = 1e-5;
  int max_iter = 200;
  std::uint64_t shots = 1024;
  int n_l = 3;
  double p_cnot = kDefaultPCnot;
  std::uint64_t seed = 0;
  int seeds = 10;
  std::string signs = "reference";
  std::string out;
};

// Input problems (bad files, bad flags) map to exit code 1.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

qpf::PowerNetwork load(const std::string& path) {
  try {
    return qpf::load_case(path);
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path.string());
  f << text;
}

qpf::SolverSpec make_spec(const std::string& solver, std::uint64_t shots, int n_l,
                          double p_cnot, const std::string& signs) {
  qpf::SolverSpec spec;
  try {
    spec.kind = qpf::parse_solver_kind(solver);
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }
  spec.hhl.shots = shots;
  spec.hhl.n_l = n_l;
  spec.hhl.signs = signs == "positive" ? qpf::SignPolicy::kPositive : qpf::SignPolicy::kReference;
  spec.p_cnot = p_cnot;
  return spec;
}

std::string state_table(const qpf::PowerNetwork& net, const qpf::PowerFlowTrace& trace) {
  std::ostringstream out;
  out << "iter";
  for (const auto& b : net.buses) {
    if (b.kind == qpf::BusKind::kSlack) continue;
    out << "  " << std::setw(11) << ("V" + std::to_string(b.id)) << "  " << std::setw(12)
        << ("theta" + std::to_string(b.id));
  }
  out << '\n';
  for (const auto& e : trace.iterations) {
    out << std::setw(4) << e.iteration;
    for (std::size_t i = 0; i < net.buses.size(); ++i) {
      if (net.buses[i].kind == qpf::BusKind::kSlack) continue;
      const auto k = static_cast<Eigen::Index>(i);
      out << "  " << std::setw(11) << qpf::format_fixed(e.vm(k), 8) << "  " << std::setw(12)
          << qpf::format_fixed(qpf::radians_to_degrees(e.theta(k)), 8);
    }
    out << '\n';
  }
  return out.str();
}

int cmd_run(const RunOptions& o) {
  const auto net = load(o.case_path);
  auto spec = make_spec(o.solver, o.shots, o.n_l, o.p_cnot, o.signs);

  std::unique_ptr<qpf::LinearSolver> solver;
  const qpf::HHLLinearSolver* hhl = nullptr;
  if (spec.kind == qpf::SolverKind::kClassical) {
    solver = qpf::make_classical_solver();
  } else {
    qpf::HHLConfig config = spec.hhl;
    config.seed = o.seed;
    config.readout = spec.kind == qpf::SolverKind::kHHLIdeal ? qpf::ReadoutMode::kExactAmplitude
                                                             : qpf::ReadoutMode::kSampled;
    if (o.readout == "exact") config.readout = qpf::ReadoutMode::kExactAmplitude;
    if (o.readout == "sampled") config.readout = qpf::ReadoutMode::kSampled;
    std::optional<qpf::NoiseModel> noise;
    if (spec.kind == qpf::SolverKind::kHHLNoisy) {
      if (o.readout == "exact") throw InputError("--readout exact is not available with hhl-noisy");
      noise = qpf::NoiseModel::from_cnot_rate(o.p_cnot, o.seed);
    }
    try {
      config.validate();
      if (noise) noise->validate();
    } catch (const std::exception& e) {
      throw InputError(e.what());
    }
    auto h = qpf::make_hhl_solver(config, noise);
    hhl = h.get();
    solver = std::move(h);
  }

  const auto result = qpf::run_power_flow(net, *solver, o.tol, o.max_iter);
  const bool converged = result.status == qpf::PowerFlowStatus::kConverged;

  nlohmann::ordered_json doc;
  doc["case"] = fs::path(o.case_path).filename().string();
  doc["solver"] = solver->label();
  doc["converged"] = converged;
  doc["iterations"] = result.trace.iterations.size();
  doc["tol"] = o.tol;
  doc["seed"] = o.seed;
  nlohmann::ordered_json buses = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < net.buses.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    buses.push_back({{"id", net.buses[i].id},
                     {"vm", result.state.vm(k)},
                     {"theta_deg", qpf::radians_to_degrees(result.state.theta(k))}});
  }
  doc["state"] = buses;
  if (hhl != nullptr && hhl->calls() > 0) {
    doc["last_linear_solve"] = nlohmann::ordered_json::parse(qpf::solution_to_json(hhl->last_solution()));
  }

  const fs::path out(o.out);
  write_file(out / "trace.csv", qpf::trace_to_csv(net, result.trace));
  write_file(out / "solution.json", doc.dump(2) + "\n");

  std::cout << state_table(net, result.trace);
  std::cout << (converged ? "converged" : "did not converge") << " after "
            << result.trace.iterations.size() << " iterations (" << solver->label() << ")\n";
  return converged ? kExitConverged : kExitNotConverged;
}

std::vector<std::uint64_t> seed_list(std::uint64_t base, int n) {
  std::vector<std::uint64_t> s;
  for (int i = 0; i < n; ++i) s.push_back(base + static_cast<std::uint64_t>(i));
  return s;
}

void emit(const std::string& out, const std::string& text) {
  std::cout << text;
  if (!out.empty()) write_file(out, text);
}

int cmd_condition(const AnalyzeOptions& o) {
  std::vector<qpf::ConditionReport> reports;
  for (const auto& path : o.cases) {
    const auto net = load(path);
    const auto sets = qpf::build_b_matrices(net, qpf::build_ybus(net));
    reports.push_back(qpf::condition_number(sets.b_prime, fs::path(path).stem().string()));
  }
  emit(o.out, qpf::condition_reports_to_json(reports) + "\n");
  return kExitConverged;
}

int cmd_circuit(const AnalyzeOptions& o) {
  std::vector<qpf::NamedCase> cases;
  for (const auto& path : o.cases) cases.push_back({fs::path(path).stem().string(), load(path)});
  const auto rows = qpf::circuit_size_table(cases, o.n_l);
  const bool csv = fs::path(o.out).extension() == ".csv";
  emit(o.out, csv ? qpf::circuit_table_to_csv(rows) : qpf::circuit_table_to_json(rows) + "\n");
  return kExitConverged;
}

int cmd_compare(const AnalyzeOptions& o) {
  if (o.cases.size() != 1) throw InputError("compare takes exactly one case");
  const auto net = load(o.cases.front());
  std::vector<qpf::SolverSpec> specs;
  for (const auto& s : o.solvers) specs.push_back(make_spec(s, o.shots, o.n_l, o.p_cnot, o.signs));
  const auto cmp = qpf::compare_convergence(net, specs, o.tol, o.max_iter, seed_list(o.seed, o.seeds));
  const auto csv = qpf::comparison_to_csv(cmp);
  std::cout << csv;
  if (!o.out.empty()) {
    write_file(o.out, csv);
    write_file(fs::path(o.out).replace_extension(".json"), qpf::comparison_to_json(cmp) + "\n");
  }
  bool all = true;
  for (const auto& r : cmp.runs) all = all && r.trace.converged;
  return all ? kExitConverged : kExitNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fast decoupled power flow with classical or HHL linear solves"};
  app.require_subcommand(1);

  const std::vector<std::string> solvers{"classical", "hhl-ideal", "hhl-sampled", "hhl-noisy"};

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Solve one case and write trace.csv / solution.json");
  run_cmd->add_option("case", run.case_path, "Case JSON file")->required();
  run_cmd->add_option("--solver", run.solver, "Linear solver")
      ->check(CLI::IsMember(solvers))
      ->capture_default_str();
  run_cmd->add_option("--tol", run.tol, "Mismatch tolerance (p.u.)")->capture_default_str();
  run_cmd->add_option("--max-iter", run.max_iter, "Iteration limit")->capture_default_str();
  run_cmd->add_option("--shots", run.shots, "Shots per HHL call")->capture_default_str();
  run_cmd->add_option("--nl", run.n_l, "Eigenvalue register qubits")->capture_default_str();
  run_cmd->add_option("--p-cnot", run.p_cnot, "CNOT depolarizing rate (hhl-noisy)")
      ->capture_default_str();
  run_cmd->add_option("--seed", run.seed, "Seed")->capture_default_str();
  run_cmd->add_option("--readout", run.readout, "exact or sampled (default: per solver)")
      ->check(CLI::IsMember({"exact", "sampled"}));
  run_cmd->add_option("--signs", run.signs, "Sign policy for sampled readout")
      ->check(CLI::IsMember({"reference", "positive"}))
      ->capture_default_str();
  run_cmd->add_option("--out", run.out, "Output directory")->capture_default_str();

  AnalyzeOptions an;
  auto* analyze = app.add_subcommand("analyze", "Diagnostics");
  analyze->require_subcommand(1);
  auto* cond = analyze->add_subcommand("condition", "Condition numbers of B'");
  cond->add_option("cases", an.cases, "Case JSON files")->required();
  cond->add_option("--out", an.out, "Also write the report here");

  auto* circ = analyze->add_subcommand("circuit", "HHL circuit sizes for B'");
  circ->add_option("cases", an.cases, "Case JSON files")->required();
  circ->add_option("--nl", an.n_l, "Eigenvalue register qubits")->capture_default_str();
  circ->add_option("--out", an.out, "Also write the report here (.csv or .json)");

  auto* comp = analyze->add_subcommand("compare", "Per-iteration error against the classical fixed point");
  comp->add_option("cases", an.cases, "Case JSON file")->required();
  comp->add_option("--solvers", an.solvers, "Comma separated solvers")
      ->delimiter(',')
      ->check(CLI::IsMember(solvers))
      ->capture_default_str();
  comp->add_option("--tol", an.tol, "Mismatch tolerance (p.u.)")->capture_default_str();
  comp->add_option("--max-iter", an.max_iter, "Iteration limit")->capture_default_str();
  comp->add_option("--shots", an.shots, "Shots per HHL call")->capture_default_str();
  comp->add_option("--nl", an.n_l, "Eigenvalue register qubits")->capture_default_str();
  comp->add_option("--p-cnot", an.p_cnot, "CNOT depolarizing rate")->capture_default_str();
  comp->add_option("--seed", an.seed, "First seed")->capture_default_str();
  comp->add_option("--seeds", an.seeds, "Seeds per stochastic solver")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  comp->add_option("--signs", an.signs, "Sign policy for sampled readout")
      ->check(CLI::IsMember({"reference", "positive"}))
      ->capture_default_str();
  comp->add_option("--out", an.out, "CSV path; a JSON summary is written next to it");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInputError;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run);
    if (cond->parsed()) return cmd_condition(an);
    if (circ->parsed()) return cmd_circuit(an);
    if (comp->parsed()) return cmd_compare(an);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}
