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

#include "qpf/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

#include "json.hpp"
#include "qpf/format.hpp"

namespace qpf {

ConditionReport condition_number(const RealMatrix& b, std::string label) {
  if (b.rows() != b.cols() || !b.isApprox(b.transpose(), 1e-12)) {
    throw std::invalid_argument("condition number needs a symmetric matrix");
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix> eig(b, Eigen::EigenvaluesOnly);
  const RealVector mags = eig.eigenvalues().cwiseAbs();
  ConditionReport r;
  r.label = std::move(label);
  r.lambda_max = mags.maxCoeff();
  r.lambda_min = mags.minCoeff();
  if (r.lambda_min < 1e-12) throw SingularMatrixError("singular matrix (|lambda_min| < 1e-12)");
  r.kappa = r.lambda_max / r.lambda_min;
  return r;
}

std::string CircuitSizeRow::matrix_size_text() const {
  return std::to_string(matrix_size) + "x" + std::to_string(matrix_size);
}

CircuitSizeRow circuit_size_row(const std::string& label, const RealMatrix& b,
                                const RealVector& rhs, int n_l) {
  HHLConfig config;
  config.n_l = n_l;
  // Width and gate counts do not depend on the rotation constant.
  Eigen::SelfAdjointEigenSolver<RealMatrix> eig(b, Eigen::EigenvaluesOnly);
  config.rotation_c = std::min(1.0, eig.eigenvalues().cwiseAbs().minCoeff());
  const auto hc = build_hhl_circuit(b, rhs, config);
  return {label, static_cast<int>(b.rows()), circuit_metrics(hc.circuit)};
}

std::vector<CircuitSizeRow> circuit_size_table(const std::vector<NamedCase>& cases,
                                               int n_l) {
  std::vector<CircuitSizeRow> rows;
  for (const auto& c : cases) {
    const auto y = build_ybus(c.network);
    const auto sets = build_b_matrices(c.network, y);
    RealVector rhs = compute_mismatch(c.network, y, flat_start(c.network), sets).dp;
    if (rhs.norm() == 0.0) rhs = RealVector::Ones(rhs.size());
    rows.push_back(circuit_size_row(c.label, sets.b_prime, rhs, n_l));
  }
  return rows;
}

std::string circuit_table_to_csv(const std::vector<CircuitSizeRow>& rows) {
  std::ostringstream out;
  out << "case,matrix_size,width,depth_estimate,cnot_estimate,total_gates\n";
  for (const auto& r : rows) {
    out << r.label << ',' << r.matrix_size_text() << ',' << r.metrics.width << ','
        << r.metrics.depth << ',' << r.metrics.cnot_count << ',' << r.metrics.total_gates
        << '\n';
  }
  return out.str();
}

std::string circuit_table_to_json(const std::vector<CircuitSizeRow>& rows) {
  auto doc = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    doc.push_back({{"case", r.label},
                   {"matrix_size", r.matrix_size_text()},
                   {"width", r.metrics.width},
                   {"depth_estimate", r.metrics.depth},
                   {"cnot_estimate", r.metrics.cnot_count},
                   {"total_gates", r.metrics.total_gates},
                   {"estimated", r.metrics.estimated}});
  }
  return doc.dump(2);
}

std::string condition_reports_to_json(const std::vector<ConditionReport>& reports) {
  auto doc = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    doc.push_back({{"case", r.label},
                   {"kappa", r.kappa},
                   {"lambda_max", r.lambda_max},
                   {"lambda_min", r.lambda_min}});
  }
  return doc.dump(2);
}

SolverKind parse_solver_kind(const std::string& name) {
  if (name == "classical") return SolverKind::kClassical;
  if (name == "hhl-ideal") return SolverKind::kHHLIdeal;
  if (name == "hhl-sampled") return SolverKind::kHHLSampled;
  if (name == "hhl-noisy") return SolverKind::kHHLNoisy;
  throw std::invalid_argument("unknown solver '" + name + "'");
}

std::string solver_kind_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::kClassical: return "classical";
    case SolverKind::kHHLIdeal: return "hhl-ideal";
    case SolverKind::kHHLSampled: return "hhl-sampled";
    case SolverKind::kHHLNoisy: return "hhl-noisy";
  }
  return "?";
}

std::unique_ptr<LinearSolver> make_solver(const SolverSpec& spec, std::uint64_t seed) {
  HHLConfig config = spec.hhl;
  config.seed = seed;
  switch (spec.kind) {
    case SolverKind::kClassical:
      return make_classical_solver();
    case SolverKind::kHHLIdeal:
      config.readout = ReadoutMode::kExactAmplitude;
      return make_hhl_solver(config);
    case SolverKind::kHHLSampled:
      config.readout = ReadoutMode::kSampled;
      return make_hhl_solver(config);
    case SolverKind::kHHLNoisy: {
      NoiseModel model{spec.p_cnot, spec.p_1q.value_or(spec.p_cnot / 10.0), seed};
      return noisy_hhl_solver(model, config);
    }
  }
  throw std::invalid_argument("unknown solver kind");
}

double ConvergenceComparison::median_iterations(SolverKind kind) const {
  std::vector<double> n;
  for (const auto& r : runs) {
    if (r.kind == kind) n.push_back(static_cast<double>(r.trace.iterations.size()));
  }
  if (n.empty()) return 0.0;
  std::sort(n.begin(), n.end());
  const std::size_t mid = n.size() / 2;
  return n.size() % 2 ? n[mid] : 0.5 * (n[mid - 1] + n[mid]);
}

std::size_t ConvergenceComparison::converged_count(SolverKind kind) const {
  return static_cast<std::size_t>(std::count_if(runs.begin(), runs.end(), [&](const auto& r) {
    return r.kind == kind && r.trace.converged;
  }));
}

namespace {

double state_error(const PowerNetwork& net, const RealVector& vm, const RealVector& theta,
                   const PFState& ref) {
  double err = 0.0;
  for (std::size_t i = 0; i < net.buses.size(); ++i) {
    if (net.buses[i].kind == BusKind::kSlack) continue;
    const auto k = static_cast<Eigen::Index>(i);
    err = std::max({err, std::abs(vm(k) - ref.vm(k)), std::abs(theta(k) - ref.theta(k))});
  }
  return err;
}

}  // namespace

ConvergenceComparison compare_convergence(const PowerNetwork& net,
                                          const std::vector<SolverSpec>& specs,
                                          double tol, int max_iter,
                                          const std::vector<std::uint64_t>& seeds) {
  ConvergenceComparison cmp;
  cmp.tol = tol;
  cmp.max_iter = max_iter;
  {
    auto classical = make_classical_solver();
    cmp.reference = run_power_flow(net, *classical, tol, max_iter).state;
  }

  struct Job {
    SolverSpec spec;
    std::uint64_t seed;
    std::string label;
  };
  std::vector<Job> jobs;
  for (const auto& spec : specs) {
    const bool stochastic =
        spec.kind == SolverKind::kHHLSampled || spec.kind == SolverKind::kHHLNoisy;
    if (!stochastic) {
      jobs.push_back({spec, seeds.empty() ? 0 : seeds.front(), solver_kind_name(spec.kind)});
      continue;
    }
    const std::vector<std::uint64_t> use = seeds.empty() ? std::vector<std::uint64_t>{0} : seeds;
    for (auto s : use) {
      jobs.push_back({spec, s, solver_kind_name(spec.kind) + "#" + std::to_string(s)});
    }
  }

  std::vector<std::future<ComparisonRun>> futures;
  for (const auto& job : jobs) {
    futures.push_back(std::async(std::launch::async, [&net, &cmp, job, tol, max_iter] {
      ComparisonRun run;
      run.label = job.label;
      run.kind = job.spec.kind;
      run.seed = job.seed;
      try {
        auto solver = make_solver(job.spec, job.seed);
        run.trace = run_power_flow(net, *solver, tol, max_iter).trace;
      } catch (const std::exception& e) {
        run.failure = e.what();
      }
      for (const auto& e : run.trace.iterations) {
        run.errors.push_back(state_error(net, e.vm, e.theta, cmp.reference));
      }
      return run;
    }));
  }
  for (auto& f : futures) cmp.runs.push_back(f.get());
  // By solver label, then numerically by seed.
  std::stable_sort(cmp.runs.begin(), cmp.runs.end(), [](const auto& a, const auto& b) {
    const auto ka = solver_kind_name(a.kind);
    const auto kb = solver_kind_name(b.kind);
    return ka != kb ? ka < kb : a.seed < b.seed;
  });
  return cmp;
}

std::string comparison_to_csv(const ConvergenceComparison& cmp) {
  std::ostringstream out;
  out << "iter";
  std::size_t rows = 0;
  for (const auto& r : cmp.runs) {
    out << ',' << r.label;
    rows = std::max(rows, r.errors.size());
  }
  out << '\n';
  for (std::size_t i = 0; i < rows; ++i) {
    out << (i + 1);
    for (const auto& r : cmp.runs) {
      out << ',';
      if (i < r.errors.size()) out << format_sig(r.errors[i], 12);
    }
    out << '\n';
  }
  return out.str();
}

std::string comparison_to_json(const ConvergenceComparison& cmp) {
  nlohmann::ordered_json doc;
  doc["tol"] = cmp.tol;
  doc["max_iter"] = cmp.max_iter;
  doc["runs"] = nlohmann::ordered_json::array();
  for (const auto& r : cmp.runs) {
    nlohmann::ordered_json j;
    j["label"] = r.label;
    j["solver"] = solver_kind_name(r.kind);
    j["seed"] = r.seed;
    j["iterations"] = r.trace.iterations.size();
    j["converged"] = r.trace.converged;
    j["errors"] = r.errors;
    if (!r.failure.empty()) j["failure"] = r.failure;
    doc["runs"].push_back(j);
  }
  doc["median_iterations"] = nlohmann::ordered_json::object();
  for (auto kind : {SolverKind::kClassical, SolverKind::kHHLIdeal, SolverKind::kHHLSampled,
                    SolverKind::kHHLNoisy}) {
    const bool present = std::any_of(cmp.runs.begin(), cmp.runs.end(),
                                     [&](const auto& r) { return r.kind == kind; });
    if (present) doc["median_iterations"][solver_kind_name(kind)] = cmp.median_iterations(kind);
  }
  return doc.dump(2);
}

}  // namespace qpf
