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
#include <optional>
#include <string>
#include <vector>

#include "qpf/fdlf.hpp"
#include "qpf/hhl.hpp"
#include "qpf/netmodel.hpp"

namespace qpf {

struct ConditionReport {
  std::string label;
  double kappa = 0.0;
  double lambda_max = 0.0;  // |lambda| largest
  double lambda_min = 0.0;  // |lambda| smallest
};

/// kappa = |lambda|_max / |lambda|_min of a symmetric matrix. Throws
/// SingularMatrixError when |lambda|_min < 1e-12.
ConditionReport condition_number(const RealMatrix& b, std::string label = {});

struct CircuitSizeRow {
  std::string label;
  int matrix_size = 0;
  CircuitMetrics metrics;

  /// "2x2" style.
  std::string matrix_size_text() const;
};

struct NamedCase {
  std::string label;
  PowerNetwork network;
};

/// HHL circuit for B' of each case, loaded with the flat-start dP.
std::vector<CircuitSizeRow> circuit_size_table(const std::vector<NamedCase>& cases,
                                               int n_l = 3);
CircuitSizeRow circuit_size_row(const std::string& label, const RealMatrix& b,
                                const RealVector& rhs, int n_l = 3);

std::string circuit_table_to_csv(const std::vector<CircuitSizeRow>& rows);
std::string circuit_table_to_json(const std::vector<CircuitSizeRow>& rows);
std::string condition_reports_to_json(const std::vector<ConditionReport>& reports);

enum class SolverKind { kClassical, kHHLIdeal, kHHLSampled, kHHLNoisy };

SolverKind parse_solver_kind(const std::string& name);
std::string solver_kind_name(SolverKind kind);

struct SolverSpec {
  SolverKind kind = SolverKind::kClassical;
  HHLConfig hhl;
  double p_cnot = 0.0;
  std::optional<double> p_1q;  // defaults to p_cnot / 10
};

/// Classical, or an HHL solver configured from `spec` with the given seed.
std::unique_ptr<LinearSolver> make_solver(const SolverSpec& spec, std::uint64_t seed);

struct ComparisonRun {
  std::string label;
  SolverKind kind = SolverKind::kClassical;
  std::uint64_t seed = 0;
  PowerFlowTrace trace;
  /// Per iteration: max over non-slack buses of |V - V*| and |theta - theta*|
  /// (radians) against the classical fixed point.
  std::vector<double> errors;
  /// Set when the solver threw; the trace then holds the iterations so far.
  std::string failure;
};

struct ConvergenceComparison {
  double tol = 0.0;
  int max_iter = 0;
  PFState reference;
  std::vector<ComparisonRun> runs;

  /// Median trace length over all runs of `kind`.
  double median_iterations(SolverKind kind) const;
  std::size_t converged_count(SolverKind kind) const;
};

/// Runs every spec on `net` (deterministic kinds once, sampled and noisy
/// kinds once per seed), concurrently, ordered by label.
ConvergenceComparison compare_convergence(const PowerNetwork& net,
                                          const std::vector<SolverSpec>& specs,
                                          double tol, int max_iter,
                                          const std::vector<std::uint64_t>& seeds);

/// Header "iter,<label>,..." then one row per iteration; cells past the end of
/// a shorter trace are left empty.
std::string comparison_to_csv(const ConvergenceComparison& cmp);
std::string comparison_to_json(const ConvergenceComparison& cmp);

}  // namespace qpf
