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

#include <memory>
#include <string>
#include <vector>

#include "qpf/netmodel.hpp"
#include "qpf/types.hpp"

namespace qpf {

/// Bus voltages, one entry per bus in network order. Angles in radians.
struct PFState {
  RealVector vm;
  RealVector theta;
};

/// Per-unit mismatches: dp over non-slack buses, dq over PQ buses.
struct MismatchVector {
  RealVector dp;
  RealVector dq;
};

/// Backend for the two linear solves of each load-flow iteration.
///
/// `solve` is non-const: sampling backends advance a per-call seed so that
/// successive iterations draw independent shots.
class LinearSolver {
 public:
  virtual ~LinearSolver() = default;
  virtual std::string label() const = 0;
  virtual RealVector solve(const RealMatrix& b, const RealVector& rhs) = 0;
};

/// Direct LU solve with partial pivoting. Throws SingularMatrixError when a
/// pivot falls below 1e-12 (relative to the largest entry of `b`).
RealVector classical_solve(const RealMatrix& b, const RealVector& rhs);

std::unique_ptr<LinearSolver> make_classical_solver();

/// Flat start: slack bus at its case values, every PQ bus at 1.0 p.u. / 0 rad.
PFState flat_start(const PowerNetwork& net);

/// dS = (S_bus - V o conj(Y V)) / |V|, split into the P and Q parts.
MismatchVector compute_mismatch(const PowerNetwork& net,
                                const AdmittanceMatrix& y,
                                const PFState& state,
                                const DecoupledMatrices& sets);

/// theta <- theta - dtheta on non-slack buses, vm <- vm - dvm on PQ buses.
/// Either correction may be empty, meaning "no update for this half".
PFState apply_update(const PFState& state, const DecoupledMatrices& sets,
                     const RealVector& dtheta, const RealVector& dvm);

struct TraceEntry {
  int iteration = 0;
  RealVector vm;
  RealVector theta;
  double dp_norm = 0.0;
  double dq_norm = 0.0;
};

struct PowerFlowTrace {
  std::vector<TraceEntry> iterations;
  bool converged = false;
  std::string solver_label;
  double initial_dp_norm = 0.0;
  double initial_dq_norm = 0.0;
};

enum class PowerFlowStatus { kConverged, kMaxIterations };

struct PowerFlowResult {
  PFState state;
  PowerFlowTrace trace;
  PowerFlowStatus status = PowerFlowStatus::kMaxIterations;
};

/// Fast decoupled load flow from a flat start.
///
/// Each iteration solves B' dtheta = dP (skipped once ||dP|| < tol) and
/// B'' dV = dQ (skipped once ||dQ|| < tol), applies both corrections and
/// recomputes the mismatch. Stops once both norms are below `tol`.
/// Running out of iterations is reported through `status`, not thrown;
/// solver exceptions propagate.
PowerFlowResult run_power_flow(const PowerNetwork& net, LinearSolver& solver,
                               double tol, int max_iter);

/// Same, from an explicit initial state.
PowerFlowResult run_power_flow(const PowerNetwork& net, LinearSolver& solver,
                               double tol, int max_iter, PFState initial);

/// CSV with header iter,V<id>,theta<id>_deg,...,dP_norm,dQ_norm over the
/// non-slack buses, 12 significant digits.
std::string trace_to_csv(const PowerNetwork& net, const PowerFlowTrace& trace);

double radians_to_degrees(double rad);

}  // namespace qpf
