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

#include "qpf/fdlf.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "qpf/format.hpp"

namespace qpf {

double radians_to_degrees(double rad) { return rad * 180.0 / std::numbers::pi; }

RealVector classical_solve(const RealMatrix& b, const RealVector& rhs) {
  if (b.rows() != b.cols()) throw std::invalid_argument("matrix is not square");
  if (rhs.size() != b.rows()) {
    throw std::invalid_argument("rhs length does not match matrix");
  }
  const Eigen::Index n = b.rows();
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());

  RealMatrix lu = b;
  RealVector x = rhs;
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index pivot = k;
    lu.col(k).tail(n - k).cwiseAbs().maxCoeff(&pivot);
    pivot += k;
    if (std::abs(lu(pivot, k)) < 1e-12 * scale) {
      throw SingularMatrixError("singular matrix (pivot below 1e-12)");
    }
    if (pivot != k) {
      lu.row(k).swap(lu.row(pivot));
      std::swap(x(k), x(pivot));
    }
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const double f = lu(i, k) / lu(k, k);
      lu.row(i).tail(n - k) -= f * lu.row(k).tail(n - k);
      x(i) -= f * x(k);
    }
  }
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    x(k) = (x(k) - lu.row(k).tail(n - k - 1).dot(x.tail(n - k - 1))) / lu(k, k);
  }
  return x;
}

namespace {

class ClassicalSolver final : public LinearSolver {
 public:
  std::string label() const override { return "classical"; }
  RealVector solve(const RealMatrix& b, const RealVector& rhs) override {
    return classical_solve(b, rhs);
  }
};

}  // namespace

std::unique_ptr<LinearSolver> make_classical_solver() {
  return std::make_unique<ClassicalSolver>();
}

PFState flat_start(const PowerNetwork& net) {
  const auto n = static_cast<Eigen::Index>(net.buses.size());
  PFState s{RealVector::Ones(n), RealVector::Zero(n)};
  const auto slack = net.slack_index();
  s.vm(static_cast<Eigen::Index>(slack)) = net.buses[slack].vm_init;
  s.theta(static_cast<Eigen::Index>(slack)) =
      net.buses[slack].theta_init_deg * std::numbers::pi / 180.0;
  return s;
}

MismatchVector compute_mismatch(const PowerNetwork& net,
                                const AdmittanceMatrix& y,
                                const PFState& state,
                                const DecoupledMatrices& sets) {
  const auto n = static_cast<Eigen::Index>(net.buses.size());
  if (state.vm.size() != n || state.theta.size() != n || y.y.rows() != n) {
    throw std::invalid_argument("state dimensions do not match network");
  }
  ComplexVector v(n);
  ComplexVector s_bus(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (state.vm(i) == 0.0) throw std::domain_error("zero voltage magnitude");
    v(i) = std::polar(state.vm(i), state.theta(i));
    const auto& bus = net.buses[static_cast<std::size_t>(i)];
    s_bus(i) = Complex(bus.p_mw, bus.q_mvar) / net.base_mva;
  }
  const ComplexVector current = y.y * v;
  ComplexVector ds(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ds(i) = (s_bus(i) - v(i) * std::conj(current(i))) / state.vm(i);
  }

  MismatchVector out;
  out.dp.resize(static_cast<Eigen::Index>(sets.p_buses.size()));
  out.dq.resize(static_cast<Eigen::Index>(sets.q_buses.size()));
  for (std::size_t k = 0; k < sets.p_buses.size(); ++k) {
    out.dp(static_cast<Eigen::Index>(k)) =
        ds(static_cast<Eigen::Index>(sets.p_buses[k])).real();
  }
  for (std::size_t k = 0; k < sets.q_buses.size(); ++k) {
    out.dq(static_cast<Eigen::Index>(k)) =
        ds(static_cast<Eigen::Index>(sets.q_buses[k])).imag();
  }
  return out;
}

PFState apply_update(const PFState& state, const DecoupledMatrices& sets,
                     const RealVector& dtheta, const RealVector& dvm) {
  PFState next = state;
  if (dtheta.size() > 0) {
    if (dtheta.size() != static_cast<Eigen::Index>(sets.p_buses.size())) {
      throw std::invalid_argument("dtheta size does not match non-slack set");
    }
    for (std::size_t k = 0; k < sets.p_buses.size(); ++k) {
      next.theta(static_cast<Eigen::Index>(sets.p_buses[k])) -=
          dtheta(static_cast<Eigen::Index>(k));
    }
  }
  if (dvm.size() > 0) {
    if (dvm.size() != static_cast<Eigen::Index>(sets.q_buses.size())) {
      throw std::invalid_argument("dvm size does not match PQ set");
    }
    for (std::size_t k = 0; k < sets.q_buses.size(); ++k) {
      next.vm(static_cast<Eigen::Index>(sets.q_buses[k])) -=
          dvm(static_cast<Eigen::Index>(k));
    }
  }
  return next;
}

PowerFlowResult run_power_flow(const PowerNetwork& net, LinearSolver& solver,
                               double tol, int max_iter) {
  return run_power_flow(net, solver, tol, max_iter, flat_start(net));
}

PowerFlowResult run_power_flow(const PowerNetwork& net, LinearSolver& solver,
                               double tol, int max_iter, PFState initial) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");

  const auto y = build_ybus(net);
  const auto sets = build_b_matrices(net, y);

  PowerFlowResult result;
  result.state = std::move(initial);
  result.trace.solver_label = solver.label();

  auto mismatch = compute_mismatch(net, y, result.state, sets);
  double dp_norm = mismatch.dp.norm();
  double dq_norm = mismatch.dq.norm();
  result.trace.initial_dp_norm = dp_norm;
  result.trace.initial_dq_norm = dq_norm;

  for (int iter = 1; iter <= max_iter; ++iter) {
    if (dp_norm < tol && dq_norm < tol) break;
    // A half-iteration whose mismatch already meets the tolerance is skipped.
    RealVector dtheta;
    RealVector dvm;
    if (dp_norm >= tol) dtheta = solver.solve(sets.b_prime, mismatch.dp);
    if (dq_norm >= tol) dvm = solver.solve(sets.b_dprime, mismatch.dq);
    result.state = apply_update(result.state, sets, dtheta, dvm);

    mismatch = compute_mismatch(net, y, result.state, sets);
    dp_norm = mismatch.dp.norm();
    dq_norm = mismatch.dq.norm();
    result.trace.iterations.push_back(
        {iter, result.state.vm, result.state.theta, dp_norm, dq_norm});
    if (!std::isfinite(dp_norm) || !std::isfinite(dq_norm)) break;
  }

  result.trace.converged = dp_norm < tol && dq_norm < tol;
  result.status = result.trace.converged ? PowerFlowStatus::kConverged
                                         : PowerFlowStatus::kMaxIterations;
  return result;
}

std::string trace_to_csv(const PowerNetwork& net, const PowerFlowTrace& trace) {
  std::ostringstream out;
  out << "iter";
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < net.buses.size(); ++i) {
    if (net.buses[i].kind == BusKind::kSlack) continue;
    cols.push_back(i);
    out << ",V" << net.buses[i].id << ",theta" << net.buses[i].id << "_deg";
  }
  out << ",dP_norm,dQ_norm\n";
  for (const auto& e : trace.iterations) {
    out << e.iteration;
    for (auto i : cols) {
      const auto k = static_cast<Eigen::Index>(i);
      out << ',' << format_sig(e.vm(k), 12) << ','
          << format_sig(radians_to_degrees(e.theta(k)), 12);
    }
    out << ',' << format_sig(e.dp_norm, 12) << ',' << format_sig(e.dq_norm, 12)
        << '\n';
  }
  return out.str();
}

}  // namespace qpf
