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

#include "qpf/hhl.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "json.hpp"

namespace qpf {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_symmetric(const RealMatrix& m) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

int padded_dimension(Eigen::Index n) {
  return static_cast<int>(std::max<std::size_t>(2, std::bit_ceil(static_cast<std::size_t>(n))));
}

std::vector<int> iota_qubits(int first, int count) {
  std::vector<int> q(static_cast<std::size_t>(count));
  std::iota(q.begin(), q.end(), first);
  return q;
}

// Global phase anchored on the largest component, taken modulo pi so that
// already-real amplitudes keep their signs.
RealVector remove_global_phase(const ComplexVector& amps) {
  Eigen::Index k = 0;
  amps.cwiseAbs().maxCoeff(&k);
  double phi = std::arg(amps(k));
  if (phi > std::numbers::pi / 2) phi -= std::numbers::pi;
  if (phi <= -std::numbers::pi / 2) phi += std::numbers::pi;
  const Complex rot = std::polar(1.0, -phi);
  RealVector out(amps.size());
  for (Eigen::Index i = 0; i < amps.size(); ++i) out(i) = (amps(i) * rot).real();
  return out;
}

ComplexVector post_selected_amplitudes(const StateVector& state, const HHLCircuit& hc) {
  ComplexVector amps(hc.n_padded);
  for (int i = 0; i < hc.n_padded; ++i) amps(i) = state[hc.solution_index(i)];
  return amps;
}

}  // namespace

std::string readout_name(ReadoutMode mode) {
  return mode == ReadoutMode::kExactAmplitude ? "exact" : "sampled";
}

double HHLConfig::time() const {
  return evolution_time.value_or(kTwoPi / static_cast<double>(1 << n_l));
}

double HHLConfig::code_eigenvalue(std::uint64_t code) const {
  const auto size = std::int64_t{1} << n_l;
  auto signed_code = static_cast<std::int64_t>(code);
  if (signed_code >= size / 2) signed_code -= size;
  return static_cast<double>(signed_code) * kTwoPi / (time() * static_cast<double>(size));
}

void HHLConfig::validate() const {
  if (n_l < 2 || n_l > 16) throw std::invalid_argument("n_l must be in [2, 16]");
  if (readout == ReadoutMode::kSampled && shots < 1) {
    throw std::invalid_argument("shots must be >= 1 for sampled readout");
  }
  if (!(rotation_c > 0.0)) throw std::invalid_argument("rotation_c must be positive");
  if (!(time() > 0.0)) throw std::invalid_argument("evolution time must be positive");
}

int eigenvalue_register_bits(const HHLConfig& config, int nb_qubits) {
  return config.grow_register ? std::max(config.n_l, nb_qubits + 2) : config.n_l;
}

RealMatrix hermitian_embed(const RealMatrix& a) {
  if (is_symmetric(a)) return a;
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  RealMatrix h = RealMatrix::Zero(m + n, m + n);
  h.topRightCorner(m, n) = a;
  h.bottomLeftCorner(n, m) = a.transpose();
  return h;
}

bool RepresentabilityReport::all_exact() const {
  return std::all_of(exact.begin(), exact.end(), [](bool e) { return e; });
}

RepresentabilityReport check_representability(const RealMatrix& b, int n_l,
                                              double t) {
  if (!is_symmetric(b)) {
    throw std::invalid_argument("eigendecomposition needs a symmetric matrix");
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix> eig(b, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");

  RepresentabilityReport report;
  report.eigenvalues = eig.eigenvalues();
  const double size = static_cast<double>(1 << n_l);
  for (Eigen::Index j = 0; j < report.eigenvalues.size(); ++j) {
    const double v = report.eigenvalues(j) * t * size / kTwoPi;
    const double nearest = std::round(v);
    const bool in_range = nearest >= -size / 2 && nearest <= size / 2 - 1;
    const double err = in_range ? std::abs(v - nearest) : std::numeric_limits<double>::infinity();
    report.register_values.push_back(v);
    report.exact.push_back(in_range && err < 1e-9);
    report.max_error = std::max(report.max_error, err);
  }
  return report;
}

ComplexMatrix exact_unitary(const RealMatrix& b, double t, int power) {
  if (!is_symmetric(b)) throw std::invalid_argument("exact_unitary needs a symmetric matrix");
  Eigen::SelfAdjointEigenSolver<RealMatrix> eig(b);
  const RealMatrix& v = eig.eigenvectors();
  ComplexVector phases(b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    phases(j) = std::polar(1.0, eig.eigenvalues()(j) * t * static_cast<double>(power));
  }
  const ComplexMatrix vc = v.cast<Complex>();
  return vc * phases.asDiagonal() * vc.transpose();
}

std::vector<Gate> prepare_state_b(const RealVector& b_vec, std::span<const int> nb) {
  const int m = static_cast<int>(nb.size());
  const std::size_t dim = std::size_t{1} << m;
  if (b_vec.size() == 0 || static_cast<std::size_t>(b_vec.size()) > dim) {
    throw std::invalid_argument("b vector does not fit the data register");
  }
  const double norm = b_vec.norm();
  if (norm == 0.0) throw std::invalid_argument("cannot load an all-zero vector");
  std::vector<double> v(dim, 0.0);
  for (Eigen::Index i = 0; i < b_vec.size(); ++i) v[static_cast<std::size_t>(i)] = b_vec(i) / norm;

  std::vector<Gate> gates;
  for (int level = m - 1; level >= 0; --level) {
    const std::size_t block = std::size_t{1} << (level + 1);
    const std::size_t half = block / 2;
    const std::size_t n_sel = dim / block;
    std::vector<double> angles(n_sel, 0.0);
    for (std::size_t c = 0; c < n_sel; ++c) {
      const std::size_t base = c * block;
      if (level == 0) {
        angles[c] = 2.0 * std::atan2(v[base + 1], v[base]);
      } else {
        double lo = 0.0;
        double hi = 0.0;
        for (std::size_t r = 0; r < half; ++r) {
          lo += v[base + r] * v[base + r];
          hi += v[base + half + r] * v[base + half + r];
        }
        angles[c] = 2.0 * std::atan2(std::sqrt(hi), std::sqrt(lo));
      }
    }
    std::vector<int> controls(nb.begin() + level + 1, nb.end());
    gates.push_back(Gate::multiplexed_ry(std::move(controls), nb[static_cast<std::size_t>(level)],
                                         std::move(angles)));
  }
  return gates;
}

std::vector<Gate> build_phase_estimation(const RealMatrix& b, double t,
                                         std::span<const int> nb,
                                         std::span<const int> nl) {
  std::vector<Gate> gates;
  for (int q : nl) gates.push_back(Gate::h(q));
  const std::vector<int> targets(nb.begin(), nb.end());
  for (std::size_t k = 0; k < nl.size(); ++k) {
    gates.push_back(Gate::controlled_unitary({nl[k]}, targets,
                                             exact_unitary(b, t, 1 << k)));
  }
  const auto iqft = build_inverse_qft(nl);
  gates.insert(gates.end(), iqft.begin(), iqft.end());
  return gates;
}

Gate build_inversion_rotation(const HHLConfig& config, std::span<const int> nl, int na) {
  const std::size_t n_codes = std::size_t{1} << nl.size();
  std::vector<double> angles(n_codes, 0.0);
  for (std::size_t code = 1; code < n_codes; ++code) {
    const double ratio = std::clamp(config.rotation_c / config.code_eigenvalue(code), -1.0, 1.0);
    angles[code] = 2.0 * std::asin(ratio);
  }
  return Gate::multiplexed_ry(std::vector<int>(nl.begin(), nl.end()), na, std::move(angles));
}

int HHLCircuit::nb_size() const { return std::countr_zero(static_cast<unsigned>(n_padded)); }

std::uint64_t HHLCircuit::solution_index(int i) const {
  const auto& na = circuit.reg("na");
  return (std::uint64_t{1} << na.first) | static_cast<std::uint64_t>(i);
}

HHLCircuit build_hhl_circuit(const RealMatrix& b, const RealVector& b_vec,
                             const HHLConfig& config) {
  config.validate();
  if (!is_symmetric(b)) throw std::invalid_argument("HHL system matrix must be symmetric");
  if (b_vec.size() != b.rows()) throw std::invalid_argument("rhs length does not match matrix");

  HHLCircuit hc;
  hc.n_original = static_cast<int>(b.rows());
  hc.n_padded = padded_dimension(b.rows());
  hc.matrix = RealMatrix::Zero(hc.n_padded, hc.n_padded);
  hc.matrix.topLeftCorner(b.rows(), b.cols()) = b;
  for (int i = hc.n_original; i < hc.n_padded; ++i) hc.matrix(i, i) = -1.0;
  RealVector rhs = RealVector::Zero(hc.n_padded);
  rhs.head(b_vec.size()) = b_vec;
  hc.b_norm = rhs.norm();

  const int m = hc.nb_size();
  hc.config = config;
  hc.config.n_l = eigenvalue_register_bits(config, m);
  hc.config.validate();

  // The rotation sees register codes, not eigenvalues: compare against the
  // smallest |eigenvalue| rounded to the code grid (at least one code step).
  Eigen::SelfAdjointEigenSolver<RealMatrix> eig(hc.matrix, Eigen::EigenvaluesOnly);
  const double step = std::abs(hc.config.code_eigenvalue(1));
  const double min_code = step * std::max(1.0, std::round(eig.eigenvalues().cwiseAbs().minCoeff() / step));
  if (config.rotation_c > min_code * (1.0 + 1e-12)) {
    throw std::invalid_argument(
        "rotation_c exceeds the smallest representable |eigenvalue| (arcsin domain)");
  }
  const int n_l = hc.config.n_l;
  const auto nb = iota_qubits(0, m);
  const auto nl = iota_qubits(m, n_l);
  const int na = m + n_l;

  hc.circuit.n_qubits = m + n_l + 1;
  hc.circuit.registers = {{"nb", 0, m}, {"nl", m, n_l}, {"na", na, 1}};
  hc.circuit.append(prepare_state_b(rhs, nb));
  const auto qpe = build_phase_estimation(hc.matrix, hc.config.time(), nb, nl);
  hc.circuit.append(qpe);
  hc.circuit.gates.push_back(build_inversion_rotation(hc.config, nl, na));
  hc.circuit.append(adjoint(qpe));
  return hc;
}

HHLSolution extract_solution(const StateVector& final_state, const HHLCircuit& hc,
                             const HHLConfig& config, const RealVector* reference) {
  const ComplexVector amps = post_selected_amplitudes(final_state, hc);
  HHLSolution sol;
  sol.readout = ReadoutMode::kExactAmplitude;
  sol.success_probability = amps.squaredNorm();
  sol.empirical_success_rate = std::numeric_limits<double>::quiet_NaN();
  sol.metrics = circuit_metrics(hc.circuit);
  if (sol.success_probability <= 1e-300) {
    throw PostSelectionError("post-selection failed: zero success amplitude");
  }
  RealVector x = remove_global_phase(amps) * (hc.b_norm / config.rotation_c);
  x.conservativeResize(hc.n_original);
  if (reference != nullptr && reference->size() == x.size() && x.dot(*reference) < 0.0) {
    x = -x;
  }
  sol.x = std::move(x);
  return sol;
}

HHLSolution extract_solution(const ShotHistogram& hist, const HHLCircuit& hc,
                             const HHLConfig& config, const StateVector* sign_source) {
  if (hist.shots == 0) throw PostSelectionError("post-selection failed: no shots");
  HHLSolution sol;
  sol.readout = ReadoutMode::kSampled;
  sol.shots = hist.shots;
  sol.seed = hist.seed;
  sol.metrics = circuit_metrics(hc.circuit);

  RealVector signs = RealVector::Ones(hc.n_padded);
  if (config.signs == SignPolicy::kReference) {
    if (sign_source == nullptr) {
      throw std::invalid_argument("reference sign policy needs a noise-free state");
    }
    const ComplexVector ideal = post_selected_amplitudes(*sign_source, hc);
    sol.success_probability = ideal.squaredNorm();
    const RealVector real = remove_global_phase(ideal);
    for (int i = 0; i < hc.n_padded; ++i) signs(i) = real(i) < 0.0 ? -1.0 : 1.0;
  } else if (sign_source != nullptr) {
    sol.success_probability = post_selected_amplitudes(*sign_source, hc).squaredNorm();
  }

  const double shots = static_cast<double>(hist.shots);
  std::uint64_t kept = 0;
  RealVector x(hc.n_padded);
  for (int i = 0; i < hc.n_padded; ++i) {
    const auto c = hist.count(to_bitstring(hc.solution_index(i), hc.circuit.n_qubits));
    kept += c;
    x(i) = signs(i) * hc.b_norm * std::sqrt(static_cast<double>(c) / shots) / config.rotation_c;
  }
  if (kept == 0) throw PostSelectionError("post-selection failed: no shot with na=1, nl=0");
  sol.empirical_success_rate = static_cast<double>(kept) / shots;
  x.conservativeResize(hc.n_original);
  sol.x = std::move(x);
  return sol;
}

HHLSolution hhl_solve(const RealMatrix& b, const RealVector& rhs, const HHLConfig& config,
                      const std::optional<NoiseModel>& noise) {
  if (!is_symmetric(b)) {
    // Solve [[0, A], [A^T, 0]] y = [rhs; 0]; the solution is y = [0; x].
    if (rhs.size() != b.rows()) throw std::invalid_argument("rhs length does not match matrix");
    const RealMatrix h = hermitian_embed(b);
    RealVector padded = RealVector::Zero(h.rows());
    padded.head(rhs.size()) = rhs;
    HHLSolution sol = hhl_solve(h, padded, config, noise);
    sol.x = RealVector(sol.x.tail(b.cols()));
    return sol;
  }

  const HHLCircuit hc = build_hhl_circuit(b, rhs, config);
  const StateVector ideal = run_circuit(hc.circuit, StateVector(hc.circuit.n_qubits));
  if (config.readout == ReadoutMode::kExactAmplitude && !noise) {
    return extract_solution(ideal, hc, config);
  }
  const ShotHistogram hist = noise ? run_noisy(hc.circuit, *noise, config.shots, config.seed)
                                   : sample(ideal, config.shots, config.seed);
  return extract_solution(hist, hc, config, &ideal);
}

HHLLinearSolver::HHLLinearSolver(HHLConfig config, std::optional<NoiseModel> noise)
    : config_(config), noise_(noise) {
  config_.validate();
  if (noise_) {
    noise_->validate();
    config_.readout = ReadoutMode::kSampled;
  }
}

std::string HHLLinearSolver::label() const {
  if (noise_) return "hhl-noisy";
  return config_.readout == ReadoutMode::kExactAmplitude ? "hhl-ideal" : "hhl-sampled";
}

RealVector HHLLinearSolver::solve(const RealMatrix& b, const RealVector& rhs) {
  HHLConfig call = config_;
  call.seed = derive_seed(config_.seed, calls_++);
  last_ = hhl_solve(b, rhs, call, noise_);
  return last_.x;
}

std::unique_ptr<HHLLinearSolver> make_hhl_solver(const HHLConfig& config,
                                                 std::optional<NoiseModel> noise) {
  return std::make_unique<HHLLinearSolver>(config, noise);
}

std::string solution_to_json(const HHLSolution& sol) {
  nlohmann::ordered_json doc;
  doc["x"] = std::vector<double>(sol.x.data(), sol.x.data() + sol.x.size());
  doc["success_probability"] = sol.success_probability;
  doc["width"] = sol.metrics.width;
  doc["depth_estimate"] = sol.metrics.depth;
  doc["cnot_estimate"] = sol.metrics.cnot_count;
  doc["readout"] = readout_name(sol.readout);
  doc["shots"] = sol.shots;
  doc["seed"] = sol.seed;
  return doc.dump(2);
}

}  // namespace qpf
