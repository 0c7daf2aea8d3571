#pragma once

// Simulated state and process tomography of the blockade CZ gate.
//
// Two-qubit computational basis |ct> with index 2c + t; qubit value 0 maps to
// atomic level |0> and 1 to |1>. Process matrices use the unnormalized Pauli
// basis P_m = sigma_{m/4} (x) sigma_{m%4} with sigma = {I, X, Y, Z}, so that
//   E(rho) = sum_mn chi_mn P_m rho P_n^dag,
// and a trace-preserving chi has unit trace. Internally channels are handled
// as Choi matrices J = sum_ij |i><j| (x) E(|i><j|) (input factor first).

#include "rydcz/dynamics.hpp"
#include "rydcz/error_model.hpp"
#include "rydcz/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace rydcz {

inline constexpr int qubit_pair_dim = 4;
inline constexpr int pauli_count = 16;

// ---------------------------------------------------------------------------
// Pauli operators

inline CMatrix pauli(int k) {
  CMatrix s = CMatrix::Zero(2, 2);
  switch (k) {
    case 0: s << 1, 0, 0, 1; break;
    case 1: s << 0, 1, 1, 0; break;
    case 2: s << 0, -I_unit, I_unit, 0; break;
    case 3: s << 1, 0, 0, -1; break;
    default: throw std::out_of_range("pauli: index must be 0..3");
  }
  return s;
}

inline const std::vector<CMatrix>& two_qubit_paulis() {
  static const std::vector<CMatrix> basis = [] {
    std::vector<CMatrix> b;
    for (int m = 0; m < pauli_count; ++m) b.push_back(kron(pauli(m / 4), pauli(m % 4)));
    return b;
  }();
  return basis;
}

inline std::string pauli_label(int m) {
  static constexpr char names[] = {'I', 'X', 'Y', 'Z'};
  return {names[m / 4], names[m % 4]};
}

// ---------------------------------------------------------------------------
// Process matrices

class ChiMatrix {
 public:
  ChiMatrix() : chi_(CMatrix::Zero(pauli_count, pauli_count)) {}
  explicit ChiMatrix(CMatrix chi) : chi_(std::move(chi)) {
    if (chi_.rows() != pauli_count || chi_.cols() != pauli_count)
      throw std::invalid_argument("ChiMatrix: expected a 16x16 matrix");
  }

  [[nodiscard]] const CMatrix& matrix() const { return chi_; }
  [[nodiscard]] double trace() const { return chi_.trace().real(); }
  [[nodiscard]] ChiMatrix normalized() const { return ChiMatrix(chi_ / chi_.trace().real()); }

  [[nodiscard]] CMatrix apply(const CMatrix& rho) const {
    const auto& p = two_qubit_paulis();
    CMatrix out = CMatrix::Zero(qubit_pair_dim, qubit_pair_dim);
    for (int m = 0; m < pauli_count; ++m)
      for (int n = 0; n < pauli_count; ++n)
        if (chi_(m, n) != 0.0) out += chi_(m, n) * p[m] * rho * p[n].adjoint();
    return out;
  }

  /// ||sum_mn chi_mn P_n^dag P_m - I||_F, zero for trace-preserving maps.
  [[nodiscard]] double tp_residual() const {
    const auto& p = two_qubit_paulis();
    CMatrix s = CMatrix::Zero(qubit_pair_dim, qubit_pair_dim);
    for (int m = 0; m < pauli_count; ++m)
      for (int n = 0; n < pauli_count; ++n) s += chi_(m, n) * p[n].adjoint() * p[m];
    return (s - CMatrix::Identity(qubit_pair_dim, qubit_pair_dim)).norm();
  }

 private:
  CMatrix chi_;
};

/// Column-stacked vec of P_m in (input, output) ordering: component
/// (4 i + a) equals P_m(a, i).
inline CVector choi_vector(const CMatrix& op) {
  CVector v(qubit_pair_dim * qubit_pair_dim);
  for (int i = 0; i < qubit_pair_dim; ++i)
    for (int a = 0; a < qubit_pair_dim; ++a) v(qubit_pair_dim * i + a) = op(a, i);
  return v;
}

inline ChiMatrix chi_from_choi(const CMatrix& choi) {
  const auto& p = two_qubit_paulis();
  CMatrix basis(pauli_count, pauli_count);
  for (int m = 0; m < pauli_count; ++m) basis.col(m) = choi_vector(p[m]);
  return ChiMatrix(basis.adjoint() * choi * basis / 16.0);
}

inline CMatrix choi_from_chi(const ChiMatrix& chi) {
  const auto& p = two_qubit_paulis();
  CMatrix basis(pauli_count, pauli_count);
  for (int m = 0; m < pauli_count; ++m) basis.col(m) = choi_vector(p[m]);
  return basis * chi.matrix() * basis.adjoint();
}

/// E(rho)_ab = sum_ij rho_ij J_(ia),(jb).
inline CMatrix apply_choi(const CMatrix& choi, const CMatrix& rho) {
  constexpr int d = qubit_pair_dim;
  CMatrix out = CMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (rho(i, j) != 0.0) out += rho(i, j) * choi.block(d * i, d * j, d, d);
  return out;
}

/// Partial trace of a Choi matrix over the output factor.
inline CMatrix choi_input_marginal(const CMatrix& choi) {
  constexpr int d = qubit_pair_dim;
  CMatrix n(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) n(i, j) = choi.block(d * i, d * j, d, d).trace();
  return n;
}

inline ChiMatrix chi_of_unitary(const CMatrix& u) {
  const CVector v = choi_vector(u);
  return chi_from_choi(v * v.adjoint());
}

/// The blockade sequence imprints -1 on |01>, |10> and |11>.
inline CMatrix blockade_cz_unitary() {
  CMatrix u = CMatrix::Zero(qubit_pair_dim, qubit_pair_dim);
  u.diagonal() << 1.0, -1.0, -1.0, -1.0;
  return u;
}

inline ChiMatrix ideal_chi_cz() { return chi_of_unitary(blockade_cz_unitary()); }

// ---------------------------------------------------------------------------
// Fidelity

/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2 of unit-trace PSD matrices.
/// When either argument is pure to numerical precision the closed form
/// <psi|other|psi> is used; the general square-root route otherwise adds
/// sqrt(rounding) from every null eigenvalue.
inline double uhlmann_fidelity(const CMatrix& a, const CMatrix& b, double psd_tol = 1e-9) {
  const auto eig_a = hermitian_eig(hermitian_part(a));
  const auto eig_b = hermitian_eig(hermitian_part(b));
  for (const auto* e : {&eig_a, &eig_b})
    if (e->values.minCoeff() < -psd_tol)
      throw not_psd_error("uhlmann_fidelity: argument has eigenvalue " + std::to_string(e->values.minCoeff()));

  constexpr double pure_rel = 1e-13;
  const auto pure_vector = [&](const HermitianEigen& e) -> std::optional<CVector> {
    const Eigen::Index top = e.values.size() - 1;
    const double lead = e.values(top);
    if (lead <= 0.0) return std::nullopt;
    for (Eigen::Index k = 0; k < top; ++k)
      if (std::abs(e.values(k)) > pure_rel * lead) return std::nullopt;
    return CVector(e.vectors.col(top) * std::sqrt(lead));
  };
  if (auto psi = pure_vector(eig_b)) return (psi->adjoint() * hermitian_part(a) * *psi)(0, 0).real();
  if (auto psi = pure_vector(eig_a)) return (psi->adjoint() * hermitian_part(b) * *psi)(0, 0).real();

  const CMatrix sa = hermitian_function(eig_a, [](double x) { return std::sqrt(std::max(x, 0.0)); });
  const CMatrix inner = hermitian_part(sa * b * sa);
  const auto eig_inner = hermitian_eig(inner);
  double tr = 0.0;
  for (Eigen::Index k = 0; k < eig_inner.values.size(); ++k) tr += std::sqrt(std::max(eig_inner.values(k), 0.0));
  return tr * tr;
}

/// Trace-overlap process error 1 - F(chi_sim, chi_id) of unit-trace-normalized
/// process matrices.
inline double process_error(const ChiMatrix& chi_sim, const ChiMatrix& chi_id) {
  const double f = uhlmann_fidelity(chi_sim.normalized().matrix(), chi_id.normalized().matrix());
  return std::clamp(1.0 - f, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Input states and projection

/// Single-qubit preparations |0>, |1>, (|0>+|1>)/sqrt2, (|0>+i|1>)/sqrt2.
inline std::array<CVector, 4> qubit_preparations() {
  const double s = 1.0 / std::sqrt(2.0);
  std::array<CVector, 4> kets;
  for (auto& k : kets) k = CVector::Zero(2);
  kets[0] << 1.0, 0.0;
  kets[1] << 0.0, 1.0;
  kets[2] << s, s;
  kets[3] << s, complex(0.0, s);
  return kets;
}

inline std::string preparation_label(int k) {
  static const std::array<std::string, 4> names{"0", "1", "+", "+i"};
  return names.at(k);
}

/// Lift a single-qubit ket into the four-level atom.
inline CVector embed_qubit(const CVector& q) {
  CVector k = CVector::Zero(atom_dim);
  k(level::zero) = q(0);
  k(level::one) = q(1);
  return k;
}

struct QptInput {
  std::string label;
  CMatrix qubit_state;    // 4x4 two-qubit density matrix
  DensityMatrix pair_state;  // 16x16 embedding in the atomic pair space
};

/// 16 product inputs, control preparation major: input 4 i + j prepares
/// control in preparation i and target in preparation j.
inline std::vector<QptInput> qpt_inputs() {
  const auto preps = qubit_preparations();
  std::vector<QptInput> inputs;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const CVector q = kron(preps[i], preps[j]);
      const CVector a = kron(embed_qubit(preps[i]), embed_qubit(preps[j]));
      inputs.push_back({"|" + preparation_label(i) + "," + preparation_label(j) + ">", q * q.adjoint(),
                        DensityMatrix::pure(a)});
    }
  return inputs;
}

inline std::vector<DensityMatrix> qpt_input_states() {
  std::vector<DensityMatrix> out;
  for (auto& in : qpt_inputs()) out.push_back(std::move(in.pair_state));
  return out;
}

struct ProjectedState {
  DensityMatrix rho;   // 4x4, not renormalized
  double trace_loss;   // 1 - Tr(rho)
};

inline constexpr std::array<int, 2> qubit_levels{level::zero, level::one};

inline ProjectedState project_to_computational(const DensityMatrix& rho16) {
  if (rho16.dim() != pair_dim) throw std::invalid_argument("project_to_computational: expected 16x16 state");
  CMatrix r(qubit_pair_dim, qubit_pair_dim);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      r(a, b) = rho16(pair_index(qubit_levels[a / 2], qubit_levels[a % 2]),
                      pair_index(qubit_levels[b / 2], qubit_levels[b % 2]));
  const double tr = r.trace().real();
  return {DensityMatrix(r), 1.0 - tr};
}

// ---------------------------------------------------------------------------
// Measurements

inline constexpr int setting_count = 9;  // {X,Y,Z} x {X,Y,Z}
inline constexpr int outcome_count = 4;  // (+,+), (+,-), (-,+), (-,-)

using ProbabilityTable = std::array<std::array<double, outcome_count>, setting_count>;

inline std::string setting_label(int s) {
  static constexpr char names[] = {'X', 'Y', 'Z'};
  return {names[s / 3], names[s % 3]};
}

/// Projector for outcome o of setting s.
inline const CMatrix& measurement_projector(int setting, int outcome) {
  static const std::vector<CMatrix> projectors = [] {
    std::vector<CMatrix> out;
    const CMatrix id = CMatrix::Identity(2, 2);
    for (int s = 0; s < setting_count; ++s)
      for (int o = 0; o < outcome_count; ++o) {
        const double sc = (o / 2 == 0) ? 1.0 : -1.0;
        const double st = (o % 2 == 0) ? 1.0 : -1.0;
        out.push_back(kron(0.5 * (id + sc * pauli(1 + s / 3)), 0.5 * (id + st * pauli(1 + s % 3))));
      }
    return out;
  }();
  return projectors.at(static_cast<std::size_t>(setting * outcome_count + outcome));
}

inline ProbabilityTable measurement_probabilities(const CMatrix& rho4) {
  ProbabilityTable t{};
  for (int s = 0; s < setting_count; ++s)
    for (int o = 0; o < outcome_count; ++o) t[s][o] = (measurement_projector(s, o) * rho4).trace().real();
  return t;
}

/// Finite-shot estimate of a table: each setting gets `shots` trials, one of
/// the four outcomes or no detection (the missing probability mass).
inline ProbabilityTable sample_probabilities(const ProbabilityTable& exact, std::uint64_t shots,
                                             std::mt19937_64& rng) {
  if (shots == 0) throw std::invalid_argument("sample_probabilities: shots must be positive");
  ProbabilityTable sampled{};
  for (int s = 0; s < setting_count; ++s) {
    std::uint64_t remaining = shots;
    double mass = 1.0;
    for (int o = 0; o < outcome_count; ++o) {
      const double p = std::clamp(exact[s][o], 0.0, 1.0);
      const double cond = mass > 0.0 ? std::clamp(p / mass, 0.0, 1.0) : 0.0;
      std::binomial_distribution<std::uint64_t> draw(remaining, cond);
      const std::uint64_t k = remaining > 0 ? draw(rng) : 0;
      sampled[s][o] = static_cast<double>(k) / static_cast<double>(shots);
      remaining -= k;
      mass -= p;
    }
  }
  return sampled;
}

// ---------------------------------------------------------------------------
// Maximum-likelihood state reconstruction

enum class Likelihood {
  least_squares,  // Gaussian: maximize -sum (q_k - p_k)^2
  cross_entropy,  // multinomial: maximize sum p_k log q_k
};

struct MleOptions {
  Likelihood likelihood = Likelihood::least_squares;
  int max_iterations = 10'000;
  double tolerance = 1e-10;  // on the projected-gradient norm
};

struct MleStateResult {
  DensityMatrix rho;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  double objective = 0.0;
};

namespace detail {

/// Orthonormal Hermitian basis P_m / 2 of 4x4 matrices.
inline const std::vector<CMatrix>& hermitian_basis4() {
  static const std::vector<CMatrix> b = [] {
    std::vector<CMatrix> out;
    for (const auto& p : two_qubit_paulis()) out.push_back(p / 2.0);
    return out;
  }();
  return b;
}

/// Real design matrix A_(k,m) = Tr(Pi_k B_m) over all 36 outcomes.
inline const Eigen::MatrixXd& measurement_design() {
  static const Eigen::MatrixXd a = [] {
    Eigen::MatrixXd out(setting_count * outcome_count, pauli_count);
    const auto& b = hermitian_basis4();
    for (int s = 0; s < setting_count; ++s)
      for (int o = 0; o < outcome_count; ++o)
        for (int m = 0; m < pauli_count; ++m)
          out(s * outcome_count + o, m) = (measurement_projector(s, o) * b[m]).trace().real();
    return out;
  }();
  return a;
}

inline Eigen::VectorXd flatten(const ProbabilityTable& t) {
  Eigen::VectorXd v(setting_count * outcome_count);
  for (int s = 0; s < setting_count; ++s)
    for (int o = 0; o < outcome_count; ++o) v(s * outcome_count + o) = t[s][o];
  return v;
}

inline Eigen::VectorXd coordinates(const CMatrix& h) {
  Eigen::VectorXd c(pauli_count);
  const auto& b = hermitian_basis4();
  for (int m = 0; m < pauli_count; ++m) c(m) = (b[m] * h).trace().real();
  return c;
}

inline CMatrix from_coordinates(const Eigen::VectorXd& c) {
  const auto& b = hermitian_basis4();
  CMatrix h = CMatrix::Zero(qubit_pair_dim, qubit_pair_dim);
  for (int m = 0; m < pauli_count; ++m) h += c(m) * b[m];
  return h;
}

/// Euclidean projection of a vector onto the probability simplex.
inline RVector project_to_simplex(const RVector& v, double total = 1.0) {
  RVector sorted = v;
  std::sort(sorted.data(), sorted.data() + sorted.size(), std::greater<>());
  double cumulative = 0.0, theta = 0.0;
  for (Eigen::Index k = 0; k < sorted.size(); ++k) {
    cumulative += sorted(k);
    const double t = (cumulative - total) / static_cast<double>(k + 1);
    if (sorted(k) - t > 0.0) theta = t;
  }
  return (v.array() - theta).max(0.0).matrix();
}

/// Nearest (Frobenius) unit-trace PSD matrix.
inline CMatrix project_to_density_matrices(const CMatrix& h) {
  const auto eig = hermitian_eig(hermitian_part(h));
  const RVector p = project_to_simplex(eig.values);
  return eig.vectors * p.asDiagonal() * eig.vectors.adjoint();
}

inline CMatrix project_to_psd(const CMatrix& h) {
  const auto eig = hermitian_eig(hermitian_part(h));
  const RVector p = eig.values.cwiseMax(0.0);
  return eig.vectors * p.asDiagonal() * eig.vectors.adjoint();
}

inline MleStateResult mle_least_squares(const ProbabilityTable& table, const MleOptions& opt) {
  const Eigen::MatrixXd& a = measurement_design();
  const Eigen::VectorXd p = flatten(table);
  const Eigen::MatrixXd gram = a.transpose() * a;
  const double lipschitz = 2.0 * Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram).eigenvalues().maxCoeff();
  const Eigen::VectorXd atp = a.transpose() * p;

  const auto objective = [&](const Eigen::VectorXd& c) { return (a * c - p).squaredNorm(); };
  const auto gradient = [&](const Eigen::VectorXd& c) -> Eigen::VectorXd { return 2.0 * (gram * c - atp); };
  const auto project = [](const Eigen::VectorXd& c) { return coordinates(project_to_density_matrices(from_coordinates(c))); };

  // Start from the linear-inversion estimate pushed onto the state space.
  Eigen::VectorXd x = project(gram.ldlt().solve(atp));
  Eigen::VectorXd y = x;
  double t = 1.0;
  MleStateResult result;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    const Eigen::VectorXd x_next = project(y - gradient(y) / lipschitz);
    const double step = (x_next - x).norm();
    // Gradient-mapping norm at the previous iterate.
    result.gradient_norm = lipschitz * (project(x - gradient(x) / lipschitz) - x).norm();
    result.iterations = it;
    if (result.gradient_norm < opt.tolerance || step == 0.0) {
      result.converged = true;
      break;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    // Restart momentum whenever it stops decreasing the objective.
    if (objective(x_next) > objective(x)) {
      y = x;
      t = 1.0;
      continue;
    }
    y = x_next + ((t - 1.0) / t_next) * (x_next - x);
    x = x_next;
    t = t_next;
  }
  result.rho = DensityMatrix(from_coordinates(x));
  result.objective = objective(x);
  return result;
}

inline MleStateResult mle_cross_entropy(const ProbabilityTable& table, const MleOptions& opt) {
  // Fixed-point R rho R iteration; sum_k Pi_k = 9 I for the Pauli-pair settings.
  CMatrix rho = CMatrix::Identity(qubit_pair_dim, qubit_pair_dim) / 4.0;
  MleStateResult result;
  const auto log_likelihood = [&](const CMatrix& r) {
    double ll = 0.0;
    for (int s = 0; s < setting_count; ++s)
      for (int o = 0; o < outcome_count; ++o) {
        const double q = (measurement_projector(s, o) * r).trace().real();
        if (table[s][o] > 0.0) ll += table[s][o] * std::log(std::max(q, 1e-300));
      }
    return ll;
  };
  for (int it = 1; it <= opt.max_iterations; ++it) {
    CMatrix r = CMatrix::Zero(qubit_pair_dim, qubit_pair_dim);
    for (int s = 0; s < setting_count; ++s)
      for (int o = 0; o < outcome_count; ++o) {
        const double q = (measurement_projector(s, o) * rho).trace().real();
        if (table[s][o] > 0.0 && q > 0.0) r += (table[s][o] / q) * measurement_projector(s, o);
      }
    r /= static_cast<double>(setting_count);
    CMatrix next = hermitian_part(r * rho * r);
    next /= next.trace().real();
    // The likelihood gradient projected on the state space is (R - Tr(R rho)) rho.
    result.gradient_norm = ((r - (r * rho).trace() * CMatrix::Identity(4, 4)) * rho).norm();
    result.iterations = it;
    rho = next;
    if (result.gradient_norm < opt.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.rho = DensityMatrix(rho);
  result.objective = -log_likelihood(rho);
  return result;
}

}  // namespace detail

/// Maximum-likelihood two-qubit state from Pauli-pair probabilities. The
/// estimate is always a unit-trace PSD matrix, so subnormalized tables (trace
/// loss) are fitted rather than rescaled.
inline MleStateResult mle_state(const ProbabilityTable& table, const MleOptions& options = {}) {
  switch (options.likelihood) {
    case Likelihood::least_squares: return detail::mle_least_squares(table, options);
    case Likelihood::cross_entropy: return detail::mle_cross_entropy(table, options);
  }
  throw std::invalid_argument("mle_state: unknown likelihood");
}

// ---------------------------------------------------------------------------
// Process reconstruction

class singular_basis_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProcessSample {
  CMatrix input;   // 4x4
  CMatrix output;  // 4x4
};

struct ChiOptions {
  int max_iterations = 20'000;
  double tolerance = 1e-10;       // projected-gradient norm
  double tp_penalty = 1.0;        // weight of ||Tr_out J - I||^2
  double tp_tolerance = 1e-8;
};

struct ChiFit {
  ChiMatrix raw;       // linear inversion, not necessarily CP
  ChiMatrix physical;  // CP and trace preserving
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  double tp_residual = 0.0;   // of `physical`
  double fit_residual = 0.0;  // sum_k ||E(rho_k) - sigma_k||_F^2 for `physical`
};

namespace detail {

inline CMatrix choi_gradient(const std::vector<ProcessSample>& samples, const CMatrix& choi, double penalty) {
  constexpr int d = qubit_pair_dim;
  CMatrix g = CMatrix::Zero(d * d, d * d);
  for (const auto& s : samples) g += 2.0 * kron(s.input.transpose(), apply_choi(choi, s.input) - s.output);
  g += 2.0 * penalty * kron(choi_input_marginal(choi) - CMatrix::Identity(d, d), CMatrix::Identity(d, d));
  return hermitian_part(g);
}

inline double choi_objective(const std::vector<ProcessSample>& samples, const CMatrix& choi, double penalty) {
  double f = 0.0;
  for (const auto& s : samples) f += (apply_choi(choi, s.input) - s.output).squaredNorm();
  return f + penalty * (choi_input_marginal(choi) - CMatrix::Identity(4, 4)).squaredNorm();
}

inline double fit_residual(const std::vector<ProcessSample>& samples, const CMatrix& choi) {
  return choi_objective(samples, choi, 0.0);
}

/// Largest eigenvalue of the (linear, self-adjoint) Hessian of choi_objective.
inline double choi_lipschitz(const std::vector<ProcessSample>& samples, double penalty) {
  const CMatrix zero = CMatrix::Zero(16, 16);
  const CMatrix g0 = choi_gradient(samples, zero, penalty);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  CMatrix v(16, 16);
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = complex(nd(rng), nd(rng));
  v = hermitian_part(v);
  v /= v.norm();
  double lambda = 0.0;
  for (int it = 0; it < 300; ++it) {
    CMatrix w = choi_gradient(samples, v, penalty) - g0;
    lambda = w.norm();
    v = w / lambda;
  }
  return lambda;
}

/// J -> (N^{-1/2} (x) I) J (N^{-1/2} (x) I) with N = Tr_out J; exact TP.
inline CMatrix enforce_trace_preservation(const CMatrix& choi) {
  const auto eig = hermitian_eig(hermitian_part(choi_input_marginal(choi)));
  if (eig.values.minCoeff() <= 0.0) throw std::runtime_error("chi_from_map: singular input marginal");
  const CMatrix inv_sqrt = hermitian_function(eig, [](double x) { return 1.0 / std::sqrt(x); });
  const CMatrix k = kron(inv_sqrt, CMatrix::Identity(4, 4));
  return hermitian_part(k * choi * k);
}

}  // namespace detail

/// Process matrix from input/output state pairs: linear inversion, then a
/// least-squares fit over completely positive maps with a trace-preservation
/// penalty, finished by an exact trace-preserving normalization.
inline ChiFit chi_from_map(const std::vector<ProcessSample>& samples, const ChiOptions& options = {}) {
  constexpr int d = qubit_pair_dim;
  if (samples.size() != 16) throw std::invalid_argument("chi_from_map: expected 16 input/output pairs");
  CMatrix inputs(d * d, samples.size()), outputs(d * d, samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    inputs.col(static_cast<Eigen::Index>(k)) = vectorize(samples[k].input);
    outputs.col(static_cast<Eigen::Index>(k)) = vectorize(samples[k].output);
  }
  Eigen::JacobiSVD<CMatrix> svd(inputs);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) < 1e-10 * sv(0))
    throw singular_basis_error("chi_from_map: input states do not span the operator space");

  // Superoperator S with vec(E(rho)) = S vec(rho), then J_(ia),(jb) = S_(a+4b),(i+4j).
  const CMatrix superop = outputs * inputs.inverse();
  CMatrix choi_raw(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int a = 0; a < d; ++a)
      for (int j = 0; j < d; ++j)
        for (int b = 0; b < d; ++b) choi_raw(d * i + a, d * j + b) = superop(a + d * b, i + d * j);

  ChiFit fit;
  fit.raw = chi_from_choi(choi_raw);

  const double lipschitz = detail::choi_lipschitz(samples, options.tp_penalty) * 1.01;
  const auto grad = [&](const CMatrix& j) { return detail::choi_gradient(samples, j, options.tp_penalty); };
  const auto objective = [&](const CMatrix& j) { return detail::choi_objective(samples, j, options.tp_penalty); };

  CMatrix x = detail::project_to_psd(choi_raw);
  CMatrix y = x;
  double t = 1.0;
  for (int it = 1; it <= options.max_iterations; ++it) {
    const CMatrix x_next = detail::project_to_psd(y - grad(y) / lipschitz);
    fit.gradient_norm = lipschitz * (detail::project_to_psd(x - grad(x) / lipschitz) - x).norm();
    fit.iterations = it;
    if (fit.gradient_norm < options.tolerance) {
      fit.converged = true;
      break;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    if (objective(x_next) > objective(x)) {
      y = x;
      t = 1.0;
      continue;
    }
    y = x_next + ((t - 1.0) / t_next) * (x_next - x);
    x = x_next;
    t = t_next;
  }
  const CMatrix choi_phys = detail::enforce_trace_preservation(x);
  fit.physical = chi_from_choi(choi_phys);
  fit.tp_residual = fit.physical.tp_residual();
  fit.fit_residual = detail::fit_residual(samples, choi_phys);
  if (fit.tp_residual > options.tp_tolerance) fit.converged = false;
  return fit;
}

// ---------------------------------------------------------------------------
// Full pipeline

struct TomographyRecord {
  std::string label;
  DensityMatrix final_state;    // 16x16, qubit frame
  DensityMatrix projected;      // 4x4, subnormalized
  double trace_loss = 0.0;
  ProbabilityTable probabilities{};
  MleStateResult reconstruction;
};

struct SamplingOptions {
  bool enabled = false;
  std::uint64_t shots = 10'000;
  std::uint64_t seed = 0;
};

struct QptOptions {
  MleOptions state_mle{};
  ChiOptions chi{};
  SamplingOptions sampling{};
  bool qubit_frame = true;  // undo the omega_10 precession of |0> before measuring
};

struct QptResult {
  double process_error = 0.0;      // E_O
  double mean_trace_loss = 0.0;
  double min_error = 0.0;          // analytic estimate at the simulated (B, tau)
  double intrinsic_error = 0.0;    // full analytic estimate at the simulated Omega
  ChiFit chi;
  std::vector<TomographyRecord> records;
  bool converged = true;
};

inline QptResult run_full_qpt(const GateParams& params, const QptOptions& options = {}) {
  params.validate();
  const CMatrix propagator = cz_sequence_propagator(params);
  const double duration = cz_sequence_duration(params.omega);
  std::mt19937_64 rng(options.sampling.seed);

  QptResult result;
  std::vector<ProcessSample> samples;
  for (auto& input : qpt_inputs()) {
    TomographyRecord rec;
    rec.label = input.label;
    DensityMatrix out = apply_propagator(propagator, input.pair_state);
    if (options.qubit_frame) out = to_qubit_frame(out, params.omega_10, duration);
    rec.final_state = out;
    auto projected = project_to_computational(out);
    rec.projected = projected.rho;
    rec.trace_loss = projected.trace_loss;
    rec.probabilities = measurement_probabilities(projected.rho.matrix());
    if (options.sampling.enabled)
      rec.probabilities = sample_probabilities(rec.probabilities, options.sampling.shots, rng);
    rec.reconstruction = mle_state(rec.probabilities, options.state_mle);
    result.converged = result.converged && rec.reconstruction.converged;
    result.mean_trace_loss += rec.trace_loss / 16.0;
    samples.push_back({input.qubit_state, rec.reconstruction.rho.matrix()});
    result.records.push_back(std::move(rec));
  }
  result.chi = chi_from_map(samples, options.chi);
  result.converged = result.converged && result.chi.converged;
  result.process_error = process_error(result.chi.physical, ideal_chi_cz());
  result.min_error = min_error(params.blockade_B, params.tau);
  result.intrinsic_error = intrinsic_error_E1(params);
  return result;
}

}  // namespace rydcz
