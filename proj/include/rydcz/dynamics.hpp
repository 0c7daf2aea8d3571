#pragma once

// Two-atom open-system dynamics for the pi - 2pi - pi blockade CZ sequence.
//
// Single-atom basis {|0>, |g>, |1>, |r>} (indices 0..3); the pair basis is
// control (x) target, so |rr> is the last of the 16 states. Hamiltonians
// are stored as H / hbar in rad/s.
//
// Superoperators act on column-stacked density matrices,
//   vec(rho)[i + d j] = rho(i, j),  vec(A X B) = (B^T (x) A) vec(X).
//
// Decay of |r> is a Lindblad dissipator with jumps sqrt(gamma/16)|0><r|,
// sqrt(7 gamma/8)|g><r| and sqrt(gamma/16)|1><r|. The two-atom dissipator is
// the sum of the single-atom dissipators acting on their own tensor factor,
// which fixes how inter-atom coherences decay.

#include "rydcz/error_model.hpp"
#include "rydcz/numerics.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace rydcz {

namespace level {
inline constexpr int zero = 0;
inline constexpr int reservoir = 1;  // |g>: the ground sublevels outside the qubit
inline constexpr int one = 2;
inline constexpr int rydberg = 3;
}  // namespace level

inline constexpr int atom_dim = 4;
inline constexpr int pair_dim = 16;

inline constexpr int pair_index(int control_level, int target_level) { return atom_dim * control_level + target_level; }

// ---------------------------------------------------------------------------
// Density matrices

class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(CMatrix rho) : rho_(std::move(rho)) {
    if (rho_.rows() != rho_.cols()) throw std::invalid_argument("DensityMatrix: matrix must be square");
  }
  static DensityMatrix pure(const CVector& ket) { return DensityMatrix(ket * ket.adjoint()); }

  [[nodiscard]] const CMatrix& matrix() const { return rho_; }
  [[nodiscard]] Eigen::Index dim() const { return rho_.rows(); }
  [[nodiscard]] double trace() const { return rho_.trace().real(); }
  [[nodiscard]] double hermiticity_residual() const { return (rho_ - rho_.adjoint()).norm(); }
  [[nodiscard]] double min_eigenvalue() const { return hermitian_eig(hermitian_part(rho_)).values.minCoeff(); }
  [[nodiscard]] complex operator()(Eigen::Index i, Eigen::Index j) const { return rho_(i, j); }
  [[nodiscard]] double population(Eigen::Index i) const { return rho_(i, i).real(); }

 private:
  CMatrix rho_;
};

inline CVector vectorize(const CMatrix& m) { return Eigen::Map<const CVector>(m.data(), m.size()); }

inline CMatrix unvectorize(const CVector& v, Eigen::Index dim) {
  if (v.size() != dim * dim) throw std::invalid_argument("unvectorize: size mismatch");
  return Eigen::Map<const CMatrix>(v.data(), dim, dim);
}

inline CVector atom_ket(int level) {
  CVector k = CVector::Zero(atom_dim);
  k(level) = 1.0;
  return k;
}

// ---------------------------------------------------------------------------
// Single atom

/// H/hbar in the laser frame: -omega_10 on |0>, Omega/2 couplings of |0> and
/// |1> to |r>.
inline CMatrix single_atom_hamiltonian(complex omega, double omega_10) {
  CMatrix h = CMatrix::Zero(atom_dim, atom_dim);
  h(level::zero, level::zero) = -omega_10;
  h(level::zero, level::rydberg) = std::conj(omega) / 2.0;
  h(level::one, level::rydberg) = std::conj(omega) / 2.0;
  h(level::rydberg, level::zero) = omega / 2.0;
  h(level::rydberg, level::one) = omega / 2.0;
  return h;
}

inline std::vector<CMatrix> single_atom_jump_operators(double gamma_r) {
  if (gamma_r < 0.0) throw std::domain_error("single_atom_jump_operators: negative decay rate");
  const auto jump = [](int to, double rate) {
    CMatrix l = CMatrix::Zero(atom_dim, atom_dim);
    l(to, level::rydberg) = std::sqrt(rate);
    return l;
  };
  return {jump(level::zero, gamma_r / 16.0), jump(level::reservoir, 7.0 * gamma_r / 8.0),
          jump(level::one, gamma_r / 16.0)};
}

/// Superoperator of sum_k L rho L^dag - {L^dag L, rho}/2.
inline CMatrix dissipator_superoperator(const std::vector<CMatrix>& jumps, Eigen::Index dim) {
  const CMatrix id = CMatrix::Identity(dim, dim);
  CMatrix d = CMatrix::Zero(dim * dim, dim * dim);
  for (const auto& l : jumps) {
    const CMatrix ldl = l.adjoint() * l;
    d += kron(l.conjugate(), l) - 0.5 * kron(id, ldl) - 0.5 * kron(ldl.transpose(), id);
  }
  return d;
}

/// Decay superoperator of one atom acting on vec(rho_4x4).
inline CMatrix single_atom_liouvillian(double gamma_r) {
  return dissipator_superoperator(single_atom_jump_operators(gamma_r), atom_dim);
}

/// The same dissipator applied directly to a 4x4 matrix.
inline CMatrix apply_single_atom_dissipator(const CMatrix& rho, double gamma_r) {
  if (gamma_r < 0.0) throw std::domain_error("apply_single_atom_dissipator: negative decay rate");
  CMatrix out = CMatrix::Zero(atom_dim, atom_dim);
  const complex prr = rho(level::rydberg, level::rydberg);
  out(level::zero, level::zero) = gamma_r / 16.0 * prr;
  out(level::reservoir, level::reservoir) = 7.0 * gamma_r / 8.0 * prr;
  out(level::one, level::one) = gamma_r / 16.0 * prr;
  for (int k : {level::zero, level::reservoir, level::one}) {
    out(k, level::rydberg) = -0.5 * gamma_r * rho(k, level::rydberg);
    out(level::rydberg, k) = -0.5 * gamma_r * rho(level::rydberg, k);
  }
  out(level::rydberg, level::rydberg) = -gamma_r * prr;
  return out;
}

// ---------------------------------------------------------------------------
// Pulses and the two-atom generator

enum class Atom { control, target };

struct PulseSegment {
  Atom atom;
  double pulse_area;  // rad
  double omega;       // rad/s, Rabi frequency on the driven atom

  [[nodiscard]] double duration() const { return pulse_area / omega; }
};

/// pi on control, 2pi on target, pi on control.
inline std::array<PulseSegment, 3> cz_pulse_sequence(double omega) {
  constexpr double pi = std::numbers::pi;
  return {{{Atom::control, pi, omega}, {Atom::target, 2.0 * pi, omega}, {Atom::control, pi, omega}}};
}

inline double cz_sequence_duration(double omega) { return 4.0 * std::numbers::pi / omega; }

/// H_ct / hbar during one segment: the undriven atom keeps its -omega_10
/// term, and B shifts |rr>.
inline CMatrix two_atom_hamiltonian(const GateParams& p, const PulseSegment& segment) {
  const double omega_c = segment.atom == Atom::control ? segment.omega : 0.0;
  const double omega_t = segment.atom == Atom::target ? segment.omega : 0.0;
  const CMatrix id = CMatrix::Identity(atom_dim, atom_dim);
  CMatrix h = kron(single_atom_hamiltonian(omega_c, p.omega_10), id) +
              kron(id, single_atom_hamiltonian(omega_t, p.omega_10));
  h(pair_dim - 1, pair_dim - 1) += p.blockade_B;
  return h;
}

inline std::vector<CMatrix> two_atom_jump_operators(double gamma_r) {
  const CMatrix id = CMatrix::Identity(atom_dim, atom_dim);
  std::vector<CMatrix> jumps;
  for (const auto& l : single_atom_jump_operators(gamma_r)) {
    jumps.push_back(kron(l, id));
    jumps.push_back(kron(id, l));
  }
  return jumps;
}

/// Superoperator G with d vec(rho)/dt = G vec(rho).
inline CMatrix two_atom_generator(const GateParams& p, const PulseSegment& segment) {
  const CMatrix h = two_atom_hamiltonian(p, segment);
  const CMatrix id = CMatrix::Identity(pair_dim, pair_dim);
  CMatrix g = -I_unit * (kron(id, h) - kron(h.transpose(), id));
  if (p.gamma_r() > 0.0) g += dissipator_superoperator(two_atom_jump_operators(p.gamma_r()), pair_dim);
  return g;
}

/// Right-hand side of the master equation evaluated directly on a 16x16 matrix.
inline CMatrix master_equation_rhs(const GateParams& p, const PulseSegment& segment, const CMatrix& rho) {
  const CMatrix h = two_atom_hamiltonian(p, segment);
  CMatrix drho = -I_unit * (h * rho - rho * h);
  if (p.gamma_r() > 0.0) {
    for (const auto& l : two_atom_jump_operators(p.gamma_r())) {
      const CMatrix ldl = l.adjoint() * l;
      drho += l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl);
    }
  }
  return drho;
}

inline CMatrix segment_propagator(const GateParams& p, const PulseSegment& segment) {
  return matrix_exp(two_atom_generator(p, segment) * segment.duration());
}

/// Propagator of the whole pi - 2pi - pi sequence (later segments on the left).
inline CMatrix cz_sequence_propagator(const GateParams& p) {
  CMatrix total = CMatrix::Identity(pair_dim * pair_dim, pair_dim * pair_dim);
  for (const auto& segment : cz_pulse_sequence(p.omega)) total = segment_propagator(p, segment) * total;
  return total;
}

inline DensityMatrix apply_propagator(const CMatrix& propagator, const DensityMatrix& rho) {
  const Eigen::Index dim = rho.dim();
  return DensityMatrix(unvectorize(propagator * vectorize(rho.matrix()), dim));
}

inline DensityMatrix propagate(const DensityMatrix& rho0, const GateParams& p, const PulseSegment& segment) {
  if (rho0.dim() != pair_dim) throw std::invalid_argument("propagate: expected a 16x16 density matrix");
  if (segment.duration() == 0.0) return rho0;
  return apply_propagator(segment_propagator(p, segment), rho0);
}

inline DensityMatrix run_cz_sequence(const DensityMatrix& rho0, const GateParams& p) {
  if (rho0.dim() != pair_dim) throw std::invalid_argument("run_cz_sequence: expected a 16x16 density matrix");
  DensityMatrix rho = rho0;
  for (const auto& segment : cz_pulse_sequence(p.omega)) rho = propagate(rho, p, segment);
  return rho;
}

/// Unitary that removes the free precession exp(+i omega_10 t) of |0> on
/// both atoms, mapping the laser-frame state back to the qubit frame.
inline CMatrix qubit_frame_correction(double omega_10, double elapsed) {
  CMatrix u = CMatrix::Identity(atom_dim, atom_dim);
  u(level::zero, level::zero) = std::exp(-I_unit * std::fmod(omega_10 * elapsed, 2.0 * std::numbers::pi));
  return kron(u, u);
}

inline DensityMatrix to_qubit_frame(const DensityMatrix& rho, double omega_10, double elapsed) {
  const CMatrix u = qubit_frame_correction(omega_10, elapsed);
  return DensityMatrix(u * rho.matrix() * u.adjoint());
}

}  // namespace rydcz
