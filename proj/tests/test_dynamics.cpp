#include "rydcz/blockade.hpp"
#include "rydcz/dynamics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace rydcz;

namespace {

CMatrix random_density_matrix(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  CMatrix a(dim, dim);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = complex(nd(rng), nd(rng));
  CMatrix rho = a * a.adjoint();
  return rho / rho.trace();
}

GateParams column_params(int n, double temperature) {
  const double b = blockade_shift(n, 2e-6).blockade_shift;
  const double tau = lifetime(n, temperature);
  return {optimal_rabi(b, tau), cs_clock_rad_s, b, tau};
}

CVector pair_ket(int c, int t) { return kron(atom_ket(c), atom_ket(t)); }

}  // namespace

TEST(SingleAtom, HamiltonianStructure) {
  const CMatrix h = single_atom_hamiltonian(complex(2.0, 1.0), 7.0);
  EXPECT_TRUE(is_hermitian(h));
  EXPECT_EQ(h(level::zero, level::zero), complex(-7.0));
  EXPECT_EQ(h(level::rydberg, level::one), complex(1.0, 0.5));
  EXPECT_EQ(h(level::reservoir, level::reservoir), complex(0.0));
  EXPECT_EQ(h(level::reservoir, level::rydberg), complex(0.0));
}

TEST(SingleAtom, BranchingRatiosSumToTotalRate) {
  const auto jumps = single_atom_jump_operators(16.0);
  ASSERT_EQ(jumps.size(), 3u);
  double total = 0.0;
  for (const auto& l : jumps) total += (l.adjoint() * l)(level::rydberg, level::rydberg).real();
  EXPECT_DOUBLE_EQ(total, 16.0);
  EXPECT_DOUBLE_EQ(std::norm(jumps[0](level::zero, level::rydberg)), 1.0);
  EXPECT_DOUBLE_EQ(std::norm(jumps[1](level::reservoir, level::rydberg)), 14.0);
  EXPECT_DOUBLE_EQ(std::norm(jumps[2](level::one, level::rydberg)), 1.0);
  EXPECT_THROW(single_atom_jump_operators(-1.0), std::domain_error);
}

TEST(SingleAtom, SuperoperatorMatchesDirectDissipator) {
  std::mt19937_64 rng(4);
  const CMatrix rho = random_density_matrix(4, rng);
  const CMatrix direct = apply_single_atom_dissipator(rho, 3.0);
  const CMatrix via = unvectorize(single_atom_liouvillian(3.0) * vectorize(rho), 4);
  EXPECT_LT((direct - via).norm(), 1e-14);
  EXPECT_NEAR(direct.trace().real(), 0.0, 1e-14);
}

TEST(Vectorization, ColumnStackingIdentity) {
  std::mt19937_64 rng(5);
  const CMatrix a = random_density_matrix(3, rng), x = random_density_matrix(3, rng), b = random_density_matrix(3, rng);
  EXPECT_LT((vectorize(a * x * b) - kron(b.transpose(), a) * vectorize(x)).norm(), 1e-14);
  EXPECT_LT((unvectorize(vectorize(x), 3) - x).norm(), 0.0 + 1e-300);
}

TEST(TwoAtom, GeneratorAgreesWithDirectRightHandSide) {
  std::mt19937_64 rng(6);
  const GateParams p{to_rad_s(4e6), 1e9, to_rad_s(1e8), 1e-6};
  for (const auto& seg : cz_pulse_sequence(p.omega)) {
    const CMatrix rho = random_density_matrix(16, rng);
    const CMatrix via = unvectorize(two_atom_generator(p, seg) * vectorize(rho), 16);
    const CMatrix direct = master_equation_rhs(p, seg, rho);
    EXPECT_LT((via - direct).norm(), 1e-9 * direct.norm());
    EXPECT_NEAR(direct.trace().real(), 0.0, 1e-9 * direct.norm());
  }
}

TEST(TwoAtom, BlockadeShiftSitsOnDoublyExcitedState) {
  const GateParams p{1.0, 10.0, 123.0, 1.0};
  const CMatrix h = two_atom_hamiltonian(p, {Atom::target, 1.0, 1.0});
  EXPECT_EQ(h(pair_index(level::rydberg, level::rydberg), pair_index(level::rydberg, level::rydberg)), complex(123.0));
  EXPECT_EQ(h(pair_index(level::zero, level::zero), pair_index(level::zero, level::zero)), complex(-20.0));
  // the undriven control does not couple to |r>
  EXPECT_EQ(h(pair_index(level::rydberg, level::one), pair_index(level::one, level::one)), complex(0.0));
  EXPECT_EQ(h(pair_index(level::one, level::rydberg), pair_index(level::one, level::one)), complex(0.5));
}

TEST(TwoAtom, FreeDecayMatchesRateEquations) {
  // Control starts in |r>, target in |1>, no drive: populations follow
  // exponential decay with the 1/16, 7/8, 1/16 branching.
  const double gamma = 2.0e3, t = 7.3e-4;
  const GateParams p{1.0, 1e6, 1e7, 1.0 / gamma};
  const CMatrix g = two_atom_generator(p, {Atom::control, 0.0, 0.0});
  const DensityMatrix rho0 = DensityMatrix::pure(pair_ket(level::rydberg, level::one));
  const DensityMatrix rho = apply_propagator(matrix_exp(g * t), rho0);
  const double decayed = 1.0 - std::exp(-gamma * t);
  EXPECT_NEAR(rho.population(pair_index(level::rydberg, level::one)), 1.0 - decayed, 1e-13);
  EXPECT_NEAR(rho.population(pair_index(level::zero, level::one)), decayed / 16.0, 1e-13);
  EXPECT_NEAR(rho.population(pair_index(level::reservoir, level::one)), 7.0 * decayed / 8.0, 1e-13);
  EXPECT_NEAR(rho.population(pair_index(level::one, level::one)), decayed / 16.0, 1e-13);
}

TEST(TwoAtom, CoherenceDecaysAtHalfTheRate) {
  const double gamma = 1.0e3, t = 1.1e-3;
  const GateParams p{1.0, 1e6, 1e7, 1.0 / gamma};
  const CMatrix g = two_atom_generator(p, {Atom::control, 0.0, 0.0});
  CVector psi = (pair_ket(level::rydberg, level::one) + pair_ket(level::reservoir, level::one)) / std::sqrt(2.0);
  const DensityMatrix rho = apply_propagator(matrix_exp(g * t), DensityMatrix::pure(psi));
  EXPECT_NEAR(std::abs(rho(pair_index(level::rydberg, level::one), pair_index(level::reservoir, level::one))),
              0.5 * std::exp(-0.5 * gamma * t), 1e-13);
}

TEST(TwoAtom, PropagatorAgreesWithRk4) {
  const GateParams p = column_params(110, 0.0);
  const CMatrix exact = cz_sequence_propagator(p);
  CMatrix rk4 = CMatrix::Identity(256, 256);
  for (const auto& seg : cz_pulse_sequence(p.omega))
    rk4 = rk4_propagator(two_atom_generator(p, seg), seg.duration(), 24) * rk4;
  EXPECT_LT(max_abs_entry(exact - rk4), 1e-8);
}

TEST(TwoAtom, TracePreservationAndPositivity) {
  std::mt19937_64 rng(7);
  for (auto [n, t] : {std::pair{80, 0.0}, std::pair{110, 300.0}}) {
    const GateParams p = column_params(n, t);
    const CMatrix u = cz_sequence_propagator(p);
    for (int trial = 0; trial < 4; ++trial) {
      const DensityMatrix out = apply_propagator(u, DensityMatrix(random_density_matrix(16, rng)));
      EXPECT_NEAR(out.trace(), 1.0, 1e-9);
      EXPECT_GE(out.min_eigenvalue(), -1e-9);
      EXPECT_LT(out.hermiticity_residual(), 1e-9);
    }
  }
}

TEST(TwoAtom, SegmentwiseAndWholeSequenceAgree) {
  const GateParams p = column_params(100, 77.0);
  const DensityMatrix rho0 = DensityMatrix::pure(pair_ket(level::one, level::one));
  const DensityMatrix a = run_cz_sequence(rho0, p);
  const DensityMatrix b = apply_propagator(cz_sequence_propagator(p), rho0);
  EXPECT_LT((a.matrix() - b.matrix()).norm(), 1e-10);
  EXPECT_THROW(run_cz_sequence(DensityMatrix(CMatrix::Identity(4, 4)), p), std::invalid_argument);
}

TEST(TwoAtom, IdealLimitRealisesControlledPhase) {
  const GateParams p{to_rad_s(0.05e6), cs_clock_rad_s, to_rad_s(5e9), std::numeric_limits<double>::infinity()};
  const double elapsed = cz_sequence_duration(p.omega);
  const CMatrix u = cz_sequence_propagator(p);
  const int q[2] = {level::zero, level::one};
  const double expected_phase[4] = {1.0, -1.0, -1.0, -1.0};
  for (int c = 0; c < 2; ++c)
    for (int t = 0; t < 2; ++t) {
      const int k = pair_index(q[c], q[t]);
      CVector psi = pair_ket(q[c], q[t]);
      // superposition with |00> exposes the relative phase
      CVector probe = (psi + pair_ket(level::zero, level::zero)).normalized();
      if (c == 0 && t == 0) probe = psi;
      const DensityMatrix out = to_qubit_frame(apply_propagator(u, DensityMatrix::pure(probe)), p.omega_10, elapsed);
      EXPECT_NEAR(out.population(k), std::norm(probe(k)), 1e-5);
      if (k != 0)
        EXPECT_NEAR(out(k, 0).real() / std::abs(out(k, 0)), expected_phase[2 * c + t], 1e-5) << c << t;
    }
}
