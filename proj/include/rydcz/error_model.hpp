#pragma once

// Analytic intrinsic-error estimates for the blockade CZ gate.

#include "rydcz/constants.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace rydcz {

/// Full parameter record for one gate. Frequencies in rad/s, tau in s.
struct GateParams {
  double omega;                       // Rabi frequency of |1> <-> |r>
  double omega_10 = cs_clock_rad_s;   // qubit splitting
  double blockade_B;                  // doubly-excited level shift
  double tau;                         // Rydberg lifetime, may be +infinity

  [[nodiscard]] double gamma_r() const { return std::isinf(tau) ? 0.0 : 1.0 / tau; }

  /// Omega << B << omega_10, taken as Omega < B/10 and B < omega_10.
  [[nodiscard]] bool strong_blockade() const { return omega < blockade_B / 10.0 && blockade_B < omega_10; }

  void validate() const {
    if (!(omega > 0.0)) throw std::domain_error("GateParams: omega must be positive");
    if (!(omega_10 > 0.0)) throw std::domain_error("GateParams: omega_10 must be positive");
    if (!(blockade_B > 0.0)) throw std::domain_error("GateParams: blockade shift must be positive");
    if (!(tau > 0.0)) throw std::domain_error("GateParams: lifetime must be positive");
  }
};

/// Computational-basis-averaged gate error including the omega_10 corrections.
inline double intrinsic_error_E1(const GateParams& p) {
  const double w = p.omega, b = p.blockade_B, w10 = p.omega_10;
  const double decay = 7.0 * std::numbers::pi / (4.0 * w * p.tau) *
                       (1.0 + w * w / (w10 * w10) + w * w / (7.0 * b * b));
  const double blockade = w * w / (8.0 * b * b) * (1.0 + 6.0 * b * b / (w10 * w10));
  return decay + blockade;
}

/// Rabi frequency minimising the error for omega_10 -> infinity.
inline double optimal_rabi(double blockade_B, double tau) {
  if (!(blockade_B > 0.0) || !(tau > 0.0)) throw std::domain_error("optimal_rabi: B and tau must be positive");
  return std::cbrt(7.0 * std::numbers::pi) * std::pow(blockade_B, 2.0 / 3.0) / std::cbrt(tau);
}

/// Error at the optimal Rabi frequency; depends only on B * tau.
inline double min_error(double blockade_B, double tau) {
  if (!(blockade_B > 0.0) || !(tau > 0.0)) throw std::domain_error("min_error: B and tau must be positive");
  return 3.0 * std::pow(7.0 * std::numbers::pi, 2.0 / 3.0) / 8.0 / std::pow(blockade_B * tau, 2.0 / 3.0);
}

/// Spontaneous emission from intermediate ladder states during a pi pulse.
inline double stirap_intermediate_error(double intermediate_population, double omega, double intermediate_tau) {
  if (intermediate_population < 0.0 || intermediate_population > 1.0)
    throw std::domain_error("stirap_intermediate_error: population must lie in [0, 1]");
  if (!(omega > 0.0) || !(intermediate_tau > 0.0))
    throw std::domain_error("stirap_intermediate_error: omega and tau must be positive");
  return std::numbers::pi * intermediate_population / (omega * intermediate_tau);
}

}  // namespace rydcz
