#pragma once

// Hydrogenic structure of circular Rydberg states |c_n> = |n, n-1, n-1>.
//
// Reduced matrix elements follow the Wigner-Eckart convention
//   <l' m'| r_q |l m> = <l m 1 q | l' m'> <l'||r||l> / sqrt(2 l' + 1),
// in which <l-1||r||l> = -sqrt(l) I_rad and <l+1||r||l> = sqrt(l+1) I_rad for
// the radial integral I_rad = int R_{n'l'} R_{nl} r^3 dr. All n-dependent
// closed forms go through LogFactor so nothing overflows for n in the
// hundreds.

#include "rydcz/constants.hpp"
#include "rydcz/numerics.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace rydcz {

struct RydbergLevel {
  int n = 1;
  int l = 0;
  int m = 0;

  RydbergLevel() = default;
  RydbergLevel(int n_, int l_, int m_) : n(n_), l(l_), m(m_) {
    if (n < 1 || l < 0 || l > n - 1 || std::abs(m) > l)
      throw std::invalid_argument("RydbergLevel: invalid quantum numbers (" + std::to_string(n) + "," +
                                  std::to_string(l) + "," + std::to_string(m) + ")");
  }
  static RydbergLevel circular(int n) { return {n, n - 1, n - 1}; }

  [[nodiscard]] bool is_circular() const { return l == n - 1 && m == l; }
  /// Hydrogenic binding energy -E_R / n^2 in joules.
  [[nodiscard]] double energy() const { return -consts::rydberg_energy / (static_cast<double>(n) * n); }

  friend bool operator==(const RydbergLevel&, const RydbergLevel&) = default;
};

namespace detail {
inline void require_n_at_least(int n, int min, const char* what) {
  if (n < min) throw std::domain_error(std::string(what) + ": n must be >= " + std::to_string(min));
}
}  // namespace detail

/// <c_{n-1}||r||c_n> in units of a0 (negative).
inline double reduced_dipole_down(int n) {
  detail::require_n_at_least(n, 2, "reduced_dipole_down");
  const double x = n;
  const LogFactor f = LogFactor::power(4.0, x) * LogFactor::power(x, x + 1.0) *
                      LogFactor::power(x - 1.0, x + 1.5) * LogFactor::power(4.0 * x * x - 6.0 * x + 2.0, 0.5) /
                      LogFactor::power(2.0 * x - 1.0, 2.0 * x + 1.0);
  return -f.value();
}

/// <c_{n+1}||r||c_n> in units of a0 (positive).
inline double reduced_dipole_up(int n) {
  detail::require_n_at_least(n, 1, "reduced_dipole_up");
  const double x = n;
  const LogFactor f = LogFactor::power(2.0, 0.5) * LogFactor::power(4.0, x + 1.0) *
                      LogFactor::power(x + 1.0, x + 2.0) * LogFactor::power(x, x + 3.0) /
                      LogFactor::power(2.0 * x + 1.0, 2.0 * x + 2.5);
  return f.value();
}

/// omega_eg for c_n -> c_{n-1}, rad/s.
inline double transition_frequency(int n) {
  detail::require_n_at_least(n, 2, "transition_frequency");
  const double x = n;
  return consts::rydberg_energy / consts::hbar * (1.0 / ((x - 1.0) * (x - 1.0)) - 1.0 / (x * x));
}

inline double transition_frequency_hz(int n) { return to_hz(transition_frequency(n)); }

/// Forster defects of |c_n c_n>: delta toward |c_{n+1} c_{n-1}> and
/// delta_prime toward |n+2,n,n>|c_{n-1}>, both in rad/s.
struct DefectPair {
  double delta;
  double delta_prime;
};

inline DefectPair energy_defects(int n) {
  detail::require_n_at_least(n, 2, "energy_defects");
  const double x = n;
  const double scale = 0.5 * consts::hartree_energy / consts::hbar;
  const double base = 2.0 / (x * x) - 1.0 / ((x - 1.0) * (x - 1.0));
  return {scale * (base - 1.0 / ((x + 1.0) * (x + 1.0))), scale * (base - 1.0 / ((x + 2.0) * (x + 2.0)))};
}

/// Defect expressed in Hartree units (hbar * delta / E_H).
inline double in_hartree(double angular_frequency) {
  return angular_frequency * consts::hbar / consts::hartree_energy;
}

/// <c_{n-1}| r_{-1} |c_n> in units of a0.
inline double spherical_dipole_down(int n) {
  detail::require_n_at_least(n, 2, "spherical_dipole_down");
  return clebsch_gordan(n - 1, n - 1, 1, -1, n - 2, n - 2) * reduced_dipole_down(n) / std::sqrt(2.0 * n - 3.0);
}

/// Zero-temperature lifetime from the spontaneous rate of the single
/// c_n -> c_{n-1} channel, evaluated with an explicit matrix element.
inline double lifetime_from_matrix_element(int n) {
  const double omega = transition_frequency(n);
  const double d = spherical_dipole_down(n) * consts::bohr_radius;
  return 3.0 * std::numbers::pi * consts::vacuum_permittivity * consts::hbar *
         std::pow(consts::speed_of_light, 3) /
         (std::pow(omega, 3) * consts::elementary_charge * consts::elementary_charge * d * d);
}

/// Zero-temperature lifetime, closed form (s).
inline double lifetime_0K(int n) {
  detail::require_n_at_least(n, 2, "lifetime_0K");
  const double x = n;
  const double prefactor = 3.0 * std::numbers::pi * consts::vacuum_permittivity * std::pow(consts::hbar, 4) *
                           std::pow(consts::speed_of_light, 3) /
                           (std::pow(consts::rydberg_energy, 3) * consts::bohr_radius * consts::bohr_radius *
                            consts::elementary_charge * consts::elementary_charge);
  const LogFactor f = LogFactor::power(2.0 * x - 1.0, 4.0 * x - 1.0) / LogFactor::power(2.0, 4.0 * x + 1.0) /
                LogFactor::power(x, 2.0 * x - 4.0) / LogFactor::power(x - 1.0, 2.0 * x - 2.0);
  return prefactor * f.value();
}

/// Thermal photon occupation of the c_n -> c_{n-1} mode at temperature T.
inline double blackbody_occupation(int n, double temperature) {
  if (temperature < 0.0) throw std::domain_error("blackbody_occupation: negative temperature");
  if (temperature == 0.0) return 0.0;
  return 1.0 / std::expm1(consts::hbar * transition_frequency(n) / (consts::boltzmann * temperature));
}

/// Lifetime with blackbody-stimulated emission on the same channel (s).
inline double lifetime(int n, double temperature) {
  if (temperature < 0.0) throw std::domain_error("lifetime: negative temperature");
  const double tau0 = lifetime_0K(n);
  if (temperature == 0.0) return tau0;
  return tau0 / (blackbody_occupation(n, temperature) + 1.0);
}

/// Radius of maximum radial probability density r^2 |R_{n,n-1}|^2 (m).
inline double radial_density_peak(int n) {
  detail::require_n_at_least(n, 1, "radial_density_peak");
  return static_cast<double>(n) * n * consts::bohr_radius;
}

/// P(r > radius) for the circular state of principal quantum number n.
/// r^2 |R_{n,n-1}|^2 is a Gamma(2n+1) density in 2r/(n a0), so the tail is
/// the regularized upper incomplete gamma Q(2n+1, 2 radius / (n a0)).
inline double radial_probability_outside(int n, double radius) {
  detail::require_n_at_least(n, 1, "radial_probability_outside");
  if (radius < 0.0) throw std::domain_error("radial_probability_outside: negative radius");
  if (radius == 0.0) return 1.0;
  const double x = 2.0 * radius / (static_cast<double>(n) * consts::bohr_radius);
  return boost::math::gamma_q(2.0 * n + 1.0, x);
}

// ---------------------------------------------------------------------------
// Multiphoton ladder into a circular state

struct StirapLink {
  RydbergLevel lower_index_state;
  RydbergLevel upper_index_state;
  double frequency_hz;  // |E_a - E_b| / h, hydrogenic
};

struct StirapChain {
  int first_index = 3;  // label of states.front() in the |psi_k> numbering
  std::vector<RydbergLevel> states;
  std::vector<StirapLink> links;
};

/// Rydberg part of the ladder ending in |c_{n_final}>: for k = 2..K with
/// K = n_final/2, odd members |n_final+2+K-k, 2k-2, 2k-2> interleave with
/// even members |K+k, 2k-1, 2k-1>. n_final = 112 gives |168,2,2>, |58,3,3>,
/// ..., |114,110,110>, |112,111,111>.
inline StirapChain stirap_chain(int n_final = 112) {
  if (n_final < 4 || n_final % 2 != 0)
    throw std::invalid_argument("stirap_chain: final principal quantum number must be even and >= 4");
  const int big_k = n_final / 2;
  StirapChain chain;
  for (int k = 2; k <= big_k; ++k) {
    chain.states.emplace_back(n_final + 2 + big_k - k, 2 * k - 2, 2 * k - 2);
    chain.states.emplace_back(big_k + k, 2 * k - 1, 2 * k - 1);
  }
  for (std::size_t i = 0; i + 1 < chain.states.size(); ++i) {
    const auto& a = chain.states[i];
    const auto& b = chain.states[i + 1];
    chain.links.push_back({a, b, std::abs(a.energy() - b.energy()) / consts::planck});
  }
  return chain;
}

}  // namespace rydcz
