#pragma once

// Dipole-dipole coupling between two circular-state atoms and the resulting
// blockade shift. Frequencies are angular (rad/s) throughout.

#include "rydcz/atomic.hpp"
#include "rydcz/constants.hpp"
#include "rydcz/numerics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rydcz {

enum class Orientation {
  parallel,       // quantization axis along the interatomic axis
  perpendicular,  // quantization axis at 90 degrees to it
};

inline constexpr double default_exclusion_radius = 2.0 * micrometre;

struct PairGeometry {
  double separation;  // m
  Orientation orientation = Orientation::parallel;
  double exclusion_radius = default_exclusion_radius;

  PairGeometry(double r, Orientation o = Orientation::parallel, double exclusion = default_exclusion_radius)
      : separation(r), orientation(o), exclusion_radius(exclusion) {
    if (!(separation > 0.0)) throw std::domain_error("PairGeometry: separation must be positive");
  }
  /// Wavefunction overlap is not negligible inside the exclusion radius.
  [[nodiscard]] bool inside_exclusion() const { return separation < exclusion_radius; }
};

/// e^2 a0^2 / (4 pi eps0 R^3 hbar), rad/s.
inline double dipole_frequency_scale(double separation) {
  if (!(separation > 0.0)) throw std::domain_error("dipole_frequency_scale: separation must be positive");
  return consts::elementary_charge * consts::elementary_charge * consts::bohr_radius * consts::bohr_radius /
         (4.0 * std::numbers::pi * consts::vacuum_permittivity * std::pow(separation, 3) * consts::hbar);
}

/// Dimensionless factor of <c_{n+1} c_{n-1}|V|c_n c_n> for the parallel geometry:
/// 8 2^{4n} n^{2n+4} (n^2-1)^{n+2} / ((2n+1)^{2n+3} (2n-1)^{2n+1}), which tends to n^4/2.
inline double vdd_parallel_factor(int n) {
  detail::require_n_at_least(n, 2, "vdd_parallel_factor");
  const double x = n;
  const LogFactor f = LogFactor::power(8.0, 1.0) * LogFactor::power(2.0, 4.0 * x) *
                      LogFactor::power(x, 2.0 * x + 4.0) * LogFactor::power(x * x - 1.0, x + 2.0) /
                      LogFactor::power(2.0 * x + 1.0, 2.0 * x + 3.0) /
                      LogFactor::power(2.0 * x - 1.0, 2.0 * x + 1.0);
  return f.value();
}

inline double vdd_parallel(int n, double separation) {
  return dipole_frequency_scale(separation) * vdd_parallel_factor(n);
}

/// Resonant |c_n c_n> <-> |n,n-2,n-2>|n,n-2,n-2> coupling factor (27/8) n^2 (n-1)
/// for the perpendicular geometry.
inline double vdd_perpendicular_factor(int n) {
  detail::require_n_at_least(n, 2, "vdd_perpendicular_factor");
  const double x = n;
  return 27.0 / 8.0 * x * x * (x - 1.0);
}

inline double vdd_perpendicular(int n, double separation) {
  return dipole_frequency_scale(separation) * vdd_perpendicular_factor(n);
}

struct ForsterRoots {
  double u_plus;
  double u_minus;
};

/// Roots of lambda^2 - delta lambda - V^2 = 0, the eigenvalues of [[0, V], [V, delta]].
/// The root that is small when |V| << |delta| is formed as -V^2 / (larger root)
/// to avoid cancellation.
inline ForsterRoots forster_eigenvalues(double delta, double coupling) {
  const double disc = std::sqrt(delta * delta + 4.0 * coupling * coupling);
  if (delta < 0.0) {
    const double u_minus = 0.5 * (delta - disc);
    const double u_plus = (u_minus == 0.0) ? 0.0 : -coupling * coupling / u_minus;
    return {u_plus, u_minus};
  }
  const double u_plus = 0.5 * (delta + disc);
  const double u_minus = (u_plus == 0.0) ? 0.0 : -coupling * coupling / u_plus;
  return {u_plus, u_minus};
}

struct BlockadeResult {
  double v_dd;
  double delta;
  double u_plus;
  double u_minus;
  double blockade_shift;  // B = u_plus
  bool inside_exclusion;

  [[nodiscard]] double blockade_shift_hz() const { return to_hz(blockade_shift); }
};

/// Two-level Forster blockade shift for |c_n c_n> in the parallel geometry.
inline BlockadeResult blockade_shift(int n, const PairGeometry& geometry) {
  if (geometry.orientation != Orientation::parallel)
    throw std::invalid_argument("blockade_shift: only the parallel geometry has a defect channel");
  const double v = vdd_parallel(n, geometry.separation);
  const double delta = energy_defects(n).delta;
  const auto roots = forster_eigenvalues(delta, v);
  return {v, delta, roots.u_plus, roots.u_minus, roots.u_plus, geometry.inside_exclusion()};
}

inline BlockadeResult blockade_shift(int n, double separation) {
  return blockade_shift(n, PairGeometry{separation});
}

/// The perpendicular channel is resonant, so the shift is the coupling itself.
inline double blockade_shift_perpendicular(int n, double separation) { return vdd_perpendicular(n, separation); }

}  // namespace rydcz
