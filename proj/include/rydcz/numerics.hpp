#pragma once

// Dense complex linear algebra and scalar helpers shared by the physics
// headers. Everything here is a pure function of its arguments.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rydcz {

using complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr complex I_unit{0.0, 1.0};

/// Thrown when a routine receives input outside its mathematical contract
/// (non-Hermitian input to a Hermitian solver, non-PSD input to a PSD root).
class contract_violation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class not_psd_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// ---------------------------------------------------------------------------
// Log-space products

/// One factor base^exponent of a product evaluated in log space.
struct PowerFactor {
  double base;
  double exponent;
};

/// Signed number stored as sign * exp(log_magnitude). Products of such
/// numbers never overflow, which is what closed forms like 2^{4n} n^{2n+4}
/// need for n in the hundreds.
class LogFactor {
 public:
  LogFactor() = default;
  LogFactor(int sign, double log_magnitude) : sign_(sign >= 0 ? 1 : -1), log_magnitude_(log_magnitude) {}

  static LogFactor from_value(double x) {
    if (x == 0.0) throw std::domain_error("LogFactor: zero has no logarithm");
    return {x < 0 ? -1 : 1, std::log(std::abs(x))};
  }
  static LogFactor power(double base, double exponent) {
    if (!(base > 0.0)) throw std::domain_error("LogFactor: base must be positive, got " + std::to_string(base));
    return {1, exponent * std::log(base)};
  }

  [[nodiscard]] int sign() const { return sign_; }
  [[nodiscard]] double log_magnitude() const { return log_magnitude_; }
  [[nodiscard]] double value() const { return sign_ * std::exp(log_magnitude_); }

  LogFactor& operator*=(const LogFactor& o) {
    sign_ *= o.sign_;
    log_magnitude_ += o.log_magnitude_;
    return *this;
  }
  LogFactor& operator/=(const LogFactor& o) {
    sign_ *= o.sign_;
    log_magnitude_ -= o.log_magnitude_;
    return *this;
  }
  friend LogFactor operator*(LogFactor a, const LogFactor& b) { return a *= b; }
  friend LogFactor operator/(LogFactor a, const LogFactor& b) { return a /= b; }

  [[nodiscard]] LogFactor pow(double exponent) const {
    if (sign_ < 0) throw std::domain_error("LogFactor: real power of a negative number");
    return {1, exponent * log_magnitude_};
  }

 private:
  int sign_ = 1;
  double log_magnitude_ = 0.0;
};

/// leading_sign * prod(base_i^exponent_i), accumulated as a sum of logarithms.
inline LogFactor log_product_factor(std::span<const PowerFactor> factors, int leading_sign = 1) {
  LogFactor acc{leading_sign, 0.0};
  for (const auto& f : factors) acc *= LogFactor::power(f.base, f.exponent);
  return acc;
}

inline double log_product(std::span<const PowerFactor> factors, int leading_sign = 1) {
  return log_product_factor(factors, leading_sign).value();
}

inline double log_product(std::initializer_list<PowerFactor> factors, int leading_sign = 1) {
  return log_product(std::span<const PowerFactor>(factors.begin(), factors.size()), leading_sign);
}

// ---------------------------------------------------------------------------
// Matrix helpers

inline double max_abs_entry(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// True when ||M - M^dagger||_max <= tol * max|M_ij|.
inline bool is_hermitian(const CMatrix& m, double rel_tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(max_abs_entry(m), std::numeric_limits<double>::min());
  return max_abs_entry(m - m.adjoint()) <= rel_tol * scale;
}

inline CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

struct HermitianEigen {
  RVector values;   // ascending
  CMatrix vectors;  // column k pairs with values[k]
};

inline HermitianEigen hermitian_eig(const CMatrix& m) {
  if (!is_hermitian(m)) throw contract_violation("hermitian_eig: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(m));
  if (solver.info() != Eigen::Success) throw std::runtime_error("hermitian_eig: eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// f(M) = V f(Lambda) V^dagger for Hermitian M.
template <typename Fn>
CMatrix hermitian_function(const HermitianEigen& eig, Fn&& fn) {
  RVector mapped = eig.values.unaryExpr(std::forward<Fn>(fn));
  return eig.vectors * mapped.asDiagonal() * eig.vectors.adjoint();
}

/// Principal square root of a Hermitian PSD matrix. Eigenvalues in
/// [-clamp_tol, 0) are treated as zero; anything more negative throws.
inline CMatrix psd_sqrt(const CMatrix& m, double clamp_tol = 1e-12) {
  const auto eig = hermitian_eig(m);
  if (eig.values.size() > 0 && eig.values.minCoeff() < -clamp_tol)
    throw not_psd_error("psd_sqrt: eigenvalue " + std::to_string(eig.values.minCoeff()) + " below tolerance");
  return hermitian_function(eig, [](double x) { return std::sqrt(std::max(x, 0.0)); });
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// exp(M) by Pade scaling-and-squaring.
inline CMatrix matrix_exp(const CMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix_exp: matrix must be square");
  return m.exp();
}

inline double trace_norm(const CMatrix& hermitian) {
  return hermitian_eig(hermitian).values.cwiseAbs().sum();
}

/// Trace distance 1/2 ||a - b||_1 between Hermitian matrices.
inline double trace_distance(const CMatrix& a, const CMatrix& b) {
  return 0.5 * trace_norm(hermitian_part(a - b));
}

// ---------------------------------------------------------------------------
// Fixed-step RK4

using Generator = std::function<CMatrix(double)>;

/// Classical fourth-order Runge-Kutta solution of dy/dt = G(t) y.
inline CVector rk4_integrate(const Generator& generator, const CVector& y0, double t0, double t1,
                             std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("rk4_integrate: steps must be >= 1");
  const double h = (t1 - t0) / static_cast<double>(steps);
  CVector y = y0;
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = t0 + h * static_cast<double>(s);
    const CMatrix g0 = generator(t);
    const CMatrix gh = generator(t + 0.5 * h);
    const CMatrix g1 = generator(t + h);
    const CVector k1 = g0 * y;
    const CVector k2 = gh * (y + 0.5 * h * k1);
    const CVector k3 = gh * (y + 0.5 * h * k2);
    const CVector k4 = g1 * (y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

/// One RK4 step for a constant generator is the degree-4 Taylor polynomial
/// of exp(hG); 2^log2_steps steps are obtained by repeated squaring. The
/// result is the exact fixed-step RK4 propagator, with O(log N) cost.
inline CMatrix rk4_propagator(const CMatrix& generator, double duration, unsigned log2_steps) {
  const Eigen::Index n = generator.rows();
  const double h = std::ldexp(duration, -static_cast<int>(log2_steps));
  const CMatrix a = h * generator;
  const CMatrix id = CMatrix::Identity(n, n);
  // Horner form of I + A + A^2/2 + A^3/6 + A^4/24.
  CMatrix step = id + a * (id + a * (id + a * (id + a / 4.0) / 3.0) / 2.0);
  for (unsigned k = 0; k < log2_steps; ++k) step = step * step;
  return step;
}

// ---------------------------------------------------------------------------
// Clebsch-Gordan coefficients

namespace detail {

inline bool is_half_integer(double x) { return std::abs(2.0 * x - std::round(2.0 * x)) < 1e-9; }
inline long twice(double x) { return std::lround(2.0 * x); }
inline double log_factorial(long k) { return std::lgamma(static_cast<double>(k) + 1.0); }

}  // namespace detail

/// <j1 m1 j2 m2 | J M> with the Condon-Shortley phase (Racah's closed form).
/// Arguments are integers or half-integers; selection-rule violations give 0.
inline double clebsch_gordan(double j1, double m1, double j2, double m2, double J, double M) {
  using detail::is_half_integer;
  using detail::log_factorial;
  using detail::twice;
  for (double v : {j1, m1, j2, m2, J, M})
    if (!is_half_integer(v)) throw std::invalid_argument("clebsch_gordan: arguments must be half-integers");

  const long tj1 = twice(j1), tm1 = twice(m1), tj2 = twice(j2), tm2 = twice(m2), tJ = twice(J), tM = twice(M);
  if (tj1 < 0 || tj2 < 0 || tJ < 0) return 0.0;
  if (std::abs(tm1) > tj1 || std::abs(tm2) > tj2 || std::abs(tM) > tJ) return 0.0;
  if (tm1 + tm2 != tM) return 0.0;
  if (tJ < std::abs(tj1 - tj2) || tJ > tj1 + tj2) return 0.0;
  if ((tj1 + tj2 + tJ) % 2 != 0) return 0.0;
  if ((tj1 + tm1) % 2 != 0 || (tj2 + tm2) % 2 != 0 || (tJ + tM) % 2 != 0) return 0.0;

  const long a = (tj1 + tj2 - tJ) / 2;
  const long b = (tj1 - tj2 + tJ) / 2;
  const long c = (-tj1 + tj2 + tJ) / 2;
  const long d = (tj1 + tj2 + tJ) / 2 + 1;
  const double log_delta = 0.5 * (log_factorial(a) + log_factorial(b) + log_factorial(c) - log_factorial(d));
  const double log_norm =
      0.5 * (std::log(static_cast<double>(tJ + 1)) + log_factorial((tj1 + tm1) / 2) +
             log_factorial((tj1 - tm1) / 2) + log_factorial((tj2 + tm2) / 2) + log_factorial((tj2 - tm2) / 2) +
             log_factorial((tJ + tM) / 2) + log_factorial((tJ - tM) / 2));

  // sum over k of (-1)^k / [k! (j1+j2-J-k)! (j1-m1-k)! (j2+m2-k)! (J-j2+m1+k)! (J-j1-m2+k)!]
  const long e1 = a;
  const long e2 = (tj1 - tm1) / 2;
  const long e3 = (tj2 + tm2) / 2;
  const long e4 = (tJ - tj2 + tm1) / 2;
  const long e5 = (tJ - tj1 - tm2) / 2;
  const long kmin = std::max({0L, -e4, -e5});
  const long kmax = std::min({e1, e2, e3});
  double sum = 0.0;
  for (long k = kmin; k <= kmax; ++k) {
    const double log_term = log_factorial(k) + log_factorial(e1 - k) + log_factorial(e2 - k) +
                            log_factorial(e3 - k) + log_factorial(e4 + k) + log_factorial(e5 + k);
    const double term = std::exp(log_delta + log_norm - log_term);
    sum += (k % 2 == 0) ? term : -term;
  }
  return sum;
}

}  // namespace rydcz
