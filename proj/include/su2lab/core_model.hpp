#pragma once

// Gaussian SU(2) polynomials psi(z) = sum_j alpha_j sqrt(binom(N, j)) z^j.
//
// Everything here is templated on the real scalar type so the same code runs
// in double for production and in long double for cross-checks. Binomial
// weights are always carried in log form; they overflow double near N = 1030.

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "su2lab/errors.hpp"
#include "su2lab/quadrature.hpp"
#include "su2lab/rng.hpp"

namespace su2lab {

template <typename Real>
using ComplexVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using ComplexMatrix =
    Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

/// Largest degree accepted by the direct (unnormalized) evaluator.
inline constexpr int kMaxDirectDegree = 1000;
/// Largest log-magnitude of a single term accepted by the direct evaluator.
inline constexpr double kMaxDirectLogTerm = 700.0;

/// ln binom(n, j) as a sum of min(j, n - j) logarithms.
template <typename Real = double>
Real log_binomial(int n, int j) {
  if (n < 0 || j < 0 || j > n) {
    throw DomainError("log_binomial: j = " + std::to_string(j) +
                      " outside [0, " + std::to_string(n) + "]");
  }
  const int k = std::min(j, n - j);
  Real sum = 0;
  for (int i = 1; i <= k; ++i) sum += std::log1p(Real(n - k) / Real(i));
  return sum;
}

/// ln binom(n, j) for j = 0..n.
template <typename Real = double>
std::vector<Real> log_binomial_row(int n) {
  if (n < 0) throw DomainError("log_binomial_row: negative degree");
  std::vector<Real> row(static_cast<std::size_t>(n) + 1, Real(0));
  for (int j = 1; j <= n / 2; ++j) {
    row[j] = row[j - 1] + std::log1p(Real(n - 2 * j + 1) / Real(j));
    row[n - j] = row[j];
  }
  return row;
}

/// A degree-N polynomial expressed in the orthonormal basis
/// sqrt(binom(N, j)) z^j of the Fubini-Study inner product.
template <typename Real>
class BasicSU2Polynomial {
 public:
  using RealScalar = Real;
  using Scalar = std::complex<Real>;
  using Coefficients = ComplexVector<Real>;

  explicit BasicSU2Polynomial(Coefficients coefficients)
      : coefficients_(std::move(coefficients)) {
    if (coefficients_.size() == 0) {
      throw DomainError("SU2Polynomial needs at least one coefficient");
    }
    for (Eigen::Index j = 0; j < coefficients_.size(); ++j) {
      if (!std::isfinite(coefficients_[j].real()) ||
          !std::isfinite(coefficients_[j].imag())) {
        throw DomainError("SU2Polynomial coefficient " + std::to_string(j) +
                          " is not finite");
      }
    }
  }

  BasicSU2Polynomial(std::initializer_list<Scalar> coefficients)
      : BasicSU2Polynomial(from_list(coefficients)) {}

  int degree() const noexcept {
    return static_cast<int>(coefficients_.size()) - 1;
  }
  const Coefficients& coefficients() const noexcept { return coefficients_; }
  const Scalar& operator[](int j) const { return coefficients_[j]; }

  template <typename Other>
  BasicSU2Polynomial<Other> cast() const {
    return BasicSU2Polynomial<Other>(
        coefficients_.template cast<std::complex<Other>>());
  }

  friend bool operator==(const BasicSU2Polynomial& a,
                         const BasicSU2Polynomial& b) {
    return a.coefficients_.size() == b.coefficients_.size() &&
           a.coefficients_ == b.coefficients_;
  }

 private:
  static Coefficients from_list(std::initializer_list<Scalar> list) {
    Coefficients c(static_cast<Eigen::Index>(list.size()));
    Eigen::Index j = 0;
    for (const auto& value : list) c[j++] = value;
    return c;
  }

  Coefficients coefficients_;
};

using SU2Polynomial = BasicSU2Polynomial<double>;

/// Draws alpha_0..alpha_N i.i.d. standard complex Gaussian from the counter
/// stream of `seed`. Coefficient j always uses draws 2j and 2j + 1.
inline SU2Polynomial sample_polynomial(int degree, RngSeed seed) {
  if (degree < 0) throw DomainError("sample_polynomial: negative degree");
  const CounterStream stream(seed);
  SU2Polynomial::Coefficients alpha(degree + 1);
  for (int j = 0; j <= degree; ++j) alpha[j] = stream.complex_gaussian(j);
  return SU2Polynomial(std::move(alpha));
}

/// psi(z) by Horner's rule on the weighted coefficients.
///
/// Throws RangeError when N > 1000 or some term has log-magnitude >= 700;
/// evaluate_normalized covers those cases.
template <typename Real>
std::complex<Real> evaluate(const BasicSU2Polynomial<Real>& poly,
                            std::complex<Real> z) {
  const int n = poly.degree();
  if (n > kMaxDirectDegree) {
    throw RangeError("evaluate: degree " + std::to_string(n) +
                     " exceeds the direct-evaluation limit; use "
                     "evaluate_normalized");
  }
  const auto lb = log_binomial_row<Real>(n);
  const Real log_abs_z = std::log(std::abs(z));
  Real worst = -std::numeric_limits<Real>::infinity();
  for (int j = 0; j <= n; ++j) {
    const Real magnitude = std::abs(poly[j]);
    if (magnitude == 0) continue;
    const Real power = j == 0 ? Real(0) : j * log_abs_z;
    worst = std::max(worst, std::log(magnitude) + lb[j] / 2 + power);
  }
  if (worst >= Real(kMaxDirectLogTerm)) {
    throw RangeError(
        "evaluate: term magnitude overflows double; use evaluate_normalized");
  }
  std::complex<Real> acc = 0;
  for (int j = n; j >= 0; --j) {
    acc = acc * z + poly[j] * std::exp(lb[j] / 2);
  }
  return acc;
}

namespace detail {

/// ln(1 + rho^2) without overflowing rho^2.
template <typename Real>
Real log1p_square(Real rho) {
  if (rho > Real(1)) {
    return 2 * std::log(rho) + std::log1p(1 / (rho * rho));
  }
  return std::log1p(rho * rho);
}

/// Coefficients of u -> psi(rho u) / (1 + rho^2)^{N/2}; each has modulus at
/// most |alpha_j| because binom(N, j) rho^{2j} <= (1 + rho^2)^N.
template <typename Real>
ComplexVector<Real> normalized_weights(const BasicSU2Polynomial<Real>& poly,
                                       const std::vector<Real>& lb, Real rho) {
  const int n = poly.degree();
  ComplexVector<Real> weighted = ComplexVector<Real>::Zero(n + 1);
  if (rho == 0) {
    weighted[0] = poly[0];
    return weighted;
  }
  const Real log_rho = std::log(rho);
  const Real log_norm = Real(n) / 2 * log1p_square(rho);
  for (int j = 0; j <= n; ++j) {
    weighted[j] = poly[j] * std::exp(lb[j] / 2 + j * log_rho - log_norm);
  }
  return weighted;
}

// Written out in real arithmetic: std::complex multiplication goes through
// the Annex G inf/NaN recovery path, which dominates inner loops here.
template <typename Real>
std::complex<Real> horner(const ComplexVector<Real>& c, std::complex<Real> u) {
  const Real ur = u.real(), ui = u.imag();
  Real re = 0, im = 0;
  for (Eigen::Index j = c.size() - 1; j >= 0; --j) {
    const Real next = re * ur - im * ui + c[j].real();
    im = re * ui + im * ur + c[j].imag();
    re = next;
  }
  return {re, im};
}

}  // namespace detail

/// psi(z) / (1 + |z|^2)^{N/2}. Finite for every z and every N; for a
/// Gaussian polynomial this is a standard complex Gaussian at each fixed z.
template <typename Real>
std::complex<Real> evaluate_normalized(const BasicSU2Polynomial<Real>& poly,
                                       std::complex<Real> z) {
  const Real rho = std::abs(z);
  if (rho == 0) return poly[0];
  const auto weighted =
      detail::normalized_weights(poly, log_binomial_row<Real>(poly.degree()), rho);
  return detail::horner(weighted, z / rho);
}

/// Normalized values of psi on the circle |z| = radius, with the weighted
/// coefficients computed once. at(theta) == evaluate_normalized(poly,
/// radius * e^{i theta}).
template <typename Real>
class CircleEvaluator {
 public:
  using Scalar = std::complex<Real>;

  CircleEvaluator(const BasicSU2Polynomial<Real>& poly, Real radius)
      : radius_(radius),
        log_normalization_(Real(poly.degree()) / 2 *
                           detail::log1p_square(radius)),
        weighted_(detail::normalized_weights(
            poly, log_binomial_row<Real>(poly.degree()), radius)) {}

  Scalar at(Real theta) const { return at_unit(std::polar(Real(1), theta)); }
  Scalar at_unit(Scalar u) const { return detail::horner(weighted_, u); }

  Real radius() const noexcept { return radius_; }
  int degree() const noexcept { return static_cast<int>(weighted_.size()) - 1; }
  /// (N/2) ln(1 + radius^2): add to ln|at(theta)| to get ln|psi|.
  Real log_normalization() const noexcept { return log_normalization_; }
  const ComplexVector<Real>& weighted_coefficients() const noexcept {
    return weighted_;
  }

 private:
  Real radius_;
  Real log_normalization_;
  ComplexVector<Real> weighted_;
};

/// alpha_j -> alpha_{N-j}. Sends each nonzero root z0 to 1/z0.
template <typename Real>
BasicSU2Polynomial<Real> reverse_coefficients(
    const BasicSU2Polynomial<Real>& poly) {
  return BasicSU2Polynomial<Real>(poly.coefficients().reverse().eval());
}

template <typename Real>
struct BasicBasisChangeMatrix {
  std::complex<Real> center;
  ComplexMatrix<Real> matrix;
};

using BasisChangeMatrix = BasicBasisChangeMatrix<double>;

/// Unitary U whose column j expands the zeta-centered basis element
///   sqrt(binom(N, j)) (z - zeta)^j (1 + conj(zeta) z)^{N-j} / (1 + |zeta|^2)^{N/2}
/// against the monomial basis sqrt(binom(N, k)) z^k.
///
/// That element is the monomial basis pulled back by the SU(2) matrix
/// exp(beta K), beta = atan|zeta|, so U = exp(beta D) with D the
/// skew-Hermitian tridiagonal generator of K on degree-N polynomials. The
/// exponential goes through the eigendecomposition of iD. Expanding the two
/// binomial factors and convolving instead cancels catastrophically: at
/// N = 100 the resulting matrix is unitary only to about 1e-1.
template <typename Real>
BasicBasisChangeMatrix<Real> basis_change_matrix(int n,
                                                 std::complex<Real> zeta) {
  using Scalar = std::complex<Real>;
  if (n < 0) throw DomainError("basis_change_matrix: negative degree");
  BasicBasisChangeMatrix<Real> result{zeta,
                                      ComplexMatrix<Real>::Identity(n + 1, n + 1)};
  if (zeta == Scalar(0) || n == 0) return result;

  const Real beta = std::atan(std::abs(zeta));
  const Scalar phase = std::polar(Real(1), std::arg(zeta));
  // hermitian = i D, where D maps z^k to
  //   -e^{i phi} sqrt(k (N-k+1)) z^{k-1} + e^{-i phi} sqrt((k+1)(N-k)) z^{k+1}
  // in the orthonormal basis.
  const Scalar i(0, 1);
  ComplexMatrix<Real> hermitian = ComplexMatrix<Real>::Zero(n + 1, n + 1);
  for (int k = 0; k < n; ++k) {
    const Real w = std::sqrt(Real(k + 1) * Real(n - k));
    hermitian(k + 1, k) = i * std::conj(phase) * w;
    hermitian(k, k + 1) = -i * phase * w;
  }
  const Eigen::SelfAdjointEigenSolver<ComplexMatrix<Real>> eigen(hermitian);
  if (eigen.info() != Eigen::Success) {
    throw ConvergenceError("basis_change_matrix: eigensolver failed", {});
  }
  // exp(beta D) = exp(-i beta (i D))
  const ComplexVector<Real> rotation =
      eigen.eigenvalues()
          .unaryExpr([&](Real lambda) { return std::polar(Real(1), -beta * lambda); })
          .eval();
  result.matrix = eigen.eigenvectors() * rotation.asDiagonal() *
                  eigen.eigenvectors().adjoint();
  return result;
}

/// Right-hand side of the basis-change identity: the polynomial with
/// coefficients `centered` in the zeta-centered orthonormal basis, at z.
template <typename Real>
std::complex<Real> evaluate_centered(const ComplexVector<Real>& centered,
                                     std::complex<Real> zeta,
                                     std::complex<Real> z) {
  const int n = static_cast<int>(centered.size()) - 1;
  const auto lb = log_binomial_row<Real>(n);
  const std::complex<Real> a = z - zeta;
  const std::complex<Real> b = Real(1) + std::conj(zeta) * z;
  std::vector<std::complex<Real>> a_pow(n + 1), b_pow(n + 1);
  a_pow[0] = b_pow[0] = 1;
  for (int j = 1; j <= n; ++j) {
    a_pow[j] = a_pow[j - 1] * a;
    b_pow[j] = b_pow[j - 1] * b;
  }
  const Real log_norm = Real(n) / 2 * detail::log1p_square(std::abs(zeta));
  std::complex<Real> sum = 0;
  for (int j = 0; j <= n; ++j) {
    sum += centered[j] * std::exp(lb[j] / 2 - log_norm) * a_pow[j] *
           b_pow[n - j];
  }
  return sum;
}

/// Maximum over `points` of |lhs - rhs| / max(|lhs|, ||alpha|| (1+|z|^2)^{N/2}),
/// where lhs is the monomial form and rhs the zeta-centered form with
/// coefficients U^* alpha. The second denominator term is the Cauchy-Schwarz
/// bound on |psi(z)|, so the measure stays meaningful near zeros.
template <typename Real>
Real basis_change_identity_residual(const BasicSU2Polynomial<Real>& poly,
                           std::complex<Real> zeta,
                           std::span<const std::complex<Real>> points) {
  const int n = poly.degree();
  const auto basis = basis_change_matrix<Real>(n, zeta);
  const ComplexVector<Real> centered =
      basis.matrix.adjoint() * poly.coefficients();
  const Real norm = poly.coefficients().norm();
  Real worst = 0;
  for (const auto& z : points) {
    const auto lhs = evaluate(poly, z);
    const auto rhs = evaluate_centered<Real>(centered, zeta, z);
    const Real bound =
        norm * std::exp(Real(n) / 2 * detail::log1p_square(std::abs(z)));
    const Real scale = std::max(std::abs(lhs), bound);
    if (scale == 0) continue;
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return worst;
}

/// Fubini-Study inner product
///   <f, g> = ((N+1)/pi) \int f conj(g) (1 + |z|^2)^{-(N+2)} dm(z).
///
/// With t = rho^2 / (1 + rho^2) this becomes (N+1) \int_0^1 avg_theta
/// [f_N conj(g_N)] dt, where f_N = f / (1 + |z|^2)^{N/2}. The t-integrand is
/// a polynomial of degree N and the angular one a trigonometric polynomial
/// of degree N, so Gauss-Legendre with N/2 + 2 nodes and a (2N + 2)-point
/// trapezoid rule are both exact.
template <typename Real>
std::complex<Real> fs_inner_product(const BasicSU2Polynomial<Real>& f,
                                    const BasicSU2Polynomial<Real>& g, int n) {
  if (f.degree() > n || g.degree() > n) {
    throw DomainError("fs_inner_product: polynomial degree exceeds N = " +
                      std::to_string(n));
  }
  const auto rule = gauss_legendre_unit<Real>(n / 2 + 2);
  const int angles = 2 * n + 2;
  std::vector<std::complex<Real>> unit(angles);
  for (int k = 0; k < angles; ++k) {
    unit[k] = std::polar(Real(1), 2 * std::numbers::pi_v<Real> * k / angles);
  }
  std::complex<Real> total = 0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const Real t = rule.nodes[q];
    const Real rho = std::sqrt(t / (1 - t));
    const CircleEvaluator<Real> fe(f, rho), ge(g, rho);
    // Lift the degree-d normalization to degree N.
    const Real f_lift = std::pow(1 - t, Real(n - f.degree()) / 2);
    const Real g_lift = std::pow(1 - t, Real(n - g.degree()) / 2);
    std::complex<Real> ring = 0;
    for (const auto& u : unit) ring += fe.at_unit(u) * std::conj(ge.at_unit(u));
    total += rule.weights[q] * f_lift * g_lift * ring / Real(angles);
  }
  return Real(n + 1) * total;
}

}  // namespace su2lab
