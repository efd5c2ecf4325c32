#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "su2lab/core_model.hpp"

namespace su2lab {

struct Root {
  std::complex<double> location;
  /// |evaluate_normalized(poly, location)|
  double residual = 0.0;
};

/// Roots of a polynomial. Roots lost to leading-coefficient truncation are
/// not reported; they are counted in `degree_deficit`.
struct ZeroSet {
  std::vector<Root> roots;
  int degree_deficit = 0;

  int degree() const noexcept {
    return static_cast<int>(roots.size()) + degree_deficit;
  }
  double max_residual() const noexcept;
};

/// Open disk B(center, radius).
class Disk {
 public:
  explicit Disk(double radius, std::complex<double> center = {});

  std::complex<double> center() const noexcept { return center_; }
  double radius() const noexcept { return radius_; }

 private:
  std::complex<double> center_;
  double radius_;
};

enum class CountMethod { from_roots, argument_principle };

struct ZeroCount {
  int count = 0;
  CountMethod method = CountMethod::from_roots;
  /// Roots found within the boundary margin of the circle. These are
  /// excluded by the strict inequality but flagged for the caller.
  int boundary_flags = 0;
};

struct RootFinderOptions {
  int max_sweeps = 500;
  /// Per-root stopping rule: |correction| < step_tolerance * (1 + |z|).
  double step_tolerance = 1e-13;
  /// Leading alpha_j below this fraction of max_k |alpha_k| are treated as
  /// zero; their roots are reported as degree deficit.
  double truncation = 1e-14;
};

/// All roots by Aberth-Ehrlich simultaneous iteration.
///
/// The weighted coefficients are scaled by their largest magnitude, starting
/// points are placed on circles read off the Newton polygon (Bini's rule),
/// and each converged root receives two guarded Newton polishing steps.
/// Throws ConvergenceError carrying the unconverged indices.
ZeroSet find_all_roots(const SU2Polynomial& poly,
                       const RootFinderOptions& options = {});

/// Number of roots with |root - center| < radius.
ZeroCount count_zeros_from_roots(const ZeroSet& zeros, const Disk& disk,
                                 double boundary_margin = 1e-9);

/// Winding number of psi around the boundary of `disk`, by phase tracking
/// with local refinement. Throws ContourSingularityError when a zero sits
/// on or too close to the contour.
ZeroCount count_zeros_argument_principle(const SU2Polynomial& poly,
                                         const Disk& disk,
                                         double boundary_margin = 1e-9);

/// Circle averages of log|psi(r e^{i theta})|.
struct CircleLogMoments {
  double mean = 0.0;      ///< \int log|psi| dtheta / 2 pi
  double positive = 0.0;  ///< \int log+|psi| dtheta / 2 pi
  double negative = 0.0;  ///< \int log-|psi| dtheta / 2 pi (nonnegative)
  int nodes = 0;

  double l1() const noexcept { return positive + negative; }
};

/// Nested trapezoid rule, doubling until successive means differ by less
/// than `tolerance` and (when l1_tolerance > 0) successive L1 norms by less
/// than l1_tolerance * (1 + L1). Caps at 2^20 nodes with AccuracyError.
CircleLogMoments circle_log_moments(const SU2Polynomial& poly, double radius,
                                    double tolerance = 1e-9,
                                    double l1_tolerance = 1e-6);

/// \int log|psi(r e^{i theta})| dtheta / 2 pi.
double circle_log_integral(const SU2Polynomial& poly, double radius,
                           double tolerance = 1e-9);

/// |log|psi(0)| + sum_{|a_j| < r} log(r / |a_j|) - \int log|psi(r e^{i theta})||.
/// Throws DomainError when |psi(0)| <= 1e-12 max_j |alpha_j|.
double jensen_residual(const SU2Polynomial& poly, double radius);

struct MaxModulus {
  /// log of max_{|z| <= r} |psi(z)|
  double log_value = 0.0;
  /// The same maximum in linear scale when it fits in a double.
  std::optional<double> value;
  std::complex<double> argmax;
};

/// Maximum of |psi| over the closed disk B(0, r), attained on |z| = r.
MaxModulus max_modulus_boundary(const SU2Polynomial& poly, double radius);

/// (r^2 - |zeta|^2) / |z - zeta|^2 for |zeta| < r and |z| = r.
double poisson_kernel(std::complex<double> zeta, std::complex<double> z,
                      double radius);

/// max_theta |(1/m) sum_j (P_r(zeta_j, r e^{i theta}) - 1)| for zeta_j at the
/// midpoints of m equal arcs of the circle of radius kappa r, each pushed
/// `perturbation` further toward the boundary. Evaluated on 2^14 angles.
double poisson_partition_deviation(int m, double kappa, double radius,
                                   double perturbation);

}  // namespace su2lab
