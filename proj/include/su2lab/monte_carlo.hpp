#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "su2lab/core_model.hpp"
#include "su2lab/zero_analysis.hpp"

namespace su2lab {

struct Tolerances {
  /// Largest accepted |evaluate_normalized(poly, root)|.
  double root_residual = 1e-8;
  /// Roots closer than this to the circle make a trial fail.
  double boundary_margin = 1e-9;
  /// Target for circle-average quadrature.
  double quadrature_target = 1e-9;

  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

/// One Monte Carlo experiment at fixed (N, r). Trial i samples the
/// polynomial keyed by (master_seed, i), so results never depend on
/// `workers`.
struct TrialPlan {
  int degree = 0;
  double radius = 1.0;
  std::int64_t trials = 1;
  std::uint64_t master_seed = 0;
  int workers = 1;
  Tolerances tolerances;

  void validate() const;

  friend bool operator==(const TrialPlan&, const TrialPlan&) = default;
};

struct Estimate {
  double point = 0.0;
  double std_error = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::int64_t trials_used = 0;
  /// Numerical rejects; excluded from numerator and denominator.
  std::int64_t trials_failed = 0;

  friend bool operator==(const Estimate&, const Estimate&) = default;
};

/// Raised when more than 1% of the trials of an estimate failed.
class ReliabilityError : public Error {
 public:
  ReliabilityError(const std::string& what, Estimate estimate)
      : Error(what), estimate_(estimate) {}
  const Estimate& estimate() const noexcept { return estimate_; }

 private:
  Estimate estimate_;
};

struct DecayPoint {
  int degree = 0;
  double log_prob = 0.0;

  friend bool operator==(const DecayPoint&, const DecayPoint&) = default;
};

/// Least-squares line log P = intercept - c_hat N^2.
struct DecayFit {
  double c_hat = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<DecayPoint> points;
};

struct DeviationSpec {
  double delta = 0.0;
};

/// Outcome of a single trial: a value, or a numerical failure.
struct TrialOutcome {
  bool failed = false;
  double value = 0.0;
};

using TrialFunction = std::function<TrialOutcome(std::uint64_t trial_index)>;

/// Runs trials 0..plan.trials-1 on plan.workers threads. Outcomes are
/// stored by trial index so any reduction over them is schedule-free.
/// NumericalError thrown by `trial` marks that trial as failed.
std::vector<TrialOutcome> run_trials(const TrialPlan& plan,
                                     const TrialFunction& trial);

/// Frequency of value != 0 with a Wilson 95% interval.
Estimate frequency_estimate(const std::vector<TrialOutcome>& outcomes);
/// Mean (compensated summation) with a normal 95% interval.
Estimate mean_estimate(const std::vector<TrialOutcome>& outcomes);

/// Wilson score interval for `successes` out of `n`.
std::pair<double, double> wilson_interval(std::int64_t successes,
                                          std::int64_t n, double z = 1.959963984540054);

/// sqrt(a.std_error^2 + b.std_error^2)
double pooled_std_error(const Estimate& a, const Estimate& b);

/// N r^2 / (1 + r^2)
double expected_zero_count(int degree, double radius);

/// Zero count of one trial in B(0, r) from the root finder. Throws
/// NumericalError on residual or boundary failures.
int trial_zero_count(const SU2Polynomial& poly, double radius,
                     const Tolerances& tolerances);

Estimate estimate_zero_count_mean(const TrialPlan& plan);

/// Frequency of |Xi - N r^2/(1+r^2)| >= delta N.
Estimate estimate_deviation_probability(const TrialPlan& plan,
                                        const DeviationSpec& spec);

/// Frequency of no zeros in B(0, r). The argument-principle count is primary;
/// every 100th trial is cross-checked against the root finder and a
/// disagreement fails the trial.
Estimate estimate_hole_probability(const TrialPlan& plan);

/// Exact ln P(Omega) for the hole-forcing coefficient event
/// {|alpha_0| >= N, |alpha_j| < binom(N, j)^{-1/2} r^{-j} for j >= 1}:
///   -N^2 + sum_{j=1}^N ln(1 - exp(-binom(N, j)^{-1} r^{-2j})).
double omega_lower_bound(int degree, double radius);

struct MaxModulusOutliers {
  Estimate any;    ///< outside the band on either side
  Estimate lower;  ///< below (1+r^2)^{N/2} (1-delta)^{N/2}
  Estimate upper;  ///< above (1+r^2)^{N/2} (1+delta)^{N/2}
};

/// Frequency that log max_{B(0,r)} |psi| leaves
/// [(N/2)(ln(1+r^2) + ln(1-delta)), (N/2)(ln(1+r^2) + ln(1+delta))].
MaxModulusOutliers max_modulus_outlier_frequency(const TrialPlan& plan,
                                                 double delta);

/// Frequency that \int |log|psi(r e^{i theta})|| dtheta/2pi exceeds
/// 5 N ln(2 (1 + r^2)).
Estimate log_l1_outlier_frequency(const TrialPlan& plan);

/// Frequency that \int log|psi(r e^{i theta})| dtheta/2pi falls below
/// (N/2) ln((1 + r^2)(1 - delta)).
Estimate circle_average_lower_tail_frequency(const TrialPlan& plan,
                                             double delta);

/// Ordinary least squares of log_prob against N^2.
DecayFit fit_decay_exponent(std::vector<DecayPoint> points);

}  // namespace su2lab
