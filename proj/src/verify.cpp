#include "su2lab/verify.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numbers>

#include "su2lab/monte_carlo.hpp"

namespace su2lab {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// Auxiliary streams for test points live far above the trial indices used
// for polynomials.
constexpr std::uint64_t kPointStream = 1ULL << 40;

cd random_point(std::uint64_t seed, std::uint64_t index, double max_radius) {
  const CounterStream stream({seed, kPointStream + index});
  const double radius = max_radius * std::sqrt(stream.uniform_open1(0));
  return std::polar(radius, 2 * kPi * stream.uniform_open1(1));
}

double min_distance_to_circle(const ZeroSet& zeros, double radius) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& root : zeros.roots) {
    best = std::min(best, std::abs(std::abs(root.location) - radius));
  }
  return best;
}

// Greedy nearest matching; error relative to max(1, |expected|).
double match_error(std::vector<cd> expected, std::vector<cd> actual) {
  if (expected.size() != actual.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const auto& e : expected) {
    auto nearest = std::min_element(actual.begin(), actual.end(),
                                    [&](cd a, cd b) { return std::abs(a - e) < std::abs(b - e); });
    worst = std::max(worst, std::abs(*nearest - e) / std::max(1.0, std::abs(e)));
    actual.erase(nearest);
  }
  return worst;
}

class Suite {
 public:
  void add(std::string id, double measured, double threshold) {
    results_.push_back({std::move(id), measured <= threshold, measured, threshold});
  }
  std::vector<PropertyCheck> take() { return std::move(results_); }

 private:
  std::vector<PropertyCheck> results_;
};

void core_suites(const VerifyOptions& o, Suite& suite) {
  double mismatches = 0;
  for (std::uint64_t t = 0; t < 20; ++t) {
    if (!(sample_polynomial(25, {o.seed, t}) == sample_polynomial(25, {o.seed, t}))) {
      ++mismatches;
    }
  }
  suite.add("core.determinism", mismatches, 0);

  double worst = 0.0;
  for (int n = 0; n <= 30; ++n) {
    const auto poly = sample_polynomial(n, {o.seed, 100u + n});
    for (int k = 0; k < 10; ++k) {
      const cd z = random_point(o.seed, 10 * n + k, 3.0);
      const double lift = std::pow(1 + std::norm(z), n / 2.0);
      const cd direct = evaluate(poly, z);
      const double floor = 1e-3 * poly.coefficients().norm() * lift;
      worst = std::max(worst, std::abs(evaluate_normalized(poly, z) * lift - direct) /
                                  std::max(std::abs(direct), floor));
    }
  }
  suite.add("core.normalized_consistency", worst, 1e-10);

  worst = 0.0;
  for (int n : {1, 2, 5, 10, 30, 60, 100}) {
    for (cd zeta : {cd(0, 0.3), cd(0.7, 0.2), cd(1.5, -0.5), cd(2.0, 0.0)}) {
      const auto u = basis_change_matrix<double>(n, zeta).matrix;
      const auto gram = (u.adjoint() * u).eval();
      worst = std::max(
          worst, (gram - ComplexMatrix<double>::Identity(n + 1, n + 1)).cwiseAbs().maxCoeff());
    }
  }
  suite.add("core.unitarity", worst, 1e-10);

  worst = 0.0;
  for (int n : {1, 5, 10, 20, 30}) {
    const auto poly = sample_polynomial(n, {o.seed, 200u + n});
    std::vector<cd> points;
    for (int k = 0; k < 20; ++k) points.push_back(random_point(o.seed, 1000 + 20 * n + k, 2.0));
    for (cd zeta : {cd(0.5, 0.0), cd(0.7, 0.2)}) {
      worst = std::max(worst, basis_change_identity_residual<double>(poly, zeta, points));
    }
  }
  suite.add("core.basis_change_identity", worst, 1e-8);

  worst = 0.0;
  for (int n = 1; n <= 40; ++n) {
    for (int j = 0; j <= n; ++j) {
      SU2Polynomial::Coefficients alpha = SU2Polynomial::Coefficients::Zero(n + 1);
      alpha[j] = std::exp(-log_binomial(n, j) / 2);  // plain monomial z^j
      const SU2Polynomial monomial(alpha);
      const double exact = std::exp(-log_binomial(n, j));
      worst = std::max(worst,
                       std::abs(fs_inner_product(monomial, monomial, n) - exact) / exact);
    }
  }
  suite.add("core.quadrature_exactness", worst, 1e-10);

  // |psi_N(zeta)|^2 is Exp(1): mean 1, standard deviation 1.
  constexpr int kTrials = 10000;
  const cd zeta(0.7, 0.2);
  double sum = 0.0;
  for (int t = 0; t < kTrials; ++t) {
    sum += std::norm(evaluate_normalized(sample_polynomial(10, {o.seed + 1, std::uint64_t(t)}), zeta));
  }
  suite.add("core.gaussian_invariance", std::abs(sum / kTrials - 1.0) * std::sqrt(kTrials), 3.0);
}

void zero_suites(const VerifyOptions& o, Suite& suite) {
  double violations = 0;
  double mismatches = 0;
  for (int i = 0; i < 200; ++i) {
    const int n = 1 + i % 50;
    const double r = std::array{0.5, 1.0, 2.0}[i % 3];
    const auto poly = sample_polynomial(n, {o.seed + 2, std::uint64_t(i)});
    const auto zeros = find_all_roots(poly);
    if (zeros.degree() != n) ++violations;
    if (min_distance_to_circle(zeros, r) < 1e-6) continue;
    const Disk disk(r);
    if (count_zeros_from_roots(zeros, disk).count !=
        count_zeros_argument_principle(poly, disk).count) {
      ++mismatches;
    }
  }
  suite.add("zeros.root_conservation", violations, 0);
  suite.add("zeros.oracle_equivalence", mismatches, 0);

  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int n = 1 + i % 30;
    const auto poly = sample_polynomial(n, {o.seed + 3, std::uint64_t(i)});
    std::vector<cd> inverted, reversed;
    for (const auto& root : find_all_roots(poly).roots) inverted.push_back(1.0 / root.location);
    for (const auto& root : find_all_roots(reverse_coefficients(poly)).roots) {
      reversed.push_back(root.location);
    }
    worst = std::max(worst, match_error(inverted, reversed));
  }
  suite.add("zeros.reversal_duality", worst, 1e-8);

  worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int n = 1 + i % 50;
    const auto poly = sample_polynomial(n, {o.seed + 4, std::uint64_t(i)});
    if (min_distance_to_circle(find_all_roots(poly), 1.0) < 1e-3) continue;
    worst = std::max(worst, jensen_residual(poly, 1.0));
  }
  suite.add("zeros.jensen", worst, 1e-6);

  worst = 0.0;
  constexpr double kKappa = 1.2;
  for (int i = 0; i < 50; ++i) {
    const int n = 1 + i % 30;
    const auto poly = sample_polynomial(n, {o.seed + 5, std::uint64_t(i)});
    const auto zeros = find_all_roots(poly);
    if (min_distance_to_circle(zeros, 1.0) < 1e-3 ||
        min_distance_to_circle(zeros, kKappa) < 1e-3) {
      continue;
    }
    double lhs = 0.0;
    for (const auto& root : zeros.roots) {
      const double a = std::abs(root.location);
      if (a < 1.0) lhs += std::log(kKappa);
      if (a > 1.0 && a < kKappa) lhs += std::log(kKappa / a);
    }
    const double rhs = circle_log_integral(poly, kKappa) - circle_log_integral(poly, 1.0);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  suite.add("zeros.two_radius_jensen", worst, 1e-6);

  worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 20; ++i) {
    const int n = 5 + i;
    const auto poly = sample_polynomial(n, {o.seed + 6, std::uint64_t(i)});
    if (min_distance_to_circle(find_all_roots(poly), 1.0) < 1e-2) continue;
    const cd zeta = random_point(o.seed, 5000 + i, 0.5);
    const CircleEvaluator<double> circle(poly, 1.0);
    constexpr int kNodes = 1 << 14;
    double average = 0.0;
    for (int k = 0; k < kNodes; ++k) {
      const cd z = std::polar(1.0, 2 * kPi * k / kNodes);
      average += poisson_kernel(zeta, z, 1.0) * std::log(std::abs(circle.at_unit(z)));
    }
    average = average / kNodes + circle.log_normalization();
    const double here = std::log(std::abs(evaluate_normalized(poly, zeta))) +
                        n / 2.0 * std::log1p(std::norm(zeta));
    worst = std::max(worst, here - average);
  }
  suite.add("zeros.subharmonic", worst, 1e-8);

  worst = 0.0;
  for (cd zeta : {cd(0, 0), cd(0.5, 0.1), cd(-0.3, 0.8), cd(0.9, 0.0)}) {
    constexpr int kNodes = 4096;
    double sum = 0.0;
    for (int k = 0; k < kNodes; ++k) {
      sum += poisson_kernel(zeta, std::polar(1.0, 2 * kPi * k / kNodes), 1.0);
    }
    worst = std::max(worst, std::abs(sum / kNodes - 1.0));
  }
  suite.add("zeros.poisson_mean_one", worst, 1e-10);
}

void mc_suites(const VerifyOptions& o, Suite& suite) {
  double worst = -1.0;
  double insane = 0;
  auto sane = [&](const Estimate& e) {
    if (!(e.point >= 0 && e.point <= 1 && e.ci_lo <= e.point && e.point <= e.ci_hi)) {
      ++insane;
    }
  };
  for (auto [n, r] : {std::pair{1, 1.0}, {2, 0.5}, {3, 1.0}, {4, 0.5}}) {
    TrialPlan plan{n, r, 20000, o.seed + 7, o.workers, {}};
    const Estimate hole = estimate_hole_probability(plan);
    sane(hole);
    worst = std::max(worst, std::exp(omega_lower_bound(n, r)) - 3 * hole.std_error - hole.point);
  }
  suite.add("mc.omega_dominance", worst, 0.0);

  double violations = 0;
  for (int n : {4, 8}) {
    const double r = 0.5;
    const double expected = expected_zero_count(n, r);
    const double band = r * r / (1 + r * r) * n / 2;
    for (std::uint64_t t = 0; t < 2000; ++t) {
      const auto poly = sample_polynomial(n, {o.seed + 8, t});
      const int xi = trial_zero_count(poly, r, {});
      if (xi == 0 && !(std::abs(xi - expected) >= band)) ++violations;
    }
  }
  suite.add("mc.hole_deviation_consistency", violations, 0);

  TrialPlan plan{4, 0.5, 5000, o.seed + 9, 1, {}};
  const Estimate serial = estimate_hole_probability(plan);
  plan.workers = std::max(4, o.workers);
  const Estimate parallel = estimate_hole_probability(plan);
  sane(serial);
  suite.add("mc.seed_determinism", serial == parallel ? 0.0 : 1.0, 0);

  // P(no zeros in B(0, r)) = P(all zeros in the closed disk B(0, 1/r)),
  // the latter estimated on independent samples.
  constexpr int kTrials = 20000;
  const int n = 4;
  const double r = 0.5;
  std::vector<TrialOutcome> all_inside(kTrials);
  for (int t = 0; t < kTrials; ++t) {
    const auto poly = sample_polynomial(n, {o.seed + 10, std::uint64_t(t)});
    all_inside[t] = {false, trial_zero_count(poly, 1 / r, {}) == n ? 1.0 : 0.0};
  }
  const Estimate inside = frequency_estimate(all_inside);
  const Estimate hole = estimate_hole_probability({n, r, kTrials, o.seed + 11, o.workers, {}});
  sane(inside);
  sane(hole);
  suite.add("mc.estimator_sanity", insane, 0);
  suite.add("mc.reversal_symmetry",
            std::abs(inside.point - hole.point) / pooled_std_error(inside, hole), 3.0);
}

}  // namespace

std::vector<PropertyCheck> run_invariant_suites(const VerifyOptions& options) {
  Suite suite;
  core_suites(options, suite);
  zero_suites(options, suite);
  mc_suites(options, suite);
  return suite.take();
}

}  // namespace su2lab
