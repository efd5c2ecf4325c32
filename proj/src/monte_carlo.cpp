#include "su2lab/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace su2lab {

namespace {

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

Estimate checked(Estimate estimate, const char* what) {
  const std::int64_t total = estimate.trials_used + estimate.trials_failed;
  if (estimate.trials_used == 0 ||
      static_cast<double>(estimate.trials_failed) > 0.01 * total) {
    throw ReliabilityError(std::string(what) + ": " +
                               std::to_string(estimate.trials_failed) + " of " +
                               std::to_string(total) + " trials failed",
                           estimate);
  }
  return estimate;
}

std::vector<TrialOutcome> indicator(const std::vector<TrialOutcome>& outcomes,
                                    double code) {
  std::vector<TrialOutcome> out(outcomes.size());
  std::transform(outcomes.begin(), outcomes.end(), out.begin(),
                 [code](const TrialOutcome& o) {
                   return TrialOutcome{o.failed, o.value == code ? 1.0 : 0.0};
                 });
  return out;
}

}  // namespace

void TrialPlan::validate() const {
  if (degree < 0) throw DomainError("TrialPlan: degree must be nonnegative");
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw DomainError("TrialPlan: radius must be positive");
  }
  if (trials < 1) throw DomainError("TrialPlan: trials must be at least 1");
  if (workers < 1) throw DomainError("TrialPlan: workers must be at least 1");
}

std::vector<TrialOutcome> run_trials(const TrialPlan& plan,
                                     const TrialFunction& trial) {
  plan.validate();
  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(plan.trials));
  auto run_one = [&](std::uint64_t i) {
    try {
      outcomes[i] = trial(i);
    } catch (const NumericalError&) {
      outcomes[i] = TrialOutcome{true, 0.0};
    }
  };

  const int workers = static_cast<int>(
      std::min<std::int64_t>(plan.workers, plan.trials));
  if (workers <= 1) {
    for (std::uint64_t i = 0; i < outcomes.size(); ++i) run_one(i);
    return outcomes;
  }

  constexpr std::uint64_t kChunk = 64;
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      while (true) {
        const std::uint64_t begin = next.fetch_add(kChunk);
        if (begin >= outcomes.size()) break;
        const std::uint64_t end =
            std::min<std::uint64_t>(begin + kChunk, outcomes.size());
        for (std::uint64_t i = begin; i < end; ++i) run_one(i);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next.store(outcomes.size());
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
  return outcomes;
}

std::pair<double, double> wilson_interval(std::int64_t successes,
                                          std::int64_t n, double z) {
  if (n <= 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2 * nn)) / denom;
  const double half =
      z / denom * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn));
  const double lo = std::clamp(std::min(center - half, p), 0.0, 1.0);
  const double hi = std::clamp(std::max(center + half, p), 0.0, 1.0);
  return {lo, hi};
}

Estimate frequency_estimate(const std::vector<TrialOutcome>& outcomes) {
  Estimate e;
  std::int64_t hits = 0;
  for (const auto& o : outcomes) {
    if (o.failed) {
      ++e.trials_failed;
    } else {
      ++e.trials_used;
      if (o.value != 0.0) ++hits;
    }
  }
  if (e.trials_used == 0) return e;
  const double n = static_cast<double>(e.trials_used);
  e.point = static_cast<double>(hits) / n;
  e.std_error = std::sqrt(e.point * (1 - e.point) / n);
  std::tie(e.ci_lo, e.ci_hi) = wilson_interval(hits, e.trials_used);
  return e;
}

Estimate mean_estimate(const std::vector<TrialOutcome>& outcomes) {
  Estimate e;
  CompensatedSum sum;
  for (const auto& o : outcomes) {
    if (o.failed) {
      ++e.trials_failed;
    } else {
      ++e.trials_used;
      sum.add(o.value);
    }
  }
  if (e.trials_used == 0) return e;
  const double n = static_cast<double>(e.trials_used);
  e.point = sum.value() / n;
  CompensatedSum squares;
  for (const auto& o : outcomes) {
    if (!o.failed) squares.add((o.value - e.point) * (o.value - e.point));
  }
  const double variance = e.trials_used > 1 ? squares.value() / (n - 1) : 0.0;
  e.std_error = std::sqrt(variance / n);
  e.ci_lo = e.point - 1.959963984540054 * e.std_error;
  e.ci_hi = e.point + 1.959963984540054 * e.std_error;
  return e;
}

double pooled_std_error(const Estimate& a, const Estimate& b) {
  return std::hypot(a.std_error, b.std_error);
}

double expected_zero_count(int degree, double radius) {
  if (!(radius > 0.0)) throw DomainError("expected_zero_count: radius <= 0");
  const double r2 = radius * radius;
  return degree * r2 / (1.0 + r2);
}

int trial_zero_count(const SU2Polynomial& poly, double radius,
                     const Tolerances& tolerances) {
  if (poly.degree() == 0) return 0;
  const ZeroSet zeros = find_all_roots(poly);
  if (zeros.max_residual() > tolerances.root_residual) {
    throw NumericalError("root residual above tolerance");
  }
  const ZeroCount count =
      count_zeros_from_roots(zeros, Disk(radius), tolerances.boundary_margin);
  if (count.boundary_flags > 0) {
    throw NumericalError("root on the boundary circle");
  }
  return count.count;
}

Estimate estimate_zero_count_mean(const TrialPlan& plan) {
  const auto outcomes = run_trials(plan, [&](std::uint64_t i) {
    const auto poly = sample_polynomial(plan.degree, {plan.master_seed, i});
    return TrialOutcome{
        false,
        static_cast<double>(trial_zero_count(poly, plan.radius, plan.tolerances))};
  });
  return checked(mean_estimate(outcomes), "estimate_zero_count_mean");
}

Estimate estimate_deviation_probability(const TrialPlan& plan,
                                        const DeviationSpec& spec) {
  if (!(spec.delta > 0.0)) throw DomainError("DeviationSpec: delta must be > 0");
  const double expected = expected_zero_count(plan.degree, plan.radius);
  // Xi - expected and delta N are both formed in floating point; the slack
  // absorbs representation error so that e.g. |Xi - 5| >= 0.3 * 10 holds at
  // Xi = 2 as the exact event demands.
  const double threshold = spec.delta * plan.degree * (1.0 - 1e-12);
  const auto outcomes = run_trials(plan, [&](std::uint64_t i) {
    const auto poly = sample_polynomial(plan.degree, {plan.master_seed, i});
    const int xi = trial_zero_count(poly, plan.radius, plan.tolerances);
    return TrialOutcome{false, std::abs(xi - expected) >= threshold ? 1.0 : 0.0};
  });
  return checked(frequency_estimate(outcomes), "estimate_deviation_probability");
}

Estimate estimate_hole_probability(const TrialPlan& plan) {
  const Disk disk(plan.radius);
  const auto outcomes = run_trials(plan, [&](std::uint64_t i) {
    const auto poly = sample_polynomial(plan.degree, {plan.master_seed, i});
    const int count =
        count_zeros_argument_principle(poly, disk, plan.tolerances.boundary_margin)
            .count;
    if (i % 100 == 0 && trial_zero_count(poly, plan.radius, plan.tolerances) != count) {
      throw NumericalError("zero-count oracles disagree");
    }
    return TrialOutcome{false, count == 0 ? 1.0 : 0.0};
  });
  return checked(frequency_estimate(outcomes), "estimate_hole_probability");
}

double omega_lower_bound(int degree, double radius) {
  if (degree < 0) throw DomainError("omega_lower_bound: negative degree");
  if (!(radius > 0.0)) throw DomainError("omega_lower_bound: radius <= 0");
  const auto lb = log_binomial_row(degree);
  const double log_r = std::log(radius);
  double total = -static_cast<double>(degree) * degree;
  for (int j = 1; j <= degree; ++j) {
    // P(|alpha_j| < lambda) = 1 - exp(-lambda^2), lambda^2 = exp(-level).
    const double level = lb[j] + 2.0 * j * log_r;
    double term;
    if (level > 30.0) {
      // ln(1 - e^{-x}) = ln x - x/2 + O(x^2) for tiny x = e^{-level}.
      term = -level - 0.5 * std::exp(-level);
    } else {
      const double x = std::exp(-level);
      term = x < std::log(2.0) ? std::log(-std::expm1(-x))
                               : std::log1p(-std::exp(-x));
    }
    total += term;
  }
  return total;
}

MaxModulusOutliers max_modulus_outlier_frequency(const TrialPlan& plan,
                                                 double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw DomainError("max_modulus_outlier_frequency: delta must be in (0, 1]");
  }
  const double half = plan.degree / 2.0;
  const double center = half * std::log1p(plan.radius * plan.radius);
  const double upper = center + half * std::log1p(delta);
  const bool has_lower = delta < 1.0;
  const double lower = has_lower ? center + half * std::log1p(-delta) : 0.0;
  // Codes: 0 inside the band, 1 below, 2 above.
  const auto outcomes = run_trials(plan, [&](std::uint64_t i) {
    const auto poly = sample_polynomial(plan.degree, {plan.master_seed, i});
    const double log_max = max_modulus_boundary(poly, plan.radius).log_value;
    double code = 0.0;
    if (has_lower && log_max < lower) code = 1.0;
    if (log_max > upper) code = 2.0;
    return TrialOutcome{false, code};
  });
  MaxModulusOutliers out;
  out.any = checked(frequency_estimate(outcomes), "max_modulus_outlier_frequency");
  out.lower = frequency_estimate(indicator(outcomes, 1.0));
  out.upper = frequency_estimate(indicator(outcomes, 2.0));
  return out;
}

Estimate log_l1_outlier_frequency(const TrialPlan& plan) {
  const double bound =
      5.0 * plan.degree * std::log(2.0 * (1.0 + plan.radius * plan.radius));
  const auto outcomes = run_trials(plan, [&](std::uint64_t i) {
    const auto poly = sample_polynomial(plan.degree, {plan.master_seed, i});
    const auto moments = circle_log_moments(poly, plan.radius,
                                            plan.tolerances.quadrature_target);
    return TrialOutcome{false, moments.l1() > bound ? 1.0 : 0.0};
  });
  return checked(frequency_estimate(outcomes), "log_l1_outlier_frequency");
}

Estimate circle_average_lower_tail_frequency(const TrialPlan& plan,
                                             double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw DomainError(
        "circle_average_lower_tail_frequency: delta must be in (0, 1)");
  }
  const double bound = plan.degree / 2.0 *
                       (std::log1p(plan.radius * plan.radius) + std::log1p(-delta));
  const auto outcomes = run_trials(plan, [&](std::uint64_t i) {
    const auto poly = sample_polynomial(plan.degree, {plan.master_seed, i});
    const double average = circle_log_integral(poly, plan.radius,
                                               plan.tolerances.quadrature_target);
    return TrialOutcome{false, average < bound ? 1.0 : 0.0};
  });
  return checked(frequency_estimate(outcomes),
                 "circle_average_lower_tail_frequency");
}

DecayFit fit_decay_exponent(std::vector<DecayPoint> points) {
  if (points.size() < 3) {
    throw DomainError("fit_decay_exponent: need at least 3 points, got " +
                      std::to_string(points.size()));
  }
  const double n = static_cast<double>(points.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (const auto& p : points) {
    if (!std::isfinite(p.log_prob)) {
      throw DomainError("fit_decay_exponent: non-finite log probability");
    }
    mean_x += static_cast<double>(p.degree) * p.degree;
    mean_y += p.log_prob;
  }
  mean_x /= n;
  mean_y /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : points) {
    const double dx = static_cast<double>(p.degree) * p.degree - mean_x;
    const double dy = p.log_prob - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) {
    throw DomainError("fit_decay_exponent: all points share the same N");
  }
  DecayFit fit;
  const double slope = sxy / sxx;
  fit.c_hat = -slope;
  fit.intercept = mean_y - slope * mean_x;
  double residual = 0.0;
  for (const auto& p : points) {
    const double x = static_cast<double>(p.degree) * p.degree;
    const double e = p.log_prob - (fit.intercept + slope * x);
    residual += e * e;
  }
  fit.r_squared = syy == 0.0 ? 1.0 : std::clamp(1.0 - residual / syy, 0.0, 1.0);
  fit.points = std::move(points);
  return fit;
}

}  // namespace su2lab
