// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit status if
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "su2lab/core_model.hpp"
#include "su2lab/monte_carlo.hpp"
#include "su2lab/zero_analysis.hpp"

using namespace su2lab;
using cd = std::complex<double>;

namespace {

struct Verdict {
  bool passed = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Verdict()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!v.passed) ++failures;
  std::printf("[%s] %2d %s: %s (%.1f s)\n", v.passed ? "PASS" : "FAIL", id, title.c_str(),
              v.detail.c_str(), seconds);
  std::fflush(stdout);
}

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof buffer, format, args...);
  return buffer;
}

TrialPlan plan(int n, double r, std::int64_t trials, std::uint64_t seed) {
  TrialPlan p;
  p.degree = n;
  p.radius = r;
  p.trials = trials;
  p.master_seed = seed;
  p.workers = 1;
  return p;
}

double exact_log_binomial(int n, int k) {
  boost::multiprecision::cpp_int value = 1;
  for (int i = 1; i <= k; ++i) value = value * (n - k + i) / i;
  int shift = 0;
  while (value >= (boost::multiprecision::cpp_int(1) << 60)) {
    value >>= 1;
    ++shift;
  }
  return std::log(value.convert_to<double>()) + shift * std::numbers::ln2;
}

double min_distance_to_circle(const ZeroSet& zeros, double r) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& root : zeros.roots) d = std::min(d, std::abs(std::abs(root.location) - r));
  return d;
}

// Largest distance after matching each point of `a` to its nearest unused
// point of `b`, closest pairs first.
double match_distance(const std::vector<cd>& a, std::vector<cd> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) pairs.emplace_back(std::abs(a[i] - b[j]), i, j);
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<bool> used_a(a.size()), used_b(b.size());
  double worst = 0;
  for (const auto& [d, i, j] : pairs) {
    if (used_a[i] || used_b[j]) continue;
    used_a[i] = used_b[j] = true;
    worst = std::max(worst, d);
  }
  return worst;
}

std::string capture(const std::string& command) {
  std::string out;
  FILE* pipe = popen((command + " 2>/dev/null").c_str(), "r");
  if (!pipe) return out;
  char buffer[4096];
  std::size_t n;
  while ((n = std::fread(buffer, 1, sizeof buffer, pipe)) > 0) out.append(buffer, n);
  const int status = pclose(pipe);
  if (status != 0) out = "<exit " + std::to_string(status) + ">";
  return out;
}

}  // namespace

int main() {
  report(1, "expected zero count", [] {
    const auto start = std::chrono::steady_clock::now();
    const auto a = estimate_zero_count_mean(plan(10, 1.0, 2000, 1));
    const auto b = estimate_zero_count_mean(plan(20, 0.5, 2000, 1));
    const double t = elapsed_since(start);
    const bool ok_a = std::abs(a.point - 5.0) <= 3 * a.std_error;
    const bool ok_b = std::abs(b.point - 4.0) <= 3 * b.std_error;
    return Verdict{ok_a && ok_b && t < 60,
                   fmt("N=10 r=1 mean %.4f se %.4f (target 5); N=20 r=0.5 mean %.4f se %.4f "
                       "(target 4); %.1f s < 60 s",
                       a.point, a.std_error, b.point, b.std_error, t)};
  });

  report(2, "degree-1 hole probability", [] {
    // The single root -alpha_0/alpha_1 avoids B(0, r) iff E0 >= r^2 E1 for
    // independent Exp(1) variables E = |alpha|^2:
    //   P = \int_0^inf e^{-x} e^{-r^2 x} dx = 1/(1 + r^2).
    const double r = 1.0;
    const double oracle = 1.0 / (1.0 + r * r);
    const auto start = std::chrono::steady_clock::now();
    const auto e = estimate_hole_probability(plan(1, r, 100000, 2));
    const double t = elapsed_since(start);
    return Verdict{std::abs(e.point - oracle) <= 3 * e.std_error && t < 10,
                   fmt("estimate %.5f se %.5f oracle %.5f; %.1f s < 10 s", e.point,
                       e.std_error, oracle, t)};
  });

  report(3, "Jensen identity", [] {
    const auto start = std::chrono::steady_clock::now();
    int used = 0, skipped = 0;
    double worst = 0;
    for (std::uint64_t t = 0; used < 100; ++t) {
      const int n = 1 + int(t % 50);
      const auto p = sample_polynomial(n, {3, t});
      if (min_distance_to_circle(find_all_roots(p), 1.0) < 1e-3) {
        ++skipped;
        continue;
      }
      try {
        worst = std::max(worst, jensen_residual(p, 1.0));
      } catch (const DomainError&) {
        ++skipped;
        continue;
      }
      ++used;
    }
    const double t = elapsed_since(start);
    return Verdict{worst <= 1e-6 && t < 60,
                   fmt("%d polynomials (%d excluded), max residual %.3g <= 1e-6; %.1f s < 60 s",
                       used, skipped, worst, t)};
  });

  report(4, "orthonormality", [] {
    const int n = 10;
    double gram = 0;
    for (int j = 0; j <= n; ++j) {
      for (int k = 0; k <= n; ++k) {
        SU2Polynomial::Coefficients ej = SU2Polynomial::Coefficients::Zero(n + 1);
        SU2Polynomial::Coefficients ek = SU2Polynomial::Coefficients::Zero(n + 1);
        ej[j] = 1;
        ek[k] = 1;
        gram = std::max(gram, std::abs(fs_inner_product(SU2Polynomial(ej), SU2Polynomial(ek), n) -
                                       cd(j == k ? 1.0 : 0.0)));
      }
    }
    double beta = 0;
    for (int m = 0; m <= 40; ++m) {
      for (int j = 0; j <= m; ++j) {
        SU2Polynomial::Coefficients c = SU2Polynomial::Coefficients::Zero(j + 1);
        c[j] = 1;
        const SU2Polynomial mono(c);
        const double oracle = std::exp(-exact_log_binomial(m, j));
        beta = std::max(beta, std::abs(fs_inner_product(mono, mono, m).real() - oracle) / oracle);
      }
    }
    return Verdict{gram <= 1e-10 && beta <= 1e-10,
                   fmt("Gram deviation %.3g at N=10; Beta relative deviation %.3g for N<=40 "
                       "(both <= 1e-10)",
                       gram, beta)};
  });

  report(5, "basis-change identity", [] {
    const CounterStream stream({5, 12345});
    std::vector<cd> points;
    for (int k = 0; k < 20; ++k) {
      points.push_back(std::polar(2.0 * std::sqrt(stream.uniform_open1(2 * k)),
                                  2 * std::numbers::pi * stream.uniform_open1(2 * k + 1)));
    }
    double residual = 0, unitarity = 0;
    for (int n = 0; n <= 30; ++n) {
      for (cd zeta : {cd(0.5), cd(0.7, 0.2)}) {
        const auto p = sample_polynomial(n, {5, std::uint64_t(n)});
        residual = std::max(residual, basis_change_identity_residual<double>(p, zeta, points));
        const auto u = basis_change_matrix(n, zeta).matrix;
        unitarity = std::max(
            unitarity,
            (u.adjoint() * u - ComplexMatrix<double>::Identity(n + 1, n + 1)).cwiseAbs().maxCoeff());
      }
    }
    return Verdict{residual <= 1e-8 && unitarity <= 1e-10,
                   fmt("max relative residual %.3g <= 1e-8; max |U*U - I| %.3g <= 1e-10",
                       residual, unitarity)};
  });

  report(6, "reversal duality", [] {
    double worst = 0;
    for (std::uint64_t t = 0; t < 100; ++t) {
      const int n = 1 + int(t % 30);
      const auto p = sample_polynomial(n, {6, t});
      std::vector<cd> inverted, reversed;
      for (const auto& root : find_all_roots(p).roots) inverted.push_back(1.0 / root.location);
      for (const auto& root : find_all_roots(reverse_coefficients(p)).roots) {
        reversed.push_back(root.location);
      }
      worst = std::max(worst, match_distance(inverted, reversed));
    }
    return Verdict{worst <= 1e-8,
                   fmt("100 instances, max matched distance %.3g <= 1e-8", worst)};
  });

  report(7, "cross-oracle zero counting", [] {
    const double radii[] = {0.5, 1.0, 2.0};
    int used = 0, skipped = 0, mismatches = 0;
    for (std::uint64_t t = 0; used < 200; ++t) {
      const int n = 1 + int(t % 50);
      const double r = radii[t % 3];
      const auto p = sample_polynomial(n, {7, t});
      const auto zeros = find_all_roots(p);
      if (min_distance_to_circle(zeros, r) < 1e-6) {
        ++skipped;
        continue;
      }
      const Disk disk(r);
      if (count_zeros_argument_principle(p, disk).count !=
          count_zeros_from_roots(zeros, disk).count) {
        ++mismatches;
      }
      ++used;
    }
    return Verdict{mismatches == 0, fmt("%d instances (%d boundary-adjacent excluded), %d "
                                        "mismatches",
                                        used, skipped, mismatches)};
  });

  report(8, "Omega lower bound", [] {
    const double exact = std::exp(-1.0) * (1 - std::exp(-1.0));
    const double a = std::abs(std::exp(omega_lower_bound(1, 1.0)) - exact);

    int violations = 0, tested = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    // Points where holes are common enough (about 2e-2 or more) for 2e4
    // trials to resolve them; elsewhere the estimate is 0 with a zero
    // standard error and the comparison carries no information.
    const std::pair<int, double> grid[] = {{1, 0.5}, {1, 1.0}, {1, 1.5}, {2, 0.5},
                                           {2, 1.0}, {2, 1.5}, {3, 0.5}, {3, 1.0},
                                           {4, 0.5}, {6, 0.5}, {8, 0.5}};
    for (const auto& [n, r] : grid) {
      const auto e = estimate_hole_probability(plan(n, r, 20000, 8));
      const double margin = e.point + 3 * e.std_error - std::exp(omega_lower_bound(n, r));
      worst_margin = std::min(worst_margin, margin);
      violations += margin < 0;
      ++tested;
    }

    bool rates_ok = true;
    double lo_rate = 1e9, hi_excess = -1e9;
    std::vector<DecayPoint> curve;
    for (int n = 10; n <= 50; ++n) {
      const double log_p = omega_lower_bound(n, 1.0);
      const double rate = -log_p / (double(n) * n);
      const double upper = 1 + std::log(2.0) + 1.0 / (12 * n) + 0.01;
      rates_ok = rates_ok && rate >= 1.0 && rate <= upper;
      lo_rate = std::min(lo_rate, rate);
      hi_excess = std::max(hi_excess, rate - upper);
      curve.push_back({n, log_p});
    }
    const auto fit = fit_decay_exponent(curve);
    const bool ok = a <= 1e-12 && violations == 0 && rates_ok && fit.r_squared >= 0.999;
    return Verdict{ok, fmt("(a) |P - e^-1(1-e^-1)| = %.3g; (b) %d/%d grid points with MC + "
                           "3se >= bound (min margin %.3g); (c) rates in [%.4f, upper %+.4f], "
                           "fit c=%.4f R^2=%.6f",
                           a, tested - violations, tested, worst_margin, lo_rate, hi_excess,
                           fit.c_hat, fit.r_squared)};
  });

  report(9, "decay-law scaling", [] {
    // The N = 16 hole probability is about 3e-6, so that point needs many
    // more than the minimum 1e5 trials to register a handful of events.
    const std::pair<int, std::int64_t> grid[] = {
        {4, 100000}, {8, 100000}, {12, 200000}, {16, 4000000}};
    const auto start = std::chrono::steady_clock::now();
    std::vector<DecayPoint> points;
    std::string estimates;
    for (const auto& [n, trials] : grid) {
      const auto e = estimate_hole_probability(plan(n, 0.5, trials, 9));
      estimates += fmt("N=%d p=%.3g (%lld trials) ", n, e.point, (long long)trials);
      if (e.point > 0) points.push_back({n, std::log(e.point)});
    }
    const double t = elapsed_since(start);
    if (points.size() < 4) {
      return Verdict{false, estimates + "- a zero estimate leaves the fit undefined"};
    }
    const auto fit = fit_decay_exponent(points);
    return Verdict{fit.r_squared >= 0.9 && t < 600,
                   estimates + fmt("-> c=%.4f R^2=%.4f >= 0.9; %.0f s < 600 s", fit.c_hat,
                                   fit.r_squared, t)};
  });

  report(10, "concentration trends", [] {
    const std::int64_t trials = 10000;
    const std::pair<int, int> pairs[] = {{10, 20}, {6, 12}};
    auto family = [&](const char* name, auto&& estimate) {
      bool any_pair = false;
      std::string text = std::string(name) + ":";
      for (const auto& [small, large] : pairs) {
        const Estimate a = estimate(small), b = estimate(large);
        const double gap = a.point - b.point;
        const double se = pooled_std_error(a, b);
        const bool ok = b.point < a.point && gap >= 2 * se;
        any_pair = any_pair || ok;
        text += fmt(" %d->%d %.4g->%.4g (gap %.3g, 2se %.3g)%s", small, large, a.point,
                    b.point, gap, 2 * se, ok ? "" : " x");
      }
      return std::pair{any_pair, text};
    };
    const auto [maxmod_ok, maxmod] = family("max-modulus d=0.5", [&](int n) {
      return max_modulus_outlier_frequency(plan(n, 1.0, trials, 10), 0.5).any;
    });
    const auto [circle_ok, circle] = family("circle-average D=0.5", [&](int n) {
      return circle_average_lower_tail_frequency(plan(n, 1.0, trials, 10), 0.5);
    });
    const auto [deviation_ok, deviation] = family("deviation D=0.3", [&](int n) {
      return estimate_deviation_probability(plan(n, 1.0, trials, 10), {0.3});
    });
    const auto n50 = max_modulus_outlier_frequency(plan(50, 1.0, trials, 10), 0.5).any;
    const bool n50_ok = n50.point < 0.05;
    return Verdict{maxmod_ok && circle_ok && deviation_ok && n50_ok,
                   maxmod + "; " + circle + "; " + deviation +
                       fmt("; max-modulus N=50 %.4g < 0.05%s", n50.point, n50_ok ? "" : " x")};
  });

  report(11, "determinism", [] {
    const std::string cli = SU2LAB_CLI_PATH;
    const std::vector<std::string> commands = {
        "sample -N 8 --seed 11 --trial 4",
        "roots -N 20 --seed 11",
        "count -N 20 -r 1 --seed 11 --trial 2",
        "mean-zeros -r 1 --grid 5,10 --trials 2000 --seed 11",
        "deviation -r 1 --delta 0.3 --grid 6,12 --trials 2000 --seed 11",
        "hole -r 0.5 --grid 2,4,6 --trials 5000 --seed 11",
        "omega-bound -r 1 --grid 10,20,30,40,50",
        "fit-decay -r 0.5 --grid 2,3,4,5 --trials 5000 --seed 11",
        "fit-decay -r 1 --omega --grid 10,20,30",
        "verify --seed 11",
        "orthonormality --grid 5,10,20",
    };
    int identical = 0, total = 0;
    std::string differing;
    for (const auto& command : commands) {
      for (const char* format : {"csv", "json"}) {
        const std::string base = cli + " " + command + " --format " + format;
        const auto a = capture(base + " --workers 1");
        const auto b = capture(base + " --workers 1");
        const auto c = capture(base + " --workers 4");
        const bool same = !a.empty() && a[0] != '<' && a == b && a == c;
        identical += same;
        ++total;
        if (!same) differing += " [" + command + " " + format + "]";
      }
    }
    return Verdict{identical == total,
                   fmt("%d/%d command lines byte-identical across reruns and --workers 1/4",
                       identical, total) +
                       differing};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
