#include "su2lab/zero_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace su2lab {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();

struct NewtonStep {
  cd ratio;               // p(z) / p'(z)
  double backward_error;  // |p(z)| / sum |q_k| |z|^k
};

// Newton ratio for q(z) = sum_k q_k z^k. For |z| > 1 the reversed
// polynomial is evaluated at 1/z so that no power of z can overflow.
NewtonStep newton_step(const std::vector<cd>& q, cd z) {
  const int m = static_cast<int>(q.size()) - 1;
  if (std::abs(z) <= 1.0) {
    cd p = q[m], dp = 0;
    double bound = std::abs(q[m]);
    const double az = std::abs(z);
    for (int k = m - 1; k >= 0; --k) {
      dp = dp * z + p;
      p = p * z + q[k];
      bound = bound * az + std::abs(q[k]);
    }
    return {p / dp, std::abs(p) / bound};
  }
  const cd y = 1.0 / z;
  const double ay = std::abs(y);
  cd r = q[0], dr = 0;
  double bound = std::abs(q[0]);
  for (int k = 1; k <= m; ++k) {
    dr = dr * y + r;
    r = r * y + q[k];
    bound = bound * ay + std::abs(q[k]);
  }
  // p(z) = z^m r(y), p'(z) = z^{m-1} (m r(y) - y r'(y))
  return {z * r / (static_cast<double>(m) * r - y * dr), std::abs(r) / bound};
}

// Starting points on circles whose radii come from the upper convex hull of
// (k, log|q_k|).
std::vector<cd> initial_guesses(const std::vector<cd>& q) {
  const int m = static_cast<int>(q.size()) - 1;
  std::vector<int> hull;
  std::vector<double> logs(m + 1);
  for (int k = 0; k <= m; ++k) {
    logs[k] = q[k] == cd(0) ? -std::numeric_limits<double>::infinity()
                            : std::log(std::abs(q[k]));
  }
  for (int k = 0; k <= m; ++k) {
    if (!std::isfinite(logs[k])) continue;
    while (hull.size() >= 2) {
      const int a = hull[hull.size() - 2], b = hull.back();
      // Drop b unless it lies strictly above the chord a-k.
      const double cross = (b - a) * (logs[k] - logs[a]) -
                           (k - a) * (logs[b] - logs[a]);
      if (cross >= 0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(k);
  }
  constexpr double kOffset = 0.7;
  std::vector<cd> guesses;
  guesses.reserve(m);
  for (std::size_t i = 0; i + 1 < hull.size(); ++i) {
    const int lo = hull[i], hi = hull[i + 1];
    const int count = hi - lo;
    const double radius = std::exp((logs[lo] - logs[hi]) / count);
    for (int j = 0; j < count; ++j) {
      const double angle = 2 * kPi * j / count + 2 * kPi * i / m + kOffset;
      guesses.push_back(std::polar(radius, angle));
    }
  }
  return guesses;
}

}  // namespace

double ZeroSet::max_residual() const noexcept {
  double worst = 0.0;
  for (const auto& root : roots) worst = std::max(worst, root.residual);
  return worst;
}

Disk::Disk(double radius, std::complex<double> center)
    : center_(center), radius_(radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw DomainError("Disk radius must be positive and finite");
  }
}

ZeroSet find_all_roots(const SU2Polynomial& poly,
                       const RootFinderOptions& options) {
  const int n = poly.degree();
  if (n < 1) throw DomainError("find_all_roots: degree must be at least 1");

  const auto lb = log_binomial_row(n);
  std::vector<double> log_weight(n + 1);
  double top = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= n; ++k) {
    const double a = std::abs(poly[k]);
    log_weight[k] = a == 0.0 ? -std::numeric_limits<double>::infinity()
                             : std::log(a) + lb[k] / 2;
    top = std::max(top, log_weight[k]);
  }
  if (!std::isfinite(top)) {
    throw DomainError("find_all_roots: polynomial is identically zero");
  }
  std::vector<cd> scaled(n + 1);
  for (int k = 0; k <= n; ++k) {
    scaled[k] = poly[k] == cd(0) ? cd(0)
                                 : poly[k] / std::abs(poly[k]) *
                                       std::exp(log_weight[k] - top);
  }

  // Truncation is judged on alpha itself, the coordinates in the orthonormal
  // basis: the weighted leading coefficient of a generic sample is already
  // ~2^{-N/2} times the largest one.
  const double largest = poly.coefficients().cwiseAbs().maxCoeff();
  int lead = n;
  while (lead > 0 && std::abs(poly[lead]) < options.truncation * largest) --lead;
  int low = 0;
  while (scaled[low] == cd(0)) ++low;

  ZeroSet result;
  result.degree_deficit = n - lead;
  for (int k = 0; k < low; ++k) result.roots.push_back({cd(0), 0.0});

  const std::vector<cd> q(scaled.begin() + low, scaled.begin() + lead + 1);
  const int m = static_cast<int>(q.size()) - 1;
  std::vector<cd> z;
  if (m == 1) {
    z.push_back(-q[0] / q[1]);
  } else if (m > 1) {
    z = initial_guesses(q);
    std::vector<char> done(m, 0);
    int remaining = m;
    for (int sweep = 0; sweep < options.max_sweeps && remaining > 0; ++sweep) {
      for (int i = 0; i < m; ++i) {
        if (done[i]) continue;
        const NewtonStep step = newton_step(q, z[i]);
        if (step.backward_error <= 4 * kEps * (m + 1)) {
          done[i] = 1;
          --remaining;
          continue;
        }
        cd repulsion = 0;
        for (int j = 0; j < m; ++j) {
          if (j != i) repulsion += 1.0 / (z[i] - z[j]);
        }
        cd correction = step.ratio / (1.0 - step.ratio * repulsion);
        if (!std::isfinite(correction.real()) ||
            !std::isfinite(correction.imag())) {
          correction = step.ratio;
        }
        z[i] -= correction;
        if (std::abs(correction) < options.step_tolerance * (1 + std::abs(z[i]))) {
          done[i] = 1;
          --remaining;
        }
      }
    }
    if (remaining > 0) {
      std::vector<int> unconverged;
      for (int i = 0; i < m; ++i) {
        if (!done[i]) unconverged.push_back(i + low);
      }
      throw ConvergenceError("find_all_roots: " + std::to_string(remaining) +
                                 " roots unconverged after " +
                                 std::to_string(options.max_sweeps) + " sweeps",
                             std::move(unconverged));
    }
    for (auto& root : z) {
      for (int polish = 0; polish < 2; ++polish) {
        const NewtonStep here = newton_step(q, root);
        if (!std::isfinite(here.ratio.real()) ||
            !std::isfinite(here.ratio.imag())) {
          break;
        }
        const cd candidate = root - here.ratio;
        if (newton_step(q, candidate).backward_error <= here.backward_error) {
          root = candidate;
        }
      }
    }
  }
  for (const auto& root : z) {
    result.roots.push_back({root, std::abs(evaluate_normalized(poly, root))});
  }
  return result;
}

ZeroCount count_zeros_from_roots(const ZeroSet& zeros, const Disk& disk,
                                 double boundary_margin) {
  ZeroCount result{0, CountMethod::from_roots, 0};
  for (const auto& root : zeros.roots) {
    const double distance = std::abs(root.location - disk.center());
    if (distance < disk.radius()) ++result.count;
    if (std::abs(distance - disk.radius()) < boundary_margin) {
      ++result.boundary_flags;
    }
  }
  return result;
}

ZeroCount count_zeros_argument_principle(const SU2Polynomial& poly,
                                         const Disk& disk,
                                         double boundary_margin) {
  const int n = poly.degree();
  const double norm = poly.coefficients().norm();
  if (norm == 0.0) {
    throw DomainError("count_zeros_argument_principle: zero polynomial");
  }
  if (n == 0) return {0, CountMethod::argument_principle, 0};

  const bool centered = disk.center() == cd(0);
  const CircleEvaluator<double> circle(poly, centered ? disk.radius() : 0.0);
  auto value = [&](double theta) {
    if (centered) return circle.at(theta);
    return evaluate_normalized(poly,
                               disk.center() + std::polar(disk.radius(), theta));
  };
  // A zero at distance d from the contour leaves |psi_N| of order
  // d * |psi_N'|, and |psi_N'| is at most of order (N + 1) ||alpha||.
  const double floor = boundary_margin * norm * (n + 1);
  auto check = [&](cd v) {
    if (std::norm(v) < floor * floor) {
      throw ContourSingularityError(
          "count_zeros_argument_principle: zero on or near the contour");
    }
  };

  constexpr int kMaxDepth = 20;
  auto increment = [&](auto&& self, double a, cd va, double b, cd vb,
                       int depth) -> double {
    // arg(vb / va) without a complex division
    const double delta =
        std::atan2(va.real() * vb.imag() - va.imag() * vb.real(),
                   va.real() * vb.real() + va.imag() * vb.imag());
    if (std::abs(delta) <= kPi / 2) return delta;
    if (depth == kMaxDepth) {
      throw ContourSingularityError(
          "count_zeros_argument_principle: phase jump irreducible near the "
          "contour");
    }
    const double mid = (a + b) / 2;
    const cd vm = value(mid);
    check(vm);
    return self(self, a, va, mid, vm, depth + 1) +
           self(self, mid, vm, b, vb, depth + 1);
  };

  const int samples = 16 * (n + 1);
  const double h = 2 * kPi / samples;
  // Unit roots are reused across calls with the same sample count.
  thread_local std::vector<cd> unit;
  if (static_cast<int>(unit.size()) != samples) {
    unit.resize(samples);
    for (int k = 0; k < samples; ++k) unit[k] = std::polar(1.0, k * h);
  }
  std::vector<cd> v(samples);
  for (int k = 0; k < samples; ++k) {
    v[k] = centered ? circle.at_unit(unit[k]) : value(k * h);
    check(v[k]);
  }
  double total = 0.0;
  for (int k = 0; k < samples; ++k) {
    const int next = (k + 1) % samples;
    total += increment(increment, k * h, v[k], (k + 1) * h, v[next], 0);
  }
  const double winding = total / (2 * kPi);
  const double rounded = std::round(winding);
  if (std::abs(winding - rounded) > 0.01) {
    throw ContourSingularityError(
        "count_zeros_argument_principle: winding number " +
        std::to_string(winding) + " not certified");
  }
  return {static_cast<int>(rounded), CountMethod::argument_principle, 0};
}

CircleLogMoments circle_log_moments(const SU2Polynomial& poly, double radius,
                                    double tolerance, double l1_tolerance) {
  if (!(radius > 0.0)) throw DomainError("circle_log_moments: radius <= 0");
  if (poly.coefficients().norm() == 0.0) {
    throw DomainError("circle_log_moments: zero polynomial");
  }
  const int n = poly.degree();
  const CircleEvaluator<double> circle(poly, radius);
  const double shift = circle.log_normalization();

  CircleLogMoments out;
  if (n == 0) {
    out.mean = std::log(std::abs(poly[0]));
    out.positive = std::max(out.mean, 0.0);
    out.negative = std::max(-out.mean, 0.0);
    out.nodes = 1;
    return out;
  }

  constexpr int kMaxNodes = 1 << 20;
  constexpr int kSubsamples = 16;
  auto log_at = [&](double theta, double spacing) {
    const double a = std::abs(circle.at(theta));
    if (a >= 1e-290) return std::log(a) + shift;
    // Underflow next to a zero: average over a local subdivision instead.
    double sum = 0.0;
    for (int k = 0; k < kSubsamples; ++k) {
      const double t = theta + spacing * ((k + 0.5) / kSubsamples - 0.5);
      sum += std::log(std::max(std::abs(circle.at(t)), 1e-300));
    }
    return sum / kSubsamples + shift;
  };

  double sum = 0.0, sum_pos = 0.0, sum_neg = 0.0;
  auto add = [&](double value) {
    sum += value;
    if (value > 0) {
      sum_pos += value;
    } else {
      sum_neg -= value;
    }
  };

  int nodes = 64;
  while (nodes < 4 * (n + 1)) nodes *= 2;
  for (int k = 0; k < nodes; ++k) add(log_at(2 * kPi * k / nodes, 2 * kPi / nodes));
  double mean = sum / nodes;
  double l1 = (sum_pos + sum_neg) / nodes;
  while (true) {
    if (nodes >= kMaxNodes) {
      throw AccuracyError("circle_log_moments: node cap reached", mean,
                          std::numeric_limits<double>::infinity());
    }
    const int refined = 2 * nodes;
    const double spacing = 2 * kPi / refined;
    for (int k = 1; k < refined; k += 2) add(log_at(k * spacing, spacing));
    const double next_mean = sum / refined;
    const double next_l1 = (sum_pos + sum_neg) / refined;
    const double gap = std::abs(next_mean - mean);
    const bool l1_ok = l1_tolerance <= 0.0 ||
                       std::abs(next_l1 - l1) < l1_tolerance * (1 + next_l1);
    nodes = refined;
    if (gap < tolerance && l1_ok) {
      mean = next_mean;
      break;
    }
    if (nodes >= kMaxNodes) {
      throw AccuracyError("circle_log_moments: node cap reached", next_mean,
                          gap);
    }
    mean = next_mean;
    l1 = next_l1;
  }
  out.mean = mean;
  out.positive = sum_pos / nodes;
  out.negative = sum_neg / nodes;
  out.nodes = nodes;
  return out;
}

double circle_log_integral(const SU2Polynomial& poly, double radius,
                           double tolerance) {
  return circle_log_moments(poly, radius, tolerance, 0.0).mean;
}

double jensen_residual(const SU2Polynomial& poly, double radius) {
  const double largest = poly.coefficients().cwiseAbs().maxCoeff();
  if (!(std::abs(poly[0]) > 1e-12 * largest)) {
    throw DomainError("jensen_residual: psi(0) vanishes");
  }
  double inside = 0.0;
  if (poly.degree() >= 1) {
    for (const auto& root : find_all_roots(poly).roots) {
      const double a = std::abs(root.location);
      if (a < radius) inside += std::log(radius / a);
    }
  }
  return std::abs(std::log(std::abs(poly[0])) + inside -
                  circle_log_integral(poly, radius));
}

MaxModulus max_modulus_boundary(const SU2Polynomial& poly, double radius) {
  if (!(radius > 0.0)) throw DomainError("max_modulus_boundary: radius <= 0");
  const int n = poly.degree();
  const CircleEvaluator<double> circle(poly, radius);
  auto modulus = [&](double theta) { return std::abs(circle.at(theta)); };

  const int samples = 8 * (n + 1);
  const double h = 2 * kPi / samples;
  std::vector<double> values(samples);
  for (int k = 0; k < samples; ++k) values[k] = modulus(k * h);

  std::vector<int> peaks;
  for (int k = 0; k < samples; ++k) {
    const double prev = values[(k + samples - 1) % samples];
    const double next = values[(k + 1) % samples];
    if (values[k] >= prev && values[k] >= next) peaks.push_back(k);
  }
  std::sort(peaks.begin(), peaks.end(),
            [&](int a, int b) { return values[a] > values[b]; });
  if (peaks.size() > 3) peaks.resize(3);

  double best = values[peaks.front()];
  double best_theta = peaks.front() * h;
  constexpr double kInvPhi = 0.6180339887498949;
  for (int k : peaks) {
    // Golden-section search for the maximum on [theta - h, theta + h].
    double a = (k - 1) * h, b = (k + 1) * h;
    double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
    double fc = modulus(c), fd = modulus(d);
    while (b - a > 1e-10) {
      if (fc > fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - kInvPhi * (b - a);
        fc = modulus(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + kInvPhi * (b - a);
        fd = modulus(d);
      }
    }
    const double theta = (a + b) / 2;
    const double value = modulus(theta);
    if (value > best) {
      best = value;
      best_theta = theta;
    }
  }

  MaxModulus out;
  out.log_value = std::log(best) + circle.log_normalization();
  if (out.log_value < std::log(std::numeric_limits<double>::max())) {
    out.value = std::exp(out.log_value);
  }
  out.argmax = std::polar(radius, best_theta);
  return out;
}

double poisson_kernel(std::complex<double> zeta, std::complex<double> z,
                      double radius) {
  if (!(radius > 0.0)) throw DomainError("poisson_kernel: radius <= 0");
  if (!(std::abs(zeta) < radius)) {
    throw DomainError("poisson_kernel: |zeta| must be below the radius");
  }
  if (std::abs(std::abs(z) - radius) > 1e-12 * radius) {
    throw DomainError("poisson_kernel: z must lie on the circle |z| = r");
  }
  return (radius * radius - std::norm(zeta)) / std::norm(z - zeta);
}

double poisson_partition_deviation(int m, double kappa, double radius,
                                   double perturbation) {
  if (m < 1) throw DomainError("poisson_partition_deviation: m < 1");
  if (!(radius > 0.0) || !(kappa >= 0.0 && kappa < 1.0) ||
      !(perturbation >= 0.0) || !(kappa * radius + perturbation < radius)) {
    throw DomainError(
        "poisson_partition_deviation: need kappa in [0, 1), perturbation >= 0 "
        "and kappa r + perturbation < r");
  }
  const double rho = kappa * radius + perturbation;
  if (rho == 0.0) return 0.0;  // every zeta_j at the center, P == 1
  std::vector<cd> zeta(m);
  for (int j = 0; j < m; ++j) {
    zeta[j] = std::polar(rho, 2 * kPi * (j + 0.5) / m);
  }
  constexpr int kAngles = 1 << 14;
  double worst = 0.0;
  for (int k = 0; k < kAngles; ++k) {
    const cd z = std::polar(radius, 2 * kPi * k / kAngles);
    double sum = 0.0;
    for (const auto& point : zeta) {
      sum += (radius * radius - std::norm(point)) / std::norm(z - point) - 1.0;
    }
    worst = std::max(worst, std::abs(sum / m));
  }
  return worst;
}

}  // namespace su2lab
