#include "su2lab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "su2lab/monte_carlo.hpp"
#include "su2lab/records.hpp"
#include "su2lab/verify.hpp"

namespace su2lab {

namespace {

#ifndef SU2LAB_VERSION
#define SU2LAB_VERSION "0.0.0"
#endif

struct Args {
  int degree = 10;
  double radius = 1.0;
  std::int64_t trials = 1000;
  std::uint64_t seed = 1;
  std::uint64_t trial = 0;
  int workers = 1;
  std::optional<double> delta;
  std::vector<int> grid;
  std::string format = "csv";
  std::string out_path;
  std::string input;
  bool omega = false;
  bool provenance = false;
  Tolerances tolerances;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum Flag : unsigned {
  kDegree = 1u << 0,
  kRadius = 1u << 1,
  kTrials = 1u << 2,
  kSeed = 1u << 3,
  kDelta = 1u << 5,
  kGrid = 1u << 6,
  kTrialIndex = 1u << 7,
  kTolerances = 1u << 8,
};

void add_options(CLI::App& sub, Args& a, unsigned flags) {
  if (flags & kDegree) {
    sub.add_option("-N,--degree", a.degree, "polynomial degree N")
        ->check(CLI::NonNegativeNumber);
  }
  if (flags & kRadius) {
    sub.add_option("-r,--radius", a.radius, "disk radius r")
        ->check(CLI::PositiveNumber);
  }
  if (flags & kTrials) {
    sub.add_option("--trials", a.trials, "Monte Carlo trials")
        ->check(CLI::PositiveNumber);
  }
  if (flags & kSeed) sub.add_option("--seed", a.seed, "master seed");
  if (flags & kTrialIndex) {
    sub.add_option("--trial", a.trial, "trial index within the seed's stream");
  }
  if (flags & kDelta) {
    sub.add_option("--delta", a.delta, "deviation size delta")
        ->check(CLI::PositiveNumber);
  }
  if (flags & kGrid) {
    sub.add_option("--grid", a.grid, "comma-separated degrees N1,N2,...")
        ->delimiter(',')
        ->check(CLI::NonNegativeNumber);
  }
  if (flags & kTolerances) {
    sub.add_option("--root-residual", a.tolerances.root_residual)
        ->check(CLI::PositiveNumber);
    sub.add_option("--boundary-margin", a.tolerances.boundary_margin)
        ->check(CLI::PositiveNumber);
    sub.add_option("--quadrature-target", a.tolerances.quadrature_target)
        ->check(CLI::PositiveNumber);
  }
  // Accepted everywhere so any command line can be rerun with a different
  // worker count; single-sample commands ignore it.
  sub.add_option("--workers", a.workers,
                 "worker threads (default: $SU2LAB_WORKERS, else hardware)")
      ->envname("SU2LAB_WORKERS")
      ->check(CLI::PositiveNumber);
  sub.add_option("--format", a.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  sub.add_option("--out", a.out_path, "write data to PATH instead of stdout");
  sub.add_flag("--provenance", a.provenance,
               "include workers, wall time and timestamp in JSON output");
}

std::vector<int> degrees(const Args& a) {
  return a.grid.empty() ? std::vector<int>{a.degree} : a.grid;
}

TrialPlan plan_for(const Args& a, int degree) {
  return TrialPlan{degree, a.radius, a.trials, a.seed, a.workers, a.tolerances};
}

Fields mc_plan(const Args& a) {
  Fields fields = plan_fields(plan_for(a, a.degree));
  if (!a.grid.empty()) {
    std::string grid;
    for (std::size_t i = 0; i < a.grid.size(); ++i) {
      grid += (i ? "," : "") + std::to_string(a.grid[i]);
    }
    fields.erase(fields.begin());
    fields.insert(fields.begin(), {"grid", grid});
  }
  if (a.delta) fields.emplace_back("delta", *a.delta);
  return fields;
}

ExperimentRecord cmd_sample(const Args& a) {
  const auto poly = sample_polynomial(a.degree, {a.seed, a.trial});
  ExperimentRecord record;
  record.plan = {{"degree", integer_cell(a.degree)},
                 {"seed", integer_cell(a.seed)},
                 {"trial", integer_cell(a.trial)}};
  record.table.columns = {"j", "re", "im"};
  for (int j = 0; j <= poly.degree(); ++j) {
    record.table.rows.push_back({integer_cell(j), poly[j].real(), poly[j].imag()});
  }
  return record;
}

ExperimentRecord cmd_roots(const Args& a) {
  if (a.degree < 1) throw UsageError("roots: --degree must be at least 1");
  const auto poly = sample_polynomial(a.degree, {a.seed, a.trial});
  const ZeroSet zeros = find_all_roots(poly);
  ExperimentRecord record;
  record.plan = {{"degree", integer_cell(a.degree)},
                 {"seed", integer_cell(a.seed)},
                 {"trial", integer_cell(a.trial)}};
  record.summary = {{"degree_deficit", integer_cell(zeros.degree_deficit)},
                    {"max_residual", zeros.max_residual()}};
  record.table.columns = {"index", "re", "im", "abs", "residual"};
  for (std::size_t i = 0; i < zeros.roots.size(); ++i) {
    const auto& root = zeros.roots[i];
    record.table.rows.push_back({integer_cell(static_cast<std::int64_t>(i)),
                                 root.location.real(), root.location.imag(),
                                 std::abs(root.location), root.residual});
  }
  return record;
}

ExperimentRecord cmd_count(const Args& a) {
  const auto poly = sample_polynomial(a.degree, {a.seed, a.trial});
  const Disk disk(a.radius);
  ZeroCount by_roots{0, CountMethod::from_roots, 0};
  if (a.degree >= 1) {
    by_roots = count_zeros_from_roots(find_all_roots(poly), disk,
                                      a.tolerances.boundary_margin);
  }
  const ZeroCount by_winding =
      count_zeros_argument_principle(poly, disk, a.tolerances.boundary_margin);
  ExperimentRecord record;
  record.plan = {{"degree", integer_cell(a.degree)},
                 {"radius", a.radius},
                 {"seed", integer_cell(a.seed)},
                 {"trial", integer_cell(a.trial)},
                 {"boundary_margin", a.tolerances.boundary_margin}};
  record.table.columns = {"N",           "r",     "seed",
                          "trial",       "count_roots", "count_argument",
                          "boundary_flags", "expected"};
  record.table.rows.push_back(
      {integer_cell(a.degree), a.radius, integer_cell(a.seed),
       integer_cell(a.trial), integer_cell(by_roots.count),
       integer_cell(by_winding.count), integer_cell(by_roots.boundary_flags),
       expected_zero_count(a.degree, a.radius)});
  return record;
}

template <typename Estimator>
ExperimentRecord estimate_grid(const Args& a, bool with_delta,
                               Estimator&& estimator) {
  ExperimentRecord record;
  record.plan = mc_plan(a);
  record.table.columns = estimate_columns(with_delta);
  for (int n : degrees(a)) {
    const TrialPlan plan = plan_for(a, n);
    record.table.rows.push_back(estimate_row(
        plan, estimator(plan), with_delta ? a.delta : std::nullopt));
  }
  return record;
}

ExperimentRecord cmd_mean_zeros(const Args& a) {
  auto record = estimate_grid(a, false, estimate_zero_count_mean);
  record.table.columns.push_back("expected");
  const auto ns = degrees(a);
  for (std::size_t i = 0; i < ns.size(); ++i) {
    record.table.rows[i].push_back(expected_zero_count(ns[i], a.radius));
  }
  return record;
}

ExperimentRecord cmd_deviation(const Args& a) {
  if (!a.delta) throw UsageError("deviation: --delta is required");
  const DeviationSpec spec{*a.delta};
  return estimate_grid(a, true, [&](const TrialPlan& plan) {
    return estimate_deviation_probability(plan, spec);
  });
}

ExperimentRecord cmd_hole(const Args& a) {
  return estimate_grid(a, false, estimate_hole_probability);
}

ExperimentRecord cmd_omega(const Args& a) {
  ExperimentRecord record;
  record.plan = mc_plan(a);
  record.plan = {record.plan.front(), {"radius", a.radius}};
  record.table.columns = {"N", "r", "log_prob", "rate"};
  for (int n : degrees(a)) {
    if (n < 1) throw UsageError("omega-bound: degrees must be at least 1");
    const double log_prob = omega_lower_bound(n, a.radius);
    record.table.rows.push_back({integer_cell(n), a.radius, log_prob,
                                 -log_prob / (static_cast<double>(n) * n)});
  }
  return record;
}

ExperimentRecord cmd_fit(const Args& a, std::ostream& err) {
  std::vector<DecayPoint> points;
  ExperimentRecord record;
  if (!a.input.empty()) {
    const ResultsFile results = parse_results_file(a.input);
    for (const auto& d : results.dropped) {
      err << "fit-decay: dropped line " << d.line << ": " << d.reason << '\n';
    }
    points = results.points;
    record.plan = {{"input", a.input}};
    record.summary.emplace_back(
        "dropped", integer_cell(static_cast<std::int64_t>(results.dropped.size())));
  } else {
    if (a.grid.size() < 3) {
      throw UsageError("fit-decay: give --input PATH or a --grid of >= 3 degrees");
    }
    record.plan = mc_plan(a);
    record.plan.emplace_back("source", a.omega ? "omega" : "hole");
    std::int64_t dropped = 0;
    for (int n : a.grid) {
      if (a.omega) {
        if (n < 1) throw UsageError("fit-decay: degrees must be at least 1");
        points.push_back({n, omega_lower_bound(n, a.radius)});
        continue;
      }
      const Estimate e = estimate_hole_probability(plan_for(a, n));
      if (e.point > 0.0) {
        points.push_back({n, std::log(e.point)});
      } else {
        err << "fit-decay: dropped N=" << n << ": no holes observed\n";
        ++dropped;
      }
    }
    record.summary.emplace_back("dropped", integer_cell(dropped));
  }
  const DecayFit fit = fit_decay_exponent(points);
  record.summary.insert(record.summary.begin(),
                        {{"c_hat", fit.c_hat},
                         {"intercept", fit.intercept},
                         {"r_squared", fit.r_squared}});
  record.table.columns = {"N",     "log_prob",  "fitted",
                          "c_hat", "intercept", "r_squared"};
  for (const auto& p : fit.points) {
    const double n2 = static_cast<double>(p.degree) * p.degree;
    record.table.rows.push_back({integer_cell(p.degree), p.log_prob,
                                 fit.intercept - fit.c_hat * n2, fit.c_hat,
                                 fit.intercept, fit.r_squared});
  }
  return record;
}

ExperimentRecord cmd_verify(const Args& a, bool& all_passed) {
  const auto checks = run_invariant_suites({a.seed, a.workers});
  ExperimentRecord record;
  record.plan = {{"seed", integer_cell(a.seed)}};
  record.table.columns = {"id", "result", "measured", "threshold"};
  all_passed = true;
  for (const auto& c : checks) {
    all_passed = all_passed && c.passed;
    record.table.rows.push_back(
        {c.id, std::string(c.passed ? "pass" : "fail"), c.measured, c.threshold});
  }
  return record;
}

ExperimentRecord cmd_orthonormality(const Args& a, bool& all_passed) {
  constexpr double kThreshold = 1e-10;
  ExperimentRecord record;
  record.plan = {{"degrees", a.grid.empty() ? std::to_string(a.degree) : [&] {
                    std::string s;
                    for (std::size_t i = 0; i < a.grid.size(); ++i) {
                      s += (i ? "," : "") + std::to_string(a.grid[i]);
                    }
                    return s;
                  }()}};
  record.table.columns = {"N", "gram_max_deviation", "beta_max_deviation",
                          "threshold", "result"};
  all_passed = true;
  for (int n : degrees(a)) {
    std::vector<SU2Polynomial> basis, monomials;
    for (int j = 0; j <= n; ++j) {
      SU2Polynomial::Coefficients e = SU2Polynomial::Coefficients::Zero(n + 1);
      e[j] = 1.0;
      basis.emplace_back(e);
      e[j] = std::exp(-log_binomial(n, j) / 2);
      monomials.emplace_back(e);
    }
    double gram = 0.0, beta = 0.0;
    for (int j = 0; j <= n; ++j) {
      for (int k = 0; k <= n; ++k) {
        const double target = j == k ? 1.0 : 0.0;
        gram = std::max(gram, std::abs(fs_inner_product(basis[j], basis[k], n) - target));
      }
      const double exact = std::exp(-log_binomial(n, j));
      beta = std::max(beta, std::abs(fs_inner_product(monomials[j], monomials[j], n) - exact) / exact);
    }
    const bool passed = gram <= kThreshold && beta <= kThreshold;
    all_passed = all_passed && passed;
    record.table.rows.push_back({integer_cell(n), gram, beta, kThreshold,
                                 std::string(passed ? "pass" : "fail")});
  }
  return record;
}

int default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

int run_command(std::span<const std::string> args, std::ostream& out,
                std::ostream& err) {
  Args a;
  a.workers = default_workers();
  CLI::App app{"su2lab: zeros and hole probabilities of Gaussian SU(2) polynomials",
               "su2lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SU2LAB_VERSION);

  const unsigned mc = kDegree | kRadius | kTrials | kSeed | kGrid | kTolerances;
  auto* sample = app.add_subcommand("sample", "emit the coefficients of one sample");
  add_options(*sample, a, kDegree | kSeed | kTrialIndex);
  auto* roots = app.add_subcommand("roots", "emit the zero set of one sample");
  add_options(*roots, a, kDegree | kSeed | kTrialIndex);
  auto* count = app.add_subcommand("count", "zero count of one sample in B(0, r)");
  add_options(*count, a, kDegree | kRadius | kSeed | kTrialIndex | kTolerances);
  auto* mean = app.add_subcommand("mean-zeros", "Monte Carlo mean zero count in B(0, r)");
  add_options(*mean, a, mc);
  auto* deviation = app.add_subcommand("deviation", "frequency of |Xi - N r^2/(1+r^2)| >= delta N");
  add_options(*deviation, a, mc | kDelta);
  auto* hole = app.add_subcommand("hole", "hole probability in B(0, r)");
  add_options(*hole, a, mc);
  auto* omega = app.add_subcommand("omega-bound", "exact log-probability of the hole-forcing event");
  add_options(*omega, a, kDegree | kRadius | kGrid);
  auto* fit = app.add_subcommand("fit-decay", "fit log P against N^2");
  add_options(*fit, a, mc);
  fit->add_option("--input", a.input, "results file (CSV or JSON) to fit");
  fit->add_flag("--omega", a.omega, "fit the exact omega bound instead of MC holes");
  auto* verify = app.add_subcommand("verify", "run the invariant suites");
  add_options(*verify, a, kSeed);
  auto* ortho = app.add_subcommand("orthonormality", "Fubini-Study quadrature checks");
  add_options(*ortho, a, kDegree | kGrid);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << SU2LAB_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "su2lab: " << e.what() << "\n"
        << "run 'su2lab --help' for usage\n";
    return kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string command = chosen->get_name();
  const auto start = std::chrono::steady_clock::now();
  ExperimentRecord record;
  bool checks_passed = true;
  try {
    if (chosen == sample) record = cmd_sample(a);
    if (chosen == roots) record = cmd_roots(a);
    if (chosen == count) record = cmd_count(a);
    if (chosen == mean) record = cmd_mean_zeros(a);
    if (chosen == deviation) record = cmd_deviation(a);
    if (chosen == hole) record = cmd_hole(a);
    if (chosen == omega) record = cmd_omega(a);
    if (chosen == fit) record = cmd_fit(a, err);
    if (chosen == verify) record = cmd_verify(a, checks_passed);
    if (chosen == ortho) record = cmd_orthonormality(a, checks_passed);
  } catch (const UsageError& e) {
    err << "su2lab " << command << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "su2lab " << command << ": " << e.what() << '\n';
    return kExitRuntime;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  record.command = command;
  record.tool_version = SU2LAB_VERSION;
  const Provenance provenance{a.workers, seconds, utc_timestamp()};
  if (a.provenance) record.provenance = provenance;
  const std::string data =
      serialize_record(record, a.format == "json" ? Format::json : Format::csv);

  if (a.out_path.empty()) {
    out << data;
  } else {
    std::ofstream file(a.out_path, std::ios::binary);
    if (!(file << data)) {
      err << "su2lab " << command << ": cannot write " << a.out_path << '\n';
      return kExitRuntime;
    }
  }
  err << "# su2lab " << command << ": workers=" << provenance.workers
      << " wall_time=" << format_double(seconds) << "s timestamp="
      << provenance.timestamp << '\n';
  if (!checks_passed) {
    err << "su2lab " << command << ": some checks failed\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace su2lab
