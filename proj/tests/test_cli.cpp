#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "doctest.h"
#include "su2lab/cli.hpp"
#include "su2lab/records.hpp"

using namespace su2lab;

namespace {

struct Run {
  int status = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run result;
  result.status = run_command(args, out, err);
  result.out = out.str();
  result.err = err.str();
  return result;
}

double cell_double(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return double(*i);
  return std::nan("");
}

}  // namespace

TEST_CASE("degree-1 hole probability through the CLI") {
  const auto r = run({"hole", "-N", "1", "-r", "1", "--trials", "100000", "--seed", "42",
                      "--format", "json"});
  REQUIRE(r.status == kExitOk);
  const auto record = parse_record_json(r.out);
  CHECK(record.command == "hole");
  REQUIRE(record.table.rows.size() == 1);
  const auto& columns = record.table.columns;
  const auto index = [&](const std::string& name) {
    return std::size_t(std::find(columns.begin(), columns.end(), name) - columns.begin());
  };
  const double point = cell_double(record.table.rows[0][index("point")]);
  const double se = cell_double(record.table.rows[0][index("stderr")]);
  CHECK(std::abs(point - 0.5) <= 3 * se);
}

TEST_CASE("usage errors exit with status 2") {
  CHECK(run({"hole", "-N", "1", "-r", "-2", "--trials", "10"}).status == kExitUsage);
  CHECK(run({"hole", "-N", "x", "-r", "1"}).status == kExitUsage);
  CHECK(run({"hole", "--bogus"}).status == kExitUsage);
  CHECK(run({"frobnicate"}).status == kExitUsage);
  CHECK(run({}).status == kExitUsage);
  CHECK(run({"hole", "-N", "1", "--format", "xml"}).status == kExitUsage);
  const auto bad = run({"hole", "-N", "1", "-r", "-2"});
  CHECK(bad.out.empty());
  CHECK_FALSE(bad.err.empty());
}

TEST_CASE("runtime failures exit with status 1") {
  const auto r = run({"fit-decay", "--input", "/nonexistent/results.csv"});
  CHECK(r.status == kExitRuntime);
  CHECK(r.out.empty());
  // A results file with two usable points cannot be fitted.
  const auto path = std::filesystem::temp_directory_path() / "su2lab_two_points.csv";
  std::ofstream(path) << "N,point\n2,0.81\n4,0.43\n";
  const auto two = run({"fit-decay", "--input", path.string()});
  std::filesystem::remove(path);
  CHECK(two.status == kExitRuntime);
  CHECK(run({"fit-decay", "-r", "1", "--omega", "--grid", "3,4"}).status == kExitUsage);
}

TEST_CASE("data output is a pure function of the arguments") {
  const std::vector<std::vector<std::string>> commands = {
      {"sample", "-N", "6", "--seed", "3", "--trial", "2"},
      {"roots", "-N", "9", "--seed", "3"},
      {"count", "-N", "9", "-r", "0.8", "--seed", "3"},
      {"mean-zeros", "-r", "1", "--grid", "4,8", "--trials", "300", "--seed", "5"},
      {"deviation", "-r", "1", "--delta", "0.3", "--grid", "6", "--trials", "300"},
      {"hole", "-r", "0.7", "--grid", "2,3,4", "--trials", "2000", "--seed", "8"},
      {"omega-bound", "-r", "1", "--grid", "10,20,30"},
      {"fit-decay", "-r", "1", "--omega", "--grid", "10,20,30,40"},
      {"fit-decay", "-r", "0.5", "--grid", "1,2,3", "--trials", "3000"},
      {"orthonormality", "--grid", "4,10"},
      {"verify", "--seed", "3"},
  };
  for (const auto& base : commands) {
    for (const std::string format : {"csv", "json"}) {
      auto args = base;
      args.insert(args.end(), {"--format", format});
      auto one = args, many = args;
      one.insert(one.end(), {"--workers", "1"});
      many.insert(many.end(), {"--workers", "4"});
      const auto a = run(one), b = run(one), c = run(many);
      CAPTURE(base[0]);
      CAPTURE(format);
      REQUIRE(a.status == kExitOk);
      CHECK(a.out == b.out);
      CHECK(a.out == c.out);
      CHECK_FALSE(a.out.empty());
    }
  }
}

TEST_CASE("verify passes every invariant") {
  const auto r = run({"verify", "--seed", "17"});
  CHECK(r.status == kExitOk);
  CHECK(r.out.find(",fail,") == std::string::npos);
  CHECK(r.out.find("zeros.oracle_equivalence,pass") != std::string::npos);
}

TEST_CASE("provenance is opt-in") {
  const auto plain = run({"omega-bound", "-r", "1", "--grid", "5", "--format", "json"});
  CHECK(plain.out.find("provenance") == std::string::npos);
  CHECK(plain.err.find("wall_time") != std::string::npos);
  const auto with = run({"omega-bound", "-r", "1", "--grid", "5", "--format", "json",
                         "--provenance"});
  const auto record = parse_record_json(with.out);
  REQUIRE(record.provenance.has_value());
  CHECK(record.provenance->timestamp.size() == 20);
}

TEST_CASE("CSV column layouts") {
  auto header = [](const std::string& text) { return text.substr(0, text.find('\n')); };
  CHECK(header(run({"hole", "-N", "2", "--trials", "10"}).out) ==
        "N,r,trials,trials_failed,point,stderr,ci_lo,ci_hi,seed");
  CHECK(header(run({"deviation", "-N", "2", "--trials", "10", "--delta", "0.3"}).out) ==
        "N,r,delta,trials,trials_failed,point,stderr,ci_lo,ci_hi,seed");
  CHECK(header(run({"omega-bound", "-N", "2"}).out) == "N,r,log_prob,rate");
  CHECK(header(run({"sample", "-N", "2"}).out) == "j,re,im");
  CHECK(header(run({"roots", "-N", "2"}).out) == "index,re,im,abs,residual");
}

TEST_CASE("fit-decay reads a hole results file") {
  const auto hole = run({"hole", "-r", "0.5", "--grid", "1,2,3,4", "--trials", "20000",
                         "--seed", "11"});
  REQUIRE(hole.status == kExitOk);
  const auto path = std::filesystem::temp_directory_path() / "su2lab_cli_fit.csv";
  std::ofstream(path) << hole.out;
  const auto fit = run({"fit-decay", "--input", path.string(), "--format", "json"});
  std::filesystem::remove(path);
  REQUIRE(fit.status == kExitOk);
  const auto record = parse_record_json(fit.out);
  CHECK(record.table.rows.size() == 4);
}

TEST_CASE("the executable reports exit codes") {
  const std::string cli = SU2LAB_CLI_PATH;
  REQUIRE(std::filesystem::exists(cli));
  auto status = [&](const std::string& args) {
    const int raw = std::system((cli + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  CHECK(status("omega-bound -N 3") == 0);
  CHECK(status("hole -N 1 -r -2") == 2);
  CHECK(status("fit-decay --input /nonexistent.csv") == 1);
}
