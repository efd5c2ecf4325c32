#pragma once

// Experiment records and their CSV / JSON encodings.
//
// JSON: one object per record with keys in the order
//   command, tool_version, plan, summary, columns, rows[, provenance]
// where rows are objects keyed by column name in column order. CSV: one
// header row then one line per row, LF line endings, UTF-8. Floating-point
// values are written as the shortest decimal that parses back to the same
// double.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "su2lab/monte_carlo.hpp"

namespace su2lab {

/// Integers that fit in int64 are always stored as int64; uint64 is used
/// only above INT64_MAX (large seeds).
using Cell = std::variant<std::int64_t, std::uint64_t, double, std::string>;
using Fields = std::vector<std::pair<std::string, Cell>>;

Cell integer_cell(std::uint64_t value);
Cell integer_cell(std::int64_t value);
inline Cell integer_cell(int value) { return integer_cell(std::int64_t{value}); }

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  friend bool operator==(const Table&, const Table&) = default;
};

/// Run metadata that varies between otherwise identical runs. Emitted into
/// the data stream only on request so that data output stays a pure
/// function of the arguments.
struct Provenance {
  int workers = 1;
  double wall_time_seconds = 0.0;
  std::string timestamp;  ///< UTC ISO-8601

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct ExperimentRecord {
  std::string command;
  std::string tool_version;
  Fields plan;     ///< every input needed to rerun the command
  Fields summary;  ///< scalar results (fit parameters, deficits, ...)
  Table table;
  std::optional<Provenance> provenance;

  friend bool operator==(const ExperimentRecord&,
                         const ExperimentRecord&) = default;
};

enum class Format { csv, json };

/// Fields echoing a TrialPlan, workers excluded (results do not depend on it).
Fields plan_fields(const TrialPlan& plan);

/// Column layout shared by the estimate-producing commands.
std::vector<std::string> estimate_columns(bool with_delta);
std::vector<Cell> estimate_row(const TrialPlan& plan, const Estimate& estimate,
                               std::optional<double> delta);

std::string format_double(double value);
std::string serialize_record(const ExperimentRecord& record, Format format);
ExperimentRecord parse_record_json(std::string_view text);

std::string utc_timestamp();

struct DroppedRow {
  long line = 0;  ///< CSV line number, or 1-based row index for JSON
  std::string reason;
};

struct ResultsFile {
  std::vector<DecayPoint> points;
  std::vector<DroppedRow> dropped;
};

/// Reads (N, log P) pairs from a CSV or JSON results file produced by the
/// `hole`, `deviation`, `mean-zeros` or `omega-bound` commands. A `log_prob`
/// column is used as is; otherwise ln(point) is taken. Rows with point <= 0
/// or with more than 1% failed trials are dropped and reported.
/// Throws ParseError (with line) on malformed input and DomainError when
/// fewer than 3 usable points remain.
ResultsFile parse_results_file(const std::filesystem::path& path);
ResultsFile parse_results_text(std::string_view text);

}  // namespace su2lab
