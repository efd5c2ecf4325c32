#include "su2lab/records.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace su2lab {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string json_string(const std::string& s) { return ordered_json(s).dump(); }

std::string cell_text(const Cell& cell, Format format) {
  return std::visit(
      [format](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) {
          if (format == Format::json) return json_string(v);
          if (v.find_first_of(",\"\n") == std::string::npos) return v;
          std::string quoted = "\"";
          for (char c : v) {
            if (c == '"') quoted += '"';
            quoted += c;
          }
          return quoted + "\"";
        } else if constexpr (std::is_same_v<T, double>) {
          if (format == Format::json && !std::isfinite(v)) return "null";
          return format_double(v);
        } else {
          return std::to_string(v);
        }
      },
      cell);
}

std::string fields_json(const Fields& fields) {
  std::string out = "{";
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += json_string(fields[i].first) + ':' +
           cell_text(fields[i].second, Format::json);
  }
  return out + '}';
}

Cell cell_from_json(const ordered_json& value) {
  switch (value.type()) {
    case ordered_json::value_t::number_integer:
      return value.get<std::int64_t>();
    case ordered_json::value_t::number_unsigned:
      return integer_cell(value.get<std::uint64_t>());
    case ordered_json::value_t::number_float:
      return value.get<double>();
    case ordered_json::value_t::string:
      return value.get<std::string>();
    case ordered_json::value_t::null:
      return std::numeric_limits<double>::quiet_NaN();
    default:
      throw ParseError("unsupported JSON value in record: " + value.dump(), 0);
  }
}

Fields fields_from_json(const ordered_json& object) {
  Fields fields;
  for (const auto& [key, value] : object.items()) {
    fields.emplace_back(key, cell_from_json(value));
  }
  return fields;
}

long line_of_offset(std::string_view text, std::size_t offset) {
  long line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

ExperimentRecord record_from_json(const ordered_json& j) {
  ExperimentRecord record;
  record.command = j.at("command").get<std::string>();
  record.tool_version = j.at("tool_version").get<std::string>();
  record.plan = fields_from_json(j.at("plan"));
  record.summary = fields_from_json(j.at("summary"));
  for (const auto& column : j.at("columns")) {
    record.table.columns.push_back(column.get<std::string>());
  }
  for (const auto& row : j.at("rows")) {
    std::vector<Cell> cells;
    for (const auto& column : record.table.columns) {
      cells.push_back(cell_from_json(row.at(column)));
    }
    record.table.rows.push_back(std::move(cells));
  }
  if (j.contains("provenance")) {
    const auto& p = j.at("provenance");
    record.provenance = Provenance{p.at("workers").get<int>(),
                                   p.at("wall_time_seconds").get<double>(),
                                   p.at("timestamp").get<std::string>()};
  }
  return record;
}

// Column lookup for results parsing.
struct ResultColumns {
  std::optional<std::size_t> degree, point, log_prob, trials, failed;

  explicit ResultColumns(const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == "N") degree = i;
      if (names[i] == "point") point = i;
      if (names[i] == "log_prob") log_prob = i;
      if (names[i] == "trials") trials = i;
      if (names[i] == "trials_failed") failed = i;
    }
  }
  bool usable() const { return degree && (point || log_prob); }
};

// Applies the drop rules to one row given as numbers; returns the reason
// for dropping, or nothing when the point is kept.
std::optional<std::string> classify(const ResultColumns& columns,
                                    const std::vector<double>& values,
                                    DecayPoint& point) {
  point.degree = static_cast<int>(values[*columns.degree]);
  if (columns.trials && columns.failed) {
    const double trials = values[*columns.trials];
    const double failed = values[*columns.failed];
    if (trials > 0 && failed / trials > 0.01) {
      return "more than 1% of trials failed";
    }
  }
  if (columns.log_prob) {
    point.log_prob = values[*columns.log_prob];
    if (!std::isfinite(point.log_prob)) return "log_prob is not finite";
    return std::nullopt;
  }
  const double p = values[*columns.point];
  if (!(p > 0.0)) return "point <= 0 has no logarithm";
  point.log_prob = std::log(p);
  return std::nullopt;
}

double parse_number(std::string_view token, long line) {
  while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
  while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
  double value = 0.0;
  const auto [end, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || end != token.data() + token.size()) {
    throw ParseError("line " + std::to_string(line) + ": not a number: '" +
                         std::string(token) + "'",
                     line);
  }
  return value;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

ResultsFile parse_csv_results(std::string_view text) {
  ResultsFile out;
  std::optional<ResultColumns> columns;
  std::size_t width = 0;
  long line_number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const auto cells = split_csv_line(line);
    if (!columns) {
      std::vector<std::string> names(cells.begin(), cells.end());
      columns.emplace(names);
      width = names.size();
      if (!columns->usable()) {
        throw ParseError("line " + std::to_string(line_number) +
                             ": header needs an N column and a point or "
                             "log_prob column",
                         line_number);
      }
      continue;
    }
    if (cells.size() != width) {
      throw ParseError("line " + std::to_string(line_number) + ": expected " +
                           std::to_string(width) + " fields, got " +
                           std::to_string(cells.size()),
                       line_number);
    }
    std::vector<double> values(width, 0.0);
    for (auto index : {columns->degree, columns->point, columns->log_prob,
                       columns->trials, columns->failed}) {
      if (index) values[*index] = parse_number(cells[*index], line_number);
    }
    DecayPoint point;
    if (auto reason = classify(*columns, values, point)) {
      out.dropped.push_back({line_number, *reason});
    } else {
      out.points.push_back(point);
    }
  }
  if (!columns) throw ParseError("empty results file", 1);
  return out;
}

double cell_number(const Cell& cell, long row) {
  return std::visit(
      [row](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) {
          throw ParseError("row " + std::to_string(row) +
                               ": expected a number, got '" + v + "'",
                           row);
        } else {
          return static_cast<double>(v);
        }
      },
      cell);
}

ResultsFile parse_json_results(std::string_view text) {
  ordered_json document;
  try {
    document = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const long line = line_of_offset(text, e.byte);
    throw ParseError("line " + std::to_string(line) + ": " + e.what(), line);
  }
  std::vector<ExperimentRecord> records;
  try {
    if (document.is_array()) {
      for (const auto& item : document) records.push_back(record_from_json(item));
    } else {
      records.push_back(record_from_json(document));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed record: ") + e.what(), 1);
  }
  ResultsFile out;
  long row_index = 0;
  for (const auto& record : records) {
    const ResultColumns columns(record.table.columns);
    if (!columns.usable()) {
      throw ParseError("record '" + record.command +
                           "' has no N and point/log_prob columns",
                       1);
    }
    for (const auto& row : record.table.rows) {
      ++row_index;
      std::vector<double> values(row.size(), 0.0);
      for (auto index : {columns.degree, columns.point, columns.log_prob,
                         columns.trials, columns.failed}) {
        if (index) values[*index] = cell_number(row[*index], row_index);
      }
      DecayPoint point;
      if (auto reason = classify(columns, values, point)) {
        out.dropped.push_back({row_index, *reason});
      } else {
        out.points.push_back(point);
      }
    }
  }
  return out;
}

}  // namespace

Cell integer_cell(std::uint64_t value) {
  if (value <= static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
    return static_cast<std::int64_t>(value);
  }
  return value;
}

Cell integer_cell(std::int64_t value) { return value; }

Fields plan_fields(const TrialPlan& plan) {
  return {{"degree", integer_cell(plan.degree)},
          {"radius", plan.radius},
          {"trials", integer_cell(plan.trials)},
          {"seed", integer_cell(plan.master_seed)},
          {"root_residual", plan.tolerances.root_residual},
          {"boundary_margin", plan.tolerances.boundary_margin},
          {"quadrature_target", plan.tolerances.quadrature_target}};
}

std::vector<std::string> estimate_columns(bool with_delta) {
  std::vector<std::string> columns{"N", "r"};
  if (with_delta) columns.push_back("delta");
  for (const char* name : {"trials", "trials_failed", "point", "stderr",
                           "ci_lo", "ci_hi", "seed"}) {
    columns.emplace_back(name);
  }
  return columns;
}

std::vector<Cell> estimate_row(const TrialPlan& plan, const Estimate& estimate,
                               std::optional<double> delta) {
  std::vector<Cell> row{integer_cell(plan.degree), plan.radius};
  if (delta) row.emplace_back(*delta);
  row.emplace_back(integer_cell(plan.trials));
  row.emplace_back(integer_cell(estimate.trials_failed));
  row.emplace_back(estimate.point);
  row.emplace_back(estimate.std_error);
  row.emplace_back(estimate.ci_lo);
  row.emplace_back(estimate.ci_hi);
  row.emplace_back(integer_cell(plan.master_seed));
  return row;
}

std::string format_double(double value) {
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  std::string text(buffer, end);
  // Keep doubles recognisable as floating point in JSON.
  if (std::isfinite(value) &&
      text.find_first_of(".eE") == std::string::npos) {
    text += ".0";
  }
  return text;
}

std::string serialize_record(const ExperimentRecord& record, Format format) {
  std::string out;
  if (format == Format::csv) {
    for (std::size_t i = 0; i < record.table.columns.size(); ++i) {
      if (i) out += ',';
      out += record.table.columns[i];
    }
    out += '\n';
    for (const auto& row : record.table.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        out += cell_text(row[i], Format::csv);
      }
      out += '\n';
    }
    return out;
  }
  out += "{\"command\":" + json_string(record.command);
  out += ",\"tool_version\":" + json_string(record.tool_version);
  out += ",\"plan\":" + fields_json(record.plan);
  out += ",\"summary\":" + fields_json(record.summary);
  out += ",\"columns\":[";
  for (std::size_t i = 0; i < record.table.columns.size(); ++i) {
    if (i) out += ',';
    out += json_string(record.table.columns[i]);
  }
  out += "],\"rows\":[";
  for (std::size_t r = 0; r < record.table.rows.size(); ++r) {
    if (r) out += ',';
    out += '{';
    const auto& row = record.table.rows[r];
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += json_string(record.table.columns[i]) + ':' +
             cell_text(row[i], Format::json);
    }
    out += '}';
  }
  out += ']';
  if (record.provenance) {
    out += ",\"provenance\":{\"workers\":" +
           std::to_string(record.provenance->workers) +
           ",\"wall_time_seconds\":" +
           format_double(record.provenance->wall_time_seconds) +
           ",\"timestamp\":" + json_string(record.provenance->timestamp) + '}';
  }
  out += "}\n";
  return out;
}

ExperimentRecord parse_record_json(std::string_view text) {
  try {
    return record_from_json(ordered_json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    const long line = line_of_offset(text, e.byte);
    throw ParseError("line " + std::to_string(line) + ": " + e.what(), line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed record: ") + e.what(), 1);
  }
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm utc{};
  gmtime_r(&t, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

ResultsFile parse_results_text(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  ResultsFile out = (first != std::string_view::npos &&
                     (text[first] == '{' || text[first] == '['))
                        ? parse_json_results(text)
                        : parse_csv_results(text);
  if (out.points.size() < 3) {
    std::string message = "results file has " +
                          std::to_string(out.points.size()) +
                          " usable points; at least 3 are needed";
    for (const auto& d : out.dropped) {
      message += "; dropped line " + std::to_string(d.line) + " (" + d.reason + ")";
    }
    throw DomainError(message);
  }
  return out;
}

ResultsFile parse_results_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open results file " + path.string(), 0);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_results_text(buffer.str());
}

}  // namespace su2lab
