#pragma once

// Serialization of reports and sampled data. Output is a pure function of the
// inputs: runtimes appear only when asked for, so reruns are byte-identical.

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "majorant/stats.hpp"

namespace majorant {

/// Keys in order: name, n, statistic, p_value, seed, threshold, passed,
/// metadata, and runtime_seconds when include_runtime.
nlohmann::ordered_json to_json(const TestReport& r, bool include_runtime = false);

/// %.17g, which round-trips every double; non-finite values print as nan, inf, -inf.
std::string format_double(double v);

/// Provenance written ahead of every data file.
struct OutputHeader {
  std::string command;
  std::uint64_t seed = 0;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
};

/// '#' lines with version, command, seed and config (compact JSON), then the
/// column header and one row per index. Fields are quoted per RFC 4180 when needed; lines end in \n.
void write_csv(std::ostream& out, const OutputHeader& header, std::span<const std::string> columns,
               std::span<const std::vector<double>> data);

/// {"version", "command", "seed", "config", "columns": {name: [values]}}.
void write_data_json(std::ostream& out, const OutputHeader& header, std::span<const std::string> columns,
                     std::span<const std::vector<double>> data);

/// One row per report: name, n, statistic, p_value, threshold, passed.
void write_reports_csv(std::ostream& out, const OutputHeader& header, std::span<const TestReport> reports);

/// {"version", "command", "seed", "config", "passed", "reports": [...]}, indented by 2.
void write_reports_json(std::ostream& out, const OutputHeader& header, std::span<const TestReport> reports,
                        bool include_runtime = false);

}  // namespace majorant
