#include "majorant/report.hpp"

#include <cmath>
#include <cstdio>

#include "majorant/errors.hpp"

namespace majorant {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

void write_preamble(std::ostream& out, const OutputHeader& header) {
  out << "# majorant " << MAJORANT_VERSION << "\n";
  out << "# command " << header.command << "\n";
  out << "# seed " << header.seed << "\n";
  out << "# config " << header.config.dump() << "\n";
}

}  // namespace

nlohmann::ordered_json to_json(const TestReport& r, bool include_runtime) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["n"] = r.n;
  j["statistic"] = r.statistic;
  j["p_value"] = r.p_value;
  j["seed"] = r.seed;
  j["threshold"] = r.threshold;
  j["passed"] = r.passed;
  j["metadata"] = r.metadata;
  if (include_runtime) j["runtime_seconds"] = r.runtime_seconds;
  return j;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(std::ostream& out, const OutputHeader& header, std::span<const std::string> columns,
               std::span<const std::vector<double>> data) {
  if (columns.size() != data.size()) throw InputError("write_csv: one data column per header column");
  const std::size_t rows = data.empty() ? 0 : data[0].size();
  for (const auto& c : data)
    if (c.size() != rows) throw InputError("write_csv: columns differ in length");
  write_preamble(out, header);
  for (std::size_t k = 0; k < columns.size(); ++k) out << (k ? "," : "") << csv_field(columns[k]);
  out << "\n";
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < data.size(); ++k) out << (k ? "," : "") << format_double(data[k][i]);
    out << "\n";
  }
}

void write_data_json(std::ostream& out, const OutputHeader& header, std::span<const std::string> columns,
                     std::span<const std::vector<double>> data) {
  if (columns.size() != data.size()) throw InputError("write_data_json: one data column per header column");
  nlohmann::ordered_json j;
  j["version"] = MAJORANT_VERSION;
  j["command"] = header.command;
  j["seed"] = header.seed;
  j["config"] = header.config;
  j["columns"] = nlohmann::ordered_json::object();
  for (std::size_t k = 0; k < columns.size(); ++k) j["columns"][columns[k]] = data[k];
  out << j.dump(2) << "\n";
}

void write_reports_csv(std::ostream& out, const OutputHeader& header, std::span<const TestReport> reports) {
  write_preamble(out, header);
  out << "name,n,statistic,p_value,threshold,passed\n";
  for (const auto& r : reports) {
    std::string n;
    for (std::size_t k = 0; k < r.n.size(); ++k) n += (k ? ";" : "") + std::to_string(r.n[k]);
    out << csv_field(r.name) << "," << csv_field(n) << "," << format_double(r.statistic) << ","
        << format_double(r.p_value) << "," << format_double(r.threshold) << "," << (r.passed ? "true" : "false")
        << "\n";
  }
}

void write_reports_json(std::ostream& out, const OutputHeader& header, std::span<const TestReport> reports,
                        bool include_runtime) {
  nlohmann::ordered_json j;
  j["version"] = MAJORANT_VERSION;
  j["command"] = header.command;
  j["seed"] = header.seed;
  j["config"] = header.config;
  bool all = true;
  for (const auto& r : reports) all = all && r.passed;
  j["passed"] = all;
  j["reports"] = nlohmann::ordered_json::array();
  for (const auto& r : reports) j["reports"].push_back(to_json(r, include_runtime));
  out << j.dump(2) << "\n";
}

}  // namespace majorant
