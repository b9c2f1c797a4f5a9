#include "xvt/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "xvt/error.hpp"

namespace xvt::report {

bool RunReport::all_pass() const {
  for (const Check& c : checks)
    if (!c.pass) return false;
  return true;
}

void RunReport::add_check(const std::string& name, double observed, double tolerance) {
  checks.push_back(Check{name, observed <= tolerance, observed, tolerance});
}

void RunReport::add_check_flag(const std::string& name, bool pass, double observed,
                               double tolerance) {
  checks.push_back(Check{name, pass, observed, tolerance});
}

namespace {

void emit_string(std::ostringstream& os, const std::string& s) {
  os << '"';
  for (char c : s) {
    switch (c) {
      case '"': os << "\\\""; break;
      case '\\': os << "\\\\"; break;
      case '\n': os << "\\n"; break;
      case '\t': os << "\\t"; break;
      default: os << c;
    }
  }
  os << '"';
}

}  // namespace

std::string to_canonical_json(const RunReport& report) {
  std::ostringstream os;
  os << "{\"checks\":[";
  for (std::size_t i = 0; i < report.checks.size(); ++i) {
    const Check& c = report.checks[i];
    if (i) os << ",";
    os << "{\"name\":";
    emit_string(os, c.name);
    os << ",\"observed\":" << format_real(c.observed)
       << ",\"pass\":" << (c.pass ? "true" : "false")
       << ",\"tolerance\":" << format_real(c.tolerance) << "}";
  }
  os << "],\"command\":";
  emit_string(os, report.command);
  os << ",\"config\":{";
  bool first = true;
  for (const auto& [k, v] : report.config) {
    if (!first) os << ",";
    first = false;
    emit_string(os, k);
    os << ":";
    emit_string(os, v);
  }
  os << "},\"metrics\":{";
  first = true;
  for (const auto& [k, v] : report.metrics) {
    if (!first) os << ",";
    first = false;
    emit_string(os, k);
    os << ":" << format_real(v);
  }
  os << "},\"schema_version\":" << report.schema_version << "}";
  return os.str();
}

void emit_report(const RunReport& report, const std::string& path) {
  if (report.checks.empty())
    throw invalid_input_error("emit_report: verification report carries no checks");
  const std::string body = to_canonical_json(report);
  if (path.empty()) {
    std::fputs(body.c_str(), stdout);
    std::fputc('\n', stdout);
    std::fflush(stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("emit_report: cannot open " + path);
  out << body << "\n";
  if (!out) throw io_error("emit_report: write failure on " + path);
}

}  // namespace xvt::report
