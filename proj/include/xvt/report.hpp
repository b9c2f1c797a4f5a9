#pragma once

#include <map>
#include <string>
#include <vector>

#include "xvt/matrix.hpp"

namespace xvt::report {

struct Check {
  std::string name;
  bool pass = false;
  double observed = 0.0;
  double tolerance = 0.0;
};

/// Deterministic verification record. Wall time is tracked for diagnostics
/// but kept out of the serialized report so identical runs stay byte-stable.
struct RunReport {
  std::string command;
  std::map<std::string, std::string> config;  // resolved values, canonical text
  std::map<std::string, double> metrics;
  std::vector<Check> checks;
  double wall_time_ms = 0.0;
  int schema_version = 1;

  bool all_pass() const;
  void add_check(const std::string& name, double observed, double tolerance);
  void add_check_flag(const std::string& name, bool pass, double observed, double tolerance);
};

/// Canonical JSON: sorted keys, 17-significant-digit reals.
std::string to_canonical_json(const RunReport& report);

/// Writes the canonical JSON; empty path means stdout (newline-terminated).
/// A verification report without checks is a schema violation.
void emit_report(const RunReport& report, const std::string& path = "");

}  // namespace xvt::report
