#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "xvt/report.hpp"

namespace xvt::commands {

/// Unresolved settings; unset fields fall back to per-command defaults
/// mirroring the shipped constants (alpha 1.5, gamma 1.0, lambda_i 1.0,
/// lambda_p 0.5, beta 200, margin 10, eta 0.99, rho 0.5, alpha_cluster 0.05).
struct CommandConfig {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> dim;
  std::optional<std::size_t> sub;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> l_count;
  std::optional<double> tol;
  std::optional<double> alpha;
  std::optional<double> gamma;
  std::optional<double> rho;
  std::optional<double> beta;
};

/// base, overridden by any field set in `over` (flags > config file > defaults).
CommandConfig merged(const CommandConfig& base, const CommandConfig& over);

/// Parses a JSON config file carrying any subset of the fields above.
CommandConfig config_from_json_file(const std::string& path);

bool known_command(const std::string& name);
std::vector<std::string> command_names();

/// Runs one verification command with seeded determinism. All checks of the
/// shipped defaults pass; wall_time_ms is filled, everything else is
/// reproducible byte for byte for a fixed config.
report::RunReport run_command(const std::string& name, const CommandConfig& config);

}  // namespace xvt::commands
