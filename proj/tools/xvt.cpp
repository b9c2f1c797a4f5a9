// Batch verification driver: runs one of the library's seeded check suites
// and emits a canonical JSON report.
//
// Exit codes: 0 all checks pass, 1 check failure, 2 usage, 3 config,
// 4 numerical failure, 5 I/O.

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "xvt/commands.hpp"
#include "xvt/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"cross-view verification toolkit"};
  app.require_subcommand(1);

  xvt::commands::CommandConfig flags;
  std::string out_path;
  std::string config_path;

  std::uint64_t seed = 0;
  std::size_t dim = 0, sub = 0, trials = 0, l_count = 0;
  double tol = 0.0, alpha = 0.0, gamma = 0.0, rho = 0.0, beta = 0.0;

  std::vector<CLI::App*> subs;
  for (const std::string& name : xvt::commands::command_names()) {
    CLI::App* sc = app.add_subcommand(name);
    sc->add_option("--seed", seed, "RNG seed");
    sc->add_option("--dim", dim, "ambient dimension");
    sc->add_option("--sub", sub, "subspace dimension");
    sc->add_option("--trials", trials, "trial count");
    sc->add_option("--L", l_count, "cluster population L");
    sc->add_option("--tol", tol, "primary tolerance");
    sc->add_option("--alpha", alpha, "alpha scale");
    sc->add_option("--gamma", gamma, "gamma scale");
    sc->add_option("--rho", rho, "transport radius rho");
    sc->add_option("--beta", beta, "clamp ceiling beta");
    sc->add_option("--out", out_path, "report file (stdout when omitted)");
    sc->add_option("--config", config_path, "JSON config file");
    subs.push_back(sc);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // CLI11 returns 0 for --help; anything else is a usage error
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* active = nullptr;
  for (CLI::App* sc : subs)
    if (sc->parsed()) active = sc;
  if (active == nullptr) {
    std::fprintf(stderr, "error: no command given\n");
    return 2;
  }

  if (active->count("--seed")) flags.seed = seed;
  if (active->count("--dim")) flags.dim = dim;
  if (active->count("--sub")) flags.sub = sub;
  if (active->count("--trials")) flags.trials = trials;
  if (active->count("--L")) flags.l_count = l_count;
  if (active->count("--tol")) flags.tol = tol;
  if (active->count("--alpha")) flags.alpha = alpha;
  if (active->count("--gamma")) flags.gamma = gamma;
  if (active->count("--rho")) flags.rho = rho;
  if (active->count("--beta")) flags.beta = beta;

  xvt::commands::CommandConfig config;
  if (!config_path.empty()) {
    try {
      config = xvt::commands::config_from_json_file(config_path);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "config error: %s\n", e.what());
      return 3;
    }
  }
  config = xvt::commands::merged(config, flags);  // flags win

  try {
    const xvt::report::RunReport rep =
        xvt::commands::run_command(active->get_name(), config);
    xvt::report::emit_report(rep, out_path);
    std::fprintf(stderr, "%s: %zu checks, %s (%.1f ms)\n", rep.command.c_str(),
                 rep.checks.size(), rep.all_pass() ? "all pass" : "FAILURES", rep.wall_time_ms);
    return rep.all_pass() ? 0 : 1;
  } catch (const xvt::io_error& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 5;
  } catch (const xvt::numerical_failure_error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 4;
  } catch (const xvt::invalid_input_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
}
