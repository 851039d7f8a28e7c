// starrep: batch runner for desk-scale sessions over the starrep library.
//
//   starrep run <config> [--seed N] [--out DIR] [--tolerance T]
//
// Exit codes: 0 all configured assertions passed, 1 assertion failure,
// 2 config error, 3 numerical non-convergence.
#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "starrep/errors.hpp"
#include "starrep/session.hpp"

int main(int argc, char** argv) {
  CLI::App app{"desk-scale unitary representations as metric structures"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "execute a session config");
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  double tolerance = 0.0;
  run->add_option("config", config_path, "session config (JSON)")->required();
  CLI::Option* seed_opt = run->add_option("--seed", seed, "override the session seed");
  CLI::Option* tol_opt =
      run->add_option("--tolerance", tolerance, "override the default assertion tolerance");
  run->add_option("--out", out_dir, "output directory for report.json and CSV artifacts");

  CLI11_PARSE(app, argc, argv);

  starrep::SessionOverrides overrides;
  if (seed_opt->count() > 0) overrides.seed = seed;
  if (tol_opt->count() > 0) overrides.tolerance = tolerance;

  try {
    starrep::SessionResult result = starrep::run_session_file(config_path, out_dir, overrides);
    for (const std::string& failure : result.failures) std::cerr << "FAIL " << failure << "\n";
    std::cout << (result.exit_code == 0 ? "passed" : "failed") << "; artifacts in " << out_dir
              << "\n";
    return result.exit_code;
  } catch (const starrep::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const starrep::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
