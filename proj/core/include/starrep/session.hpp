#pragma once

#include <optional>
#include <string>
#include <vector>

namespace starrep {

// Command-line overrides applied on top of the config file: --seed replaces
// the session seed (commands that pin their own seed keep it), --tolerance
// replaces the default assertion tolerance.
struct SessionOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;
};

// Outcome of one batch session.  report_text is the exact content written to
// report.json; artifacts lists every file placed in the output directory.
// Exit codes: 0 all configured assertions passed, 1 at least one assertion
// or runtime check failed, 3 a command hit numerical non-convergence.  Config
// resolution problems (malformed JSON, unknown fields, dangling references,
// malformed sentences) throw ConfigError before any command executes; the
// CLI maps that to exit code 2.
struct SessionResult {
  int exit_code = 0;
  std::string report_text;
  std::vector<std::string> artifacts;
  std::vector<std::string> failures;
};

// The config is a single JSON document.  Field reference lives in the
// repository README; the shape is
//   { "seed", "tolerance", "group", "elements", "export_elements",
//     "representations", "structures", "sequences", "commands" }
// with commands drawn from: audit, reconstruct, kazhdan, classify, cover,
// eval, search-q36.  An empty command list yields an empty report and exit 0.
SessionResult run_session_text(const std::string& config_text, const std::string& out_dir,
                               const SessionOverrides& overrides);
SessionResult run_session_text(const std::string& config_text, const std::string& out_dir);
SessionResult run_session_file(const std::string& config_path, const std::string& out_dir,
                               const SessionOverrides& overrides);
SessionResult run_session_file(const std::string& config_path, const std::string& out_dir);

}  // namespace starrep
