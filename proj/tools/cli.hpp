#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "ddopt/metrics.hpp"

namespace ddopt::cli {

enum ExitCode : int { kExitOk = 0, kExitFailed = 1, kExitInfeasible = 2, kExitUsage = 64 };

/// Entry point shared by the executable and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// ---- configuration -------------------------------------------------------------

/// Parses a TOML file into JSON (tables become objects). Throws InvalidConfig.
nlohmann::json load_toml(const std::string& path);
nlohmann::json parse_toml(const std::string& text);

/// Merges config layers in order (later wins) over the defaults of the
/// selected algorithm. Unknown keys, keys that do not apply to the algorithm
/// and ill-typed values throw InvalidConfig.
nlohmann::json resolve_config(const std::vector<nlohmann::json>& layers);

/// Runs one solve with a resolved config. Unknown problems throw
/// UnknownProblem; invalid parameter values throw InvalidConfig.
RunRecord run_one(const std::string& problem, const nlohmann::json& cfg);

/// Exit code for a finished run.
int exit_code_for(RunStatus s);

/// Filesystem-safe stem for a problem or group name.
std::string slug(const std::string& name);

// ---- self-check battery -----------------------------------------------------------

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Oracle battery behind `ddopt check`. Honors DDOPT_QP_TOL and the fault
/// injection variable DDOPT_CHECK_CORRUPT_GRADIENT=<problem>.
std::vector<CheckResult> run_checks();

}  // namespace ddopt::cli
