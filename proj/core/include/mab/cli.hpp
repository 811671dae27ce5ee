#ifndef MAB_CLI_HPP
#define MAB_CLI_HPP

#include <string>
#include <vector>

namespace mab::cli {

// Exit codes of the command-line front end.
enum ExitCode {
  kOk = 0,
  kUnknownFlag = 2,
  kRangeError = 3,
  kMissingCommand = 4,
  kIoError = 5,
  kSolverError = 6,
};

enum class Command { kNone, kSolve, kStudy, kSelftest };

struct RunConfig {
  Command command = Command::kNone;
  std::string problem = "quartic";
  int level_lo = 0;
  int level_hi = 0;
  std::vector<double> m_values = {2, 4, 8, 16, 32, 64};
  int n_angles = 64;
  int n_a = 33;
  double tol = 1e-6;
  std::string out;           // CSV path; empty = command default
  std::string solution_out;  // "x y u" dump for solve
  std::string mesh_out;
  std::string trace;
};

/// Parses argv (plus an optional key=value config file named by --config;
/// explicit flags win). On error prints a message to err and returns the
/// exit code; on success returns kOk and fills cfg.
int parse_config(const std::vector<std::string>& args, RunConfig& cfg, std::ostream& err);

/// Executes the parsed command and returns the process exit code.
int run(const RunConfig& cfg);

/// Complete front end: parse then run.
int main(int argc, const char* const* argv);

}  // namespace mab::cli

#endif
