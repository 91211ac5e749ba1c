#ifndef DHJ_COMMANDS_HPP
#define DHJ_COMMANDS_HPP

#include "dhj/kernels.hpp"
#include "dhj/scenario.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dhj {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitCertification = 4;

struct CommandOptions {
  std::optional<std::string> out_dir;  // overrides output.directory
  std::uint64_t seed = 42;
  std::optional<std::string> sweep;    // "grid" or "time"
  Execution exec = Execution::parallel;
};

struct DiagnosticsRow {
  double t = 0.0;
  double energy = 0.0;
  double constraint_residual = 0.0;
  double trajectory_residual = 0.0;
};

struct ConvergenceRow {
  int level = 0;
  int n_nodes = 0;
  double dt = 0.0;
  double error = 0.0;
  double ratio = 0.0;  // previous error / this error, 0 on the first level
};

struct SimulateReport {
  std::vector<DiagnosticsRow> diagnostics;
  std::vector<double> final_u;
  std::optional<double> exact_error;  // L-infinity at the final time
  std::vector<ConvergenceRow> convergence;
};

struct VerifyReport {
  double closedness_sup = 0.0;
  double hj_sup = 0.0;
  double flatness_sup = 0.0;
  double u_max = 0.0;
  int samples = 0;
  bool passed = false;
};

struct CharacteristicsReport {
  double restricted_initial = 0.0;
  double compatibility_tolerance = 0.0;
  double hdw_split = 0.0;
  double contraction = 0.0;
  double pullback = 0.0;
  std::vector<double> final_u;
  std::optional<double> exact_error;
};

struct CompareRow {
  double t = 0.0;
  double linf = 0.0;
  double l2 = 0.0;
};

struct CompareReport {
  std::vector<CompareRow> rows;
  double max_linf = 0.0;
  bool flagged = false;
  std::vector<ConvergenceRow> convergence;
};

struct PairingReport {
  double pullback_max = 0.0;
  double cotangent_trajectory = 0.0;
  double constraint_residual = 0.0;
  int pairs = 0;
};

SimulateReport cmd_simulate(const Scenario& s, const CommandOptions& o, std::ostream& log);
VerifyReport cmd_verify_hj(const Scenario& s, const CommandOptions& o, std::ostream& log);
CharacteristicsReport cmd_characteristics(const Scenario& s, const CommandOptions& o, std::ostream& log);
CompareReport cmd_compare(const Scenario& s, const CommandOptions& o, std::ostream& log);
PairingReport cmd_pairing_check(const Scenario& s, const CommandOptions& o, std::ostream& log);

/// Parses the scenario, runs the command and maps errors to exit codes:
/// 2 validation, 3 numerical failure, 4 certification refusal (including
/// evaluation at a pole of gamma and failed HJ verification).
int run_command(const std::string& command, const std::string& scenario_path, const CommandOptions& o,
                std::ostream& out, std::ostream& err);

const std::vector<std::string>& command_names();

/// printf-style %.{digits}g
std::string format_number(double v, int digits = 17);

}  // namespace dhj

#endif  // DHJ_COMMANDS_HPP
