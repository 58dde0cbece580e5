#pragma once

// Run artifacts (tab-separated tables, one file per kind) and the commands
// behind the command line tool. docs/FORMATS.md documents every file.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ltlmas/monitor.hpp"
#include "ltlmas/scenario.hpp"

namespace ltlmas {

enum ExitCode : int {
  kOk = 0,
  kError = 1,
  kInfeasible = 2,
  kInvariantViolated = 3,
  kMismatch = 4,
};

/// Shortest text that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& s);

void write_plans(std::ostream& out, const Scenario& s, const std::vector<AgentPlan>& plans);
std::vector<PrefixSuffixPlan> read_plans(std::istream& in, const Scenario& s);

void write_edges(std::ostream& out, const TrajectoryLog& log);
void write_trajectory(std::ostream& out, const TrajectoryLog& log);
void write_events(std::ostream& out, const TrajectoryLog& log, const Scenario& s);
void write_monitor(std::ostream& out, const TrajectoryLog& log);
void write_lyapunov(std::ostream& out, const TrajectoryLog& log);
void write_verdict(std::ostream& out, const Verdict& v, const Scenario& s);

/// Rebuilds the log from the files written by cmd_run in `dir`.
TrajectoryLog read_run(const std::filesystem::path& dir, const Scenario& s);

/// Prints each agent's plan; kInfeasible when some formula has none.
int cmd_plan(const Scenario& s, std::ostream& out, const std::optional<std::filesystem::path>& out_dir = std::nullopt);

struct RunResult {
  int exit_code = kOk;
  TrajectoryLog log;
  Verdict verdict;
  std::string message;
};

/// Synthesizes plans, simulates and writes every artifact into `out_dir`
/// (created if needed). A run ended by a barrier singularity still writes
/// everything it has and returns kInvariantViolated.
RunResult cmd_run(const Scenario& s, const std::filesystem::path& out_dir);

struct CheckResult {
  int exit_code = kOk;
  Verdict verdict;
  std::string recomputed;
  std::string recorded;
};

/// Re-derives the verdict from the artifacts in `dir` and compares it with
/// the recorded verdict.tsv.
CheckResult cmd_check(const std::filesystem::path& dir);

}  // namespace ltlmas
