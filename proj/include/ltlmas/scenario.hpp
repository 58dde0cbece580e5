#pragma once

// Scenario files: JSON documents describing the agents, the points of
// interest, the task formulas and the integrator settings. See
// docs/FORMATS.md for the schema.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ltlmas/ltl.hpp"
#include "ltlmas/planner.hpp"
#include "ltlmas/simulator.hpp"

namespace ltlmas {

/// Schema or consistency error; `path` locates the offending field, e.g.
/// "agents[2].position".
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string path, const std::string& message)
      : std::runtime_error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct ScenarioPoint {
  std::string id;
  std::vector<double> position;

  bool operator==(const ScenarioPoint&) const = default;
};

/// Fully resolved agent description; nothing is left to defaults or the seed.
struct ScenarioAgent {
  std::string name;
  int priority = 1;
  std::vector<double> position;
  std::vector<double> velocity;
  double a_hat = 0.0;
  double radius = 1.0;
  double sensing_radius = 4.0;
  double goal_gain = 3.0;
  double damping_gain = 25.0;
  double adaptation_gain = 0.1;
  /// Gravitational acceleration; the force is inertia * gravity.
  std::vector<double> gravity;
  std::string bound = "norm";
  /// Row-major n x n.
  std::vector<std::vector<double>> inertia;
  double amplitude = 1.0;
  double omega1 = 1.0;
  double omega2 = 1.0;
  /// point id -> services this agent can provide there
  std::map<std::string, std::vector<std::string>> services;
  std::string formula;

  bool operator==(const ScenarioAgent&) const = default;
};

struct Scenario {
  std::size_t dimension = 3;
  std::uint64_t seed = 0;
  double h = 0.005;
  double t_end = 1000.0;
  double log_interval = 0.5;
  double broadcast_delay = 0.0;
  double mu_col = 0.1;
  double mu_con = 0.1;
  double beta_col = 1.0;
  double beta_con = 1.0;
  std::vector<ScenarioPoint> points;
  std::vector<ScenarioAgent> agents;
  /// Non-fatal findings (atoms no point offers to the agent).
  std::vector<std::string> warnings;

  bool operator==(const Scenario&) const = default;
};

/// Throws ScenarioError. `seed` replaces the file's seed before unpinned
/// inertia and uncertainty parameters are drawn.
Scenario parse_scenario(const std::string& text, std::optional<std::uint64_t> seed = std::nullopt);
Scenario load_scenario(const std::filesystem::path& path, std::optional<std::uint64_t> seed = std::nullopt);

/// JSON text of the resolved scenario; parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& s);

std::vector<Formula> formulas(const Scenario& s);

/// Agent i's transition system over the scenario points (in file order). The
/// initial state carries the label of a point whose sphere contains the
/// initial position.
TransitionSystem transition_system(const Scenario& s, std::size_t agent);

struct AgentPlan {
  TransitionSystem ts;
  Formula formula;
  std::optional<PrefixSuffixPlan> plan;
};

std::vector<AgentPlan> synthesize_plans(const Scenario& s);

/// Requires every plan to be present.
EpisodeSetup episode_setup(const Scenario& s, const std::vector<PrefixSuffixPlan>& plans);

RunOptions run_options(const Scenario& s);

}  // namespace ltlmas
