#pragma once

// Post-hoc checks on a trajectory log: behaviors, task satisfaction on the
// observed prefix, and the safety/boundedness guarantees of the closed loop.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ltlmas/ltl.hpp"
#include "ltlmas/planner.hpp"
#include "ltlmas/simulator.hpp"

namespace ltlmas {

/// A maximal stay of a point of interest inside the agent's sphere.
/// `provided` marks a planned visit (services were provided, possibly the
/// empty set); unplanned crossings carry no services.
struct BehaviorEntry {
  std::size_t point;
  Letter services;
  bool provided = false;
  double t_enter;
  double t_exit;

  bool operator==(const BehaviorEntry&) const = default;
};

using Behavior = std::vector<BehaviorEntry>;

/// One behavior per agent from the logged samples and ServicesProvided
/// events. Several planned visits inside one stay become separate entries
/// sharing the interval.
std::vector<Behavior> extract_behavior(const TrajectoryLog& traj, std::span<const Vec> points,
                                       std::span<const double> radii);

enum class Satisfaction { SatisfiedOnObservedLasso, Violated, Inconclusive };

const char* to_string(Satisfaction s);

struct AgentVerdict {
  bool plan_followed = true;
  bool services_only_when_active = true;
  Satisfaction satisfaction = Satisfaction::Inconclusive;
  /// Planned visits observed over the plan length L (>= 1 once a full
  /// suffix cycle was seen).
  double progress = 0.0;
  std::size_t planned_visits = 0;

  bool operator==(const AgentVerdict&) const = default;
};

/// The planned visits must spell the plan in order. With at least one full
/// suffix cycle observed the verdict is that of verify_plan; fewer visits
/// are inconclusive.
AgentVerdict check_satisfaction(const Behavior& b, const PrefixSuffixPlan& plan, const Formula& f);

/// Per agent: every ServicesProvided event happened while kappa_i == pr_i,
/// replaying the logged counter updates.
std::vector<bool> services_only_when_active(const TrajectoryLog& traj, std::span<const int> priorities);

struct LyapunovTolerance {
  double floor = 1e-8;
  /// allowance = max(floor, budget * h^5 * |dV/dt|), |dV/dt| from the
  /// previous step of the same segment
  double budget = 10.0;
  double min_fraction = 0.999;
  /// no single increase above max_jump * V(t0)
  double max_jump = 1e-4;
};

struct GuaranteeReport {
  bool collision_free = true;
  bool connectivity_maintained = true;
  bool lyapunov_monotone = true;
  bool adaptation_nondecreasing = true;
  /// finite signals, and |a_hat_i - a_i| <= sqrt(2 mu_a V(segment start))
  bool bounded = true;
  double min_beta_col;
  double min_beta_con;
  double min_iota;
  double min_eta;
  double max_a_hat;
  double max_speed;
  std::size_t lyapunov_steps = 0;
  std::size_t lyapunov_within_tolerance = 0;
  double lyapunov_max_increase;
  double lyapunov_initial;

  bool operator==(const GuaranteeReport&) const = default;
};

GuaranteeReport check_guarantees(const TrajectoryLog& traj, std::span<const AgentModel> models,
                                 const InteractionGains& gains, const LyapunovTolerance& tol = {});

struct Verdict {
  std::vector<AgentVerdict> agents;
  GuaranteeReport global;
  bool completed = false;

  bool operator==(const Verdict&) const = default;
};

Verdict evaluate_run(const TrajectoryLog& traj, const EpisodeSetup& setup, std::span<const Formula> formulas,
                     const LyapunovTolerance& tol = {});

}  // namespace ltlmas
