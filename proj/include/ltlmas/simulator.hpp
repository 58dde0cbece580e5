#pragma once

// Closed-loop simulation of the second-order agents
//
//   x_i' = v_i,   B_i v_i' + f_i(x_i, v_i, t) + g_i = u_i,   a_hat_i' = mu_a fbar(x_i) ||v_i||^2
//
// integrated with classical RK4, and the priority-based switching that
// activates one agent at a time to walk through its plan.

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ltlmas/controller.hpp"
#include "ltlmas/graph.hpp"
#include "ltlmas/ltl.hpp"
#include "ltlmas/planner.hpp"

namespace ltlmas {

class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// f(x, v, t) = amplitude * ||x|| * sin(omega1 t + omega2) * v. The
/// amplitude is the unknown constant a_i the adaptation estimates.
struct Uncertainty {
  double amplitude = 0.0;
  double omega1 = 1.0;
  double omega2 = 1.0;
};

Vec uncertainty_force(const Uncertainty& u, const Vec& x, const Vec& v, double t);

struct AgentModel {
  AgentParams params;
  Eigen::MatrixXd inertia;
  Uncertainty uncertainty;
  int priority = 1;
};

struct WorldState {
  double t = 0.0;
  std::vector<Vec> x;
  std::vector<Vec> v;
  std::vector<double> a_hat;
  /// 0-based index of each agent's current plan step.
  std::vector<std::size_t> s;
  /// Cycle counters in 1..N.
  std::vector<int> kappa;
};

struct Derivative {
  std::vector<Vec> dx;
  std::vector<Vec> dv;
  std::vector<double> da;
};

/// x' = v, v' = B^-1 (u - f - g), a_hat' from the adaptation law.
Derivative dynamics_rhs(double t, std::span<const Vec> x, std::span<const Vec> v, std::span<const Vec> u,
                        std::span<const AgentModel> models);

/// Closed loop for a fixed interaction structure.
class ClosedLoop {
 public:
  ClosedLoop(std::vector<AgentModel> models, EdgeSet initial_edges, InteractionGains gains);

  const Team& team() const { return team_; }
  const std::vector<AgentModel>& models() const { return models_; }
  std::size_t size() const { return models_.size(); }

  /// Control inputs of all agents; interaction terms assembled per edge.
  std::vector<Vec> controls(std::span<const Vec> x, std::span<const Vec> v, std::span<const double> a_hat,
                            std::span<const Vec> goals, const std::vector<bool>& active) const;

  /// One RK4 step of size h with goals and modes held fixed; controls are
  /// recomputed at every stage. Throws BarrierViolation if any stage hits a
  /// barrier singularity (the state is then left unchanged).
  void step(WorldState& state, double h, std::span<const Vec> goals, const std::vector<bool>& active) const;

  double lyapunov(const WorldState& state, const std::optional<ActiveGoal>& active) const;

 private:
  std::vector<AgentModel> models_;
  Team team_;
  std::vector<double> a_true_;
  std::vector<Eigen::MatrixXd> inertia_;
};

enum class EventKind { GoalReached, ServicesProvided, CounterUpdate, InvariantViolation };

const char* to_string(EventKind k);

struct SimEvent {
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  EventKind kind;
  double t;
  std::size_t agent = kNone;
  std::size_t point = kNone;
  Letter services;
  int kappa = 0;
  std::string detail;

  bool operator==(const SimEvent&) const = default;
};

/// Switching logic: agent i is active iff kappa_i == pr_i. When the active
/// agent's current goal lies inside its sphere it provides the step's
/// services, advances its plan index (wrapping into the suffix), and every
/// cycle counter moves to kappa mod N + 1; the active agent updates at once,
/// the others after `broadcast_delay` seconds.
class Coordinator {
 public:
  Coordinator(std::vector<int> priorities, std::vector<PrefixSuffixPlan> plans, std::vector<Vec> points,
              std::vector<double> radii, double broadcast_delay = 0.0);

  std::optional<std::size_t> active_agent(const WorldState& state) const;
  std::vector<bool> modes(const WorldState& state) const;
  std::vector<Vec> goals(const WorldState& state) const;
  std::optional<ActiveGoal> active_goal(const WorldState& state) const;

  /// Applies due counter deliveries and goal checks at state.t.
  std::vector<SimEvent> tick(WorldState& state);

  const std::vector<PrefixSuffixPlan>& plans() const { return plans_; }
  const std::vector<Vec>& points() const { return points_; }

 private:
  struct Pending {
    double due;
    std::size_t agent;
  };

  std::vector<int> priorities_;
  std::vector<PrefixSuffixPlan> plans_;
  std::vector<Vec> points_;
  std::vector<double> radii_;
  double delay_;
  std::vector<Pending> pending_;
};

/// Everything needed to start an episode.
struct EpisodeSetup {
  std::vector<AgentModel> agents;
  std::vector<Vec> x0;
  std::vector<Vec> v0;
  std::vector<double> a_hat0;
  /// Coordinates of the points of interest; plan steps index into this.
  std::vector<Vec> points;
  std::vector<PrefixSuffixPlan> plans;
  InteractionGains interaction;
};

struct RunOptions {
  double t_end = 1000.0;
  double h = 0.005;
  double log_interval = 0.5;
  double broadcast_delay = 0.0;
};

struct Sample {
  double t;
  std::vector<Vec> x;
  std::vector<Vec> v;
  std::vector<double> a_hat;
  std::vector<int> mode;
  std::vector<std::size_t> s;
  std::vector<int> kappa;
  std::vector<double> beta_col;
  std::vector<double> beta_con;
  /// md_i * ||gamma_i|| = md_i * mu_c ||x_i - c_i||.
  std::vector<double> goal_error;
  double lyapunov;
};

/// V after every step. A new segment starts whenever the hybrid layer
/// switches (goal reached or counter delivered).
struct LyapunovRecord {
  double t;
  double value;
  std::size_t segment;
};

struct TrajectoryLog {
  std::size_t agents = 0;
  std::size_t dimension = 0;
  double h = 0.0;
  EdgeSet initial_edges;
  EdgeSet all_edges;
  std::vector<Sample> samples;
  std::vector<SimEvent> events;
  std::vector<LyapunovRecord> lyapunov;
  bool completed = false;
};

/// Checks the setup (sizes, priorities a permutation of 1..N, B_i symmetric
/// positive definite, d_con_i > r_i + r_j, initial graph connected and
/// collision-free with strictly positive barriers) and throws
/// ConfigurationError otherwise. Returns the initial edge set.
EdgeSet validate_setup(const EpisodeSetup& setup);

/// Integrates to t_end, ticking the coordinator after every step. Samples
/// are logged every `log_interval` and at every event; a barrier
/// singularity records an InvariantViolation and ends the run with
/// `completed == false`.
TrajectoryLog run_episode(const EpisodeSetup& setup, const RunOptions& options);

}  // namespace ltlmas
