#pragma once

// Barrier functions, the decentralized control law with adaptive damping,
// the adaptation law, and the Lyapunov function used as a runtime monitor.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "ltlmas/graph.hpp"

namespace ltlmas {

/// A barrier argument reached zero or below (collision or connectivity
/// break).
class BarrierViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class BarrierKind { Collision, Connectivity };

/// beta(s) = theta(s) on [0, d_bar), beta_bar beyond, with
/// theta(s) = beta_bar * (1 - (1 - s/d_bar)^2): theta(0) = 0,
/// theta(d_bar) = beta_bar, theta'(d_bar) = 0, increasing on [0, d_bar).
struct BarrierSpec {
  BarrierKind kind;
  double d_bar;
  double beta_bar = 1.0;
};

/// d_bar = d_con_min^2 - (r_tail + r_head)^2.
BarrierSpec collision_barrier(double r_tail, double r_head, double d_con_min, double beta_bar = 1.0);
/// d_bar = d_con_min^2.
BarrierSpec connectivity_barrier(double d_con_min, double beta_bar = 1.0);

/// beta(s); throws std::domain_error for s < 0.
double theta(double s, const BarrierSpec& spec);
/// d beta / ds; zero for s >= d_bar.
double theta_slope(double s, const BarrierSpec& spec);
/// d/ds (1 / beta(s)) = -beta'(s) / beta(s)^2. Throws BarrierViolation for
/// s <= 0.
double recip_barrier_grad(double s, const BarrierSpec& spec);

/// Barrier arguments of one edge and their gradients with respect to the
/// tail position. The head gradients are the negatives.
struct BarrierArgs {
  double iota;  // ||x_t - x_h||^2 - (r_t + r_h)^2
  double eta;   // d_con_min^2 - ||x_t - x_h||^2
  Vec d_iota;   // 2 (x_t - x_h)
  Vec d_eta;    // -2 (x_t - x_h)
};

BarrierArgs barrier_args(const Vec& x_tail, const Vec& x_head, double r_tail, double r_head, double d_con_min);

/// Known bound function fbar in ||f_i(x, v)|| <= a_i fbar(x) ||v||.
enum class BoundFunction { PositionNorm, Unit };

double bound_value(BoundFunction f, const Vec& x);

struct AgentGains {
  double goal = 3.0;        // mu_c
  double damping = 25.0;    // mu
  double adaptation = 0.1;  // mu_a
};

struct AgentParams {
  double radius = 1.0;
  double sensing_radius = 4.0;
  AgentGains gains;
  Vec gravity;
  BoundFunction bound = BoundFunction::PositionNorm;
};

struct InteractionGains {
  double mu_col = 0.1;
  double mu_con = 0.1;
  double beta_col = 1.0;
  double beta_con = 1.0;
};

/// Interaction structure of one episode: the initial edges E_0 carry
/// connectivity barriers, every pair of the complete graph (numbered E_0
/// first) carries a collision barrier.
class Team {
 public:
  Team(std::vector<AgentParams> agents, EdgeSet initial_edges, InteractionGains gains);

  std::size_t size() const { return agents_.size(); }
  const AgentParams& agent(std::size_t i) const { return agents_.at(i); }
  const EdgeSet& initial_edges() const { return initial_; }
  const EdgeSet& all_edges() const { return all_; }
  double mu_col(std::size_t m) const { return mu_col_.at(m); }
  double mu_con(std::size_t m) const { return mu_con_.at(m); }
  const BarrierSpec& collision_spec(std::size_t m) const { return col_.at(m); }
  const BarrierSpec& connectivity_spec(std::size_t m) const { return con_.at(m); }
  double d_con_min(const Edge& e) const;

 private:
  std::vector<AgentParams> agents_;
  EdgeSet initial_;
  EdgeSet all_;
  std::vector<double> mu_col_;
  std::vector<double> mu_con_;
  std::vector<BarrierSpec> col_;
  std::vector<BarrierSpec> con_;
};

/// u_i for agent `i` heading to `goal` in mode `active`. Only agent i's own
/// state and the positions of agents it interacts with are read.
Vec control_input(std::size_t i, const Vec& goal, bool active, std::span<const Vec> x, const Vec& v_i, double a_hat_i,
                  const Team& team);

/// Sum of the collision and connectivity terms of every agent, assembled edge
/// by edge.
std::vector<Vec> interaction_forces(std::span<const Vec> x, const Team& team);

/// The same terms stacked as (D(G_0) (x) I_n) mu_con beta_con +
/// (D(G_bar) (x) I_n) mu_col beta_col.
Eigen::VectorXd interaction_vector_form(std::span<const Vec> x, const Team& team);

/// mu_a fbar(x_i) ||v_i||^2.
double adaptation_rate(const Vec& x_i, const Vec& v_i, double mu_a, BoundFunction bound = BoundFunction::PositionNorm);

struct ActiveGoal {
  std::size_t agent;
  Vec goal;
};

/// V = mu_c/2 ||x_j - c_j||^2 + sum_i (v_i^T B_i v_i / 2 + (a_hat_i - a_i)^2 / (2 mu_a_i))
///     + sum_{m in E_bar} mu_col / beta_col + sum_{m in E_0} mu_con / beta_con.
/// Throws BarrierViolation when a barrier argument is not positive.
double lyapunov_value(std::span<const Vec> x, std::span<const Vec> v, std::span<const double> a_hat,
                      std::span<const double> a_true, const std::optional<ActiveGoal>& active, const Team& team,
                      std::span<const Eigen::MatrixXd> inertia);

struct BarrierSnapshot {
  std::vector<double> beta_col;  // per edge of all_edges(); 0 where iota <= 0
  std::vector<double> beta_con;  // per edge of initial_edges(); 0 where eta <= 0
  double min_iota;
  double min_eta;
};

BarrierSnapshot barrier_snapshot(std::span<const Vec> x, const Team& team);

}  // namespace ltlmas
