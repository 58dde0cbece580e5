#include "ltlmas/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ltlmas {

BarrierSpec collision_barrier(double r_tail, double r_head, double d_con_min, double beta_bar) {
  double r = r_tail + r_head;
  double d_bar = d_con_min * d_con_min - r * r;
  if (d_bar <= 0) throw std::invalid_argument("sensing radius must exceed the sum of radii");
  if (beta_bar <= 0) throw std::invalid_argument("barrier plateau must be positive");
  return {BarrierKind::Collision, d_bar, beta_bar};
}

BarrierSpec connectivity_barrier(double d_con_min, double beta_bar) {
  if (d_con_min <= 0) throw std::invalid_argument("sensing radius must be positive");
  if (beta_bar <= 0) throw std::invalid_argument("barrier plateau must be positive");
  return {BarrierKind::Connectivity, d_con_min * d_con_min, beta_bar};
}

double theta(double s, const BarrierSpec& spec) {
  if (s < 0) throw std::domain_error("barrier argument must be nonnegative");
  if (s >= spec.d_bar) return spec.beta_bar;
  double q = 1.0 - s / spec.d_bar;
  return spec.beta_bar * (1.0 - q * q);
}

double theta_slope(double s, const BarrierSpec& spec) {
  if (s >= spec.d_bar) return 0.0;
  return 2.0 * spec.beta_bar / spec.d_bar * (1.0 - s / spec.d_bar);
}

double recip_barrier_grad(double s, const BarrierSpec& spec) {
  if (!(s > 0)) {
    throw BarrierViolation(std::string(spec.kind == BarrierKind::Collision ? "collision" : "connectivity") +
                           " barrier argument " + std::to_string(s) + " is not positive");
  }
  if (s >= spec.d_bar) return 0.0;
  double b = theta(s, spec);
  return -theta_slope(s, spec) / (b * b);
}

BarrierArgs barrier_args(const Vec& x_tail, const Vec& x_head, double r_tail, double r_head, double d_con_min) {
  Vec diff = x_tail - x_head;
  double d2 = diff.squaredNorm();
  double r = r_tail + r_head;
  return {d2 - r * r, d_con_min * d_con_min - d2, 2.0 * diff, -2.0 * diff};
}

double bound_value(BoundFunction f, const Vec& x) {
  switch (f) {
    case BoundFunction::PositionNorm: return x.norm();
    case BoundFunction::Unit: return 1.0;
  }
  return 0.0;
}

Team::Team(std::vector<AgentParams> agents, EdgeSet initial_edges, InteractionGains gains)
    : agents_(std::move(agents)), initial_(std::move(initial_edges)) {
  for (const auto& a : agents_) {
    if (a.radius <= 0 || a.sensing_radius <= 0) throw std::invalid_argument("radii must be positive");
    if (a.gains.goal <= 0 || a.gains.damping <= 0 || a.gains.adaptation <= 0)
      throw std::invalid_argument("control gains must be positive");
  }
  if (gains.mu_col <= 0 || gains.mu_con <= 0) throw std::invalid_argument("interaction gains must be positive");
  all_ = complete_edges(agents_.size(), initial_);
  for (const auto& e : all_) {
    col_.push_back(collision_barrier(agents_[e.tail].radius, agents_[e.head].radius, d_con_min(e), gains.beta_col));
    mu_col_.push_back(gains.mu_col);
  }
  for (const auto& e : initial_) {
    con_.push_back(connectivity_barrier(d_con_min(e), gains.beta_con));
    mu_con_.push_back(gains.mu_con);
  }
}

double Team::d_con_min(const Edge& e) const {
  return std::min(agents_.at(e.tail).sensing_radius, agents_.at(e.head).sensing_radius);
}

namespace {

// Term of edge m acting on its tail; the head receives the negative.
Vec collision_term(std::size_t m, std::span<const Vec> x, const Team& team) {
  const Edge& e = team.all_edges()[m];
  auto args = barrier_args(x[e.tail], x[e.head], team.agent(e.tail).radius, team.agent(e.head).radius,
                           team.d_con_min(e));
  double g = recip_barrier_grad(args.iota, team.collision_spec(m));
  return -team.mu_col(m) * g * args.d_iota;
}

Vec connectivity_term(std::size_t m, std::span<const Vec> x, const Team& team) {
  const Edge& e = team.initial_edges()[m];
  auto args = barrier_args(x[e.tail], x[e.head], team.agent(e.tail).radius, team.agent(e.head).radius,
                           team.d_con_min(e));
  double g = recip_barrier_grad(args.eta, team.connectivity_spec(m));
  return -team.mu_con(m) * g * args.d_eta;
}

}  // namespace

Vec control_input(std::size_t i, const Vec& goal, bool active, std::span<const Vec> x, const Vec& v_i, double a_hat_i,
                  const Team& team) {
  const AgentParams& p = team.agent(i);
  const Vec& xi = x[i];
  Vec u = p.gravity - (a_hat_i * bound_value(p.bound, xi) + p.gains.damping) * v_i;
  if (active) u -= p.gains.goal * (xi - goal);
  const auto& all = team.all_edges();
  for (std::size_t m = 0; m < all.size(); ++m) {
    if (all[m].tail != i && all[m].head != i) continue;
    const Edge& e = all[m];
    // beyond mutual sensing range the collision term is identically zero
    if ((x[e.tail] - x[e.head]).squaredNorm() >= std::pow(team.d_con_min(e), 2)) continue;
    Vec t = collision_term(m, x, team);
    u += e.tail == i ? t : Vec(-t);
  }
  const auto& init = team.initial_edges();
  for (std::size_t m = 0; m < init.size(); ++m) {
    if (init[m].tail != i && init[m].head != i) continue;
    Vec t = connectivity_term(m, x, team);
    u += init[m].tail == i ? t : Vec(-t);
  }
  return u;
}

std::vector<Vec> interaction_forces(std::span<const Vec> x, const Team& team) {
  const auto n = x.empty() ? 0 : x[0].size();
  std::vector<Vec> f(team.size(), Vec::Zero(n));
  for (std::size_t m = 0; m < team.all_edges().size(); ++m) {
    const Edge& e = team.all_edges()[m];
    Vec t = collision_term(m, x, team);
    f[e.tail] += t;
    f[e.head] -= t;
  }
  for (std::size_t m = 0; m < team.initial_edges().size(); ++m) {
    const Edge& e = team.initial_edges()[m];
    Vec t = connectivity_term(m, x, team);
    f[e.tail] += t;
    f[e.head] -= t;
  }
  return f;
}

Eigen::VectorXd interaction_vector_form(std::span<const Vec> x, const Team& team) {
  const Eigen::Index n = x.empty() ? 0 : x[0].size();
  const auto N = static_cast<Eigen::Index>(team.size());
  auto kron = [&](const Eigen::MatrixXi& d) {
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(d.rows() * n, d.cols() * n);
    for (Eigen::Index r = 0; r < d.rows(); ++r)
      for (Eigen::Index c = 0; c < d.cols(); ++c)
        k.block(r * n, c * n, n, n) = static_cast<double>(d(r, c)) * Eigen::MatrixXd::Identity(n, n);
    return k;
  };
  auto stacked = [&](const EdgeSet& edges, bool connectivity) {
    Eigen::VectorXd b(static_cast<Eigen::Index>(edges.size()) * n);
    for (std::size_t m = 0; m < edges.size(); ++m) {
      const Edge& e = edges[m];
      auto args = barrier_args(x[e.tail], x[e.head], team.agent(e.tail).radius, team.agent(e.head).radius,
                               team.d_con_min(e));
      double mu = connectivity ? team.mu_con(m) : team.mu_col(m);
      double g = connectivity ? recip_barrier_grad(args.eta, team.connectivity_spec(m))
                              : recip_barrier_grad(args.iota, team.collision_spec(m));
      b.segment(static_cast<Eigen::Index>(m) * n, n) = mu * g * (connectivity ? args.d_eta : args.d_iota);
    }
    return b;
  };
  Eigen::VectorXd out = Eigen::VectorXd::Zero(N * n);
  if (!team.initial_edges().empty())
    out += kron(incidence(team.initial_edges(), team.size())) * stacked(team.initial_edges(), true);
  if (!team.all_edges().empty()) out += kron(incidence(team.all_edges(), team.size())) * stacked(team.all_edges(), false);
  return out;
}

double adaptation_rate(const Vec& x_i, const Vec& v_i, double mu_a, BoundFunction bound) {
  return mu_a * bound_value(bound, x_i) * v_i.squaredNorm();
}

double lyapunov_value(std::span<const Vec> x, std::span<const Vec> v, std::span<const double> a_hat,
                      std::span<const double> a_true, const std::optional<ActiveGoal>& active, const Team& team,
                      std::span<const Eigen::MatrixXd> inertia) {
  double V = 0.0;
  if (active) V += 0.5 * team.agent(active->agent).gains.goal * (x[active->agent] - active->goal).squaredNorm();
  for (std::size_t i = 0; i < team.size(); ++i) {
    double a_err = a_hat[i] - a_true[i];
    V += 0.5 * v[i].dot(inertia[i] * v[i]) + a_err * a_err / (2.0 * team.agent(i).gains.adaptation);
  }
  for (std::size_t m = 0; m < team.all_edges().size(); ++m) {
    const Edge& e = team.all_edges()[m];
    auto args = barrier_args(x[e.tail], x[e.head], team.agent(e.tail).radius, team.agent(e.head).radius,
                             team.d_con_min(e));
    if (!(args.iota > 0)) throw BarrierViolation("collision barrier argument is not positive");
    V += team.mu_col(m) / theta(args.iota, team.collision_spec(m));
  }
  for (std::size_t m = 0; m < team.initial_edges().size(); ++m) {
    const Edge& e = team.initial_edges()[m];
    auto args = barrier_args(x[e.tail], x[e.head], team.agent(e.tail).radius, team.agent(e.head).radius,
                             team.d_con_min(e));
    if (!(args.eta > 0)) throw BarrierViolation("connectivity barrier argument is not positive");
    V += team.mu_con(m) / theta(args.eta, team.connectivity_spec(m));
  }
  return V;
}

BarrierSnapshot barrier_snapshot(std::span<const Vec> x, const Team& team) {
  BarrierSnapshot s{{}, {}, std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  for (std::size_t m = 0; m < team.all_edges().size(); ++m) {
    const Edge& e = team.all_edges()[m];
    auto args = barrier_args(x[e.tail], x[e.head], team.agent(e.tail).radius, team.agent(e.head).radius,
                             team.d_con_min(e));
    s.min_iota = std::min(s.min_iota, args.iota);
    s.beta_col.push_back(args.iota > 0 ? theta(args.iota, team.collision_spec(m)) : 0.0);
  }
  for (std::size_t m = 0; m < team.initial_edges().size(); ++m) {
    const Edge& e = team.initial_edges()[m];
    auto args = barrier_args(x[e.tail], x[e.head], team.agent(e.tail).radius, team.agent(e.head).radius,
                             team.d_con_min(e));
    s.min_eta = std::min(s.min_eta, args.eta);
    s.beta_con.push_back(args.eta > 0 ? theta(args.eta, team.connectivity_spec(m)) : 0.0);
  }
  return s;
}

}  // namespace ltlmas
