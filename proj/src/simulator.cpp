#include "ltlmas/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>

namespace ltlmas {

Vec uncertainty_force(const Uncertainty& u, const Vec& x, const Vec& v, double t) {
  return u.amplitude * x.norm() * std::sin(u.omega1 * t + u.omega2) * v;
}

Derivative dynamics_rhs(double t, std::span<const Vec> x, std::span<const Vec> v, std::span<const Vec> u,
                        std::span<const AgentModel> models) {
  Derivative d;
  d.dx.reserve(models.size());
  d.dv.reserve(models.size());
  d.da.reserve(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    const AgentModel& m = models[i];
    Vec rhs = u[i] - uncertainty_force(m.uncertainty, x[i], v[i], t) - m.params.gravity;
    d.dx.push_back(v[i]);
    d.dv.push_back(m.inertia.llt().solve(rhs));
    d.da.push_back(adaptation_rate(x[i], v[i], m.params.gains.adaptation, m.params.bound));
  }
  return d;
}

namespace {

std::vector<AgentParams> params_of(const std::vector<AgentModel>& models) {
  std::vector<AgentParams> p;
  for (const auto& m : models) p.push_back(m.params);
  return p;
}

}  // namespace

ClosedLoop::ClosedLoop(std::vector<AgentModel> models, EdgeSet initial_edges, InteractionGains gains)
    : models_(std::move(models)), team_(params_of(models_), std::move(initial_edges), gains) {
  for (const auto& m : models_) {
    a_true_.push_back(m.uncertainty.amplitude);
    inertia_.push_back(m.inertia);
  }
}

std::vector<Vec> ClosedLoop::controls(std::span<const Vec> x, std::span<const Vec> v, std::span<const double> a_hat,
                                      std::span<const Vec> goals, const std::vector<bool>& active) const {
  std::vector<Vec> u = interaction_forces(x, team_);
  for (std::size_t i = 0; i < size(); ++i) {
    const AgentParams& p = team_.agent(i);
    u[i] += p.gravity - (a_hat[i] * bound_value(p.bound, x[i]) + p.gains.damping) * v[i];
    if (active[i]) u[i] -= p.gains.goal * (x[i] - goals[i]);
  }
  return u;
}

void ClosedLoop::step(WorldState& state, double h, std::span<const Vec> goals, const std::vector<bool>& active) const {
  const std::size_t n = size();
  auto eval = [&](double t, const std::vector<Vec>& x, const std::vector<Vec>& v, const std::vector<double>& a) {
    auto u = controls(x, v, a, goals, active);
    return dynamics_rhs(t, x, v, u, models_);
  };
  auto shifted = [&](const Derivative& k, double c, std::vector<Vec>& x, std::vector<Vec>& v, std::vector<double>& a) {
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = state.x[i] + c * k.dx[i];
      v[i] = state.v[i] + c * k.dv[i];
      a[i] = state.a_hat[i] + c * k.da[i];
    }
  };

  std::vector<Vec> x(n), v(n);
  std::vector<double> a(n);
  const double t = state.t;
  Derivative k1 = eval(t, state.x, state.v, state.a_hat);
  shifted(k1, h / 2, x, v, a);
  Derivative k2 = eval(t + h / 2, x, v, a);
  shifted(k2, h / 2, x, v, a);
  Derivative k3 = eval(t + h / 2, x, v, a);
  shifted(k3, h, x, v, a);
  Derivative k4 = eval(t + h, x, v, a);

  for (std::size_t i = 0; i < n; ++i) {
    state.x[i] += h / 6 * (k1.dx[i] + 2 * k2.dx[i] + 2 * k3.dx[i] + k4.dx[i]);
    state.v[i] += h / 6 * (k1.dv[i] + 2 * k2.dv[i] + 2 * k3.dv[i] + k4.dv[i]);
    state.a_hat[i] += h / 6 * (k1.da[i] + 2 * k2.da[i] + 2 * k3.da[i] + k4.da[i]);
  }
  state.t = t + h;
}

double ClosedLoop::lyapunov(const WorldState& state, const std::optional<ActiveGoal>& active) const {
  return lyapunov_value(state.x, state.v, state.a_hat, a_true_, active, team_, inertia_);
}

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::GoalReached: return "GoalReached";
    case EventKind::ServicesProvided: return "ServicesProvided";
    case EventKind::CounterUpdate: return "CounterUpdate";
    case EventKind::InvariantViolation: return "InvariantViolation";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Coordinator

Coordinator::Coordinator(std::vector<int> priorities, std::vector<PrefixSuffixPlan> plans, std::vector<Vec> points,
                         std::vector<double> radii, double broadcast_delay)
    : priorities_(std::move(priorities)),
      plans_(std::move(plans)),
      points_(std::move(points)),
      radii_(std::move(radii)),
      delay_(broadcast_delay) {
  if (plans_.size() != priorities_.size() || radii_.size() != priorities_.size())
    throw ConfigurationError("coordinator: one plan, priority and radius per agent required");
  if (delay_ < 0) throw ConfigurationError("broadcast delay must be nonnegative");
  for (const auto& p : plans_) {
    if (p.suffix.empty()) throw ConfigurationError("plan with empty suffix");
    for (std::size_t s = 0; s < p.size(); ++s)
      if (p.at(s).point >= points_.size()) throw ConfigurationError("plan refers to an unknown point");
  }
}

std::optional<std::size_t> Coordinator::active_agent(const WorldState& state) const {
  for (std::size_t i = 0; i < priorities_.size(); ++i)
    if (state.kappa[i] == priorities_[i]) return i;
  return std::nullopt;
}

std::vector<bool> Coordinator::modes(const WorldState& state) const {
  std::vector<bool> m(priorities_.size(), false);
  for (std::size_t i = 0; i < priorities_.size(); ++i) m[i] = state.kappa[i] == priorities_[i];
  return m;
}

std::vector<Vec> Coordinator::goals(const WorldState& state) const {
  std::vector<Vec> g;
  for (std::size_t i = 0; i < plans_.size(); ++i) g.push_back(points_[plans_[i].at(state.s[i]).point]);
  return g;
}

std::optional<ActiveGoal> Coordinator::active_goal(const WorldState& state) const {
  auto cur = active_agent(state);
  if (!cur) return std::nullopt;
  return ActiveGoal{*cur, points_[plans_[*cur].at(state.s[*cur]).point]};
}

std::vector<SimEvent> Coordinator::tick(WorldState& state) {
  const int n = static_cast<int>(priorities_.size());
  auto bump = [n](int k) { return k % n + 1; };
  std::vector<SimEvent> events;

  auto due = std::stable_partition(pending_.begin(), pending_.end(),
                                   [&](const Pending& p) { return p.due > state.t + 1e-12; });
  for (auto it = due; it != pending_.end(); ++it) {
    state.kappa[it->agent] = bump(state.kappa[it->agent]);
    events.push_back({EventKind::CounterUpdate, state.t, it->agent, SimEvent::kNone, {}, state.kappa[it->agent], {}});
  }
  pending_.erase(due, pending_.end());

  auto cur = active_agent(state);
  if (!cur) return events;
  const std::size_t c = *cur;
  const PlanStep& step = plans_[c].at(state.s[c]);
  if (!((state.x[c] - points_[step.point]).norm() < radii_[c])) return events;

  events.push_back({EventKind::GoalReached, state.t, c, step.point, {}, 0, {}});
  events.push_back({EventKind::ServicesProvided, state.t, c, step.point, step.services, 0, {}});
  state.s[c] = plans_[c].advance(state.s[c]);
  for (std::size_t i = 0; i < priorities_.size(); ++i) {
    if (i == c || delay_ == 0.0) {
      state.kappa[i] = bump(state.kappa[i]);
      events.push_back({EventKind::CounterUpdate, state.t, i, SimEvent::kNone, {}, state.kappa[i], {}});
    } else {
      pending_.push_back({state.t + delay_, i});
    }
  }
  return events;
}

// ---------------------------------------------------------------------------
// Episodes

EdgeSet validate_setup(const EpisodeSetup& setup) {
  const std::size_t n = setup.agents.size();
  if (n == 0) throw ConfigurationError("no agents");
  if (setup.x0.size() != n || setup.v0.size() != n || setup.a_hat0.size() != n || setup.plans.size() != n)
    throw ConfigurationError("initial state and plans must be given for every agent");
  const auto dim = setup.x0[0].size();
  if (dim == 0) throw ConfigurationError("dimension must be positive");

  std::vector<int> prio;
  std::vector<double> radii, d_con;
  for (std::size_t i = 0; i < n; ++i) {
    const AgentModel& m = setup.agents[i];
    const std::string who = "agent " + std::to_string(i + 1);
    if (setup.x0[i].size() != dim || setup.v0[i].size() != dim || m.params.gravity.size() != dim)
      throw ConfigurationError(who + ": vector dimension mismatch");
    if (m.inertia.rows() != dim || m.inertia.cols() != dim) throw ConfigurationError(who + ": inertia shape mismatch");
    if (!m.inertia.isApprox(m.inertia.transpose()) || m.inertia.llt().info() != Eigen::Success)
      throw ConfigurationError(who + ": inertia must be symmetric positive definite");
    prio.push_back(m.priority);
    radii.push_back(m.params.radius);
    d_con.push_back(m.params.sensing_radius);
  }
  for (const auto& p : setup.points)
    if (p.size() != dim) throw ConfigurationError("point dimension mismatch");
  std::vector<int> sorted = prio;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < n; ++i)
    if (sorted[i] != static_cast<int>(i) + 1) throw ConfigurationError("priorities must be a permutation of 1..N");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (d_con[i] <= radii[i] + radii[j])
        throw ConfigurationError("agent " + std::to_string(i + 1) + ": sensing radius must exceed r_i + r_" +
                                 std::to_string(j + 1));

  if (auto pair = first_collision(setup.x0, radii))
    throw ConfigurationError("agents " + std::to_string(pair->first + 1) + " and " + std::to_string(pair->second + 1) +
                             " overlap initially");
  EdgeSet e0 = sense_edges(setup.x0, d_con);
  if (n > 1 && (e0.empty() || !is_connected(e0, n))) throw ConfigurationError("initial sensing graph is not connected");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      auto args = barrier_args(setup.x0[i], setup.x0[j], radii[i], radii[j], std::min(d_con[i], d_con[j]));
      if (!(args.iota > 0))
        throw ConfigurationError("agents " + std::to_string(i + 1) + " and " + std::to_string(j + 1) + " touch initially");
    }
  for (const auto& e : e0) {
    auto args = barrier_args(setup.x0[e.tail], setup.x0[e.head], radii[e.tail], radii[e.head],
                             std::min(d_con[e.tail], d_con[e.head]));
    if (!(args.eta > 0))
      throw ConfigurationError("agents " + std::to_string(e.tail + 1) + " and " + std::to_string(e.head + 1) +
                               " start exactly at sensing range");
  }
  return e0;
}

TrajectoryLog run_episode(const EpisodeSetup& setup, const RunOptions& options) {
  if (!(options.h > 0)) throw ConfigurationError("step size must be positive");
  if (options.t_end < 0) throw ConfigurationError("end time must be nonnegative");
  if (!(options.log_interval > 0)) throw ConfigurationError("log interval must be positive");

  EdgeSet e0 = validate_setup(setup);
  const std::size_t n = setup.agents.size();
  ClosedLoop loop(setup.agents, e0, setup.interaction);
  std::vector<int> prio;
  std::vector<double> radii;
  for (const auto& m : setup.agents) {
    prio.push_back(m.priority);
    radii.push_back(m.params.radius);
  }
  Coordinator coord(prio, setup.plans, setup.points, radii, options.broadcast_delay);

  TrajectoryLog log;
  log.agents = n;
  log.dimension = static_cast<std::size_t>(setup.x0[0].size());
  log.h = options.h;
  log.initial_edges = e0;
  log.all_edges = loop.team().all_edges();

  WorldState st{0.0, setup.x0, setup.v0, setup.a_hat0, std::vector<std::size_t>(n, 0), std::vector<int>(n, 1)};
  if (options.t_end == 0.0) {
    log.completed = true;
    return log;
  }

  std::size_t segment = 0;
  double last_v = 0.0;
  auto record_sample = [&] {
    auto snap = barrier_snapshot(st.x, loop.team());
    auto goals = coord.goals(st);
    auto modes = coord.modes(st);
    Sample s{st.t, st.x, st.v, st.a_hat, {}, st.s, st.kappa, std::move(snap.beta_col), std::move(snap.beta_con), {},
             last_v};
    for (std::size_t i = 0; i < n; ++i) {
      s.mode.push_back(modes[i] ? 1 : 0);
      s.goal_error.push_back(modes[i] ? loop.team().agent(i).gains.goal * (st.x[i] - goals[i]).norm() : 0.0);
    }
    log.samples.push_back(std::move(s));
  };
  auto abort = [&](const std::string& why) {
    log.events.push_back({EventKind::InvariantViolation, st.t, SimEvent::kNone, SimEvent::kNone, {}, 0, why});
    log.completed = false;
  };
  auto tick = [&] {
    auto events = coord.tick(st);
    if (events.empty()) return false;
    log.events.insert(log.events.end(), events.begin(), events.end());
    ++segment;
    last_v = loop.lyapunov(st, coord.active_goal(st));
    log.lyapunov.push_back({st.t, last_v, segment});
    return true;
  };

  last_v = loop.lyapunov(st, coord.active_goal(st));
  log.lyapunov.push_back({0.0, last_v, segment});
  tick();
  record_sample();

  auto steps = static_cast<long long>(std::llround(options.t_end / options.h));
  if (std::abs(static_cast<double>(steps) * options.h - options.t_end) > 1e-9 * std::max(1.0, options.t_end))
    steps = static_cast<long long>(std::ceil(options.t_end / options.h));
  double next_log = options.log_interval;

  for (long long k = 1; k <= steps; ++k) {
    try {
      loop.step(st, options.h, coord.goals(st), coord.modes(st));
      st.t = static_cast<double>(k) * options.h;
      last_v = loop.lyapunov(st, coord.active_goal(st));
      log.lyapunov.push_back({st.t, last_v, segment});
      bool switched = tick();
      bool due = st.t >= next_log - 1e-9;
      while (next_log <= st.t + 1e-9) next_log += options.log_interval;
      if (switched || due) record_sample();
    } catch (const BarrierViolation& e) {
      st.t = static_cast<double>(k) * options.h;
      abort(e.what());
      return log;
    }
  }
  log.completed = true;
  return log;
}

}  // namespace ltlmas
