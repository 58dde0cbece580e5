#include "ltlmas/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>

namespace ltlmas {

std::vector<Behavior> extract_behavior(const TrajectoryLog& traj, std::span<const Vec> points,
                                       std::span<const double> radii) {
  std::vector<Behavior> out(traj.agents);
  for (std::size_t i = 0; i < traj.agents; ++i) {
    struct Stay {
      std::size_t point;
      double enter;
      double exit;
    };
    std::vector<Stay> stays;
    std::vector<std::optional<std::size_t>> open(points.size());  // index into stays
    for (const auto& s : traj.samples) {
      for (std::size_t k = 0; k < points.size(); ++k) {
        bool inside = (s.x[i] - points[k]).norm() < radii[i];
        if (inside && !open[k]) {
          open[k] = stays.size();
          stays.push_back({k, s.t, s.t});
        } else if (inside) {
          stays[*open[k]].exit = s.t;
        } else {
          open[k].reset();
        }
      }
    }

    std::vector<std::vector<const SimEvent*>> visits(stays.size());
    std::vector<const SimEvent*> unmatched;
    for (const auto& e : traj.events) {
      if (e.kind != EventKind::ServicesProvided || e.agent != i) continue;
      auto it = std::find_if(stays.begin(), stays.end(), [&](const Stay& st) {
        return st.point == e.point && st.enter <= e.t && e.t <= st.exit;
      });
      if (it == stays.end()) unmatched.push_back(&e);
      else visits[static_cast<std::size_t>(it - stays.begin())].push_back(&e);
    }

    Behavior& b = out[i];
    for (std::size_t k = 0; k < stays.size(); ++k) {
      if (visits[k].empty()) {
        b.push_back({stays[k].point, {}, false, stays[k].enter, stays[k].exit});
        continue;
      }
      for (const auto* e : visits[k]) b.push_back({stays[k].point, e->services, true, stays[k].enter, stays[k].exit});
    }
    for (const auto* e : unmatched) b.push_back({e->point, e->services, true, e->t, e->t});
    std::stable_sort(b.begin(), b.end(), [](const BehaviorEntry& a, const BehaviorEntry& c) {
      return a.t_enter < c.t_enter;
    });
  }
  return out;
}

const char* to_string(Satisfaction s) {
  switch (s) {
    case Satisfaction::SatisfiedOnObservedLasso: return "satisfied";
    case Satisfaction::Violated: return "violated";
    case Satisfaction::Inconclusive: return "inconclusive";
  }
  return "?";
}

AgentVerdict check_satisfaction(const Behavior& b, const PrefixSuffixPlan& plan, const Formula& f) {
  AgentVerdict v;
  std::size_t idx = 0;
  for (const auto& entry : b) {
    if (!entry.provided) continue;
    const PlanStep& expected = plan.at(idx);
    if (entry.point != expected.point || entry.services != expected.services) {
      v.plan_followed = false;
      v.satisfaction = Satisfaction::Violated;
      return v;
    }
    ++v.planned_visits;
    idx = plan.advance(idx);
  }
  v.progress = static_cast<double>(v.planned_visits) / static_cast<double>(plan.size());
  if (v.planned_visits >= plan.size())
    v.satisfaction = verify_plan(plan, f) ? Satisfaction::SatisfiedOnObservedLasso : Satisfaction::Violated;
  return v;
}

std::vector<bool> services_only_when_active(const TrajectoryLog& traj, std::span<const int> priorities) {
  std::vector<int> kappa(priorities.size(), 1);
  std::vector<bool> ok(priorities.size(), true);
  for (const auto& e : traj.events) {
    if (e.kind == EventKind::CounterUpdate) kappa.at(e.agent) = e.kappa;
    else if (e.kind == EventKind::ServicesProvided && kappa.at(e.agent) != priorities[e.agent]) ok[e.agent] = false;
  }
  return ok;
}

GuaranteeReport check_guarantees(const TrajectoryLog& traj, std::span<const AgentModel> models,
                                 const InteractionGains& gains, const LyapunovTolerance& tol) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  GuaranteeReport r;
  r.min_beta_col = r.min_beta_con = r.min_iota = r.min_eta = inf;
  r.max_a_hat = -inf;
  r.max_speed = 0.0;
  r.lyapunov_max_increase = -inf;
  r.lyapunov_initial = traj.lyapunov.empty() ? 0.0 : traj.lyapunov.front().value;

  std::vector<AgentParams> params;
  for (const auto& m : models) params.push_back(m.params);
  Team team(params, traj.initial_edges, gains);

  // Segment start values, for the adaptation envelope.
  std::map<std::size_t, double> segment_start;
  for (const auto& rec : traj.lyapunov) segment_start.emplace(rec.segment, rec.value);
  std::size_t rec_idx = 0;

  std::vector<double> prev_a(traj.agents, -inf);
  for (const auto& s : traj.samples) {
    auto snap = barrier_snapshot(s.x, team);
    r.min_iota = std::min(r.min_iota, snap.min_iota);
    r.min_eta = std::min(r.min_eta, snap.min_eta);
    for (double b : snap.beta_col) r.min_beta_col = std::min(r.min_beta_col, b);
    for (double b : snap.beta_con) r.min_beta_con = std::min(r.min_beta_con, b);
    if (!(snap.min_iota > 0)) r.collision_free = false;
    if (!(snap.min_eta > 0)) r.connectivity_maintained = false;
    for (const auto& e : traj.initial_edges)
      if ((s.x[e.tail] - s.x[e.head]).norm() > team.d_con_min(e)) r.connectivity_maintained = false;

    while (rec_idx + 1 < traj.lyapunov.size() && traj.lyapunov[rec_idx + 1].t <= s.t) ++rec_idx;
    std::optional<double> v_start;
    if (!traj.lyapunov.empty() && traj.lyapunov[rec_idx].t <= s.t)
      v_start = segment_start.at(traj.lyapunov[rec_idx].segment);

    for (std::size_t i = 0; i < traj.agents; ++i) {
      double a = s.a_hat[i];
      if (!std::isfinite(a) || !s.x[i].allFinite() || !s.v[i].allFinite()) r.bounded = false;
      if (a < prev_a[i]) r.adaptation_nondecreasing = false;
      prev_a[i] = a;
      r.max_a_hat = std::max(r.max_a_hat, a);
      r.max_speed = std::max(r.max_speed, s.v[i].norm());
      if (v_start) {
        double envelope = std::sqrt(2.0 * models[i].params.gains.adaptation * std::max(*v_start, 0.0));
        if (std::abs(a - models[i].uncertainty.amplitude) > envelope * (1 + 1e-9) + 1e-9) r.bounded = false;
      }
    }
  }

  double v0 = r.lyapunov_initial;
  for (std::size_t k = 1; k < traj.lyapunov.size(); ++k) {
    const auto& prev = traj.lyapunov[k - 1];
    const auto& cur = traj.lyapunov[k];
    if (prev.segment != cur.segment) continue;
    double rate = 0.0;
    if (k >= 2 && traj.lyapunov[k - 2].segment == cur.segment)
      rate = std::abs(prev.value - traj.lyapunov[k - 2].value) / traj.h;
    double allowance = std::max(tol.floor, tol.budget * std::pow(traj.h, 5) * rate);
    double inc = cur.value - prev.value;
    ++r.lyapunov_steps;
    if (inc <= allowance) ++r.lyapunov_within_tolerance;
    r.lyapunov_max_increase = std::max(r.lyapunov_max_increase, inc);
  }
  if (r.lyapunov_steps > 0) {
    double frac = static_cast<double>(r.lyapunov_within_tolerance) / static_cast<double>(r.lyapunov_steps);
    r.lyapunov_monotone = frac >= tol.min_fraction && r.lyapunov_max_increase <= tol.max_jump * v0;
  }
  return r;
}

Verdict evaluate_run(const TrajectoryLog& traj, const EpisodeSetup& setup, std::span<const Formula> formulas,
                     const LyapunovTolerance& tol) {
  Verdict v;
  v.completed = traj.completed;
  std::vector<double> radii;
  std::vector<int> prio;
  for (const auto& m : setup.agents) {
    radii.push_back(m.params.radius);
    prio.push_back(m.priority);
  }
  auto behaviors = extract_behavior(traj, setup.points, radii);
  auto only_active = services_only_when_active(traj, prio);
  for (std::size_t i = 0; i < traj.agents; ++i) {
    AgentVerdict a = check_satisfaction(behaviors[i], setup.plans[i], formulas[i]);
    a.services_only_when_active = only_active[i];
    v.agents.push_back(a);
  }
  v.global = check_guarantees(traj, setup.agents, setup.interaction, tol);
  return v;
}

}  // namespace ltlmas
