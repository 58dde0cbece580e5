// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>

#include <fmt/core.h>

#include "benchmarks.hpp"
#include "ltlmas/buchi.hpp"
#include "ltlmas/monitor.hpp"
#include "ltlmas/scenario.hpp"
#include "numerics.hpp"
#include "support.hpp"

using namespace ltlmas;

namespace {

const std::filesystem::path fixture = std::filesystem::path(LTLMAS_SOURCE_DIR) / "scenarios" / "five_agents.scenario";

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  fmt::print("{} {}: {} ({}; {:.1f} s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail, secs);
  std::fflush(stdout);
}

// The part of a log up to time t.
TrajectoryLog until(const TrajectoryLog& log, double t) {
  TrajectoryLog out = log;
  auto keep = [t](const auto& x) { return x.t > t + 1e-9; };
  std::erase_if(out.samples, keep);
  std::erase_if(out.events, keep);
  std::erase_if(out.lyapunov, keep);
  return out;
}

bool reached_beyond(const TrajectoryLog& log, double t) {
  if (log.completed) return true;
  return !log.events.empty() && log.events.back().t > t;
}

struct FixtureRun {
  Scenario scenario;
  EpisodeSetup setup;
  TrajectoryLog log;  // [0, 2000]
};

FixtureRun fixture_run() {
  FixtureRun r;
  r.scenario = load_scenario(fixture);
  std::vector<PrefixSuffixPlan> plans;
  for (const auto& p : synthesize_plans(r.scenario)) {
    if (!p.plan) throw std::runtime_error("fixture formula without a plan");
    plans.push_back(*p.plan);
  }
  r.setup = episode_setup(r.scenario, plans);
  RunOptions o = run_options(r.scenario);
  o.t_end = 2 * r.scenario.t_end;
  r.log = run_episode(r.setup, o);
  return r;
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  FixtureRun run = fixture_run();
  const double horizon = run.scenario.t_end;
  const TrajectoryLog first = until(run.log, horizon);
  fmt::print("fixture run: {} agents, h = {}, simulated to {} s in {:.1f} s\n", run.setup.agents.size(),
             run.scenario.h, 2 * horizon,
             std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

  report(1, "safety on the five-agent fixture", [&] {
    if (!reached_beyond(run.log, horizon)) return Outcome{false, "run stopped early: " + run.log.events.back().detail};
    auto g = check_guarantees(first, run.setup.agents, run.setup.interaction);
    bool edges = first.all_edges.size() == 10 && first.initial_edges.size() == 5;
    return Outcome{edges && g.collision_free && g.connectivity_maintained && g.min_beta_col > 0 && g.min_beta_con > 0,
                   fmt::format("{} collision edges, {} connectivity edges, min beta_col = {:.4g}, min beta_con = {:.4g}",
                               first.all_edges.size(), first.initial_edges.size(), g.min_beta_col, g.min_beta_con)};
  });

  report(2, "liveness: priority order and agent 1's second goal", [&] {
    std::vector<const SimEvent*> goals;
    for (std::size_t k = 0; k < first.events.size(); ++k)
      if (first.events[k].kind == EventKind::GoalReached) goals.push_back(&first.events[k]);
    if (goals.size() < 6) return Outcome{false, fmt::format("only {} goals reached", goals.size())};
    bool ok = true;
    std::string trace;
    for (std::size_t k = 0; k < 6; ++k) {
      const SimEvent& e = *goals[k];
      std::size_t agent = k < 5 ? k : 0;
      std::size_t s = k < 5 ? 0 : run.setup.plans[0].advance(0);
      const PlanStep& want = run.setup.plans[agent].at(s);
      // the services follow the goal at the same instant
      auto it = std::find_if(first.events.begin(), first.events.end(), [&](const SimEvent& x) {
        return x.kind == EventKind::ServicesProvided && x.t == e.t && x.agent == e.agent;
      });
      bool served = it != first.events.end() && it->point == want.point && it->services == want.services;
      ok = ok && e.agent == agent && e.point == want.point && served;
      trace += fmt::format("{}{}@{}:{:.1f}", k ? " " : "", run.scenario.agents[e.agent].name,
                           run.scenario.points[e.point].id, e.t);
    }
    return Outcome{ok, trace};
  });

  report(3, "adaptation nondecreasing and bounded over twice the horizon", [&] {
    if (!reached_beyond(run.log, 2 * horizon - 1e-6)) return Outcome{false, "long run stopped early"};
    auto g1 = check_guarantees(first, run.setup.agents, run.setup.interaction);
    auto g2 = check_guarantees(run.log, run.setup.agents, run.setup.interaction);
    return Outcome{g2.adaptation_nondecreasing && g2.bounded && std::isfinite(g2.max_a_hat),
                   fmt::format("max a_hat {:.4g} by t = {}, {:.4g} by t = {}", g1.max_a_hat, horizon, g2.max_a_hat,
                               2 * horizon)};
  });

  report(4, "Lyapunov function nonincreasing along segments", [&] {
    auto g = check_guarantees(first, run.setup.agents, run.setup.interaction);
    double frac = g.lyapunov_steps ? static_cast<double>(g.lyapunov_within_tolerance) / g.lyapunov_steps : 0.0;
    return Outcome{g.lyapunov_steps > 0 && g.lyapunov_monotone,
                   fmt::format("{}/{} steps within tolerance ({:.5f}), max increase {:.3g}, V(0) = {:.6g}",
                               g.lyapunov_within_tolerance, g.lyapunov_steps, frac, g.lyapunov_max_increase,
                               g.lyapunov_initial)};
  });

  report(5, "automaton acceptance agrees with lasso evaluation", [&] {
    testing::Rng rng(5);
    auto atoms = testing::atom_names(3);
    int pairs = 0, disagreements = 0;
    for (int k = 0; k < 1000; ++k) {
      Formula f = testing::random_formula(rng, atoms, 4);
      LassoWord w = testing::random_lasso(rng, atoms, 4, 4);
      ++pairs;
      if (accepts_lasso(ltl_to_buchi(f), w) != eval_lasso(f, w)) ++disagreements;
    }
    return Outcome{disagreements == 0, fmt::format("{} pairs, {} disagreements", pairs, disagreements)};
  });

  report(6, "plan validity for the five task formulas", [&] {
    const Scenario& s = run.scenario;
    auto plans = synthesize_plans(s);
    int valid = 0, reference_valid = 0;
    auto at = [](std::size_t point, std::string service) { return PlanStep{point, {std::move(service)}}; };
    for (std::size_t i = 0; i < plans.size(); ++i) {
      if (plans[i].plan && verify_plan(*plans[i].plan, plans[i].formula)) ++valid;
      // reference plans listed with the scenario; c1..c4 are points 0..3
      std::vector<PrefixSuffixPlan> reference{
          {{}, {at(0, "r1"), at(2, "g1"), at(3, "m1"), at(1, "b1")}},
          {{at(1, "b2"), at(3, "m2")}, {at(0, "r2"), at(1, "b2")}},
          {{at(3, "m3"), at(2, "g3")}, {at(0, "r3"), at(1, "b3")}},
          {{}, {at(2, "g4"), at(1, "b4"), at(3, "m4"), at(2, "g4")}},
          {{at(0, "r5")}, {at(3, "m5"), at(2, "g5"), at(1, "b5")}},
      };
      if (verify_plan(reference[i], plans[i].formula) && plan_respects_labels(reference[i], plans[i].ts))
        ++reference_valid;
    }
    return Outcome{valid == 5 && reference_valid == 5,
                   fmt::format("{}/5 synthesized plans valid, {}/5 reference plans valid", valid, reference_valid)};
  });

  report(7, "controller numerics", [&] {
    testing::Rng rng(7);
    double grad_col = testing::recip_grad_fd_error(rng, collision_barrier(1, 1, 4), 100);
    double grad_con = testing::recip_grad_fd_error(rng, connectivity_barrier(4), 100);
    double args = testing::barrier_args_fd_error(rng, 100);
    double vector_form = 0, net = 0;
    for (int k = 0; k < 100; ++k) {
      auto c = testing::random_configuration(rng, 2 + rng.below(5), 0.05);
      std::vector<double> d(c.x.size(), 4.0);
      Team team(c.params, sense_edges(c.x, d), {});
      double scale = std::max(1.0, interaction_vector_form(c.x, team).lpNorm<Eigen::Infinity>());
      vector_form = std::max(vector_form, testing::vector_form_mismatch(c, team) / scale);
      net = std::max(net, testing::net_interaction_force(c, team));
    }
    bool ok = grad_col < 1e-6 && grad_con < 1e-6 && args < 1e-6 && vector_form < 1e-13 && net <= 1e-12;
    return Outcome{ok, fmt::format("grad rel err col {:.2g}, con {:.2g}, iota/eta {:.2g}; vector form rel {:.2g}; "
                                   "net force {:.2g}",
                                   grad_col, grad_con, args, vector_form, net)};
  });

  report(8, "single agent converges to its goal", [&] {
    testing::Rng rng(8);
    double worst = 0;
    for (int k = 0; k < 5; ++k) {
      Vec c(3);
      do {
        for (int j = 0; j < 3; ++j) c[j] = rng.uniform(-10, 10);
      } while (c.norm() > 10);
      auto log = run_episode(testing::single_agent_setup(c), {200.0, 0.005, 1.0, 0.0});
      if (!log.completed || log.samples.empty()) return Outcome{false, "run did not complete"};
      worst = std::max(worst, (log.samples.back().x[0] - c).norm());
    }
    return Outcome{worst < 1e-2, fmt::format("worst final distance {:.3g} m over 5 goals", worst)};
  });

  report(9, "integrator order", [&] {
    double order = testing::observed_order(testing::single_agent_setup(Eigen::Vector3d(3, -2, 4)), 2.0, 0.02);
    return Outcome{order >= 3.5, fmt::format("observed order {:.3f}", order)};
  });

  return failures == 0 ? 0 : 1;
}
