#include <doctest.h>

#include "benchmarks.hpp"
#include "ltlmas/simulator.hpp"
#include "support.hpp"

using namespace ltlmas;
using testing::Rng;

namespace {

PlanStep step(std::size_t point, const char* service) { return {point, {service}}; }

// Two agents 2.5 m apart taking turns at points next to them.
EpisodeSetup two_agent_setup() {
  AgentModel m;
  m.params.gravity = Eigen::Vector3d(0, 0, 9.81);
  m.inertia = Eigen::Matrix3d::Identity();
  m.uncertainty = {0.5, 1.0, 0.3};
  EpisodeSetup s;
  s.agents = {m, m};
  s.agents[0].priority = 1;
  s.agents[1].priority = 2;
  s.x0 = {Vec::Zero(3), Eigen::Vector3d(2.5, 0, 0)};
  s.v0 = {Vec::Zero(3), Vec::Zero(3)};
  s.a_hat0 = {0.0, 0.0};
  s.points = {Eigen::Vector3d(0, 1.5, 0), Eigen::Vector3d(2.5, 1.5, 0), Eigen::Vector3d(1.2, -1.5, 0)};
  s.plans = {PrefixSuffixPlan{{}, {step(0, "a"), step(2, "c")}}, PrefixSuffixPlan{{step(2, "c")}, {step(1, "b")}}};
  return s;
}

std::vector<std::size_t> goal_agents(const TrajectoryLog& log) {
  std::vector<std::size_t> out;
  for (const auto& e : log.events)
    if (e.kind == EventKind::GoalReached) out.push_back(e.agent);
  return out;
}

}  // namespace

TEST_CASE("dynamics right-hand side") {
  AgentModel m;
  m.params.gravity = Eigen::Vector3d(0, 0, 9.81);
  m.inertia = 2.0 * Eigen::Matrix3d::Identity();
  std::vector<AgentModel> models{m};
  std::vector<Vec> x{Eigen::Vector3d(1, 2, 3)}, v{Vec::Zero(3)}, u{m.params.gravity};
  auto d = dynamics_rhs(0.0, x, v, u, models);
  CHECK(d.dx[0].isZero());
  CHECK(d.dv[0].isZero());
  CHECK(d.da[0] == 0);

  u[0] = Eigen::Vector3d(1, 0, 9.81);
  d = dynamics_rhs(0.0, x, v, u, models);
  CHECK(d.dv[0].isApprox(Eigen::Vector3d(0.5, 0, 0)));

  models[0].uncertainty = {2.0, 1.0, 0.5};
  v[0] = Eigen::Vector3d(1, 0, 0);
  u[0] = m.params.gravity;
  double t = 0.7;
  d = dynamics_rhs(t, x, v, u, models);
  Vec f = uncertainty_force(models[0].uncertainty, x[0], v[0], t);
  CHECK(f.isApprox(2.0 * std::sqrt(14.0) * std::sin(t + 0.5) * v[0]));
  CHECK(d.dv[0].isApprox(-f / 2));
  CHECK(d.dx[0] == v[0]);
  CHECK(d.da[0] == doctest::Approx(0.1 * std::sqrt(14.0)));
}

TEST_CASE("equilibrium is a fixed point of a step") {
  auto s = testing::single_agent_setup(Vec::Zero(3));
  ClosedLoop loop(s.agents, {}, {});
  WorldState st{0.0, s.x0, s.v0, s.a_hat0, {0}, {1}};
  std::vector<Vec> goals{Vec::Zero(3)};
  loop.step(st, 0.01, goals, {true});
  CHECK(st.x[0].norm() < 1e-14);
  CHECK(st.v[0].norm() < 1e-14);
  CHECK(st.a_hat[0] == 0);
}

TEST_CASE("RK4 converges at fourth order") {
  auto s = testing::single_agent_setup(Eigen::Vector3d(3, -2, 4));
  double order = testing::observed_order(s, 2.0, 0.02);
  MESSAGE("observed order ", order);
  CHECK(order >= 3.5);
}

TEST_CASE("a lone agent converges to its goal") {
  Rng rng(51);
  for (int k = 0; k < 3; ++k) {
    Vec c(3);
    do {
      for (int j = 0; j < 3; ++j) c[j] = rng.uniform(-10, 10);
    } while (c.norm() > 10);
    auto s = testing::single_agent_setup(c);
    auto log = run_episode(s, {200.0, 0.005, 1.0, 0.0});
    REQUIRE(log.completed);
    REQUIRE_FALSE(log.samples.empty());
    CHECK(log.samples.back().t == doctest::Approx(200.0));
    CHECK((log.samples.back().x[0] - c).norm() < 1e-2);
    // N = 1: always active, counter stays at 1
    for (const auto& smp : log.samples) CHECK(smp.mode[0] == 1);
    for (const auto& e : log.events)
      if (e.kind == EventKind::CounterUpdate) CHECK(e.kappa == 1);
  }
}

TEST_CASE("plan index wraps into the suffix") {
  PrefixSuffixPlan loop4{{}, {step(0, "a"), step(1, "b"), step(2, "c"), step(3, "d")}};
  std::vector<Vec> pts{Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(5, 0, 0), Eigen::Vector3d(0, 5, 0),
                       Eigen::Vector3d(0, 0, 5)};
  Coordinator c({1}, {loop4}, pts, {1.0});
  WorldState st{0.0, {Eigen::Vector3d(0, 0, 5)}, {Vec::Zero(3)}, {0.0}, {3}, {1}};
  auto events = c.tick(st);
  REQUIRE(events.size() == 3);
  CHECK(events[0].kind == EventKind::GoalReached);
  CHECK(events[1].kind == EventKind::ServicesProvided);
  CHECK(events[1].services == Letter{"d"});
  CHECK(events[2].kind == EventKind::CounterUpdate);
  CHECK(st.s[0] == 0);
  CHECK(st.kappa[0] == 1);

  PrefixSuffixPlan with_prefix{{step(0, "a")}, {step(1, "b"), step(2, "c")}};
  Coordinator c2({1}, {with_prefix}, pts, {1.0});
  WorldState st2{0.0, {Eigen::Vector3d(0, 5, 0)}, {Vec::Zero(3)}, {0.0}, {2}, {1}};
  c2.tick(st2);
  CHECK(st2.s[0] == 1);
  // outside the sphere nothing happens; the boundary is open
  WorldState far{0.0, {Eigen::Vector3d(6, 0, 0)}, {Vec::Zero(3)}, {0.0}, {1}, {1}};
  CHECK(c2.tick(far).empty());
  CHECK(far.s[0] == 1);
}

TEST_CASE("counters rotate the active agent") {
  std::vector<Vec> pts{Vec::Zero(3)};
  PrefixSuffixPlan p{{}, {step(0, "a")}};
  Coordinator c({2, 3, 1}, {p, p, p}, pts, {1.0, 1.0, 1.0});
  WorldState st{0.0, std::vector<Vec>(3, Vec::Zero(3)), std::vector<Vec>(3, Vec::Zero(3)), {0, 0, 0}, {0, 0, 0}, {1, 1, 1}};
  std::vector<std::size_t> order;
  for (int k = 0; k < 6; ++k) {
    auto cur = c.active_agent(st);
    REQUIRE(cur);
    order.push_back(*cur);
    auto modes = c.modes(st);
    CHECK(std::count(modes.begin(), modes.end(), true) == 1);
    c.tick(st);
    CHECK(st.kappa[0] == st.kappa[1]);
    CHECK(st.kappa[1] == st.kappa[2]);
    for (int kv : st.kappa) CHECK((kv >= 1 && kv <= 3));
  }
  CHECK(order == std::vector<std::size_t>{2, 0, 1, 2, 0, 1});
}

TEST_CASE("two agents take turns and stay safe") {
  auto s = two_agent_setup();
  auto log = run_episode(s, {60.0, 0.005, 0.5, 0.0});
  REQUIRE(log.completed);
  auto order = goal_agents(log);
  REQUIRE(order.size() >= 4);
  for (std::size_t k = 0; k < order.size(); ++k) CHECK(order[k] == k % 2);

  for (const auto& smp : log.samples) {
    for (double b : smp.beta_col) CHECK(b > 0);
    for (double b : smp.beta_con) CHECK(b > 0);
    CHECK(std::count(smp.mode.begin(), smp.mode.end(), 1) == 1);
  }
  for (std::size_t k = 1; k < log.events.size(); ++k) CHECK(log.events[k - 1].t <= log.events[k].t);
  // right after every goal all counters agree
  for (const auto& smp : log.samples) CHECK(smp.kappa[0] == smp.kappa[1]);
  for (std::size_t k = 1; k < log.samples.size(); ++k)
    for (std::size_t i = 0; i < 2; ++i) CHECK(log.samples[k].a_hat[i] >= log.samples[k - 1].a_hat[i]);
}

TEST_CASE("runs are deterministic") {
  auto s = two_agent_setup();
  auto a = run_episode(s, {20.0, 0.005, 0.5, 0.0});
  auto b = run_episode(s, {20.0, 0.005, 0.5, 0.0});
  CHECK(a.events == b.events);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t k = 0; k < a.samples.size(); ++k) CHECK(a.samples[k].x == b.samples[k].x);
}

TEST_CASE("zero horizon produces an empty log") {
  auto log = run_episode(two_agent_setup(), {0.0, 0.005, 0.5, 0.0});
  CHECK(log.completed);
  CHECK(log.samples.empty());
  CHECK(log.events.empty());
}

TEST_CASE("broadcast delay holds the next agent back") {
  auto s = two_agent_setup();
  const double delay = 0.5;
  auto log = run_episode(s, {30.0, 0.005, 0.5, delay});
  REQUIRE(log.completed);
  const SimEvent* goal = nullptr;
  for (const auto& e : log.events)
    if (e.kind == EventKind::GoalReached) {
      goal = &e;
      break;
    }
  REQUIRE(goal);
  bool delivered = false;
  for (const auto& e : log.events) {
    if (e.kind != EventKind::CounterUpdate || e.agent == goal->agent) continue;
    CHECK(e.t == doctest::Approx(goal->t + delay).epsilon(1e-6));
    delivered = true;
    break;
  }
  CHECK(delivered);
  // nobody is active while the update is in flight
  for (const auto& smp : log.samples)
    if (smp.t > goal->t + 1e-9 && smp.t < goal->t + delay - 1e-9) CHECK(std::count(smp.mode.begin(), smp.mode.end(), 1) == 0);
  CHECK(goal_agents(log).size() >= 2);
}

TEST_CASE("configuration errors") {
  auto s = two_agent_setup();
  s.x0[1] = Eigen::Vector3d(6, 0, 0);
  CHECK_THROWS_AS(run_episode(s, {}), ConfigurationError);
  s = two_agent_setup();
  s.x0[1] = Eigen::Vector3d(1.5, 0, 0);
  CHECK_THROWS_AS(run_episode(s, {}), ConfigurationError);
  s = two_agent_setup();
  s.agents[1].priority = 1;
  CHECK_THROWS_AS(run_episode(s, {}), ConfigurationError);
  s = two_agent_setup();
  s.agents[0].inertia(0, 1) = 0.5;
  CHECK_THROWS_AS(run_episode(s, {}), ConfigurationError);
  s = two_agent_setup();
  s.agents[0].params.sensing_radius = 2.0;
  CHECK_THROWS_AS(run_episode(s, {}), ConfigurationError);
  CHECK_THROWS_AS(run_episode(two_agent_setup(), {10.0, 0.0, 0.5, 0.0}), ConfigurationError);
}

TEST_CASE("a forced collision is recorded and ends the run") {
  auto s = two_agent_setup();
  // a huge pull straight through the other agent with barely any repulsion
  s.agents[0].params.gains.goal = 4000;
  s.agents[0].params.gains.damping = 0.1;
  s.interaction.mu_col = 1e-9;
  s.points[0] = Eigen::Vector3d(5, 0, 0);
  s.plans[0] = PrefixSuffixPlan{{}, {step(0, "a")}};
  auto log = run_episode(s, {20.0, 0.005, 0.5, 0.0});
  CHECK_FALSE(log.completed);
  REQUIRE_FALSE(log.events.empty());
  CHECK(log.events.back().kind == EventKind::InvariantViolation);
}
