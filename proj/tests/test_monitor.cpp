#include <doctest.h>

#include "ltlmas/monitor.hpp"

using namespace ltlmas;

namespace {

PlanStep step(std::size_t point, const char* service) { return {point, {service}}; }

Sample sample(double t, std::vector<Vec> x, std::vector<double> a_hat = {}) {
  Sample s;
  s.t = t;
  s.x = std::move(x);
  s.v.assign(s.x.size(), Vec::Zero(3));
  s.a_hat = a_hat.empty() ? std::vector<double>(s.x.size(), 0.0) : std::move(a_hat);
  return s;
}

// Two agents with E_0 = {(1,2)} and the given samples of agent 2's x-coordinate.
TrajectoryLog pair_log(std::initializer_list<double> head_x) {
  TrajectoryLog log;
  log.agents = 2;
  log.dimension = 3;
  log.h = 0.1;
  log.initial_edges = {{0, 1}};
  log.all_edges = {{0, 1}};
  double t = 0;
  for (double hx : head_x) {
    log.samples.push_back(sample(t, {Vec::Zero(3), Eigen::Vector3d(hx, 0, 0)}));
    t += 0.1;
  }
  log.completed = true;
  return log;
}

std::vector<AgentModel> pair_models() {
  AgentModel m;
  m.params.gravity = Vec::Zero(3);
  m.inertia = Eigen::Matrix3d::Identity();
  m.uncertainty.amplitude = 1.0;
  return {m, m};
}

SimEvent provided(double t, std::size_t agent, std::size_t point, Letter services) {
  return {EventKind::ServicesProvided, t, agent, point, std::move(services), 0, {}};
}

// One agent walking along x through points at x = 0, 5 and 10 (radius 1).
TrajectoryLog walk_log(double t_end) {
  TrajectoryLog log;
  log.agents = 1;
  log.dimension = 3;
  log.h = 0.1;
  for (int k = 0; k * 0.1 <= t_end + 1e-9; ++k) {
    double t = k * 0.1;
    log.samples.push_back(sample(t, {Eigen::Vector3d(t, 0, 0)}));
  }
  log.completed = true;
  return log;
}

const std::vector<Vec> walk_points{Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(5, 0, 0), Eigen::Vector3d(10, 0, 0)};

}  // namespace

TEST_CASE("connectivity loss is detected") {
  auto models = pair_models();
  auto ok = check_guarantees(pair_log({3.0, 3.5, 3.9}), models, {});
  CHECK(ok.connectivity_maintained);
  CHECK(ok.collision_free);
  CHECK(ok.min_eta == doctest::Approx(16 - 3.9 * 3.9));

  auto broken = check_guarantees(pair_log({3.0, 3.9, 4.2, 3.5}), models, {});
  CHECK_FALSE(broken.connectivity_maintained);
  CHECK(broken.collision_free);
  CHECK(broken.min_beta_con == 0);
}

TEST_CASE("collisions are detected") {
  auto models = pair_models();
  auto hit = check_guarantees(pair_log({3.0, 2.0, 1.9}), models, {});
  CHECK_FALSE(hit.collision_free);
  CHECK(hit.connectivity_maintained);
  CHECK(hit.min_iota < 0);
  // touching is already a violation of the strict barrier
  CHECK_FALSE(check_guarantees(pair_log({3.0, 2.0}), models, {}).collision_free);
}

TEST_CASE("Lyapunov monotonicity with tolerance") {
  auto models = pair_models();
  auto log = pair_log({3.0, 3.0});
  for (int k = 0; k < 2000; ++k) log.lyapunov.push_back({k * 0.1, 100.0 - 1e-9 * k, 0});
  auto r = check_guarantees(log, models, {});
  CHECK(r.lyapunov_monotone);
  CHECK(r.lyapunov_steps == 1999);
  CHECK(r.lyapunov_within_tolerance == 1999);
  CHECK(r.lyapunov_initial == 100.0);

  // one tiny blip is within the 0.1% budget
  log.lyapunov[1000].value += 1e-6;
  r = check_guarantees(log, models, {});
  CHECK(r.lyapunov_monotone);
  CHECK(r.lyapunov_within_tolerance == 1998);

  // one jump above 1e-4 V0 is not
  log.lyapunov[1500].value += 0.1;
  CHECK_FALSE(check_guarantees(log, models, {}).lyapunov_monotone);

  // jumps across segment boundaries are not steps
  auto seg = pair_log({3.0, 3.0});
  seg.lyapunov = {{0.0, 10.0, 0}, {0.1, 9.0, 0}, {0.1, 50.0, 1}, {0.2, 49.0, 1}};
  r = check_guarantees(seg, models, {});
  CHECK(r.lyapunov_steps == 2);
  CHECK(r.lyapunov_monotone);

  // many small increases exceed the fraction
  auto drift = pair_log({3.0, 3.0});
  for (int k = 0; k < 100; ++k) drift.lyapunov.push_back({k * 0.1, 100.0 + (k % 2 ? 1e-7 : 0.0), 0});
  CHECK_FALSE(check_guarantees(drift, models, {}).lyapunov_monotone);
}

TEST_CASE("adaptation checks") {
  auto models = pair_models();
  auto log = pair_log({3.0, 3.0, 3.0});
  log.samples[0].a_hat = {0.0, 0.0};
  log.samples[1].a_hat = {0.5, 0.1};
  log.samples[2].a_hat = {0.4, 0.2};
  log.lyapunov = {{0.0, 50.0, 0}};
  auto r = check_guarantees(log, models, {});
  CHECK_FALSE(r.adaptation_nondecreasing);
  CHECK(r.bounded);
  CHECK(r.max_a_hat == 0.5);

  // |a_hat - a| > sqrt(2 mu_a V) breaks the envelope
  log.samples[2].a_hat = {0.5, 10.0};
  CHECK_FALSE(check_guarantees(log, models, {}).bounded);
  log.samples[2].a_hat = {0.5, std::numeric_limits<double>::infinity()};
  CHECK_FALSE(check_guarantees(log, models, {}).bounded);
}

TEST_CASE("behavior extraction") {
  auto log = walk_log(10.5);
  std::vector<double> radii{1.0};
  log.events.push_back(provided(5.0, 0, 1, {"b"}));
  auto b = extract_behavior(log, walk_points, radii);
  REQUIRE(b.size() == 1);
  REQUIRE(b[0].size() == 3);
  // unplanned crossing at the start
  CHECK(b[0][0].point == 0);
  CHECK_FALSE(b[0][0].provided);
  CHECK(b[0][0].services.empty());
  CHECK(b[0][1].point == 1);
  CHECK(b[0][1].provided);
  CHECK(b[0][1].services == Letter{"b"});
  CHECK(b[0][1].t_enter == doctest::Approx(4.1));
  CHECK(b[0][1].t_exit == doctest::Approx(5.9));
  CHECK(b[0][2].point == 2);
  for (std::size_t k = 0; k < b[0].size(); ++k) {
    CHECK(b[0][k].t_enter <= b[0][k].t_exit);
    if (k > 0) CHECK(b[0][k - 1].t_exit <= b[0][k].t_enter);
  }

  // an agent that never comes close has an empty behavior
  std::vector<Vec> far{Eigen::Vector3d(0, 50, 0)};
  auto quiet = log;
  quiet.events.clear();
  CHECK(extract_behavior(quiet, far, radii)[0].empty());
  // a provision event outside any logged stay still shows up, with zero length
  auto lone = extract_behavior(log, far, radii)[0];
  REQUIRE(lone.size() == 1);
  CHECK(lone[0].t_enter == lone[0].t_exit);

  // extraction depends only on the log
  CHECK(extract_behavior(log, walk_points, radii) == b);
}

TEST_CASE("satisfaction verdicts") {
  Formula f = parse_ltl("G F a & G F b");
  PrefixSuffixPlan plan{{}, {step(0, "a"), step(1, "b")}};
  std::vector<double> radii{1.0};

  auto log = walk_log(10.5);
  log.events = {provided(0.0, 0, 0, {"a"})};
  auto v = check_satisfaction(extract_behavior(log, walk_points, radii)[0], plan, f);
  CHECK(v.satisfaction == Satisfaction::Inconclusive);
  CHECK(v.plan_followed);
  CHECK(v.planned_visits == 1);
  CHECK(v.progress == doctest::Approx(0.5));

  log.events.push_back(provided(5.0, 0, 1, {"b"}));
  v = check_satisfaction(extract_behavior(log, walk_points, radii)[0], plan, f);
  CHECK(v.satisfaction == Satisfaction::SatisfiedOnObservedLasso);
  CHECK(v.progress == doctest::Approx(1.0));

  // out of plan order
  log.events = {provided(5.0, 0, 1, {"b"})};
  v = check_satisfaction(extract_behavior(log, walk_points, radii)[0], plan, f);
  CHECK(v.satisfaction == Satisfaction::Violated);
  CHECK_FALSE(v.plan_followed);

  // a plan that does not satisfy the formula is violated once a cycle is seen
  PrefixSuffixPlan weak{{}, {step(0, "a")}};
  log.events = {provided(0.0, 0, 0, {"a"})};
  v = check_satisfaction(extract_behavior(log, walk_points, radii)[0], weak, f);
  CHECK(v.satisfaction == Satisfaction::Violated);
  CHECK(v.plan_followed);

  CHECK(std::string(to_string(Satisfaction::Inconclusive)) == "inconclusive");
  CHECK(std::string(to_string(Satisfaction::SatisfiedOnObservedLasso)) == "satisfied");
  CHECK(std::string(to_string(Satisfaction::Violated)) == "violated");
}

TEST_CASE("services only when active") {
  TrajectoryLog log;
  log.agents = 2;
  log.events = {
      provided(1.0, 0, 0, {"a"}),
      {EventKind::CounterUpdate, 1.0, 0, SimEvent::kNone, {}, 2, {}},
      {EventKind::CounterUpdate, 1.0, 1, SimEvent::kNone, {}, 2, {}},
      provided(2.0, 1, 0, {"b"}),
  };
  std::vector<int> prio{1, 2};
  CHECK(services_only_when_active(log, prio) == std::vector<bool>{true, true});

  log.events.push_back(provided(3.0, 0, 0, {"a"}));
  CHECK(services_only_when_active(log, prio) == std::vector<bool>{false, true});
}
