#include "ltlmas/planner.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "ltlmas/nested_dfs.hpp"

namespace ltlmas {

const std::set<std::string>& TransitionSystem::label(std::size_t state) const {
  if (state == initial()) return initial_label_;
  return points_.at(state).services;
}

TransitionSystem build_transition_system(std::vector<PointOfInterest> points, std::optional<std::size_t> initial_at) {
  if (points.empty()) throw std::invalid_argument("transition system needs at least one point of interest");
  std::set<std::string> ids;
  for (const auto& p : points)
    if (!ids.insert(p.id).second) throw std::invalid_argument("duplicate point id '" + p.id + "'");
  TransitionSystem ts;
  if (initial_at) ts.initial_label_ = points.at(*initial_at).services;
  ts.points_ = std::move(points);
  return ts;
}

LassoWord PrefixSuffixPlan::word() const {
  LassoWord w;
  for (const auto& s : prefix) w.stem.push_back(s.services);
  for (const auto& s : suffix) w.period.push_back(s.services);
  return w;
}

namespace {

// Services to provide at a point with `available` services so that `guard`
// holds. Prefers a nonempty set; among those the smallest, then
// lexicographically first. nullopt when the guard cannot be enabled.
std::optional<Letter> enabling_services(const Guard& guard, const std::set<std::string>& available) {
  for (const auto& a : guard.pos)
    if (!available.contains(a)) return std::nullopt;
  if (!guard.pos.empty()) return guard.pos;
  for (const auto& a : available)
    if (!guard.neg.contains(a)) return Letter{a};
  return Letter{};
}

bool better(const Letter& a, const Letter& b) {
  if (a.empty() != b.empty()) return !a.empty();
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

}  // namespace

std::optional<PrefixSuffixPlan> synthesize_plan(const TransitionSystem& ts, const Formula& f) {
  const BuchiAutomaton a = ltl_to_buchi(f);

  // Letters are read on entering a point, so the initial state's label never
  // enters the word and the initial state has no incoming product edges.
  auto successors = [&](const ProductState& s) {
    std::vector<std::pair<Letter, ProductState>> out;
    for (std::size_t c = 0; c < ts.num_points(); ++c) {
      std::map<std::size_t, Letter> best;
      for (const auto& t : a.out(s.automaton_state)) {
        auto sigma = enabling_services(t.guard, ts.label(c));
        if (!sigma) continue;
        auto it = best.find(t.to);
        if (it == best.end()) best.emplace(t.to, std::move(*sigma));
        else if (better(*sigma, it->second)) it->second = std::move(*sigma);
      }
      for (auto& [q, sigma] : best) out.push_back({std::move(sigma), ProductState{c, q}});
    }
    return out;
  };
  auto accepting = [&](const ProductState& s) { return a.accepting(s.automaton_state); };

  std::vector<ProductState> init;
  for (auto q : a.initial()) init.push_back({ts.initial(), q});
  auto lasso = nested_dfs<ProductState, Letter>(init, successors, accepting);
  if (!lasso) return std::nullopt;

  PrefixSuffixPlan plan;
  for (auto& [sigma, s] : lasso->stem) plan.prefix.push_back({s.ts_state, sigma});
  for (auto& [sigma, s] : lasso->cycle) plan.suffix.push_back({s.ts_state, sigma});
  // u^k repeated forever is u repeated forever
  const std::size_t n = plan.suffix.size();
  for (std::size_t p = 1; p < n; ++p) {
    if (n % p != 0) continue;
    bool periodic = true;
    for (std::size_t i = p; i < n && periodic; ++i) periodic = plan.suffix[i] == plan.suffix[i - p];
    if (periodic) {
      plan.suffix.resize(p);
      break;
    }
  }
  // prefix.x (y.x)^w == prefix (x.y)^w
  while (!plan.prefix.empty() && plan.prefix.back() == plan.suffix.back()) {
    plan.prefix.pop_back();
    std::rotate(plan.suffix.rbegin(), plan.suffix.rbegin() + 1, plan.suffix.rend());
  }
  return plan;
}

bool verify_plan(const PrefixSuffixPlan& plan, const Formula& f) {
  if (plan.suffix.empty()) return false;
  return eval_lasso(f, plan.word());
}

bool plan_respects_labels(const PrefixSuffixPlan& plan, const TransitionSystem& ts) {
  if (plan.suffix.empty()) return false;
  for (std::size_t s = 0; s < plan.size(); ++s) {
    const auto& step = plan.at(s);
    if (step.point >= ts.num_points()) return false;
    const auto& available = ts.label(step.point);
    if (!std::includes(available.begin(), available.end(), step.services.begin(), step.services.end())) return false;
  }
  return true;
}

std::string to_string(const PrefixSuffixPlan& plan, const TransitionSystem& ts) {
  auto step = [&](const PlanStep& s) { return "(" + ts.point(s.point).id + "," + to_string(s.services) + ")"; };
  std::string out;
  for (const auto& s : plan.prefix) out += step(s);
  out += "(";
  for (const auto& s : plan.suffix) out += step(s);
  return out + ")^w";
}

}  // namespace ltlmas
