#pragma once

// Per-agent discrete plan synthesis: a complete transition system over the
// points of interest, its product with the formula's Büchi automaton, and the
// projection of an accepting lasso into a prefix-suffix plan.

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ltlmas/buchi.hpp"
#include "ltlmas/ltl.hpp"

namespace ltlmas {

struct PointOfInterest {
  std::string id;
  /// Services this agent can provide at the point.
  std::set<std::string> services;
};

/// States 0..K-1 are the points of interest in the given order; state K is
/// the agent's initial position. Every ordered pair of states is a
/// transition.
class TransitionSystem {
 public:
  std::size_t num_points() const { return points_.size(); }
  std::size_t num_states() const { return points_.size() + 1; }
  std::size_t initial() const { return points_.size(); }
  const PointOfInterest& point(std::size_t k) const { return points_.at(k); }
  const std::set<std::string>& label(std::size_t state) const;
  std::size_t num_transitions() const { return num_states() * num_states(); }
  bool has_transition(std::size_t from, std::size_t to) const { return from < num_states() && to < num_states(); }

 private:
  friend TransitionSystem build_transition_system(std::vector<PointOfInterest>, std::optional<std::size_t>);
  std::vector<PointOfInterest> points_;
  std::set<std::string> initial_label_;
};

/// `initial_at` names a point the initial position lies in, whose label the
/// initial state then inherits. Throws std::invalid_argument on duplicate
/// ids or an empty point list.
TransitionSystem build_transition_system(std::vector<PointOfInterest> points,
                                         std::optional<std::size_t> initial_at = std::nullopt);

struct ProductState {
  std::size_t ts_state;
  std::size_t automaton_state;

  auto operator<=>(const ProductState&) const = default;
};

struct PlanStep {
  std::size_t point;
  std::set<std::string> services;

  auto operator<=>(const PlanStep&) const = default;
};

/// prefix . suffix^omega; the suffix is nonempty.
struct PrefixSuffixPlan {
  std::vector<PlanStep> prefix;
  std::vector<PlanStep> suffix;

  /// L, the number of distinct plan steps.
  std::size_t size() const { return prefix.size() + suffix.size(); }
  /// Step by 0-based index in prefix . suffix.
  const PlanStep& at(std::size_t s) const { return s < prefix.size() ? prefix[s] : suffix.at(s - prefix.size()); }
  /// Index after `s`, wrapping from the last step to the first suffix step.
  std::size_t advance(std::size_t s) const { return s + 1 < size() ? s + 1 : prefix.size(); }
  LassoWord word() const;

  auto operator<=>(const PrefixSuffixPlan&) const = default;
};

/// Accepting-lasso search in ts x ltl_to_buchi(f); nullopt when none exists.
std::optional<PrefixSuffixPlan> synthesize_plan(const TransitionSystem& ts, const Formula& f);

/// Whether the service word of the plan satisfies `f`.
bool verify_plan(const PrefixSuffixPlan& plan, const Formula& f);

/// Every step is a point of interest and provides only available services.
bool plan_respects_labels(const PrefixSuffixPlan& plan, const TransitionSystem& ts);

std::string to_string(const PrefixSuffixPlan& plan, const TransitionSystem& ts);

}  // namespace ltlmas
