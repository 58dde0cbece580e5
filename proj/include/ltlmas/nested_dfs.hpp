#pragma once

// Nested depth-first search for an accepting lasso in an implicitly given
// graph: an outer DFS in successor order, and from every accepting state (in
// DFS post-order) an inner DFS looking for a path back to that state.

#include <functional>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

namespace ltlmas {

template <class State, class Label>
struct LassoPath {
  State start;
  /// Edges from `start` to the cycle entry. Empty when the cycle passes
  /// through `start`.
  std::vector<std::pair<Label, State>> stem;
  /// Nonempty; the last target equals the cycle entry.
  std::vector<std::pair<Label, State>> cycle;

  const State& cycle_entry() const { return stem.empty() ? start : stem.back().second; }
};

/// `successors(s)` returns `std::vector<std::pair<Label, State>>` in the order
/// to explore; `accepting(s)` tells Büchi acceptance. States need `operator<`.
template <class State, class Label, class Successors, class Accepting>
std::optional<LassoPath<State, Label>> nested_dfs(std::span<const State> initial, Successors&& successors,
                                                  Accepting&& accepting) {
  using Edge = std::pair<Label, State>;
  std::set<State> outer_seen;
  std::set<State> inner_seen;
  std::vector<Edge> outer_path;
  std::vector<Edge> inner_path;
  const State* seed = nullptr;

  std::function<bool(const State&)> inner = [&](const State& s) -> bool {
    inner_seen.insert(s);
    for (auto& edge : successors(s)) {
      inner_path.push_back(edge);
      if (!(edge.second < *seed) && !(*seed < edge.second)) return true;
      if (!inner_seen.contains(edge.second) && inner(edge.second)) return true;
      inner_path.pop_back();
    }
    return false;
  };

  std::function<bool(const State&)> outer = [&](const State& s) -> bool {
    outer_seen.insert(s);
    for (auto& edge : successors(s)) {
      if (outer_seen.contains(edge.second)) continue;
      outer_path.push_back(edge);
      if (outer(edge.second)) return true;
      outer_path.pop_back();
    }
    if (accepting(s)) {
      seed = &s;
      inner_path.clear();
      if (inner(s)) return true;
    }
    return false;
  };

  for (const State& s0 : initial) {
    if (outer_seen.contains(s0)) continue;
    outer_path.clear();
    if (outer(s0)) return LassoPath<State, Label>{s0, outer_path, inner_path};
  }
  return std::nullopt;
}

}  // namespace ltlmas
