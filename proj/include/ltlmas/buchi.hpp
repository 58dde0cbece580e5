#pragma once

// Nondeterministic Büchi automata over the alphabet 2^AP, with transitions
// guarded by conjunctions of literals, and the LTL translation
// (tableau expansion -> generalized Büchi -> counter degeneralization).

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ltlmas/ltl.hpp"

namespace ltlmas {

/// Conjunction of required (`pos`) and forbidden (`neg`) atoms.
struct Guard {
  std::set<std::string> pos;
  std::set<std::string> neg;

  bool admits(const Letter& letter) const;
  auto operator<=>(const Guard&) const = default;
};

std::string to_string(const Guard& g);

struct Transition {
  std::size_t from;
  Guard guard;
  std::size_t to;

  auto operator<=>(const Transition&) const = default;
};

/// Generalized Büchi automaton: a run is accepting if it visits every
/// acceptance set infinitely often. No sets means every infinite run accepts.
struct GeneralizedBuchi {
  std::size_t num_states = 0;
  std::vector<std::size_t> initial;
  std::vector<Transition> transitions;
  std::vector<std::set<std::size_t>> acceptance_sets;
};

class BuchiAutomaton {
 public:
  BuchiAutomaton(std::set<std::string> alphabet, std::size_t num_states, std::vector<std::size_t> initial,
                 std::vector<bool> accepting, std::vector<Transition> transitions);

  const std::set<std::string>& alphabet() const { return alphabet_; }
  std::size_t num_states() const { return num_states_; }
  const std::vector<std::size_t>& initial() const { return initial_; }
  bool accepting(std::size_t s) const { return accepting_.at(s); }
  const std::vector<Transition>& transitions() const { return transitions_; }
  /// Outgoing transitions of `s`, sorted by (guard, target).
  const std::vector<Transition>& out(std::size_t s) const { return out_.at(s); }

 private:
  std::set<std::string> alphabet_;
  std::size_t num_states_;
  std::vector<std::size_t> initial_;
  std::vector<bool> accepting_;
  std::vector<Transition> transitions_;
  std::vector<std::vector<Transition>> out_;
};

/// Tableau expansion of to_nnf(f): one acceptance set per Until subformula.
GeneralizedBuchi ltl_to_generalized_buchi(const Formula& f);

/// Counter-based degeneralization to a single acceptance set.
BuchiAutomaton degeneralize(const GeneralizedBuchi& g, std::set<std::string> alphabet);

/// Quotient by the coarsest bisimulation that respects acceptance; reachable
/// states only, renumbered breadth-first from the initial states.
BuchiAutomaton reduce(const BuchiAutomaton& a);

/// Accepts exactly the words satisfying `f`.
BuchiAutomaton ltl_to_buchi(const Formula& f);

/// Membership of stem . period^omega, by nested DFS on the product with the
/// lasso positions.
bool accepts_lasso(const BuchiAutomaton& a, const LassoWord& w);

/// Membership for the generalized automaton, by SCC analysis of the product.
bool accepts_lasso(const GeneralizedBuchi& g, const LassoWord& w);

struct LassoStep {
  Letter letter;
  std::size_t state;
};

/// An accepting run over an ultimately periodic word.
struct Lasso {
  std::size_t start;
  std::vector<LassoStep> stem;
  std::vector<LassoStep> cycle;

  LassoWord word() const;
};

/// Witness of nonemptiness, or nullopt for the empty language. Each letter
/// is the smallest one admitted by its transition guard.
std::optional<Lasso> find_accepting_lasso(const BuchiAutomaton& a);

/// Textual dump:
///
///   states <n>
///   initial <s> ...
///   accepting <s> ...
///   <from> -> <to> : <guard>
std::string to_text(const BuchiAutomaton& a);

}  // namespace ltlmas
