#pragma once

// Linear temporal logic: syntax tree, parser, normal forms and lasso-word
// evaluation.
//
// Concrete syntax (ASCII):
//
//   formula := impl
//   impl    := or [ "->" impl ]            right associative
//   or      := and { "|" and }
//   and     := until { "&" until }
//   until   := unary [ "U" until ]         right associative
//   unary   := ("!" | "X" | "F" | "G") unary | primary
//   primary := "true" | "false" | atom | "(" formula ")"
//
// Precedence, tightest first: unary, U, &, |, ->. Atoms are identifiers
// ([A-Za-z_][A-Za-z0-9_]*) other than the keywords true, false, X, U, F, G.
// "false" is read as !true.

#include <cstddef>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ltlmas {

/// A service an agent can provide; `owner` is the agent index.
struct AtomicProposition {
  std::string name;
  std::size_t owner = 0;

  auto operator<=>(const AtomicProposition&) const = default;
};

/// Throws std::invalid_argument if a name is declared twice (within one agent
/// or across agents).
void check_disjoint(std::span<const AtomicProposition> props);

enum class Op {
  True,
  Atom,
  Not,
  And,
  Next,
  Until,
  // derived
  Or,
  Implies,
  Eventually,
  Always,
  // internal only (negation normal form)
  Release,
};

/// Immutable LTL syntax tree with structural equality. Copies share nodes.
class Formula {
 public:
  static Formula top();
  static Formula bottom();  // !true
  static Formula atom(std::string name);
  static Formula negation(Formula f);
  static Formula conj(Formula a, Formula b);
  static Formula disj(Formula a, Formula b);
  static Formula implies(Formula a, Formula b);
  static Formula next(Formula f);
  static Formula until(Formula a, Formula b);
  static Formula release(Formula a, Formula b);
  static Formula eventually(Formula f);
  static Formula always(Formula f);

  Op op() const;
  std::size_t arity() const;
  /// Atom name; empty for non-atoms.
  const std::string& name() const;
  const Formula& child(std::size_t i) const;
  const Formula& lhs() const { return child(0); }
  const Formula& rhs() const { return child(1); }

  bool is_false() const;

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> node);
  static Formula make(Op op, std::string name, std::vector<Formula> children);

  std::shared_ptr<const Node> node_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what), position_(position) {}
  /// Byte offset in the input where the error was detected.
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Parses `text`; every atom must be in `props`.
Formula parse_ltl(std::string_view text, const std::set<std::string>& props);
/// Parses `text` without an atom declaration check.
Formula parse_ltl(std::string_view text);

/// Fully parenthesised printer; parse_ltl(to_string(f)) == f for formulas
/// without Release.
std::string to_string(const Formula& f);

/// Rewrites into {True, Atom, Not, And, Next, Until}.
Formula to_core(const Formula& f);

/// Negation normal form over {True, !True, Atom, !Atom, And, Or, Next,
/// Until, Release}. Accepts any formula.
Formula to_nnf(const Formula& f);

bool is_core(const Formula& f);
bool is_nnf(const Formula& f);

std::set<std::string> atoms(const Formula& f);
std::size_t depth(const Formula& f);

/// One position of a word: the set of propositions that hold.
using Letter = std::set<std::string>;

/// The infinite word stem . period^omega.
struct LassoWord {
  std::vector<Letter> stem;
  std::vector<Letter> period;

  auto operator<=>(const LassoWord&) const = default;
};

std::string to_string(const Letter& letter);
std::string to_string(const LassoWord& w);

/// Satisfaction of `f` by stem . period^omega. Evaluates every subformula at
/// each of the |stem| + |period| distinct positions; Until is a least and
/// Release a greatest fixpoint over the lasso. Throws std::invalid_argument
/// on an empty period.
bool eval_lasso(const Formula& f, const LassoWord& w);

}  // namespace ltlmas
