#pragma once

// Random generators and reference implementations shared by the tests.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ltlmas/ltl.hpp"

namespace testing {

using ltlmas::Formula;
using ltlmas::LassoWord;
using ltlmas::Letter;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(gen_); }
  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

inline std::vector<std::string> atom_names(std::size_t k) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(std::string(1, static_cast<char>('a' + i)));
  return out;
}

/// Random formula of depth <= max_depth over `atoms`, using every surface
/// operator.
inline Formula random_formula(Rng& rng, const std::vector<std::string>& atoms, std::size_t max_depth) {
  if (max_depth == 0 || rng.coin(0.25)) {
    std::size_t k = rng.below(atoms.size() + 1);
    return k == atoms.size() ? Formula::top() : Formula::atom(atoms[k]);
  }
  auto sub = [&] { return random_formula(rng, atoms, max_depth - 1); };
  switch (rng.below(9)) {
    case 0: return Formula::negation(sub());
    case 1: return Formula::conj(sub(), sub());
    case 2: return Formula::disj(sub(), sub());
    case 3: return Formula::implies(sub(), sub());
    case 4: return Formula::next(sub());
    case 5: return Formula::until(sub(), sub());
    case 6: return Formula::eventually(sub());
    case 7: return Formula::always(sub());
    default: return Formula::release(sub(), sub());
  }
}

inline Letter random_letter(Rng& rng, const std::vector<std::string>& atoms) {
  Letter l;
  for (const auto& a : atoms)
    if (rng.coin()) l.insert(a);
  return l;
}

inline LassoWord random_lasso(Rng& rng, const std::vector<std::string>& atoms, std::size_t max_stem,
                              std::size_t max_period) {
  LassoWord w;
  std::size_t s = rng.below(max_stem + 1);
  std::size_t p = 1 + rng.below(max_period);
  for (std::size_t i = 0; i < s; ++i) w.stem.push_back(random_letter(rng, atoms));
  for (std::size_t i = 0; i < p; ++i) w.period.push_back(random_letter(rng, atoms));
  return w;
}

/// Direct recursive semantics on the infinite word. A witness for an
/// eventuality at position i, if any, appears within |stem| + |period|
/// positions, so every temporal operator scans a bounded window.
class ReferenceSemantics {
 public:
  explicit ReferenceSemantics(const LassoWord& w) : w_(w) {}

  const Letter& at(std::size_t i) const {
    if (i < w_.stem.size()) return w_.stem[i];
    return w_.period[(i - w_.stem.size()) % w_.period.size()];
  }

  bool holds(const Formula& f, std::size_t i = 0) const {
    using ltlmas::Op;
    const std::size_t window = w_.stem.size() + w_.period.size();
    switch (f.op()) {
      case Op::True: return true;
      case Op::Atom: return at(i).contains(f.name());
      case Op::Not: return !holds(f.child(0), i);
      case Op::And: return holds(f.lhs(), i) && holds(f.rhs(), i);
      case Op::Or: return holds(f.lhs(), i) || holds(f.rhs(), i);
      case Op::Implies: return !holds(f.lhs(), i) || holds(f.rhs(), i);
      case Op::Next: return holds(f.child(0), i + 1);
      case Op::Until:
        for (std::size_t j = i; j < i + window; ++j) {
          if (holds(f.rhs(), j)) return true;
          if (!holds(f.lhs(), j)) return false;
        }
        return false;
      case Op::Release:
        // b holds until and including the first a, or forever
        for (std::size_t j = i; j < i + window; ++j) {
          if (!holds(f.rhs(), j)) return false;
          if (holds(f.lhs(), j)) return true;
        }
        return true;
      case Op::Eventually:
        for (std::size_t j = i; j < i + window; ++j)
          if (holds(f.child(0), j)) return true;
        return false;
      case Op::Always:
        for (std::size_t j = i; j < i + window; ++j)
          if (!holds(f.child(0), j)) return false;
        return true;
    }
    return false;
  }

 private:
  const LassoWord& w_;
};

/// Central difference of a scalar function of one variable.
inline double central_difference(const std::function<double(double)>& f, double x, double step) {
  return (f(x + step) - f(x - step)) / (2 * step);
}

}  // namespace testing
