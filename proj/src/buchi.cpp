#include "ltlmas/buchi.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <queue>
#include <stdexcept>

#include "ltlmas/nested_dfs.hpp"

namespace ltlmas {

bool Guard::admits(const Letter& letter) const {
  for (const auto& a : pos)
    if (!letter.contains(a)) return false;
  for (const auto& a : neg)
    if (letter.contains(a)) return false;
  return true;
}

std::string to_string(const Guard& g) {
  if (g.pos.empty() && g.neg.empty()) return "true";
  std::string out;
  for (const auto& a : g.pos) out += (out.empty() ? "" : " & ") + a;
  for (const auto& a : g.neg) out += (out.empty() ? "!" : " & !") + a;
  return out;
}

BuchiAutomaton::BuchiAutomaton(std::set<std::string> alphabet, std::size_t num_states,
                               std::vector<std::size_t> initial, std::vector<bool> accepting,
                               std::vector<Transition> transitions)
    : alphabet_(std::move(alphabet)),
      num_states_(num_states),
      initial_(std::move(initial)),
      accepting_(std::move(accepting)),
      transitions_(std::move(transitions)),
      out_(num_states) {
  if (accepting_.size() != num_states_) throw std::invalid_argument("accepting flags do not match state count");
  for (auto s : initial_)
    if (s >= num_states_) throw std::invalid_argument("initial state out of range");
  std::sort(transitions_.begin(), transitions_.end());
  transitions_.erase(std::unique(transitions_.begin(), transitions_.end()), transitions_.end());
  for (const auto& t : transitions_) {
    if (t.from >= num_states_ || t.to >= num_states_) throw std::invalid_argument("transition out of range");
    for (const auto* side : {&t.guard.pos, &t.guard.neg})
      for (const auto& a : *side)
        if (!alphabet_.contains(a)) throw std::invalid_argument("guard references undeclared atom '" + a + "'");
    out_[t.from].push_back(t);
  }
  for (auto& v : out_)
    std::sort(v.begin(), v.end(), [](const Transition& a, const Transition& b) {
      return std::tie(a.guard, a.to) < std::tie(b.guard, b.to);
    });
}

// ---------------------------------------------------------------------------
// Tableau expansion

namespace {

using FormulaSet = std::set<int>;

struct TableauNode {
  std::set<std::size_t> incoming;
  FormulaSet fresh;
  FormulaSet old;
  FormulaSet next;
};

class Tableau {
 public:
  explicit Tableau(const Formula& f) {
    root_ = intern(to_nnf(f));
    TableauNode start;
    start.incoming.insert(0);
    start.fresh.insert(root_);
    expand(std::move(start));
  }

  GeneralizedBuchi result() const {
    GeneralizedBuchi g;
    g.num_states = nodes_.size() + 1;
    g.initial = {0};
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
      Guard guard;
      for (int id : nodes_[k].old) {
        const Formula& f = subs_[id];
        if (f.op() == Op::Atom) guard.pos.insert(f.name());
        else if (f.op() == Op::Not && f.child(0).op() == Op::Atom) guard.neg.insert(f.child(0).name());
      }
      for (auto p : nodes_[k].incoming) g.transitions.push_back({p, guard, k + 1});
    }
    for (std::size_t id = 0; id < subs_.size(); ++id) {
      const Formula& u = subs_[id];
      if (u.op() != Op::Until) continue;
      int rhs = lookup(u.rhs());
      std::set<std::size_t> accept;
      for (std::size_t k = 0; k < nodes_.size(); ++k) {
        const auto& old = nodes_[k].old;
        if (!old.contains(static_cast<int>(id)) || old.contains(rhs)) accept.insert(k + 1);
      }
      g.acceptance_sets.push_back(std::move(accept));
    }
    return g;
  }

 private:
  int intern(const Formula& f) {
    for (std::size_t i = 0; i < f.arity(); ++i) intern(f.child(i));
    auto key = to_string(f);
    auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
    int id = static_cast<int>(subs_.size());
    subs_.push_back(f);
    ids_.emplace(std::move(key), id);
    return id;
  }

  int lookup(const Formula& f) const {
    auto it = ids_.find(to_string(f));
    return it == ids_.end() ? -1 : it->second;
  }

  static void add_unless_old(TableauNode& n, int id) {
    if (!n.old.contains(id)) n.fresh.insert(id);
  }

  void expand(TableauNode n) {
    if (n.fresh.empty()) {
      for (auto& existing : nodes_) {
        if (existing.old == n.old && existing.next == n.next) {
          existing.incoming.insert(n.incoming.begin(), n.incoming.end());
          return;
        }
      }
      nodes_.push_back(n);
      TableauNode succ;
      succ.incoming.insert(nodes_.size());
      succ.fresh = n.next;
      expand(std::move(succ));
      return;
    }
    int id = *n.fresh.begin();
    n.fresh.erase(n.fresh.begin());
    if (n.old.contains(id)) {
      expand(std::move(n));
      return;
    }
    const Formula f = subs_[id];
    switch (f.op()) {
      case Op::True:
        n.old.insert(id);
        expand(std::move(n));
        return;
      case Op::Atom:
      case Op::Not: {
        if (f.is_false()) return;
        Formula complement = f.op() == Op::Atom ? Formula::negation(f) : f.child(0);
        int cid = lookup(complement);
        if (cid >= 0 && n.old.contains(cid)) return;
        n.old.insert(id);
        expand(std::move(n));
        return;
      }
      case Op::And:
        add_unless_old(n, lookup(f.lhs()));
        add_unless_old(n, lookup(f.rhs()));
        n.old.insert(id);
        expand(std::move(n));
        return;
      case Op::Next:
        n.next.insert(lookup(f.child(0)));
        n.old.insert(id);
        expand(std::move(n));
        return;
      case Op::Or:
      case Op::Until:
      case Op::Release: {
        TableauNode a = n;
        TableauNode b = std::move(n);
        int l = lookup(f.lhs());
        int r = lookup(f.rhs());
        if (f.op() == Op::Or) {
          add_unless_old(a, l);
          add_unless_old(b, r);
        } else if (f.op() == Op::Until) {
          add_unless_old(a, l);
          a.next.insert(id);
          add_unless_old(b, r);
        } else {
          add_unless_old(a, r);
          a.next.insert(id);
          add_unless_old(b, l);
          add_unless_old(b, r);
        }
        a.old.insert(id);
        b.old.insert(id);
        expand(std::move(a));
        expand(std::move(b));
        return;
      }
      default: throw std::logic_error("formula not in negation normal form");
    }
  }

  std::vector<Formula> subs_;
  std::map<std::string, int> ids_;
  int root_ = 0;
  std::vector<TableauNode> nodes_;
};

}  // namespace

GeneralizedBuchi ltl_to_generalized_buchi(const Formula& f) { return Tableau(f).result(); }

BuchiAutomaton degeneralize(const GeneralizedBuchi& g, std::set<std::string> alphabet) {
  const std::size_t k = g.acceptance_sets.size();
  if (k <= 1) {
    std::vector<bool> acc(g.num_states, k == 0);
    if (k == 1)
      for (auto s : g.acceptance_sets[0]) acc.at(s) = true;
    return BuchiAutomaton(std::move(alphabet), g.num_states, g.initial, std::move(acc), g.transitions);
  }
  auto id = [k](std::size_t q, std::size_t i) { return q * k + i; };
  std::vector<bool> acc(g.num_states * k, false);
  for (auto q : g.acceptance_sets[0]) acc[id(q, 0)] = true;
  std::vector<Transition> ts;
  for (const auto& t : g.transitions) {
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t j = g.acceptance_sets[i].contains(t.from) ? (i + 1) % k : i;
      ts.push_back({id(t.from, i), t.guard, id(t.to, j)});
    }
  }
  std::vector<std::size_t> init;
  for (auto q : g.initial) init.push_back(id(q, 0));
  return BuchiAutomaton(std::move(alphabet), g.num_states * k, std::move(init), std::move(acc), std::move(ts));
}

BuchiAutomaton reduce(const BuchiAutomaton& a) {
  // reachable states
  std::vector<bool> seen(a.num_states(), false);
  std::vector<std::size_t> order;
  std::queue<std::size_t> queue;
  for (auto s : a.initial())
    if (!seen[s]) {
      seen[s] = true;
      queue.push(s);
    }
  while (!queue.empty()) {
    auto s = queue.front();
    queue.pop();
    order.push_back(s);
    for (const auto& t : a.out(s))
      if (!seen[t.to]) {
        seen[t.to] = true;
        queue.push(t.to);
      }
  }

  // partition refinement
  std::vector<std::size_t> block(a.num_states(), 0);
  for (auto s : order) block[s] = a.accepting(s) ? 1 : 0;
  std::size_t num_blocks = 0;
  for (;;) {
    using Signature = std::pair<std::size_t, std::set<std::pair<Guard, std::size_t>>>;
    std::map<Signature, std::size_t> ids;
    std::vector<std::size_t> next(a.num_states(), 0);
    for (auto s : order) {
      Signature sig{block[s], {}};
      for (const auto& t : a.out(s)) sig.second.emplace(t.guard, block[t.to]);
      auto [it, inserted] = ids.emplace(std::move(sig), ids.size());
      next[s] = it->second;
    }
    block = std::move(next);
    if (ids.size() == num_blocks) break;
    num_blocks = ids.size();
  }

  // breadth-first renumbering of blocks
  std::vector<std::size_t> rep(num_blocks, a.num_states());
  for (auto s : order)
    if (rep[block[s]] == a.num_states()) rep[block[s]] = s;
  std::map<std::size_t, std::size_t> number;
  std::vector<std::size_t> bfs;
  auto visit = [&](std::size_t b) {
    if (number.emplace(b, number.size()).second) bfs.push_back(b);
  };
  for (auto s : a.initial()) visit(block[s]);
  for (std::size_t i = 0; i < bfs.size(); ++i) {
    std::set<std::pair<Guard, std::size_t>> succ;
    for (const auto& t : a.out(rep[bfs[i]])) succ.emplace(t.guard, block[t.to]);
    for (const auto& [g, b] : succ) visit(b);
  }

  std::vector<bool> acc(bfs.size());
  std::vector<Transition> ts;
  for (std::size_t i = 0; i < bfs.size(); ++i) {
    acc[i] = a.accepting(rep[bfs[i]]);
    for (const auto& t : a.out(rep[bfs[i]])) ts.push_back({i, t.guard, number.at(block[t.to])});
  }
  std::vector<std::size_t> init;
  for (auto s : a.initial()) init.push_back(number.at(block[s]));
  std::sort(init.begin(), init.end());
  init.erase(std::unique(init.begin(), init.end()), init.end());
  return BuchiAutomaton(a.alphabet(), bfs.size(), std::move(init), std::move(acc), std::move(ts));
}

BuchiAutomaton ltl_to_buchi(const Formula& f) { return reduce(degeneralize(ltl_to_generalized_buchi(f), atoms(f))); }

// ---------------------------------------------------------------------------
// Lasso membership

namespace {

struct LassoPositions {
  const LassoWord& w;
  std::size_t size() const { return w.stem.size() + w.period.size(); }
  const Letter& letter(std::size_t i) const { return i < w.stem.size() ? w.stem[i] : w.period[i - w.stem.size()]; }
  std::size_t succ(std::size_t i) const { return i + 1 < size() ? i + 1 : w.stem.size(); }
};

}  // namespace

bool accepts_lasso(const BuchiAutomaton& a, const LassoWord& w) {
  if (w.period.empty()) throw std::invalid_argument("lasso word with empty period");
  LassoPositions pos{w};
  using State = std::pair<std::size_t, std::size_t>;  // (automaton state, position)
  std::vector<State> init;
  for (auto q : a.initial()) init.emplace_back(q, 0);
  auto successors = [&](const State& s) {
    std::vector<std::pair<int, State>> out;
    const Letter& l = pos.letter(s.second);
    for (const auto& t : a.out(s.first))
      if (t.guard.admits(l)) out.push_back({0, State{t.to, pos.succ(s.second)}});
    return out;
  };
  auto accepting = [&](const State& s) { return a.accepting(s.first); };
  return nested_dfs<State, int>(init, successors, accepting).has_value();
}

bool accepts_lasso(const GeneralizedBuchi& g, const LassoWord& w) {
  if (w.period.empty()) throw std::invalid_argument("lasso word with empty period");
  LassoPositions pos{w};
  const std::size_t n = pos.size();
  auto index = [n](std::size_t q, std::size_t p) { return q * n + p; };
  const std::size_t total = g.num_states * n;

  std::vector<std::vector<std::size_t>> adj(total);
  for (const auto& t : g.transitions)
    for (std::size_t p = 0; p < n; ++p)
      if (t.guard.admits(pos.letter(p))) adj[index(t.from, p)].push_back(index(t.to, pos.succ(p)));

  // Tarjan over states reachable from the initial ones.
  std::vector<int> idx(total, -1), low(total, 0), comp(total, -1);
  std::vector<bool> on_stack(total, false);
  std::vector<std::size_t> stack;
  int counter = 0, num_comps = 0;
  std::function<void(std::size_t)> strongconnect = [&](std::size_t v) {
    idx[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (auto u : adj[v]) {
      if (idx[u] < 0) {
        strongconnect(u);
        low[v] = std::min(low[v], low[u]);
      } else if (on_stack[u]) {
        low[v] = std::min(low[v], idx[u]);
      }
    }
    if (low[v] == idx[v]) {
      std::size_t u;
      do {
        u = stack.back();
        stack.pop_back();
        on_stack[u] = false;
        comp[u] = num_comps;
      } while (u != v);
      ++num_comps;
    }
  };
  for (auto q : g.initial)
    if (idx[index(q, 0)] < 0) strongconnect(index(q, 0));

  std::vector<bool> nontrivial(num_comps, false);
  std::vector<std::vector<bool>> hits(num_comps, std::vector<bool>(g.acceptance_sets.size(), false));
  for (std::size_t v = 0; v < total; ++v) {
    if (comp[v] < 0) continue;
    for (auto u : adj[v])
      if (comp[u] == comp[v]) nontrivial[comp[v]] = true;
    for (std::size_t k = 0; k < g.acceptance_sets.size(); ++k)
      if (g.acceptance_sets[k].contains(v / n)) hits[comp[v]][k] = true;
  }
  for (int c = 0; c < num_comps; ++c)
    if (nontrivial[c] && std::all_of(hits[c].begin(), hits[c].end(), [](bool b) { return b; })) return true;
  return false;
}

LassoWord Lasso::word() const {
  LassoWord w;
  for (const auto& s : stem) w.stem.push_back(s.letter);
  for (const auto& s : cycle) w.period.push_back(s.letter);
  return w;
}

std::optional<Lasso> find_accepting_lasso(const BuchiAutomaton& a) {
  auto successors = [&](const std::size_t& s) {
    std::vector<std::pair<Letter, std::size_t>> out;
    for (const auto& t : a.out(s)) out.emplace_back(t.guard.pos, t.to);
    return out;
  };
  auto accepting = [&](const std::size_t& s) { return a.accepting(s); };
  auto path = nested_dfs<std::size_t, Letter>(a.initial(), successors, accepting);
  if (!path) return std::nullopt;
  Lasso lasso{path->start, {}, {}};
  for (auto& [l, s] : path->stem) lasso.stem.push_back({l, s});
  for (auto& [l, s] : path->cycle) lasso.cycle.push_back({l, s});
  return lasso;
}

std::string to_text(const BuchiAutomaton& a) {
  std::string out = "states " + std::to_string(a.num_states()) + "\ninitial";
  for (auto s : a.initial()) out += " " + std::to_string(s);
  out += "\naccepting";
  for (std::size_t s = 0; s < a.num_states(); ++s)
    if (a.accepting(s)) out += " " + std::to_string(s);
  out += "\n";
  for (const auto& t : a.transitions())
    out += std::to_string(t.from) + " -> " + std::to_string(t.to) + " : " + to_string(t.guard) + "\n";
  return out;
}

}  // namespace ltlmas
