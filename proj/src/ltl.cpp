#include "ltlmas/ltl.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>

namespace ltlmas {

struct Formula::Node {
  Op op;
  std::string name;
  std::vector<Formula> children;
};

Formula::Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Formula Formula::make(Op op, std::string name, std::vector<Formula> children) {
  return Formula(std::make_shared<const Node>(Node{op, std::move(name), std::move(children)}));
}

Formula Formula::top() { return make(Op::True, {}, {}); }
Formula Formula::bottom() { return negation(top()); }
Formula Formula::atom(std::string name) {
  if (name.empty()) throw std::invalid_argument("empty atom name");
  return make(Op::Atom, std::move(name), {});
}
Formula Formula::negation(Formula f) { return make(Op::Not, {}, {std::move(f)}); }
Formula Formula::conj(Formula a, Formula b) { return make(Op::And, {}, {std::move(a), std::move(b)}); }
Formula Formula::disj(Formula a, Formula b) { return make(Op::Or, {}, {std::move(a), std::move(b)}); }
Formula Formula::implies(Formula a, Formula b) {
  return make(Op::Implies, {}, {std::move(a), std::move(b)});
}
Formula Formula::next(Formula f) { return make(Op::Next, {}, {std::move(f)}); }
Formula Formula::until(Formula a, Formula b) { return make(Op::Until, {}, {std::move(a), std::move(b)}); }
Formula Formula::release(Formula a, Formula b) {
  return make(Op::Release, {}, {std::move(a), std::move(b)});
}
Formula Formula::eventually(Formula f) { return make(Op::Eventually, {}, {std::move(f)}); }
Formula Formula::always(Formula f) { return make(Op::Always, {}, {std::move(f)}); }

Op Formula::op() const { return node_->op; }
std::size_t Formula::arity() const { return node_->children.size(); }
const std::string& Formula::name() const { return node_->name; }
const Formula& Formula::child(std::size_t i) const { return node_->children.at(i); }
bool Formula::is_false() const { return op() == Op::Not && child(0).op() == Op::True; }

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  if (a.op() != b.op() || a.name() != b.name() || a.arity() != b.arity()) return false;
  for (std::size_t i = 0; i < a.arity(); ++i)
    if (!(a.child(i) == b.child(i))) return false;
  return true;
}

void check_disjoint(std::span<const AtomicProposition> props) {
  std::map<std::string, std::size_t> seen;
  for (const auto& p : props) {
    auto [it, inserted] = seen.emplace(p.name, p.owner);
    if (!inserted) {
      throw std::invalid_argument("proposition '" + p.name + "' declared by agents " +
                                  std::to_string(it->second) + " and " + std::to_string(p.owner));
    }
  }
}

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class Tok { Ident, True, False, Not, And, Or, Implies, Next, Until, Eventually, Always, LParen, RParen, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (std::isalpha(c) || c == '_') {
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
      std::string word(s.substr(start, i - start));
      Tok kind = Tok::Ident;
      if (word == "true") kind = Tok::True;
      else if (word == "false") kind = Tok::False;
      else if (word == "X") kind = Tok::Next;
      else if (word == "U") kind = Tok::Until;
      else if (word == "F") kind = Tok::Eventually;
      else if (word == "G") kind = Tok::Always;
      out.push_back({kind, std::move(word), start});
      continue;
    }
    switch (c) {
      case '!': out.push_back({Tok::Not, "!", start}); ++i; break;
      case '&': out.push_back({Tok::And, "&", start}); ++i; break;
      case '|': out.push_back({Tok::Or, "|", start}); ++i; break;
      case '(': out.push_back({Tok::LParen, "(", start}); ++i; break;
      case ')': out.push_back({Tok::RParen, ")", start}); ++i; break;
      case '-':
        if (i + 1 < s.size() && s[i + 1] == '>') {
          out.push_back({Tok::Implies, "->", start});
          i += 2;
          break;
        }
        [[fallthrough]];
      default:
        throw ParseError("unexpected character '" + std::string(1, static_cast<char>(c)) + "' at " +
                             std::to_string(start),
                         start);
    }
  }
  out.push_back({Tok::End, "", s.size()});
  return out;
}

class Parser {
 public:
  Parser(std::string_view text, const std::set<std::string>* props) : tokens_(tokenize(text)), props_(props) {}

  Formula parse() {
    Formula f = implication();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    return f;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& advance() { return tokens_[pos_++]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    const auto& t = peek();
    std::string where = t.kind == Tok::End ? "end of input" : "position " + std::to_string(t.pos);
    throw ParseError(msg + " at " + where, t.pos);
  }

  Formula implication() {
    Formula lhs = disjunction();
    if (accept(Tok::Implies)) return Formula::implies(std::move(lhs), implication());
    return lhs;
  }
  Formula disjunction() {
    Formula f = conjunction();
    while (accept(Tok::Or)) f = Formula::disj(std::move(f), conjunction());
    return f;
  }
  Formula conjunction() {
    Formula f = until();
    while (accept(Tok::And)) f = Formula::conj(std::move(f), until());
    return f;
  }
  Formula until() {
    Formula lhs = unary();
    if (accept(Tok::Until)) return Formula::until(std::move(lhs), until());
    return lhs;
  }
  Formula unary() {
    if (accept(Tok::Not)) return Formula::negation(unary());
    if (accept(Tok::Next)) return Formula::next(unary());
    if (accept(Tok::Eventually)) return Formula::eventually(unary());
    if (accept(Tok::Always)) return Formula::always(unary());
    return primary();
  }
  Formula primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::True: advance(); return Formula::top();
      case Tok::False: advance(); return Formula::bottom();
      case Tok::Ident:
        if (props_ && !props_->contains(t.text))
          throw ParseError("undeclared atom '" + t.text + "' at position " + std::to_string(t.pos), t.pos);
        advance();
        return Formula::atom(t.text);
      case Tok::LParen: {
        advance();
        Formula f = implication();
        if (!accept(Tok::RParen)) fail("expected ')'");
        return f;
      }
      case Tok::End: fail("unexpected end of formula");
      default: fail("unexpected '" + t.text + "'");
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const std::set<std::string>* props_;
};

}  // namespace

Formula parse_ltl(std::string_view text, const std::set<std::string>& props) { return Parser(text, &props).parse(); }

Formula parse_ltl(std::string_view text) { return Parser(text, nullptr).parse(); }

// ---------------------------------------------------------------------------
// Printing

std::string to_string(const Formula& f) {
  auto unary = [&](const char* op) {
    const Formula& c = f.child(0);
    return std::string(op) + (c.arity() == 2 ? to_string(c) : " " + to_string(c));
  };
  auto binary = [&](const char* op) { return "(" + to_string(f.lhs()) + " " + op + " " + to_string(f.rhs()) + ")"; };
  switch (f.op()) {
    case Op::True: return "true";
    case Op::Atom: return f.name();
    case Op::Not: return unary("!");
    case Op::Next: return unary("X");
    case Op::Eventually: return unary("F");
    case Op::Always: return unary("G");
    case Op::And: return binary("&");
    case Op::Or: return binary("|");
    case Op::Implies: return binary("->");
    case Op::Until: return binary("U");
    case Op::Release: return binary("R");
  }
  return {};
}

std::string to_string(const Letter& letter) {
  std::string out = "{";
  bool first = true;
  for (const auto& a : letter) {
    if (!first) out += ",";
    out += a;
    first = false;
  }
  return out + "}";
}

std::string to_string(const LassoWord& w) {
  std::string out;
  for (const auto& l : w.stem) out += to_string(l) + " ";
  out += "(";
  for (std::size_t i = 0; i < w.period.size(); ++i) out += (i ? " " : "") + to_string(w.period[i]);
  return out + ")^w";
}

// ---------------------------------------------------------------------------
// Normal forms

Formula to_core(const Formula& f) {
  using F = Formula;
  switch (f.op()) {
    case Op::True:
    case Op::Atom: return f;
    case Op::Not: return F::negation(to_core(f.child(0)));
    case Op::Next: return F::next(to_core(f.child(0)));
    case Op::And: return F::conj(to_core(f.lhs()), to_core(f.rhs()));
    case Op::Until: return F::until(to_core(f.lhs()), to_core(f.rhs()));
    case Op::Or:
      return F::negation(F::conj(F::negation(to_core(f.lhs())), F::negation(to_core(f.rhs()))));
    case Op::Implies: return F::negation(F::conj(to_core(f.lhs()), F::negation(to_core(f.rhs()))));
    case Op::Eventually: return F::until(F::top(), to_core(f.child(0)));
    case Op::Always: return F::negation(F::until(F::top(), F::negation(to_core(f.child(0)))));
    case Op::Release:
      return F::negation(F::until(F::negation(to_core(f.lhs())), F::negation(to_core(f.rhs()))));
  }
  return f;
}

namespace {

Formula nnf(const Formula& f, bool negated) {
  using F = Formula;
  switch (f.op()) {
    case Op::True: return negated ? F::bottom() : f;
    case Op::Atom: return negated ? F::negation(f) : f;
    case Op::Not: return nnf(f.child(0), !negated);
    case Op::Next: return F::next(nnf(f.child(0), negated));
    case Op::And:
      return negated ? F::disj(nnf(f.lhs(), true), nnf(f.rhs(), true))
                     : F::conj(nnf(f.lhs(), false), nnf(f.rhs(), false));
    case Op::Or:
      return negated ? F::conj(nnf(f.lhs(), true), nnf(f.rhs(), true))
                     : F::disj(nnf(f.lhs(), false), nnf(f.rhs(), false));
    case Op::Implies:
      return negated ? F::conj(nnf(f.lhs(), false), nnf(f.rhs(), true))
                     : F::disj(nnf(f.lhs(), true), nnf(f.rhs(), false));
    case Op::Until:
      return negated ? F::release(nnf(f.lhs(), true), nnf(f.rhs(), true))
                     : F::until(nnf(f.lhs(), false), nnf(f.rhs(), false));
    case Op::Release:
      return negated ? F::until(nnf(f.lhs(), true), nnf(f.rhs(), true))
                     : F::release(nnf(f.lhs(), false), nnf(f.rhs(), false));
    case Op::Eventually:
      return negated ? F::release(F::bottom(), nnf(f.child(0), true)) : F::until(F::top(), nnf(f.child(0), false));
    case Op::Always:
      return negated ? F::until(F::top(), nnf(f.child(0), true)) : F::release(F::bottom(), nnf(f.child(0), false));
  }
  return f;
}

}  // namespace

Formula to_nnf(const Formula& f) { return nnf(f, false); }

bool is_core(const Formula& f) {
  switch (f.op()) {
    case Op::True:
    case Op::Atom: return true;
    case Op::Not:
    case Op::Next: return is_core(f.child(0));
    case Op::And:
    case Op::Until: return is_core(f.lhs()) && is_core(f.rhs());
    default: return false;
  }
}

bool is_nnf(const Formula& f) {
  switch (f.op()) {
    case Op::True:
    case Op::Atom: return true;
    case Op::Not: return f.child(0).op() == Op::True || f.child(0).op() == Op::Atom;
    case Op::Next: return is_nnf(f.child(0));
    case Op::And:
    case Op::Or:
    case Op::Until:
    case Op::Release: return is_nnf(f.lhs()) && is_nnf(f.rhs());
    default: return false;
  }
}

namespace {
void collect_atoms(const Formula& f, std::set<std::string>& out) {
  if (f.op() == Op::Atom) out.insert(f.name());
  for (std::size_t i = 0; i < f.arity(); ++i) collect_atoms(f.child(i), out);
}
}  // namespace

std::set<std::string> atoms(const Formula& f) {
  std::set<std::string> out;
  collect_atoms(f, out);
  return out;
}

std::size_t depth(const Formula& f) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < f.arity(); ++i) d = std::max(d, depth(f.child(i)));
  return f.arity() == 0 ? 0 : d + 1;
}

// ---------------------------------------------------------------------------
// Lasso evaluation

namespace {

class LassoEvaluator {
 public:
  explicit LassoEvaluator(const LassoWord& w) : w_(w), n_(w.stem.size() + w.period.size()) {}

  std::vector<bool> eval(const Formula& f) const {
    std::vector<bool> out(n_);
    switch (f.op()) {
      case Op::True: out.assign(n_, true); break;
      case Op::Atom:
        for (std::size_t i = 0; i < n_; ++i) out[i] = letter(i).contains(f.name());
        break;
      case Op::Not: {
        auto a = eval(f.child(0));
        for (std::size_t i = 0; i < n_; ++i) out[i] = !a[i];
        break;
      }
      case Op::Next: {
        auto a = eval(f.child(0));
        for (std::size_t i = 0; i < n_; ++i) out[i] = a[succ(i)];
        break;
      }
      case Op::And:
      case Op::Or:
      case Op::Implies: {
        auto a = eval(f.lhs());
        auto b = eval(f.rhs());
        for (std::size_t i = 0; i < n_; ++i) {
          out[i] = f.op() == Op::And ? (a[i] && b[i]) : f.op() == Op::Or ? (a[i] || b[i]) : (!a[i] || b[i]);
        }
        break;
      }
      case Op::Until: out = until(eval(f.lhs()), eval(f.rhs())); break;
      case Op::Release: out = release(eval(f.lhs()), eval(f.rhs())); break;
      case Op::Eventually: out = until(std::vector<bool>(n_, true), eval(f.child(0))); break;
      case Op::Always: out = release(std::vector<bool>(n_, false), eval(f.child(0))); break;
    }
    return out;
  }

 private:
  const Letter& letter(std::size_t i) const {
    return i < w_.stem.size() ? w_.stem[i] : w_.period[i - w_.stem.size()];
  }
  std::size_t succ(std::size_t i) const { return i + 1 < n_ ? i + 1 : w_.stem.size(); }

  // Least fixpoint of U = b | (a & X U), iterated from all-false.
  std::vector<bool> until(const std::vector<bool>& a, const std::vector<bool>& b) const {
    std::vector<bool> u(n_, false);
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t k = n_; k-- > 0;) {
        bool v = b[k] || (a[k] && u[succ(k)]);
        if (v != u[k]) {
          u[k] = v;
          changed = true;
        }
      }
    }
    return u;
  }

  // Greatest fixpoint of R = b & (a | X R), iterated from all-true.
  std::vector<bool> release(const std::vector<bool>& a, const std::vector<bool>& b) const {
    std::vector<bool> r(n_, true);
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t k = n_; k-- > 0;) {
        bool v = b[k] && (a[k] || r[succ(k)]);
        if (v != r[k]) {
          r[k] = v;
          changed = true;
        }
      }
    }
    return r;
  }

  const LassoWord& w_;
  std::size_t n_;
};

}  // namespace

bool eval_lasso(const Formula& f, const LassoWord& w) {
  if (w.period.empty()) throw std::invalid_argument("lasso word with empty period");
  return LassoEvaluator(w).eval(f)[0];
}

}  // namespace ltlmas
