#pragma once

// LTL over observations: temporal formulas whose next-step operators are
// gated by observation descriptors. Formulas are kept in positive normal
// form; `dual` is semantic negation within that form.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "recipe/core.hpp"
#include "recipe/expr.hpp"
#include "recipe/model.hpp"
#include "recipe/semantics.hpp"

namespace recipe {

// The names a formula may mention. State variables are flat, in the same
// order as GlobalState values.
struct Vocabulary {
  struct StateVar {
    std::string name;  // agent.var
    DomainRef domain;
  };

  std::vector<StateVar> state;
  std::vector<VarDecl> common;
  std::vector<VarDecl> data;
  DomainRef channels;
  std::vector<std::string> agents;
  CvSpace cv;

  static Vocabulary of(const SystemDef& sys) {
    Vocabulary v;
    for (const auto& a : sys.agents()) {
      v.agents.push_back(a.id);
      for (const auto& l : a.locals) v.state.push_back({a.id + "." + l.name, l.domain});
    }
    v.common = sys.common();
    v.data = sys.data();
    v.channels = sys.channels();
    v.cv = sys.cv_space();
    return v;
  }

  template <class T>
  static std::optional<std::size_t> find_in(const std::vector<T>& xs, std::string_view name) {
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (xs[i].name == name) return i;
    return std::nullopt;
  }

  std::optional<std::size_t> find_state(std::string_view n) const { return find_in(state, n); }
  std::optional<std::size_t> find_common(std::string_view n) const { return find_in(common, n); }
  std::optional<std::size_t> find_data(std::string_view n) const { return find_in(data, n); }
  std::optional<std::size_t> find_agent(std::string_view n) const {
    for (std::size_t i = 0; i < agents.size(); ++i)
      if (agents[i] == n) return i;
    return std::nullopt;
  }
};

// ---------------------------------------------------------------------------
// Observation descriptors

class Descriptor {
 public:
  enum class Op : std::uint8_t { True, False, Ch, Sender, Data, Cv, Exists, Forall, And, Or };

  struct Node {
    Op op = Op::True;
    bool positive = true;
    std::uint32_t var = 0;  // Data / Cv variable index
    Value value = 0;        // channel, agent, or domain value index
    std::vector<Descriptor> kids;
  };

  Descriptor() : Descriptor(Node{}) {}

  static Descriptor constant(bool v) {
    Node n;
    n.op = v ? Op::True : Op::False;
    return Descriptor(std::move(n));
  }
  static Descriptor atom(Op op, bool positive, std::uint32_t var, Value value) {
    Node n;
    n.op = op;
    n.positive = positive;
    n.var = var;
    n.value = value;
    return Descriptor(std::move(n));
  }
  static Descriptor channel(Value ch, bool positive = true) { return atom(Op::Ch, positive, 0, ch); }
  static Descriptor sender(Value k, bool positive = true) { return atom(Op::Sender, positive, 0, k); }
  static Descriptor data(std::uint32_t var, Value v, bool positive = true) {
    return atom(Op::Data, positive, var, v);
  }
  static Descriptor cv(std::uint32_t var, Value v, bool positive = true) {
    return atom(Op::Cv, positive, var, v);
  }
  static Descriptor unary(Op op, Descriptor d) {
    Node n;
    n.op = op;
    n.kids.push_back(std::move(d));
    return Descriptor(std::move(n));
  }
  static Descriptor exists(Descriptor d) { return unary(Op::Exists, std::move(d)); }
  static Descriptor forall(Descriptor d) { return unary(Op::Forall, std::move(d)); }
  static Descriptor binary(Op op, Descriptor a, Descriptor b) {
    Node n;
    n.op = op;
    n.kids.push_back(std::move(a));
    n.kids.push_back(std::move(b));
    return Descriptor(std::move(n));
  }
  static Descriptor conj(Descriptor a, Descriptor b) { return binary(Op::And, std::move(a), std::move(b)); }
  static Descriptor disj(Descriptor a, Descriptor b) { return binary(Op::Or, std::move(a), std::move(b)); }

  Op op() const { return node_->op; }
  const Node& node() const { return *node_; }
  const Descriptor& kid(std::size_t i) const { return node_->kids[i]; }

  bool operator==(const Descriptor& o) const {
    if (node_ == o.node_) return true;
    const Node& x = *node_;
    const Node& y = *o.node_;
    return x.op == y.op && x.positive == y.positive && x.var == y.var && x.value == y.value &&
           x.kids == y.kids;
  }

 private:
  explicit Descriptor(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}
  std::shared_ptr<const Node> node_;
};

inline Descriptor dual(const Descriptor& d) {
  using Op = Descriptor::Op;
  const auto& n = d.node();
  switch (n.op) {
    case Op::True: return Descriptor::constant(false);
    case Op::False: return Descriptor::constant(true);
    case Op::Ch:
    case Op::Sender:
    case Op::Data:
    case Op::Cv: return Descriptor::atom(n.op, !n.positive, n.var, n.value);
    case Op::Exists: return Descriptor::forall(dual(n.kids[0]));
    case Op::Forall: return Descriptor::exists(dual(n.kids[0]));
    case Op::And: return Descriptor::disj(dual(n.kids[0]), dual(n.kids[1]));
    case Op::Or: return Descriptor::conj(dual(n.kids[0]), dual(n.kids[1]));
  }
  return d;
}

namespace detail {
inline Descriptor normalize(const Descriptor& d, bool quantified) {
  using Op = Descriptor::Op;
  const auto& n = d.node();
  switch (n.op) {
    case Op::Exists:
    case Op::Forall: {
      Descriptor body = normalize(n.kids[0], true);
      // Under a quantifier the predicate is a singleton, where either
      // quantifier is the identity.
      return quantified ? body : Descriptor::unary(n.op, body);
    }
    case Op::And:
    case Op::Or:
      return Descriptor::binary(n.op, normalize(n.kids[0], quantified),
                                normalize(n.kids[1], quantified));
    default: return d;
  }
}
}  // namespace detail

// Removes quantifiers nested under another quantifier.
inline Descriptor normalize(const Descriptor& d) { return detail::normalize(d, false); }

inline bool is_normalized(const Descriptor& d, bool quantified = false) {
  using Op = Descriptor::Op;
  switch (d.op()) {
    case Op::Exists:
    case Op::Forall: return !quantified && is_normalized(d.kid(0), true);
    case Op::And:
    case Op::Or: return is_normalized(d.kid(0), quantified) && is_normalized(d.kid(1), quantified);
    default: return true;
  }
}

namespace detail {
inline bool desc_holds(const Descriptor& d, const Observation& m,
                       std::span<const std::uint32_t> pi, const CvSpace& cv) {
  using Op = Descriptor::Op;
  const auto& n = d.node();
  switch (n.op) {
    case Op::True: return true;
    case Op::False: return false;
    case Op::Ch: return (m.ch == n.value) == n.positive;
    case Op::Sender: return (m.sender == n.value) == n.positive;
    case Op::Data:
      if (n.var >= m.data.size()) throw VocabularyError("undeclared data variable in descriptor");
      return (m.data[n.var] == n.value) == n.positive;
    case Op::Cv:
      if (n.var >= cv.vars()) throw VocabularyError("undeclared common variable in descriptor");
      if (n.positive) {
        for (auto c : pi)
          if (cv.digit(c, n.var) != n.value) return false;
        return true;
      } else {
        for (auto c : pi)
          if (cv.digit(c, n.var) != n.value) return true;
        return false;
      }
    case Op::Exists:
      for (std::size_t i = 0; i < pi.size(); ++i)
        if (desc_holds(n.kids[0], m, pi.subspan(i, 1), cv)) return true;
      return false;
    case Op::Forall:
      for (std::size_t i = 0; i < pi.size(); ++i)
        if (!desc_holds(n.kids[0], m, pi.subspan(i, 1), cv)) return false;
      return true;
    case Op::And: return desc_holds(n.kids[0], m, pi, cv) && desc_holds(n.kids[1], m, pi, cv);
    case Op::Or: return desc_holds(n.kids[0], m, pi, cv) || desc_holds(n.kids[1], m, pi, cv);
  }
  return false;
}
}  // namespace detail

// Descriptor satisfaction by an observation. This is also the evaluation
// function the alternating automaton uses to gate its modal transitions.
inline bool desc_holds(const Descriptor& d, const Observation& m, const CvSpace& cv) {
  return detail::desc_holds(d, m, m.pred.sat, cv);
}

// ---------------------------------------------------------------------------
// Formulas

class Formula {
 public:
  enum class Op : std::uint8_t { True, False, Lit, And, Or, Until, Release, Possible, Necessary };

  struct Node {
    Op op = Op::True;
    bool positive = true;
    std::uint32_t var = 0;  // state variable (flat index)
    Value value = 0;
    Descriptor desc;
    std::vector<Formula> kids;
  };

  Formula() : Formula(Node{}) {}

  static Formula constant(bool v) {
    Node n;
    n.op = v ? Op::True : Op::False;
    return Formula(std::move(n));
  }
  static Formula lit(std::uint32_t var, Value value, bool positive = true) {
    Node n;
    n.op = Op::Lit;
    n.var = var;
    n.value = value;
    n.positive = positive;
    return Formula(std::move(n));
  }
  static Formula binary(Op op, Formula a, Formula b) {
    Node n;
    n.op = op;
    n.kids.push_back(std::move(a));
    n.kids.push_back(std::move(b));
    return Formula(std::move(n));
  }
  static Formula conj(Formula a, Formula b) { return binary(Op::And, std::move(a), std::move(b)); }
  static Formula disj(Formula a, Formula b) { return binary(Op::Or, std::move(a), std::move(b)); }
  static Formula until(Formula a, Formula b) { return binary(Op::Until, std::move(a), std::move(b)); }
  static Formula release(Formula a, Formula b) {
    return binary(Op::Release, std::move(a), std::move(b));
  }
  static Formula modal(Op op, Descriptor d, Formula f) {
    Node n;
    n.op = op;
    n.desc = std::move(d);
    n.kids.push_back(std::move(f));
    return Formula(std::move(n));
  }
  static Formula possible(Descriptor d, Formula f) {
    return modal(Op::Possible, std::move(d), std::move(f));
  }
  static Formula necessary(Descriptor d, Formula f) {
    return modal(Op::Necessary, std::move(d), std::move(f));
  }
  static Formula eventually(Formula f) { return until(constant(true), std::move(f)); }
  static Formula globally(Formula f) { return release(constant(false), std::move(f)); }
  // a W b = b R (b | a)
  static Formula weak_until(Formula a, Formula b) {
    return release(b, disj(b, std::move(a)));
  }

  Op op() const { return node_->op; }
  const Node& node() const { return *node_; }
  const Formula& kid(std::size_t i) const { return node_->kids[i]; }
  std::size_t arity() const { return node_->kids.size(); }

  bool operator==(const Formula& o) const {
    if (node_ == o.node_) return true;
    const Node& x = *node_;
    const Node& y = *o.node_;
    return x.op == y.op && x.positive == y.positive && x.var == y.var && x.value == y.value &&
           x.desc == y.desc && x.kids == y.kids;
  }

 private:
  explicit Formula(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}
  std::shared_ptr<const Node> node_;
};

inline Formula dual(const Formula& f) {
  using Op = Formula::Op;
  const auto& n = f.node();
  switch (n.op) {
    case Op::True: return Formula::constant(false);
    case Op::False: return Formula::constant(true);
    case Op::Lit: return Formula::lit(n.var, n.value, !n.positive);
    case Op::And: return Formula::disj(dual(n.kids[0]), dual(n.kids[1]));
    case Op::Or: return Formula::conj(dual(n.kids[0]), dual(n.kids[1]));
    case Op::Until: return Formula::release(dual(n.kids[0]), dual(n.kids[1]));
    case Op::Release: return Formula::until(dual(n.kids[0]), dual(n.kids[1]));
    // not(<O> f) = [O] not f: the descriptor gate is kept, only the
    // continuation is negated.
    case Op::Possible: return Formula::necessary(n.desc, dual(n.kids[0]));
    case Op::Necessary: return Formula::possible(n.desc, dual(n.kids[0]));
  }
  return f;
}

inline Formula normalize_descriptors(const Formula& f) {
  using Op = Formula::Op;
  const auto& n = f.node();
  switch (n.op) {
    case Op::True:
    case Op::False:
    case Op::Lit: return f;
    case Op::Possible:
    case Op::Necessary:
      return Formula::modal(n.op, normalize(n.desc), normalize_descriptors(n.kids[0]));
    default:
      return Formula::binary(n.op, normalize_descriptors(n.kids[0]),
                             normalize_descriptors(n.kids[1]));
  }
}

// Number of formula nodes (descriptors count as part of their modality).
inline std::size_t formula_size(const Formula& f) {
  std::size_t n = 1;
  for (std::size_t i = 0; i < f.arity(); ++i) n += formula_size(f.kid(i));
  return n;
}

inline void check_vocabulary(const Descriptor& d, const Vocabulary& v) {
  using Op = Descriptor::Op;
  const auto& n = d.node();
  switch (n.op) {
    case Op::Ch:
      if (n.value >= v.channels->size()) throw VocabularyError("descriptor names an undeclared channel");
      break;
    case Op::Sender:
      if (n.value >= v.agents.size()) throw VocabularyError("descriptor names an undeclared agent");
      break;
    case Op::Data:
      if (n.var >= v.data.size() || n.value >= v.data[n.var].domain->size())
        throw VocabularyError("descriptor names an undeclared data variable or value");
      break;
    case Op::Cv:
      if (n.var >= v.common.size() || n.value >= v.common[n.var].domain->size())
        throw VocabularyError("descriptor names an undeclared common variable or value");
      break;
    default:
      for (const auto& k : n.kids) check_vocabulary(k, v);
  }
}

inline void check_vocabulary(const Formula& f, const Vocabulary& v) {
  const auto& n = f.node();
  if (n.op == Formula::Op::Lit &&
      (n.var >= v.state.size() || n.value >= v.state[n.var].domain->size()))
    throw VocabularyError("formula names an undeclared state variable or value");
  if (n.op == Formula::Op::Possible || n.op == Formula::Op::Necessary) check_vocabulary(n.desc, v);
  for (const auto& k : n.kids) check_vocabulary(k, v);
}

// ---------------------------------------------------------------------------
// Lassos: ultimately periodic computations

struct LassoStep {
  Valuation state;
  Observation obs;

  bool operator==(const LassoStep&) const = default;
};

struct Lasso {
  std::vector<LassoStep> prefix;
  std::vector<LassoStep> cycle;

  std::size_t size() const { return prefix.size() + cycle.size(); }
  const LassoStep& at(std::size_t i) const {
    return i < prefix.size() ? prefix[i] : cycle[i - prefix.size()];
  }
  std::size_t succ(std::size_t i) const { return i + 1 < size() ? i + 1 : prefix.size(); }

  // The suffix starting one position later.
  Lasso shifted() const {
    Lasso l = *this;
    if (!l.prefix.empty()) {
      l.prefix.erase(l.prefix.begin());
    } else {
      std::rotate(l.cycle.begin(), l.cycle.begin() + 1, l.cycle.end());
    }
    return l;
  }

  bool operator==(const Lasso&) const = default;
};

namespace detail {
inline std::vector<char> eval_positions(const Formula& f, const Lasso& l, const CvSpace& cv) {
  using Op = Formula::Op;
  const std::size_t n = l.size();
  const auto& node = f.node();
  std::vector<char> out(n, 0);
  switch (node.op) {
    case Op::True: std::fill(out.begin(), out.end(), 1); break;
    case Op::False: break;
    case Op::Lit:
      for (std::size_t i = 0; i < n; ++i) {
        const auto& st = l.at(i).state;
        if (node.var >= st.size()) throw VocabularyError("lasso label lacks a formula variable");
        out[i] = (st[node.var] == node.value) == node.positive;
      }
      break;
    case Op::And:
    case Op::Or: {
      auto a = eval_positions(node.kids[0], l, cv);
      auto b = eval_positions(node.kids[1], l, cv);
      for (std::size_t i = 0; i < n; ++i) out[i] = node.op == Op::And ? (a[i] && b[i]) : (a[i] || b[i]);
      break;
    }
    case Op::Until:
    case Op::Release: {
      auto a = eval_positions(node.kids[0], l, cv);
      auto b = eval_positions(node.kids[1], l, cv);
      const bool until = node.op == Op::Until;
      std::fill(out.begin(), out.end(), until ? 0 : 1);
      for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t i = n; i-- > 0;) {
          char next = out[l.succ(i)];
          char v = until ? (b[i] || (a[i] && next)) : (b[i] && (a[i] || next));
          if (v != out[i]) {
            out[i] = v;
            changed = true;
          }
        }
      }
      break;
    }
    case Op::Possible:
    case Op::Necessary: {
      auto sub = eval_positions(node.kids[0], l, cv);
      for (std::size_t i = 0; i < n; ++i) {
        bool gate = desc_holds(node.desc, l.at(i).obs, cv);
        char next = sub[l.succ(i)];
        out[i] = node.op == Op::Possible ? (gate && next) : (!gate || next);
      }
      break;
    }
  }
  return out;
}
}  // namespace detail

// Truth of `f` at position 0 of the infinite unrolling of `l`.
inline bool holds_on_lasso(const Formula& f, const Lasso& l, const CvSpace& cv) {
  if (l.cycle.empty()) throw Error("lasso cycle must be nonempty");
  return detail::eval_positions(f, l, cv)[0] != 0;
}

// ---------------------------------------------------------------------------
// Printing (surface syntax; re-parses to the same tree)

inline std::string to_string(const Descriptor& d, const Vocabulary& v) {
  using Op = Descriptor::Op;
  const auto& n = d.node();
  auto eq = [&](const std::string& lhs, const std::string& rhs) {
    return lhs + (n.positive ? "=" : "!=") + rhs;
  };
  switch (n.op) {
    case Op::True: return "true";
    case Op::False: return "false";
    case Op::Ch: return eq("ch", v.channels->values[n.value]);
    case Op::Sender: return eq("sender", v.agents[n.value]);
    case Op::Data: return eq("data." + v.data[n.var].name, v.data[n.var].domain->values[n.value]);
    case Op::Cv: return eq("cv." + v.common[n.var].name, v.common[n.var].domain->values[n.value]);
    case Op::Exists: return "E " + to_string(n.kids[0], v);
    case Op::Forall: return "A " + to_string(n.kids[0], v);
    case Op::And:
      return "(" + to_string(n.kids[0], v) + " & " + to_string(n.kids[1], v) + ")";
    case Op::Or:
      return "(" + to_string(n.kids[0], v) + " | " + to_string(n.kids[1], v) + ")";
  }
  return "?";
}

inline std::string to_string(const Formula& f, const Vocabulary& v) {
  using Op = Formula::Op;
  const auto& n = f.node();
  auto bin = [&](const char* op) {
    return "(" + to_string(n.kids[0], v) + " " + op + " " + to_string(n.kids[1], v) + ")";
  };
  switch (n.op) {
    case Op::True: return "true";
    case Op::False: return "false";
    case Op::Lit:
      return v.state[n.var].name + (n.positive ? "=" : "!=") +
             v.state[n.var].domain->values[n.value];
    case Op::And: return bin("&");
    case Op::Or: return bin("|");
    case Op::Until: return bin("U");
    case Op::Release: return bin("R");
    case Op::Possible: return "<" + to_string(n.desc, v) + "> " + to_string(n.kids[0], v);
    case Op::Necessary: return "[" + to_string(n.desc, v) + "] " + to_string(n.kids[0], v);
  }
  return "?";
}

}  // namespace recipe
