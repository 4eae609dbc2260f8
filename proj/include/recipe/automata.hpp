#pragma once

// Formula -> alternating Büchi automaton (states = subformulas, accepting =
// Release subformulas), and the Miyano-Hayashi breakpoint construction to a
// nondeterministic Büchi automaton. Both automata are evaluated lazily, one
// letter (state label, observation) at a time.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "recipe/emptiness.hpp"
#include "recipe/ltol.hpp"

namespace recipe {

// ---------------------------------------------------------------------------
// Positive boolean formulas over automaton states, as their set of minimal
// models (a monotone DNF with absorption applied). {} is false, {{}} true.

struct Pbf {
  using Cube = std::vector<std::uint32_t>;  // sorted state ids
  std::vector<Cube> cubes;                  // sorted, pairwise incomparable

  static Pbf top() { return Pbf{{Cube{}}}; }
  static Pbf bottom() { return Pbf{}; }
  static Pbf state(std::uint32_t q) { return Pbf{{Cube{q}}}; }

  bool is_true() const { return cubes.size() == 1 && cubes.front().empty(); }
  bool is_false() const { return cubes.empty(); }

  bool operator==(const Pbf&) const = default;
};

namespace detail {
inline bool subset(const Pbf::Cube& a, const Pbf::Cube& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline Pbf minimize(std::vector<Pbf::Cube> cubes) {
  std::sort(cubes.begin(), cubes.end(), [](const auto& x, const auto& y) {
    return x.size() != y.size() ? x.size() < y.size() : x < y;
  });
  cubes.erase(std::unique(cubes.begin(), cubes.end()), cubes.end());
  Pbf out;
  for (auto& c : cubes) {
    bool absorbed = false;
    for (const auto& k : out.cubes)
      if (subset(k, c)) {
        absorbed = true;
        break;
      }
    if (!absorbed) out.cubes.push_back(std::move(c));
  }
  std::sort(out.cubes.begin(), out.cubes.end());
  return out;
}

inline Pbf::Cube cube_union(const Pbf::Cube& a, const Pbf::Cube& b) {
  Pbf::Cube c;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(c));
  return c;
}
}  // namespace detail

inline Pbf pbf_or(const Pbf& a, const Pbf& b) {
  if (a.is_true() || b.is_false()) return a;
  if (b.is_true() || a.is_false()) return b;
  std::vector<Pbf::Cube> c = a.cubes;
  c.insert(c.end(), b.cubes.begin(), b.cubes.end());
  return detail::minimize(std::move(c));
}

inline Pbf pbf_and(const Pbf& a, const Pbf& b) {
  if (a.is_false() || b.is_true()) return a;
  if (b.is_false() || a.is_true()) return b;
  std::vector<Pbf::Cube> c;
  for (const auto& x : a.cubes)
    for (const auto& y : b.cubes) c.push_back(detail::cube_union(x, y));
  return detail::minimize(std::move(c));
}

// A letter of the paired alphabet: a state label and an observation.
struct Letter {
  std::span<const Value> state;
  const Observation* obs;
};

// ---------------------------------------------------------------------------
// Alternating automaton

class Abw {
 public:
  struct State {
    Formula formula;
    std::uint32_t a = 0;  // child state ids (when present)
    std::uint32_t b = 0;
    Descriptor gate;      // O for <O>; the dual of O for [O]
  };

  Abw(const Formula& phi, CvSpace cv) : cv_(std::move(cv)) {
    init_ = intern(phi);
  }

  std::size_t size() const { return states_.size(); }
  std::uint32_t initial() const { return init_; }
  const State& state(std::uint32_t q) const { return states_[q]; }
  bool accepting(std::uint32_t q) const { return states_[q].formula.op() == Formula::Op::Release; }
  const CvSpace& cv() const { return cv_; }

  // Transition of one state. Children are interned before their parents, so
  // `memo` may be filled in increasing id order.
  Pbf delta(std::uint32_t q, const Letter& letter) const {
    std::vector<std::optional<Pbf>> memo(states_.size());
    return delta(q, letter, memo);
  }

  Pbf delta(std::uint32_t q, const Letter& letter, std::vector<std::optional<Pbf>>& memo) const {
    if (memo[q]) return *memo[q];
    using Op = Formula::Op;
    const State& s = states_[q];
    const auto& n = s.formula.node();
    Pbf r;
    switch (n.op) {
      case Op::True: r = Pbf::top(); break;
      case Op::False: r = Pbf::bottom(); break;
      case Op::Lit: {
        if (n.var >= letter.state.size()) throw VocabularyError("letter lacks a formula variable");
        bool in = (letter.state[n.var] == n.value) == n.positive;
        r = in ? Pbf::top() : Pbf::bottom();
        break;
      }
      case Op::And: r = pbf_and(delta(s.a, letter, memo), delta(s.b, letter, memo)); break;
      case Op::Or: r = pbf_or(delta(s.a, letter, memo), delta(s.b, letter, memo)); break;
      case Op::Until:
        r = pbf_or(pbf_and(delta(s.a, letter, memo), Pbf::state(q)), delta(s.b, letter, memo));
        break;
      case Op::Release:
        r = pbf_and(pbf_or(delta(s.a, letter, memo), Pbf::state(q)), delta(s.b, letter, memo));
        break;
      case Op::Possible:
        r = desc_holds(s.gate, *letter.obs, cv_) ? Pbf::state(s.a) : Pbf::bottom();
        break;
      case Op::Necessary:
        r = desc_holds(s.gate, *letter.obs, cv_) ? Pbf::top() : Pbf::state(s.a);
        break;
    }
    memo[q] = r;
    return r;
  }

  std::string to_dot(const Vocabulary& v) const {
    std::string out = "digraph abw {\n  rankdir=LR;\n";
    for (std::uint32_t q = 0; q < states_.size(); ++q) {
      out += "  q" + std::to_string(q) + " [label=\"" + escape(to_string(states_[q].formula, v)) +
             "\"" + (accepting(q) ? ", shape=doublecircle" : ", shape=circle") + "];\n";
    }
    out += "  init [shape=point];\n  init -> q" + std::to_string(init_) + ";\n";
    for (std::uint32_t q = 0; q < states_.size(); ++q) {
      using Op = Formula::Op;
      const auto op = states_[q].formula.op();
      auto edge = [&](std::uint32_t t) {
        out += "  q" + std::to_string(q) + " -> q" + std::to_string(t) + ";\n";
      };
      if (op == Op::Until || op == Op::Release) edge(q);
      if (op == Op::Possible || op == Op::Necessary) edge(states_[q].a);
    }
    out += "}\n";
    return out;
  }

 private:
  static std::string escape(const std::string& s) {
    std::string o;
    for (char c : s) {
      if (c == '"' || c == '\\') o += '\\';
      o += c;
    }
    return o;
  }

  std::uint32_t intern(const Formula& f) {
    for (std::uint32_t i = 0; i < states_.size(); ++i)
      if (states_[i].formula == f) return i;
    State s;
    s.formula = f;
    using Op = Formula::Op;
    switch (f.op()) {
      case Op::And:
      case Op::Or:
      case Op::Until:
      case Op::Release:
        s.a = intern(f.kid(0));
        s.b = intern(f.kid(1));
        break;
      case Op::Possible:
        s.a = intern(f.kid(0));
        s.gate = f.node().desc;
        break;
      case Op::Necessary:
        s.a = intern(f.kid(0));
        s.gate = dual(f.node().desc);
        break;
      default: break;
    }
    states_.push_back(std::move(s));
    return static_cast<std::uint32_t>(states_.size() - 1);
  }

  CvSpace cv_;
  std::vector<State> states_;
  std::uint32_t init_ = 0;
};

inline Abw build_abw(const Formula& phi, const Vocabulary& vocab) {
  check_vocabulary(phi, vocab);
  return Abw(phi, vocab.cv);
}

// ---------------------------------------------------------------------------
// Nondeterministic automaton by the breakpoint construction. A state is a
// pair (S, O) with O ⊆ S: S the pending obligations, O those still owing a
// visit to an accepting state since the last breakpoint. O = ∅ is accepting.

class Nbw {
 public:
  using StateSet = std::vector<std::uint32_t>;
  struct State {
    StateSet current;
    StateSet owing;
    auto operator<=>(const State&) const = default;
  };

  explicit Nbw(const Abw& abw, std::size_t max_states = std::size_t{1} << 20)
      : abw_(&abw), max_states_(max_states) {
    intern({{abw.initial()}, {}});
  }

  const Abw& abw() const { return *abw_; }
  std::uint32_t initial() const { return 0; }
  std::size_t state_count() const { return states_.size(); }
  const State& state(std::uint32_t id) const { return states_[id]; }
  bool accepting(std::uint32_t id) const { return states_[id].owing.empty(); }

  // Successors of `id` on `letter`. `letter_key` identifies the letter for
  // memoisation and must be unique per letter until reset_letters().
  const std::vector<std::uint32_t>& successors(std::uint32_t id, const Letter& letter,
                                               std::uint64_t letter_key) {
    const Key key{id, letter_key};
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    std::vector<std::optional<Pbf>> dmemo(abw_->size());
    const State src = states_[id];
    auto conj = [&](const StateSet& qs) {
      Pbf acc = Pbf::top();
      for (auto q : qs) {
        acc = pbf_and(acc, abw_->delta(q, letter, dmemo));
        if (acc.is_false()) break;
      }
      return acc;
    };
    std::vector<std::uint32_t> out;
    if (src.owing.empty()) {
      for (const auto& c : conj(src.current).cubes) out.push_back(intern({c, drop_accepting(c)}));
    } else {
      StateSet rest;
      std::set_difference(src.current.begin(), src.current.end(), src.owing.begin(),
                          src.owing.end(), std::back_inserter(rest));
      const Pbf dr = conj(rest);
      const Pbf dov = dr.is_false() ? Pbf::bottom() : conj(src.owing);
      for (const auto& c1 : dr.cubes)
        for (const auto& c2 : dov.cubes)
          out.push_back(intern({detail::cube_union(c1, c2), drop_accepting(c2)}));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return memo_.emplace(key, std::move(out)).first->second;
  }

  void reset_letters() { memo_.clear(); }

  // Edges discovered so far, ignoring letters.
  std::string to_dot() const {
    std::string out = "digraph nbw {\n  rankdir=LR;\n";
    auto set = [](const StateSet& s) {
      std::string o = "{";
      for (std::size_t i = 0; i < s.size(); ++i) o += (i ? "," : "") + std::to_string(s[i]);
      return o + "}";
    };
    for (std::uint32_t i = 0; i < states_.size(); ++i)
      out += "  n" + std::to_string(i) + " [label=\"" + set(states_[i].current) + " / " +
             set(states_[i].owing) + "\"" +
             (accepting(i) ? ", shape=doublecircle" : ", shape=circle") + "];\n";
    out += "  init [shape=point];\n  init -> n0;\n";
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> edges;
    for (const auto& [k, succ] : memo_)
      for (auto t : succ) ++edges[{k.state, t}];
    for (const auto& [e, n] : edges)
      out += "  n" + std::to_string(e.first) + " -> n" + std::to_string(e.second) +
             " [label=\"" + std::to_string(n) + "\"];\n";
    out += "}\n";
    return out;
  }

 private:
  struct Key {
    std::uint32_t state;
    std::uint64_t letter;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      return std::hash<std::uint64_t>{}(k.letter * 0x9E3779B97F4A7C15ull ^ k.state);
    }
  };

  StateSet drop_accepting(const StateSet& s) const {
    StateSet o;
    for (auto q : s)
      if (!abw_->accepting(q)) o.push_back(q);
    return o;
  }

  std::uint32_t intern(State s) {
    auto it = index_.find(s);
    if (it != index_.end()) return it->second;
    if (states_.size() >= max_states_)
      throw ResourceError("nondeterministic automaton exceeds " + std::to_string(max_states_) +
                          " states");
    auto id = static_cast<std::uint32_t>(states_.size());
    index_.emplace(s, id);
    states_.push_back(std::move(s));
    return id;
  }

  const Abw* abw_;
  std::size_t max_states_;
  std::vector<State> states_;
  std::map<State, std::uint32_t> index_;
  std::unordered_map<Key, std::vector<std::uint32_t>, KeyHash> memo_;
};

inline Nbw miyano_hayashi(const Abw& abw, std::size_t max_states = std::size_t{1} << 20) {
  return Nbw(abw, max_states);
}

// ---------------------------------------------------------------------------
// Acceptance of ultimately periodic words

namespace detail {
struct LassoProduct {
  struct Node {
    std::uint32_t nbw;
    std::uint32_t pos;
    bool operator==(const Node&) const = default;
  };
  struct Hash {
    std::size_t operator()(const Node& n) const noexcept {
      return (static_cast<std::size_t>(n.nbw) << 20) ^ n.pos;
    }
  };
  using Label = std::uint32_t;

  Nbw& nbw;
  const Lasso& lasso;

  std::vector<Node> initial() const { return {Node{nbw.initial(), 0}}; }
  bool accepting(const Node& n) const { return nbw.accepting(n.nbw); }
  void successors(const Node& n, std::vector<std::pair<Label, Node>>& out) {
    const LassoStep& st = lasso.at(n.pos);
    Letter letter{st.state, &st.obs};
    const auto next = static_cast<std::uint32_t>(lasso.succ(n.pos));
    for (auto t : nbw.successors(n.nbw, letter, n.pos)) out.push_back({n.pos, Node{t, next}});
  }
};
}  // namespace detail

inline bool nbw_accepts_lasso(Nbw& nbw, const Lasso& lasso) {
  if (lasso.cycle.empty()) throw Error("lasso cycle must be nonempty");
  nbw.reset_letters();
  detail::LassoProduct g{nbw, lasso};
  bool accepted = find_accepting_cycle(g).has_value();
  nbw.reset_letters();
  return accepted;
}

}  // namespace recipe
