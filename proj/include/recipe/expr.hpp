#pragma once

// Assertions over finite-domain variables: evaluation (two- and
// three-valued), satisfying-assignment enumeration, and the extensional
// sender predicates obtained by projecting send guards.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "recipe/core.hpp"

namespace recipe {

// Named, typed positions of an evaluation frame.
struct Slot {
  std::string name;
  DomainRef domain;
};

class Layout {
 public:
  Layout() = default;
  explicit Layout(std::vector<Slot> slots) : slots_(std::move(slots)) {}

  static Layout of(const std::vector<VarDecl>& vars) {
    std::vector<Slot> s;
    for (const auto& v : vars) s.push_back({v.name, v.domain});
    return Layout(std::move(s));
  }

  std::size_t size() const { return slots_.size(); }
  const Slot& operator[](std::size_t i) const { return slots_[i]; }
  const std::vector<Slot>& slots() const { return slots_; }

  std::optional<std::size_t> find(std::string_view name) const {
    for (std::size_t i = 0; i < slots_.size(); ++i)
      if (slots_[i].name == name) return i;
    return std::nullopt;
  }

  Valuation blank_frame() const { return Valuation(slots_.size(), kUnknown); }

 private:
  std::vector<Slot> slots_;
};

enum class Tri : std::uint8_t { False, True, Unknown };

// Immutable expression handle; copies share structure.
class Expr {
 public:
  enum class Op : std::uint8_t { True, False, EqConst, EqSlot, Not, And, Or };

  struct Node {
    Op op = Op::True;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    Value value = 0;
    // EqSlot across distinct domains: index in a's domain -> index in b's
    // domain (kUnknown where a value has no counterpart). Empty = identity.
    std::vector<Value> map;
    std::vector<Expr> kids;
  };

  Expr() : Expr(Op::True) {}

  static Expr constant(bool v) { return Expr(v ? Op::True : Op::False); }

  static Expr eq_const(std::size_t slot, Value v) {
    Node n;
    n.op = Op::EqConst;
    n.a = static_cast<std::uint32_t>(slot);
    n.value = v;
    return Expr(std::move(n));
  }

  // Equality of two slots. Values are compared by name when the domains
  // differ.
  static Expr eq_slot(std::size_t a, std::size_t b, const Layout& layout) {
    Node n;
    n.op = Op::EqSlot;
    n.a = static_cast<std::uint32_t>(a);
    n.b = static_cast<std::uint32_t>(b);
    const Domain& da = *layout[a].domain;
    const Domain& db = *layout[b].domain;
    if (!(da.values == db.values)) {
      n.map.resize(da.size(), kUnknown);
      for (std::size_t i = 0; i < da.size(); ++i) {
        int j = db.index_of(da.values[i]);
        if (j >= 0) n.map[i] = static_cast<Value>(j);
      }
    }
    return Expr(std::move(n));
  }

  static Expr negate(Expr e) {
    Node n;
    n.op = Op::Not;
    n.kids.push_back(std::move(e));
    return Expr(std::move(n));
  }

  static Expr all_of(std::vector<Expr> kids) {
    if (kids.size() == 1) return kids.front();
    Node n;
    n.op = kids.empty() ? Op::True : Op::And;
    n.kids = std::move(kids);
    return Expr(std::move(n));
  }

  static Expr any_of(std::vector<Expr> kids) {
    if (kids.size() == 1) return kids.front();
    Node n;
    n.op = kids.empty() ? Op::False : Op::Or;
    n.kids = std::move(kids);
    return Expr(std::move(n));
  }

  static Expr implies(Expr a, Expr b) { return any_of({negate(std::move(a)), std::move(b)}); }

  Op op() const { return node_->op; }
  const Node& node() const { return *node_; }
  const std::vector<Expr>& kids() const { return node_->kids; }

  bool operator==(const Expr& o) const {
    if (node_ == o.node_) return true;
    const Node& x = *node_;
    const Node& y = *o.node_;
    return x.op == y.op && x.a == y.a && x.b == y.b && x.value == y.value && x.map == y.map &&
           x.kids == y.kids;
  }

  // Calls `f(slot)` for each slot referenced.
  void for_each_slot(const std::function<void(std::size_t)>& f) const {
    const Node& n = *node_;
    switch (n.op) {
      case Op::EqConst: f(n.a); break;
      case Op::EqSlot: f(n.a); f(n.b); break;
      default:
        for (const auto& k : n.kids) k.for_each_slot(f);
    }
  }

 private:
  explicit Expr(Op op) {
    Node n;
    n.op = op;
    node_ = std::make_shared<const Node>(std::move(n));
  }
  explicit Expr(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}

  std::shared_ptr<const Node> node_;
};

// Kleene evaluation; slots holding kUnknown make atoms Unknown.
inline Tri eval3(const Expr& e, std::span<const Value> frame) {
  using Op = Expr::Op;
  const auto& n = e.node();
  switch (n.op) {
    case Op::True: return Tri::True;
    case Op::False: return Tri::False;
    case Op::EqConst: {
      Value v = frame[n.a];
      if (v == kUnknown) return Tri::Unknown;
      return v == n.value ? Tri::True : Tri::False;
    }
    case Op::EqSlot: {
      Value va = frame[n.a];
      Value vb = frame[n.b];
      if (va == kUnknown || vb == kUnknown) return Tri::Unknown;
      if (!n.map.empty()) va = n.map[va];
      return va == vb ? Tri::True : Tri::False;
    }
    case Op::Not: {
      Tri t = eval3(n.kids[0], frame);
      if (t == Tri::Unknown) return t;
      return t == Tri::True ? Tri::False : Tri::True;
    }
    case Op::And: {
      Tri acc = Tri::True;
      for (const auto& k : n.kids) {
        Tri t = eval3(k, frame);
        if (t == Tri::False) return Tri::False;
        if (t == Tri::Unknown) acc = Tri::Unknown;
      }
      return acc;
    }
    case Op::Or: {
      Tri acc = Tri::False;
      for (const auto& k : n.kids) {
        Tri t = eval3(k, frame);
        if (t == Tri::True) return Tri::True;
        if (t == Tri::Unknown) acc = Tri::Unknown;
      }
      return acc;
    }
  }
  return Tri::Unknown;
}

namespace detail {
[[noreturn]] inline void throw_unbound(const Expr& e, std::span<const Value> frame,
                                       const Layout& layout) {
  std::string name = "?";
  bool found = false;
  e.for_each_slot([&](std::size_t s) {
    if (!found && frame[s] == kUnknown) {
      name = s < layout.size() ? layout[s].name : "#" + std::to_string(s);
      found = true;
    }
  });
  throw EvalError("unbound variable '" + name + "'");
}
}  // namespace detail

inline bool eval(const Expr& e, std::span<const Value> frame, const Layout& layout) {
  Tri t = eval3(e, frame);
  if (t == Tri::Unknown) detail::throw_unbound(e, frame, layout);
  return t == Tri::True;
}

inline constexpr std::uint64_t kDefaultEnumCap = std::uint64_t{1} << 20;

namespace detail {
// DFS over `unknowns` in order, pruning with three-valued evaluation.
// `emit` returns false to stop.
template <class Emit>
bool sat_dfs(const Expr& e, const Layout& layout, std::span<const std::size_t> unknowns,
             std::vector<Value>& frame, std::size_t i, Valuation& cur, Emit& emit) {
  Tri t = eval3(e, frame);
  if (t == Tri::False) return true;
  if (i == unknowns.size()) {
    if (t == Tri::Unknown) throw_unbound(e, frame, layout);
    return emit(cur);
  }
  const std::size_t slot = unknowns[i];
  const std::size_t n = layout[slot].domain->size();
  for (std::size_t v = 0; v < n; ++v) {
    frame[slot] = static_cast<Value>(v);
    cur[i] = static_cast<Value>(v);
    bool go = sat_dfs(e, layout, unknowns, frame, i + 1, cur, emit);
    if (!go) {
      frame[slot] = kUnknown;
      return false;
    }
  }
  frame[slot] = kUnknown;
  return true;
}

inline void check_cap(const Layout& layout, std::span<const std::size_t> unknowns,
                      std::uint64_t cap) {
  std::uint64_t n = 1;
  for (std::size_t s : unknowns) {
    n *= layout[s].domain->size();
    if (n > cap)
      throw ResourceError("valuation space exceeds cap of " + std::to_string(cap) +
                          " (model too large for explicit enumeration)");
  }
}
}  // namespace detail

// All assignments to `unknowns` (listed in lexicographic order) that satisfy
// `e` given the remaining slots of `frame`. Unknown slots of `frame` must be
// kUnknown on entry and are restored on exit.
inline std::vector<Valuation> enumerate_sat(const Expr& e, const Layout& layout,
                                            std::span<const std::size_t> unknowns,
                                            std::vector<Value>& frame,
                                            std::uint64_t cap = kDefaultEnumCap) {
  detail::check_cap(layout, unknowns, cap);
  std::vector<Valuation> out;
  Valuation cur(unknowns.size(), 0);
  auto emit = [&](const Valuation& v) {
    out.push_back(v);
    return true;
  };
  detail::sat_dfs(e, layout, unknowns, frame, 0, cur, emit);
  return out;
}

// Convenience form: `e` is over exactly `vars`.
inline std::vector<Valuation> enumerate_sat(const Expr& e, const std::vector<VarDecl>& vars,
                                            std::uint64_t cap = kDefaultEnumCap) {
  Layout layout = Layout::of(vars);
  std::vector<std::size_t> unknowns(vars.size());
  for (std::size_t i = 0; i < unknowns.size(); ++i) unknowns[i] = i;
  auto frame = layout.blank_frame();
  return enumerate_sat(e, layout, unknowns, frame, cap);
}

inline std::optional<Valuation> find_sat(const Expr& e, const Layout& layout,
                                         std::span<const std::size_t> unknowns,
                                         std::vector<Value>& frame,
                                         std::uint64_t cap = kDefaultEnumCap) {
  detail::check_cap(layout, unknowns, cap);
  std::optional<Valuation> out;
  Valuation cur(unknowns.size(), 0);
  auto emit = [&](const Valuation& v) {
    out = v;
    return false;
  };
  detail::sat_dfs(e, layout, unknowns, frame, 0, cur, emit);
  return out;
}

// ---------------------------------------------------------------------------
// Common-variable valuations and sender predicates

inline constexpr std::uint64_t kDefaultCvCap = 4096;

// Valuations of the common variables, identified by their mixed-radix rank
// (first variable most significant), so rank order is lexicographic order.
class CvSpace {
 public:
  CvSpace() = default;
  explicit CvSpace(std::vector<DomainRef> domains, std::uint64_t cap = kDefaultCvCap)
      : domains_(std::move(domains)), strides_(domains_.size(), 1) {
    std::uint64_t n = 1;
    for (std::size_t i = domains_.size(); i-- > 0;) {
      strides_[i] = static_cast<std::uint32_t>(n);
      n *= domains_[i]->size();
      if (n > cap)
        throw ResourceError("common-variable valuation count exceeds cap of " +
                            std::to_string(cap));
    }
    size_ = static_cast<std::uint32_t>(n);
  }

  std::uint32_t size() const { return size_; }
  std::size_t vars() const { return domains_.size(); }
  const std::vector<DomainRef>& domains() const { return domains_; }

  Value digit(std::uint32_t rank, std::size_t var) const {
    return static_cast<Value>((rank / strides_[var]) % domains_[var]->size());
  }

  Valuation decode(std::uint32_t rank) const {
    Valuation v(domains_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = digit(rank, i);
    return v;
  }

  std::uint32_t rank(std::span<const Value> v) const {
    std::uint32_t r = 0;
    for (std::size_t i = 0; i < v.size(); ++i) r += v[i] * strides_[i];
    return r;
  }

 private:
  std::vector<DomainRef> domains_;
  std::vector<std::uint32_t> strides_;
  std::uint32_t size_ = 1;
};

// Extensional predicate over the common variables: the sorted, duplicate-free
// ranks of the valuations it admits.
struct CvPredicate {
  std::vector<std::uint32_t> sat;

  bool contains(std::uint32_t rank) const {
    return std::binary_search(sat.begin(), sat.end(), rank);
  }
  bool empty() const { return sat.empty(); }
  std::size_t size() const { return sat.size(); }

  auto operator<=>(const CvPredicate&) const = default;
  bool operator==(const CvPredicate&) const = default;
};

// The predicate {c : guard holds under frame ∪ c}. `frame` supplies the
// sender state, channel and data; slots [cv_offset, cv_offset + |CV|) are
// overwritten during evaluation and reset to kUnknown afterwards.
inline CvPredicate project_send_guard(const Expr& guard, const Layout& layout,
                                      std::vector<Value>& frame, std::size_t cv_offset,
                                      const CvSpace& cv) {
  CvPredicate p;
  for (std::uint32_t r = 0; r < cv.size(); ++r) {
    for (std::size_t i = 0; i < cv.vars(); ++i) frame[cv_offset + i] = cv.digit(r, i);
    if (eval(guard, frame, layout)) p.sat.push_back(r);
  }
  for (std::size_t i = 0; i < cv.vars(); ++i) frame[cv_offset + i] = kUnknown;
  return p;
}

// Membership of the receiver's relabelled common-variable copy in `pred`.
// `relabel[v]` is the receiver local holding common variable v.
inline bool holds_for_receiver(const CvPredicate& pred, std::span<const std::size_t> relabel,
                               std::span<const Value> receiver_state, const CvSpace& cv) {
  Valuation c(relabel.size());
  for (std::size_t v = 0; v < relabel.size(); ++v) c[v] = receiver_state[relabel[v]];
  return pred.contains(cv.rank(c));
}

// ---------------------------------------------------------------------------
// Printing

inline std::string to_string(const Expr& e, const Layout& layout) {
  using Op = Expr::Op;
  const auto& n = e.node();
  auto child = [&](const Expr& k) {
    std::string s = to_string(k, layout);
    if (k.op() == Op::And || k.op() == Op::Or) return "(" + s + ")";
    return s;
  };
  switch (n.op) {
    case Op::True: return "true";
    case Op::False: return "false";
    case Op::EqConst: return layout[n.a].name + " = " + layout[n.a].domain->values[n.value];
    case Op::EqSlot: return layout[n.a].name + " = " + layout[n.b].name;
    case Op::Not: {
      const Expr& k = n.kids[0];
      if (k.op() == Op::EqConst || k.op() == Op::EqSlot || k.op() == Op::Not)
        return "!(" + to_string(k, layout) + ")";
      return "!" + child(k);
    }
    case Op::And:
    case Op::Or: {
      std::string out;
      for (std::size_t i = 0; i < n.kids.size(); ++i) {
        if (i) out += n.op == Op::And ? " & " : " | ";
        out += child(n.kids[i]);
      }
      return out;
    }
  }
  return "?";
}

}  // namespace recipe
