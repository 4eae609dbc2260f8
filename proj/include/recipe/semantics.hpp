#pragma once

// The transition system induced by a SystemDef. Two independent successor
// computations are provided: `Engine::Reference` follows the per-receiver
// case analysis over the materialised sender predicate, `Engine::Symbolic`
// solves the system transition assertion directly, evaluating the sender's
// guard on each receiver's relabelled copy of the common variables.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "recipe/expr.hpp"
#include "recipe/model.hpp"

namespace recipe {

// Flat valuation of every agent's locals, agents in declaration order.
struct GlobalState {
  Valuation values;

  std::span<const Value> component(const SystemDef& sys, std::size_t agent) const {
    return std::span<const Value>(values).subspan(sys.offset(agent),
                                                  sys.agent(agent).locals.size());
  }

  auto operator<=>(const GlobalState&) const = default;
  bool operator==(const GlobalState&) const = default;
};

struct ValuationHash {
  std::size_t operator()(const Valuation& v) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (Value x : v) {
      h ^= x;
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

struct GlobalStateHash {
  std::size_t operator()(const GlobalState& s) const noexcept { return ValuationHash{}(s.values); }
};

// One message: channel, data valuation, sender, sender predicate.
struct Observation {
  Value ch = 0;
  Valuation data;
  std::uint32_t sender = 0;
  CvPredicate pred;

  auto operator<=>(const Observation&) const = default;
  bool operator==(const Observation&) const = default;
};

struct SysTransition {
  GlobalState from;
  Observation obs;
  GlobalState to;

  bool operator==(const SysTransition&) const = default;
};

enum class Engine { Reference, Symbolic };

inline std::string_view engine_name(Engine e) {
  return e == Engine::Reference ? "reference" : "symbolic";
}

// All global states satisfying every agent's initial condition, in
// lexicographic order. Throws ModelError when there are none.
inline std::vector<GlobalState> initial_states(const SystemDef& sys,
                                               std::uint64_t cap = kDefaultEnumCap) {
  std::vector<std::vector<Valuation>> per_agent;
  for (std::size_t i = 0; i < sys.agent_count(); ++i) {
    const FrameShape sh = sys.shape(i);
    std::vector<std::size_t> locals(sh.locals);
    for (std::size_t j = 0; j < sh.locals; ++j) locals[j] = sh.local(j);
    auto frame = sys.layout(i).blank_frame();
    per_agent.push_back(enumerate_sat(sys.agent(i).init, sys.layout(i), locals, frame, cap));
    if (per_agent.back().empty())
      throw ModelError("agent '" + sys.agent(i).id + "' has no initial state");
  }
  std::vector<GlobalState> out;
  std::vector<std::size_t> pick(per_agent.size(), 0);
  while (true) {
    GlobalState g;
    for (std::size_t i = 0; i < per_agent.size(); ++i) {
      const auto& v = per_agent[i][pick[i]];
      g.values.insert(g.values.end(), v.begin(), v.end());
    }
    out.push_back(std::move(g));
    if (out.size() > cap) throw ResourceError("too many initial states");
    std::size_t i = per_agent.size();
    while (i-- > 0) {
      if (++pick[i] < per_agent[i].size()) break;
      pick[i] = 0;
    }
    if (i == static_cast<std::size_t>(-1)) break;
  }
  return out;
}

// Canonical transition order: channel, data, sender, sender successor, then
// the remaining components.
inline bool transition_less(const SystemDef& sys, const SysTransition& a,
                            const SysTransition& b) {
  if (a.obs.ch != b.obs.ch) return a.obs.ch < b.obs.ch;
  if (a.obs.data != b.obs.data) return a.obs.data < b.obs.data;
  if (a.obs.sender != b.obs.sender) return a.obs.sender < b.obs.sender;
  auto sa = a.to.component(sys, a.obs.sender);
  auto sb = b.to.component(sys, b.obs.sender);
  if (!std::equal(sa.begin(), sa.end(), sb.begin(), sb.end()))
    return std::lexicographical_compare(sa.begin(), sa.end(), sb.begin(), sb.end());
  return a.to.values < b.to.values;
}

class TransitionEngine {
 public:
  TransitionEngine(const SystemDef& sys, Engine engine, std::uint64_t cap = kDefaultEnumCap)
      : sys_(&sys), engine_(engine), cap_(cap) {
    for (std::size_t i = 0; i < sys.agent_count(); ++i) {
      const FrameShape sh = sys.shape(i);
      std::vector<std::size_t> primed, send_unknowns;
      std::vector<Expr> id;
      for (std::size_t d = 0; d < sh.data; ++d) send_unknowns.push_back(sh.data_slot(d));
      for (std::size_t v = 0; v < sh.locals; ++v) {
        primed.push_back(sh.primed(v));
        send_unknowns.push_back(sh.primed(v));
        id.push_back(Expr::eq_slot(sh.primed(v), sh.local(v), sys.layout(i)));
      }
      primed_.push_back(std::move(primed));
      send_unknowns_.push_back(std::move(send_unknowns));
      identity_.push_back(Expr::all_of(std::move(id)));
    }
  }

  Engine engine() const { return engine_; }

  std::vector<SysTransition> successors(const GlobalState& s) const {
    const SystemDef& sys = *sys_;
    std::vector<SysTransition> out;
    for (Value ch = 0; ch < sys.channels()->size(); ++ch) {
      for (std::size_t k = 0; k < sys.agent_count(); ++k) {
        const FrameShape sh = sys.shape(k);
        const Layout& layout = sys.layout(k);
        auto frame = layout.blank_frame();
        load_locals(frame, sh, s.component(sys, k));
        frame[sh.ch()] = ch;
        auto sols = enumerate_sat(sys.agent(k).send_rel, layout, send_unknowns_[k], frame, cap_);
        for (const auto& sol : sols) {
          Valuation data(sol.begin(), sol.begin() + static_cast<std::ptrdiff_t>(sh.data));
          Valuation next(sol.begin() + static_cast<std::ptrdiff_t>(sh.data), sol.end());
          if (engine_ == Engine::Reference)
            reference_receivers(s, ch, data, k, next, out);
          else
            symbolic_receivers(s, ch, data, k, next, out);
        }
      }
    }
    std::sort(out.begin(), out.end(), [&](const SysTransition& a, const SysTransition& b) {
      return transition_less(sys, a, b);
    });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  // The sender predicate of agent k in state s_k for (ch, data).
  CvPredicate sender_predicate(std::size_t k, std::span<const Value> local, Value ch,
                               std::span<const Value> data) const {
    const SystemDef& sys = *sys_;
    const FrameShape sh = sys.shape(k);
    auto frame = sys.layout(k).blank_frame();
    load_locals(frame, sh, local);
    load_data(frame, sh, data);
    frame[sh.ch()] = ch;
    return project_send_guard(sys.agent(k).send_guard, sys.layout(k), frame, sh.cv_slot(0),
                              sys.cv_space());
  }

 private:
  static void load_locals(std::vector<Value>& frame, const FrameShape& sh,
                          std::span<const Value> local) {
    for (std::size_t i = 0; i < sh.locals; ++i) frame[sh.local(i)] = local[i];
  }
  static void load_data(std::vector<Value>& frame, const FrameShape& sh,
                        std::span<const Value> data) {
    for (std::size_t i = 0; i < sh.data; ++i) frame[sh.data_slot(i)] = data[i];
  }

  // Combines per-receiver options into transitions.
  void emit(const GlobalState& s, Observation obs, std::size_t k, const Valuation& next,
            const std::vector<std::vector<Valuation>>& options,
            std::vector<SysTransition>& out) const {
    const SystemDef& sys = *sys_;
    GlobalState to = s;
    std::copy(next.begin(), next.end(), to.values.begin() + static_cast<std::ptrdiff_t>(sys.offset(k)));
    std::vector<std::size_t> pick(options.size(), 0);
    while (true) {
      std::size_t oi = 0;
      for (std::size_t j = 0; j < sys.agent_count(); ++j) {
        if (j == k) continue;
        const auto& v = options[oi][pick[oi]];
        std::copy(v.begin(), v.end(), to.values.begin() + static_cast<std::ptrdiff_t>(sys.offset(j)));
        ++oi;
      }
      out.push_back({s, obs, to});
      std::size_t i = options.size();
      while (i-- > 0) {
        if (++pick[i] < options[i].size()) break;
        pick[i] = 0;
      }
      if (i == static_cast<std::size_t>(-1)) break;
    }
  }

  void reference_receivers(const GlobalState& s, Value ch, const Valuation& data, std::size_t k,
                           const Valuation& next, std::vector<SysTransition>& out) const {
    const SystemDef& sys = *sys_;
    Observation obs{ch, data, static_cast<std::uint32_t>(k),
                    sender_predicate(k, s.component(sys, k), ch, data)};
    std::vector<std::vector<Valuation>> options;
    for (std::size_t j = 0; j < sys.agent_count(); ++j) {
      if (j == k) continue;
      const AgentDef& a = sys.agent(j);
      const FrameShape sh = sys.shape(j);
      const Layout& layout = sys.layout(j);
      auto local = s.component(sys, j);
      auto frame = layout.blank_frame();
      load_locals(frame, sh, local);
      frame[sh.ch()] = ch;
      const bool connected = eval(a.recv_guard, frame, layout);
      const bool targeted = holds_for_receiver(obs.pred, a.relabel, local, sys.cv_space());
      std::vector<Valuation> opts;
      if (connected && targeted) {
        load_data(frame, sh, data);
        opts = enumerate_sat(a.recv_rel, layout, primed_[j], frame, cap_);
      } else if (!connected || ch == sys.star()) {
        opts.emplace_back(local.begin(), local.end());
      }
      if (opts.empty()) return;  // a connected receiver blocks the message
      options.push_back(std::move(opts));
    }
    emit(s, std::move(obs), k, next, options, out);
  }

  void symbolic_receivers(const GlobalState& s, Value ch, const Valuation& data, std::size_t k,
                          const Valuation& next, std::vector<SysTransition>& out) const {
    const SystemDef& sys = *sys_;
    const FrameShape shk = sys.shape(k);
    const Layout& layout_k = sys.layout(k);
    auto sender_frame = layout_k.blank_frame();
    load_locals(sender_frame, shk, s.component(sys, k));
    load_data(sender_frame, shk, data);
    sender_frame[shk.ch()] = ch;

    std::vector<std::vector<Valuation>> options;
    for (std::size_t j = 0; j < sys.agent_count(); ++j) {
      if (j == k) continue;
      const AgentDef& a = sys.agent(j);
      const FrameShape sh = sys.shape(j);
      const Layout& layout = sys.layout(j);
      auto local = s.component(sys, j);
      // ∃CV. f_j: the common variables take the receiver's local copies.
      for (std::size_t v = 0; v < shk.cv; ++v) sender_frame[shk.cv_slot(v)] = local[a.relabel[v]];
      const bool gs = eval(sys.agent(k).send_guard, sender_frame, layout_k);
      auto frame = layout.blank_frame();
      load_locals(frame, sh, local);
      load_data(frame, sh, data);
      frame[sh.ch()] = ch;
      const bool gr = eval(a.recv_guard, frame, layout);
      Expr clause = Expr::any_of({
          Expr::all_of({Expr::constant(gr), a.recv_rel, Expr::constant(gs)}),
          Expr::all_of({Expr::constant(!gr), identity_[j]}),
          Expr::all_of({Expr::constant(ch == sys.star()), Expr::constant(!gs), identity_[j]}),
      });
      auto opts = enumerate_sat(clause, layout, primed_[j], frame, cap_);
      if (opts.empty()) return;
      options.push_back(std::move(opts));
    }
    Observation obs{ch, data, static_cast<std::uint32_t>(k),
                    sender_predicate(k, s.component(sys, k), ch, data)};
    emit(s, std::move(obs), k, next, options, out);
  }

  const SystemDef* sys_;
  Engine engine_;
  std::uint64_t cap_;
  std::vector<std::vector<std::size_t>> primed_;
  std::vector<std::vector<std::size_t>> send_unknowns_;
  std::vector<Expr> identity_;
};

inline std::vector<SysTransition> successors_reference(const SystemDef& sys,
                                                       const GlobalState& s) {
  return TransitionEngine(sys, Engine::Reference).successors(s);
}

inline std::vector<SysTransition> successors_symbolic(const SystemDef& sys,
                                                      const GlobalState& s) {
  return TransitionEngine(sys, Engine::Symbolic).successors(s);
}

// ---------------------------------------------------------------------------
// Reachable state space

struct SpaceEdge {
  std::uint32_t obs;
  std::uint32_t to;
};

struct SystemSpace {
  std::vector<GlobalState> states;
  std::vector<std::uint32_t> initials;
  std::vector<std::vector<SpaceEdge>> edges;
  std::vector<Observation> observations;
  std::vector<std::uint32_t> deadlocks;
  bool truncated = false;

  std::size_t transition_count() const {
    std::size_t n = 0;
    for (const auto& e : edges) n += e.size();
    return n;
  }
};

struct ExploreLimits {
  std::size_t max_states = 1'000'000;
  Engine engine = Engine::Symbolic;
};

// Breadth-first closure from the initial states. State ids follow discovery
// order. On truncation, `truncated` is set and unexpanded states carry no
// edges and are not reported as deadlocks.
inline SystemSpace explore(const SystemDef& sys, const ExploreLimits& limits = {}) {
  SystemSpace space;
  TransitionEngine engine(sys, limits.engine);
  std::unordered_map<GlobalState, std::uint32_t, GlobalStateHash> index;
  std::map<Observation, std::uint32_t> obs_index;
  std::deque<std::uint32_t> frontier;

  auto intern = [&](const GlobalState& g) -> std::optional<std::uint32_t> {
    auto it = index.find(g);
    if (it != index.end()) return it->second;
    if (space.states.size() >= limits.max_states) return std::nullopt;
    auto id = static_cast<std::uint32_t>(space.states.size());
    index.emplace(g, id);
    space.states.push_back(g);
    space.edges.emplace_back();
    frontier.push_back(id);
    return id;
  };

  for (const auto& g : initial_states(sys)) {
    auto id = intern(g);
    if (!id) {
      space.truncated = true;
      break;
    }
    space.initials.push_back(*id);
  }

  while (!frontier.empty() && !space.truncated) {
    std::uint32_t id = frontier.front();
    frontier.pop_front();
    auto succ = engine.successors(space.states[id]);
    std::vector<SpaceEdge> edges;
    for (auto& t : succ) {
      auto oit = obs_index.find(t.obs);
      std::uint32_t oid;
      if (oit == obs_index.end()) {
        oid = static_cast<std::uint32_t>(space.observations.size());
        obs_index.emplace(t.obs, oid);
        space.observations.push_back(t.obs);
      } else {
        oid = oit->second;
      }
      auto to = intern(t.to);
      if (!to) {
        space.truncated = true;
        break;
      }
      edges.push_back({oid, *to});
    }
    if (space.truncated) break;
    if (edges.empty()) space.deadlocks.push_back(id);
    space.edges[id] = std::move(edges);
  }
  std::sort(space.deadlocks.begin(), space.deadlocks.end());
  return space;
}

// ---------------------------------------------------------------------------
// Formatting helpers

inline std::string format_state(const SystemDef& sys, const GlobalState& g) {
  std::string out;
  for (std::size_t i = 0; i < sys.agent_count(); ++i) {
    if (i) out += "; ";
    out += format_valuation(sys.agent(i).locals, g.component(sys, i), sys.agent(i).id + ".");
  }
  return out;
}

inline std::string format_data(const SystemDef& sys, const Valuation& d) {
  std::string out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (i) out += ",";
    out += sys.data()[i].name + "=" + sys.data()[i].domain->values[d[i]];
  }
  return out;
}

inline std::string format_observation(const SystemDef& sys, const Observation& m) {
  return sys.channels()->values[m.ch] + " | " + format_data(sys, m.data) + " | " +
         sys.agent(m.sender).id + " | " + std::to_string(m.pred.size());
}

}  // namespace recipe
