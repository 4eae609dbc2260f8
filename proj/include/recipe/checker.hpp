#pragma once

// Model checking by product with the automaton of the negated formula, plus
// satisfiability over an enumerated alphabet and witness replay.

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "recipe/automata.hpp"
#include "recipe/emptiness.hpp"
#include "recipe/ltol.hpp"
#include "recipe/semantics.hpp"

namespace recipe {

enum class Outcome { Holds, Fails, Deadlock, Truncated };

inline std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Holds: return "holds";
    case Outcome::Fails: return "fails";
    case Outcome::Deadlock: return "deadlock";
    case Outcome::Truncated: return "truncated";
  }
  return "?";
}

struct CheckLimits {
  std::size_t max_states = 1'000'000;
  Engine engine = Engine::Symbolic;
  bool deadlock_as_error = true;
  std::size_t max_nbw_states = std::size_t{1} << 20;
  std::size_t max_product = std::size_t{1} << 24;
};

struct CheckStats {
  std::size_t states = 0;
  std::size_t transitions = 0;
  std::size_t abw_states = 0;
  std::size_t nbw_states = 0;
  std::size_t product_states = 0;
  std::int64_t millis = 0;
};

struct Verdict {
  Outcome outcome = Outcome::Holds;
  std::optional<Lasso> witness;
  std::vector<GlobalState> deadlocks;
  CheckStats stats;
  std::vector<std::string> warnings;
};

namespace detail {

struct SpaceProduct {
  struct Node {
    std::uint32_t sys;
    std::uint32_t nbw;
    bool operator==(const Node&) const = default;
  };
  struct Hash {
    std::size_t operator()(const Node& n) const noexcept {
      return std::hash<std::uint64_t>{}((std::uint64_t{n.sys} << 32) | n.nbw);
    }
  };
  using Label = std::uint32_t;  // observation id

  const SystemSpace& space;
  Nbw& nbw;

  std::vector<Node> initial() const {
    std::vector<Node> out;
    for (auto i : space.initials) out.push_back({i, nbw.initial()});
    return out;
  }
  bool accepting(const Node& n) const { return nbw.accepting(n.nbw); }
  void successors(const Node& n, std::vector<std::pair<Label, Node>>& out) {
    const auto& st = space.states[n.sys].values;
    for (const auto& e : space.edges[n.sys]) {
      Letter letter{st, &space.observations[e.obs]};
      const std::uint64_t key = (std::uint64_t{n.sys} << 32) | e.obs;
      for (auto q : nbw.successors(n.nbw, letter, key)) out.push_back({e.obs, Node{e.to, q}});
    }
  }
};

template <class Path, class F>
Lasso project_path(const Path& p, F step) {
  Lasso l;
  for (const auto& s : p.prefix) l.prefix.push_back(step(s));
  for (const auto& s : p.cycle) l.cycle.push_back(step(s));
  return l;
}

}  // namespace detail

inline Verdict model_check(const SystemDef& sys, const Formula& phi,
                           const CheckLimits& limits = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  check_vocabulary(phi, Vocabulary::of(sys));
  SystemSpace space = explore(sys, {limits.max_states, limits.engine});
  v.stats.states = space.states.size();
  v.stats.transitions = space.transition_count();
  auto finish = [&]() {
    v.stats.millis = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    return v;
  };
  if (space.truncated) {
    v.outcome = Outcome::Truncated;
    return finish();
  }
  if (!space.deadlocks.empty()) {
    for (auto id : space.deadlocks) v.deadlocks.push_back(space.states[id]);
    if (limits.deadlock_as_error) {
      v.outcome = Outcome::Deadlock;
      return finish();
    }
    v.warnings.push_back(std::to_string(space.deadlocks.size()) +
                         " deadlocked states; verdict covers infinite runs only");
  }

  Abw abw(dual(phi), sys.cv_space());
  Nbw nbw(abw, limits.max_nbw_states);
  detail::SpaceProduct g{space, nbw};
  NestedDfs<detail::SpaceProduct> dfs(g, limits.max_product);
  auto path = dfs.run();
  v.stats.abw_states = abw.size();
  v.stats.nbw_states = nbw.state_count();
  v.stats.product_states = dfs.visited();
  if (path) {
    v.outcome = Outcome::Fails;
    v.witness = detail::project_path(*path, [&](const auto& s) {
      return LassoStep{space.states[s.node.sys].values, space.observations[s.label]};
    });
  }
  return finish();
}

// True iff every position's (state, observation, next state) is a
// transition of the system, including the step closing the cycle.
inline bool replay_witness(const SystemDef& sys, const Lasso& l) {
  if (l.cycle.empty()) return false;
  TransitionEngine engine(sys, Engine::Symbolic);
  for (std::size_t i = 0; i < l.size(); ++i) {
    const LassoStep& st = l.at(i);
    if (st.state.size() != sys.state_width()) return false;
    const Valuation& next = l.at(l.succ(i)).state;
    bool found = false;
    for (const auto& t : engine.successors(GlobalState{st.state}))
      if (t.obs == st.obs && t.to.values == next) {
        found = true;
        break;
      }
    if (!found) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Satisfiability

struct SatLimits {
  std::uint64_t max_letters = 1'000'000;
  std::size_t max_nbw_states = std::size_t{1} << 20;
};

struct SatVerdict {
  bool sat = false;
  std::optional<Lasso> witness;
  std::size_t state_letters = 0;  // distinct state-label classes
  std::size_t obs_letters = 0;    // distinct observation classes
  std::size_t abw_states = 0;
  std::size_t nbw_states = 0;
};

namespace detail {

struct Mentions {
  std::set<std::uint32_t> state, data, cv;
  bool ch = false, sender = false;
};

inline void collect(const Descriptor& d, Mentions& m) {
  using Op = Descriptor::Op;
  const auto& n = d.node();
  switch (n.op) {
    case Op::Ch: m.ch = true; break;
    case Op::Sender: m.sender = true; break;
    case Op::Data: m.data.insert(n.var); break;
    case Op::Cv: m.cv.insert(n.var); break;
    default: break;
  }
  for (const auto& k : n.kids) collect(k, m);
}

inline void collect(const Formula& f, Mentions& m) {
  const auto& n = f.node();
  if (n.op == Formula::Op::Lit) m.state.insert(n.var);
  if (n.op == Formula::Op::Possible || n.op == Formula::Op::Necessary) collect(n.desc, m);
  for (const auto& k : n.kids) collect(k, m);
}

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, std::uint64_t cap,
                                 const std::string& what) {
  if (b != 0 && a > cap / b) throw ResourceError("alphabet too large: " + what);
  std::uint64_t r = a * b;
  if (r > cap) throw ResourceError("alphabet too large: " + what);
  return r;
}

struct LetterGraph {
  using Node = std::uint32_t;
  using Label = std::uint32_t;
  struct Hash {
    std::size_t operator()(Node n) const noexcept { return n; }
  };

  Nbw& nbw;
  const std::vector<Valuation>& states;
  const std::vector<Observation>& obs;

  std::vector<Node> initial() const { return {nbw.initial()}; }
  bool accepting(Node n) const { return nbw.accepting(n); }
  void successors(Node n, std::vector<std::pair<Label, Node>>& out) {
    for (std::uint32_t i = 0; i < states.size(); ++i)
      for (std::uint32_t j = 0; j < obs.size(); ++j) {
        const auto key = static_cast<std::uint32_t>(i * obs.size() + j);
        for (auto q : nbw.successors(n, Letter{states[i], &obs[j]}, key)) out.push_back({key, q});
      }
  }
};

}  // namespace detail

// Nonemptiness of the formula's automaton over every letter the vocabulary
// admits. Only components the formula mentions are varied; letters that no
// literal or descriptor of the formula can tell apart are merged.
inline SatVerdict check_satisfiable(const Formula& phi, const Vocabulary& vocab,
                                    const SatLimits& limits = {}) {
  check_vocabulary(phi, vocab);
  detail::Mentions m;
  detail::collect(phi, m);
  const std::uint64_t cap = limits.max_letters;
  Abw abw(phi, vocab.cv);

  std::vector<Formula> lits;
  std::vector<Descriptor> gates;
  for (std::uint32_t q = 0; q < abw.size(); ++q) {
    const auto op = abw.state(q).formula.op();
    if (op == Formula::Op::Lit) lits.push_back(abw.state(q).formula);
    if (op == Formula::Op::Possible || op == Formula::Op::Necessary)
      gates.push_back(abw.state(q).gate);
  }

  // State labels.
  std::vector<std::uint32_t> svars(m.state.begin(), m.state.end());
  std::uint64_t n_states = 1;
  for (auto i : svars)
    n_states = detail::checked_mul(n_states, vocab.state[i].domain->size(), cap,
                                   "state labels over the mentioned variables");
  std::vector<Valuation> state_letters;
  {
    std::map<std::vector<char>, std::size_t> seen;
    Valuation full(vocab.state.size(), 0);
    std::vector<DomainRef> doms;
    for (auto i : svars) doms.push_back(vocab.state[i].domain);
    Valuation pick(svars.size(), 0);
    do {
      for (std::size_t k = 0; k < svars.size(); ++k) full[svars[k]] = pick[k];
      std::vector<char> sig;
      for (const auto& l : lits) {
        const auto& n = l.node();
        sig.push_back((full[n.var] == n.value) == n.positive);
      }
      if (seen.emplace(sig, state_letters.size()).second) state_letters.push_back(full);
    } while (next_valuation(pick, doms));
  }

  // Observations. π ranges over subsets of the valuations of the mentioned
  // common variables; each is expanded back to the full common space.
  std::vector<std::uint32_t> cvars(m.cv.begin(), m.cv.end());
  std::vector<DomainRef> cdoms;
  for (auto i : cvars) cdoms.push_back(vocab.common[i].domain);
  std::uint64_t proj_size = 1;
  for (const auto& d : cdoms) proj_size = detail::checked_mul(proj_size, d->size(), cap, "common-variable valuations");
  if (proj_size >= 63 || (std::uint64_t{1} << proj_size) > cap)
    throw ResourceError("alphabet too large: sender predicates (2^" +
                        std::to_string(proj_size) + " subsets of common-variable valuations)");
  const std::uint64_t n_preds = std::uint64_t{1} << proj_size;
  std::vector<std::uint32_t> dvars(m.data.begin(), m.data.end());
  std::vector<DomainRef> ddoms;
  for (auto i : dvars) ddoms.push_back(vocab.data[i].domain);
  const std::uint64_t n_ch = m.ch ? vocab.channels->size() : 1;
  const std::uint64_t n_snd = m.sender ? vocab.agents.size() : 1;
  std::uint64_t n_obs = detail::checked_mul(n_ch, n_snd, cap, "channels x senders");
  for (const auto& d : ddoms) n_obs = detail::checked_mul(n_obs, d->size(), cap, "data valuations");
  n_obs = detail::checked_mul(n_obs, n_preds, cap, "sender predicates");

  // Rank of each full common valuation inside the projected space.
  std::vector<std::uint32_t> proj_rank(vocab.cv.size());
  for (std::uint32_t r = 0; r < vocab.cv.size(); ++r) {
    std::uint32_t pr = 0;
    for (std::size_t k = 0; k < cvars.size(); ++k)
      pr = pr * static_cast<std::uint32_t>(cdoms[k]->size()) + vocab.cv.digit(r, cvars[k]);
    proj_rank[r] = pr;
  }

  std::vector<Observation> obs_letters;
  {
    std::map<std::vector<char>, std::size_t> seen;
    for (Value ch = 0; ch < n_ch; ++ch)
      for (std::uint32_t k = 0; k < n_snd; ++k) {
        Valuation pick(dvars.size(), 0);
        do {
          Observation o;
          o.ch = ch;
          o.sender = k;
          o.data.assign(vocab.data.size(), 0);
          for (std::size_t i = 0; i < dvars.size(); ++i) o.data[dvars[i]] = pick[i];
          for (std::uint64_t mask = 0; mask < n_preds; ++mask) {
            o.pred.sat.clear();
            for (std::uint32_t r = 0; r < vocab.cv.size(); ++r)
              if ((mask >> proj_rank[r]) & 1) o.pred.sat.push_back(r);
            std::vector<char> sig;
            for (const auto& g : gates) sig.push_back(desc_holds(g, o, vocab.cv));
            if (seen.emplace(sig, obs_letters.size()).second) obs_letters.push_back(o);
          }
        } while (next_valuation(pick, ddoms));
      }
  }

  SatVerdict out;
  out.state_letters = state_letters.size();
  out.obs_letters = obs_letters.size();
  Nbw nbw(abw, limits.max_nbw_states);
  detail::LetterGraph g{nbw, state_letters, obs_letters};
  auto path = find_accepting_cycle(g);
  out.abw_states = abw.size();
  out.nbw_states = nbw.state_count();
  if (path) {
    out.sat = true;
    const std::size_t no = obs_letters.size();
    out.witness = detail::project_path(*path, [&](const auto& s) {
      return LassoStep{state_letters[s.label / no], obs_letters[s.label % no]};
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

using Json = nlohmann::ordered_json;

inline Json state_json(const Vocabulary& v, std::span<const Value> s) {
  Json j = Json::object();
  for (std::size_t i = 0; i < v.state.size() && i < s.size(); ++i)
    j[v.state[i].name] = v.state[i].domain->values[s[i]];
  return j;
}

inline Json observation_json(const Vocabulary& v, const Observation& m) {
  Json j;
  j["channel"] = v.channels->values[m.ch];
  Json d = Json::object();
  for (std::size_t i = 0; i < v.data.size(); ++i)
    d[v.data[i].name] = v.data[i].domain->values[m.data[i]];
  j["data"] = d;
  j["sender"] = v.agents[m.sender];
  Json p = Json::array();
  for (auto r : m.pred.sat) {
    Json c = Json::object();
    for (std::size_t i = 0; i < v.common.size(); ++i)
      c[v.common[i].name] = v.common[i].domain->values[v.cv.digit(r, i)];
    p.push_back(c);
  }
  j["pred"] = p;
  return j;
}

inline Json lasso_json(const Vocabulary& v, const Lasso& l) {
  auto steps = [&](const std::vector<LassoStep>& xs) {
    Json a = Json::array();
    for (const auto& s : xs)
      a.push_back(Json{{"state", state_json(v, s.state)}, {"observation", observation_json(v, s.obs)}});
    return a;
  };
  return Json{{"prefix", steps(l.prefix)}, {"cycle", steps(l.cycle)}};
}

inline Json verdict_json(const Vocabulary& v, const std::string& formula, const Verdict& r,
                         Engine engine, bool timing = true) {
  Json j;
  j["schema"] = 1;
  j["formula"] = formula;
  j["engine"] = engine_name(engine);
  j["outcome"] = outcome_name(r.outcome);
  if (r.witness) j["witness"] = lasso_json(v, *r.witness);
  if (!r.deadlocks.empty()) {
    Json d = Json::array();
    for (const auto& s : r.deadlocks) d.push_back(state_json(v, s.values));
    j["deadlocks"] = d;
  }
  if (!r.warnings.empty()) j["warnings"] = r.warnings;
  Json s;
  s["states"] = r.stats.states;
  s["transitions"] = r.stats.transitions;
  s["abw_states"] = r.stats.abw_states;
  s["nbw_states"] = r.stats.nbw_states;
  s["product_states"] = r.stats.product_states;
  if (timing) s["millis"] = r.stats.millis;
  j["stats"] = s;
  return j;
}

inline std::string format_lasso(const SystemDef& sys, const Lasso& l) {
  std::string out;
  auto emit = [&](const std::vector<LassoStep>& xs, const char* tag) {
    for (const auto& s : xs) {
      out += std::string(tag) + " state: " + format_state(sys, GlobalState{s.state}) + "\n";
      out += std::string(tag) + "   obs: " + format_observation(sys, s.obs) + "\n";
    }
  };
  emit(l.prefix, "prefix");
  emit(l.cycle, " cycle");
  return out;
}

}  // namespace recipe
