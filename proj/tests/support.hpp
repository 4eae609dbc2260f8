#pragma once

// Shared fixtures for the test binaries: random small systems, formulas and
// lassos, plus a direct transcription of the transition definition.

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "recipe/checker.hpp"
#include "recipe/ltol.hpp"
#include "recipe/model.hpp"
#include "recipe/parser.hpp"
#include "recipe/semantics.hpp"

namespace testing_support {

using namespace recipe;
using Rng = std::mt19937_64;

inline std::size_t pick(Rng& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }
inline bool coin(Rng& rng, unsigned pct = 50) { return rng() % 100 < pct; }

inline std::string model_path(const std::string& name) {
  return std::string(RECIPE_MODELS_DIR) + "/" + name;
}

inline SourceModel load(const std::string& name) { return load_model(model_path(name)); }

// ---------------------------------------------------------------------------
// Random expressions over a chosen set of frame slots.

inline Expr random_expr(Rng& rng, const Layout& layout, const std::vector<std::size_t>& slots,
                        int depth) {
  if (slots.empty()) return Expr::constant(coin(rng));
  if (depth <= 0 || coin(rng, 35)) {
    const std::size_t s = slots[pick(rng, slots.size())];
    if (coin(rng, 20)) {
      std::vector<std::size_t> same;
      for (auto t : slots)
        if (t != s && layout[t].domain->values == layout[s].domain->values) same.push_back(t);
      if (!same.empty()) return Expr::eq_slot(s, same[pick(rng, same.size())], layout);
    }
    if (coin(rng, 5)) return Expr::constant(coin(rng));
    return Expr::eq_const(s, static_cast<Value>(pick(rng, layout[s].domain->size())));
  }
  switch (pick(rng, 3)) {
    case 0: return Expr::negate(random_expr(rng, layout, slots, depth - 1));
    case 1: {
      std::vector<Expr> k;
      for (std::size_t i = 0, n = 2 + pick(rng, 2); i < n; ++i)
        k.push_back(random_expr(rng, layout, slots, depth - 1));
      return Expr::all_of(std::move(k));
    }
    default: {
      std::vector<Expr> k;
      for (std::size_t i = 0, n = 2 + pick(rng, 2); i < n; ++i)
        k.push_back(random_expr(rng, layout, slots, depth - 1));
      return Expr::any_of(std::move(k));
    }
  }
}

// ---------------------------------------------------------------------------
// Random systems: 2-3 agents, at most 3 boolean locals each, up to 2
// channels, 2 data bits, 2 common bits.

inline std::vector<std::size_t> range_slots(std::size_t from, std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = from + i;
  return v;
}

inline Expr random_rule(Rng& rng, const Layout& layout, const FrameShape& sh) {
  std::vector<std::size_t> pre = range_slots(0, sh.locals);
  for (std::size_t i = 0; i < sh.data; ++i) pre.push_back(sh.data_slot(i));
  pre.push_back(sh.ch());
  std::vector<Expr> parts{random_expr(rng, layout, pre, 1)};
  for (std::size_t i = 0; i < sh.locals; ++i) {
    switch (pick(rng, 4)) {
      case 0: parts.push_back(Expr::eq_const(sh.primed(i), static_cast<Value>(pick(rng, 2)))); break;
      case 1: parts.push_back(Expr::eq_slot(sh.primed(i), sh.local(i), layout)); break;
      case 2: {
        std::vector<std::size_t> all = pre;
        all.push_back(sh.primed(i));
        parts.push_back(random_expr(rng, layout, all, 1));
        break;
      }
      default: break;  // unconstrained
    }
  }
  return Expr::all_of(std::move(parts));
}

inline SystemDef random_system(Rng& rng) {
  const std::size_t n_agents = 2 + pick(rng, 2);
  const std::size_t n_cv = pick(rng, 3);
  const std::size_t n_data = pick(rng, 3);
  DomainRef channels = coin(rng) ? make_domain("chan", {"star"}) : make_domain("chan", {"star", "K"});
  std::vector<VarDecl> common, data;
  for (std::size_t i = 0; i < n_cv; ++i)
    common.push_back({"c" + std::to_string(i), bool_domain(), VarKind::Common});
  for (std::size_t i = 0; i < n_data; ++i)
    data.push_back({"d" + std::to_string(i), bool_domain(), VarKind::Data});
  std::vector<AgentDef> agents;
  for (std::size_t a = 0; a < n_agents; ++a) {
    AgentDef ag;
    ag.id = "g" + std::to_string(a);
    const std::size_t nl = 1 + pick(rng, 3);
    for (std::size_t i = 0; i < nl; ++i)
      ag.locals.push_back({"v" + std::to_string(i), bool_domain(), VarKind::Local});
    for (std::size_t i = 0; i < n_cv; ++i) ag.relabel.push_back(pick(rng, nl));
    const Layout layout = make_agent_layout(ag.locals, data, common, channels);
    const FrameShape sh{nl, n_data, n_cv};
    std::vector<Expr> init;
    for (std::size_t i = 0; i < nl; ++i)
      if (coin(rng, 60)) init.push_back(Expr::eq_const(sh.local(i), static_cast<Value>(pick(rng, 2))));
    ag.init = Expr::all_of(std::move(init));
    std::vector<std::size_t> sg = range_slots(0, nl);
    for (std::size_t i = 0; i < n_data; ++i) sg.push_back(sh.data_slot(i));
    for (std::size_t i = 0; i < n_cv; ++i) sg.push_back(sh.cv_slot(i));
    sg.push_back(sh.ch());
    ag.send_guard = coin(rng, 20) ? Expr::constant(true) : random_expr(rng, layout, sg, 2);
    std::vector<std::size_t> rg = range_slots(0, nl);
    rg.push_back(sh.ch());
    ag.recv_guard = random_expr(rng, layout, rg, 1);
    if (coin(rng, 60))
      ag.recv_guard = Expr::any_of({Expr::eq_const(sh.ch(), 0), ag.recv_guard});
    std::vector<Expr> send;
    if (coin(rng, 90))
      for (std::size_t i = 0, n = 1 + pick(rng, 2); i < n; ++i) send.push_back(random_rule(rng, layout, sh));
    ag.send_rel = Expr::any_of(std::move(send));
    std::vector<Expr> recv;
    for (std::size_t i = 0, n = pick(rng, 3); i < n; ++i) recv.push_back(random_rule(rng, layout, sh));
    if (coin(rng, 50)) {
      std::vector<Expr> keep;
      for (std::size_t i = 0; i < nl; ++i) keep.push_back(Expr::eq_slot(sh.primed(i), sh.local(i), layout));
      recv.push_back(Expr::all_of(std::move(keep)));
    }
    ag.recv_rel = Expr::any_of(std::move(recv));
    agents.push_back(std::move(ag));
  }
  return SystemDef(std::move(common), std::move(data), std::move(channels), std::move(agents));
}

// ---------------------------------------------------------------------------
// Direct reading of the transition definition: sender k with a send step,
// its predicate materialised over all common-variable valuations, and every
// other agent choosing among (a) receive, (b) not listening, (c) broadcast
// not addressed to it.

inline std::vector<SysTransition> brute_successors(const SystemDef& sys, const GlobalState& s) {
  std::set<std::pair<Observation, Valuation>> seen;
  std::vector<SysTransition> out;
  const auto ddoms = sys.data_domains();
  const CvSpace& cv = sys.cv_space();
  auto load_local = [&](std::size_t a, std::vector<Value>& frame, std::span<const Value> v,
                        std::span<const Value> vp) {
    const FrameShape sh = sys.shape(a);
    for (std::size_t i = 0; i < sh.locals; ++i) {
      frame[sh.local(i)] = v[i];
      if (!vp.empty()) frame[sh.primed(i)] = vp[i];
    }
  };
  for (std::size_t k = 0; k < sys.agent_count(); ++k) {
    const AgentDef& ak = sys.agent(k);
    const FrameShape shk = sys.shape(k);
    const auto sk = s.component(sys, k);
    for (Value ch = 0; ch < sys.channels()->size(); ++ch) {
      Valuation d(ddoms.size(), 0);
      do {
        for (const auto& skp : enumerate_states(ak)) {
          auto frame = sys.layout(k).blank_frame();
          load_local(k, frame, sk, skp);
          for (std::size_t i = 0; i < d.size(); ++i) frame[shk.data_slot(i)] = d[i];
          frame[shk.ch()] = ch;
          for (std::size_t i = 0; i < shk.cv; ++i) frame[shk.cv_slot(i)] = 0;
          if (!eval(ak.send_rel, frame, sys.layout(k))) continue;
          Observation m{ch, d, static_cast<std::uint32_t>(k), {}};
          for (std::uint32_t r = 0; r < cv.size(); ++r) {
            Valuation c = cv.decode(r);
            for (std::size_t i = 0; i < shk.cv; ++i) frame[shk.cv_slot(i)] = c[i];
            if (eval(ak.send_guard, frame, sys.layout(k))) m.pred.sat.push_back(r);
          }
          // per-receiver options
          std::vector<std::vector<Valuation>> options(sys.agent_count());
          options[k] = {Valuation(skp.begin(), skp.end())};
          bool blocked = false;
          for (std::size_t j = 0; j < sys.agent_count() && !blocked; ++j) {
            if (j == k) continue;
            const AgentDef& aj = sys.agent(j);
            const FrameShape shj = sys.shape(j);
            const auto sj = s.component(sys, j);
            Valuation c(aj.relabel.size());
            for (std::size_t v = 0; v < c.size(); ++v) c[v] = sj[aj.relabel[v]];
            const bool in_pi = std::find(m.pred.sat.begin(), m.pred.sat.end(), cv.rank(c)) !=
                               m.pred.sat.end();
            auto fj = sys.layout(j).blank_frame();
            load_local(j, fj, sj, {});
            fj[shj.ch()] = ch;
            const bool listens = eval(aj.recv_guard, fj, sys.layout(j));
            std::set<Valuation> opts;
            if (listens && in_pi) {
              for (const auto& sjp : enumerate_states(aj)) {
                load_local(j, fj, sj, sjp);
                for (std::size_t i = 0; i < d.size(); ++i) fj[shj.data_slot(i)] = d[i];
                for (std::size_t i = 0; i < shj.cv; ++i) fj[shj.cv_slot(i)] = 0;
                if (eval(aj.recv_rel, fj, sys.layout(j))) opts.insert(sjp);
              }
            }
            if (!listens) opts.insert(Valuation(sj.begin(), sj.end()));
            if (ch == sys.star() && !in_pi) opts.insert(Valuation(sj.begin(), sj.end()));
            if (opts.empty()) blocked = true;
            options[j].assign(opts.begin(), opts.end());
          }
          if (blocked) continue;
          std::vector<std::size_t> idx(options.size(), 0);
          while (true) {
            GlobalState to;
            for (std::size_t j = 0; j < options.size(); ++j)
              to.values.insert(to.values.end(), options[j][idx[j]].begin(), options[j][idx[j]].end());
            if (seen.insert({m, to.values}).second) out.push_back({s, m, to});
            std::size_t j = options.size();
            while (j-- > 0) {
              if (++idx[j] < options[j].size()) break;
              idx[j] = 0;
            }
            if (j == static_cast<std::size_t>(-1)) break;
          }
        }
      } while (next_valuation(d, ddoms));
    }
  }
  std::sort(out.begin(), out.end(),
            [&](const SysTransition& a, const SysTransition& b) { return transition_less(sys, a, b); });
  return out;
}

// ---------------------------------------------------------------------------
// Random formulas and lassos over a tiny vocabulary: state a.x, a.y, b.z,
// common c0, c1, data d0, channels star and K, agents a and b.

inline Vocabulary tiny_vocab() {
  Vocabulary v;
  v.state = {{"a.x", bool_domain()}, {"a.y", bool_domain()}, {"b.z", bool_domain()}};
  v.common = {{"c0", bool_domain(), VarKind::Common}, {"c1", bool_domain(), VarKind::Common}};
  v.data = {{"d0", bool_domain(), VarKind::Data}};
  v.channels = make_domain("chan", {"star", "K"});
  v.agents = {"a", "b"};
  v.cv = CvSpace({bool_domain(), bool_domain()});
  return v;
}

inline Descriptor random_descriptor(Rng& rng, int depth) {
  if (depth <= 0 || coin(rng, 40)) {
    const bool pos = coin(rng);
    switch (pick(rng, 6)) {
      case 0: return Descriptor::channel(static_cast<Value>(pick(rng, 2)), pos);
      case 1: return Descriptor::sender(static_cast<Value>(pick(rng, 2)), pos);
      case 2: return Descriptor::data(0, static_cast<Value>(pick(rng, 2)), pos);
      case 3:
      case 4: return Descriptor::cv(static_cast<std::uint32_t>(pick(rng, 2)), static_cast<Value>(pick(rng, 2)), pos);
      default: return Descriptor::constant(coin(rng));
    }
  }
  switch (pick(rng, 4)) {
    case 0: return Descriptor::exists(random_descriptor(rng, depth - 1));
    case 1: return Descriptor::forall(random_descriptor(rng, depth - 1));
    case 2: return Descriptor::conj(random_descriptor(rng, depth - 1), random_descriptor(rng, depth - 1));
    default: return Descriptor::disj(random_descriptor(rng, depth - 1), random_descriptor(rng, depth - 1));
  }
}

// Formula with at most `budget` nodes.
inline Formula random_formula(Rng& rng, std::size_t budget) {
  if (budget <= 1 || coin(rng, 15)) {
    if (coin(rng, 10)) return Formula::constant(coin(rng));
    return Formula::lit(static_cast<std::uint32_t>(pick(rng, 3)), static_cast<Value>(pick(rng, 2)), coin(rng));
  }
  if (budget == 2 || coin(rng, 30)) {
    Formula k = random_formula(rng, budget - 1);
    Descriptor d = random_descriptor(rng, 2);
    return coin(rng) ? Formula::possible(d, k) : Formula::necessary(d, k);
  }
  const std::size_t left = 1 + pick(rng, budget - 2);
  Formula a = random_formula(rng, left);
  Formula b = random_formula(rng, budget - 1 - left);
  switch (pick(rng, 4)) {
    case 0: return Formula::conj(a, b);
    case 1: return Formula::disj(a, b);
    case 2: return Formula::until(a, b);
    default: return Formula::release(a, b);
  }
}

inline Observation random_observation(Rng& rng) {
  Observation m;
  m.ch = static_cast<Value>(pick(rng, 2));
  m.data = {static_cast<Value>(pick(rng, 2))};
  m.sender = static_cast<std::uint32_t>(pick(rng, 2));
  for (std::uint32_t r = 0; r < 4; ++r)
    if (coin(rng)) m.pred.sat.push_back(r);
  return m;
}

inline Lasso random_lasso(Rng& rng, std::size_t max_len) {
  Lasso l;
  const std::size_t pre = pick(rng, max_len / 2 + 1);
  const std::size_t cyc = 1 + pick(rng, max_len - pre);
  auto step = [&]() {
    LassoStep s;
    for (int i = 0; i < 3; ++i) s.state.push_back(static_cast<Value>(pick(rng, 2)));
    s.obs = random_observation(rng);
    return s;
  };
  for (std::size_t i = 0; i < pre; ++i) l.prefix.push_back(step());
  for (std::size_t i = 0; i < cyc; ++i) l.cycle.push_back(step());
  return l;
}

// All 16 predicates over two common bits.
inline std::vector<CvPredicate> all_predicates_2bit() {
  std::vector<CvPredicate> out;
  for (unsigned mask = 0; mask < 16; ++mask) {
    CvPredicate p;
    for (std::uint32_t r = 0; r < 4; ++r)
      if (mask & (1u << r)) p.sat.push_back(r);
    out.push_back(p);
  }
  return out;
}

inline std::uint64_t pow3_capped(std::size_t n, std::uint64_t cap) {
  std::uint64_t r = 1;
  for (std::size_t i = 0; i < n && r <= cap; ++i) r *= 3;
  return r;
}

}  // namespace testing_support
