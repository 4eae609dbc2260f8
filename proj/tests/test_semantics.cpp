#include <gtest/gtest.h>

#include <chrono>

#include "recipe/semantics.hpp"
#include "support.hpp"

using namespace recipe;
using namespace testing_support;

namespace {

std::string dump(const SystemDef& sys, const std::vector<SysTransition>& ts) {
  std::string o;
  for (const auto& t : ts) o += format_observation(sys, t.obs) + " -> " + format_state(sys, t.to) + "\n";
  return o;
}

// Two agents with one boolean each. a sends on star with data d := v and
// flips v; b receives when its flag is clear and copies d.
const char* kToy = R"(
  system toy2 {
    common { c : bool; }
    data { d : bool; }
    channels { star }
    agent a {
      locals { v : bool; }
      relabel { c -> v; }
      init: v;
      send-guard: !cv.c;
      recv-guard: ch = star;
      send { ch = star & data.d = v & v & !v'; ch = star & data.d = v & !v & v'; }
      recv { keep(all); }
    }
    agent b {
      locals { u : bool; }
      relabel { c -> u; }
      init: true;
      send-guard: false;
      recv-guard: ch = star;
      recv { u' = data.d; }
    }
  })";

}  // namespace

TEST(Initial, Counts) {
  EXPECT_EQ(initial_states(load("rms_line.rcp").system).size(), 2u);
  EXPECT_EQ(initial_states(load("toy.rcp").system).size(), 1u);
  SystemDef free_agent = parse_system(R"(
    system s { channels { star }
      agent a { locals { v : bool; } init: true; send-guard: true; recv-guard: true; } })");
  EXPECT_EQ(initial_states(free_agent).size(), 2u);

  SystemDef sys = load("rms.rcp").system;
  std::size_t expect = 1;
  for (std::size_t i = 0; i < sys.agent_count(); ++i)
    expect *= enumerate_sat(sys.agent(i).init, sys.agent(i).locals).size();
  EXPECT_EQ(initial_states(sys).size(), expect);
}

TEST(Initial, EmptyIsModelError) {
  SystemDef s = parse_system(R"(
    system s { channels { star }
      agent a { locals { v : bool; } init: v & !v; send-guard: true; recv-guard: true; } })");
  EXPECT_THROW(initial_states(s), ModelError);
}

TEST(Successors, NoSenderMeansDeadlock) {
  SystemDef s = parse_system(R"(
    system s { channels { star }
      agent a { locals { v : bool; } init: v; send-guard: true; recv-guard: true;
                recv { keep(all); } } })");
  auto init = initial_states(s);
  for (Engine e : {Engine::Reference, Engine::Symbolic})
    EXPECT_TRUE(TransitionEngine(s, e).successors(init[0]).empty());
  SystemSpace sp = explore(s);
  EXPECT_EQ(sp.states.size(), 1u);
  EXPECT_EQ(sp.deadlocks.size(), 1u);
}

TEST(Successors, ToyFullList) {
  SystemDef sys = parse_system(kToy);
  // from (v=true, u=false): a sends d=true with pi = {c=false}; b has u=false,
  // so it is addressed and must receive: u' = true
  GlobalState s{{1, 0}};
  auto ref = successors_reference(sys, s);
  ASSERT_EQ(ref.size(), 1u) << dump(sys, ref);
  EXPECT_EQ(ref[0].obs.ch, sys.star());
  EXPECT_EQ(ref[0].obs.data, (Valuation{1}));
  EXPECT_EQ(ref[0].obs.sender, 0u);
  EXPECT_EQ(ref[0].obs.pred.sat, (std::vector<std::uint32_t>{0}));
  EXPECT_EQ(ref[0].to.values, (Valuation{0, 1}));
  // from (v=false, u=true): b is not addressed and keeps u
  s = {{0, 1}};
  ref = successors_reference(sys, s);
  ASSERT_EQ(ref.size(), 1u) << dump(sys, ref);
  EXPECT_EQ(ref[0].to.values, (Valuation{1, 1}));
  for (auto st : {GlobalState{{0, 0}}, GlobalState{{0, 1}}, GlobalState{{1, 0}}, GlobalState{{1, 1}}}) {
    EXPECT_EQ(successors_reference(sys, st), brute_successors(sys, st));
    EXPECT_EQ(successors_symbolic(sys, st), brute_successors(sys, st));
  }
}

TEST(Successors, OrderIsCanonical) {
  SystemDef sys = load("pair.rcp").system;
  for (const auto& g : explore(sys).states) {
    auto ts = successors_symbolic(sys, g);
    EXPECT_TRUE(std::is_sorted(ts.begin(), ts.end(), [&](const auto& a, const auto& b) {
      return transition_less(sys, a, b);
    }));
  }
}

TEST(Successors, MulticastBlockedByUnwillingReceiver) {
  // b listens on K but has no receive step, so a's K message is blocked
  SystemDef sys = parse_system(R"(
    system s { channels { star, K }
      agent a { locals { v : bool; } init: v; send-guard: true; recv-guard: ch = star;
                send { ch = K & v' = v; } recv { keep(all); } }
      agent b { locals { u : bool; } init: u; send-guard: false; recv-guard: true;
                recv { ch = star & keep(all); } } })");
  GlobalState s{{1, 1}};
  for (Engine e : {Engine::Reference, Engine::Symbolic})
    EXPECT_TRUE(TransitionEngine(sys, e).successors(s).empty());
}

TEST(Successors, ReceiversOffChannelKeepState) {
  SystemDef sys = load("pair.rcp").system;
  for (const auto& g : explore(sys).states)
    for (const auto& t : successors_symbolic(sys, g))
      for (std::size_t j = 0; j < sys.agent_count(); ++j) {
        if (j == t.obs.sender) continue;
        // receiver clause: listening and addressed, or unchanged
        const auto& aj = sys.agent(j);
        auto fj = sys.layout(j).blank_frame();
        const FrameShape sh = sys.shape(j);
        auto cur = g.component(sys, j);
        for (std::size_t i = 0; i < sh.locals; ++i) fj[i] = cur[i];
        fj[sh.ch()] = t.obs.ch;
        const bool listens = eval(aj.recv_guard, fj, sys.layout(j));
        const bool addressed = holds_for_receiver(t.obs.pred, aj.relabel, cur, sys.cv_space());
        auto nxt = t.to.component(sys, j);
        const bool same = std::equal(cur.begin(), cur.end(), nxt.begin());
        EXPECT_TRUE((listens && addressed) || same);
        if (t.obs.ch != sys.star()) {
          EXPECT_TRUE(!listens || addressed);
        }
      }
}

TEST(Successors, AgreeWithDefinitionOnRandomSystems) {
  Rng rng(2024);
  std::size_t checked = 0, transitions = 0;
  for (int i = 0; i < 120; ++i) {
    SystemDef sys = random_system(rng);
    std::vector<GlobalState> inits;
    try {
      inits = initial_states(sys);
    } catch (const ModelError&) {
      continue;
    }
    SystemSpace sp = explore(sys, {5000, Engine::Reference});
    for (const auto& g : sp.states) {
      auto ref = successors_reference(sys, g);
      auto sym = successors_symbolic(sys, g);
      auto brute = brute_successors(sys, g);
      ASSERT_EQ(ref, sym) << "system " << i << " state " << format_state(sys, g);
      ASSERT_EQ(ref, brute) << "system " << i << " state " << format_state(sys, g) << "\nref:\n"
                            << dump(sys, ref) << "brute:\n" << dump(sys, brute);
      ++checked;
      transitions += ref.size();
    }
  }
  EXPECT_GT(checked, 500u);
  EXPECT_GT(transitions, 0u);
}

TEST(Explore, SenderlessSystemIsAllInitialDeadlocks) {
  SystemDef s = parse_system(R"(
    system s { channels { star }
      agent a { locals { v : bool; w : bool; } init: v; send-guard: true; recv-guard: true;
                recv { keep(all); } } })");
  SystemSpace sp = explore(s);
  EXPECT_EQ(sp.states.size(), 2u);
  EXPECT_EQ(sp.initials.size(), 2u);
  EXPECT_EQ(sp.deadlocks.size(), 2u);
  EXPECT_EQ(sp.transition_count(), 0u);
}

TEST(Explore, MatchesIndependentClosure) {
  for (const char* f : {"toy.rcp", "pair.rcp", "rms_line.rcp"}) {
    SystemDef sys = load(f).system;
    std::set<GlobalState> seen;
    std::vector<GlobalState> stack = initial_states(sys);
    std::size_t edges = 0;
    std::set<std::pair<GlobalState, std::pair<Observation, GlobalState>>> es;
    for (const auto& g : stack) seen.insert(g);
    while (!stack.empty()) {
      GlobalState g = stack.back();
      stack.pop_back();
      for (const auto& t : brute_successors(sys, g)) {
        es.insert({g, {t.obs, t.to}});
        if (seen.insert(t.to).second) stack.push_back(t.to);
      }
    }
    edges = es.size();
    for (Engine e : {Engine::Reference, Engine::Symbolic}) {
      SystemSpace sp = explore(sys, {100000, e});
      EXPECT_EQ(sp.states.size(), seen.size()) << f;
      EXPECT_EQ(sp.transition_count(), edges) << f;
      EXPECT_FALSE(sp.truncated);
    }
  }
}

TEST(Explore, Truncation) {
  SystemDef sys = load("rms.rcp").system;
  SystemSpace sp = explore(sys, {10, Engine::Symbolic});
  EXPECT_TRUE(sp.truncated);
  EXPECT_LE(sp.states.size(), 10u);
  EXPECT_TRUE(sp.deadlocks.empty());
}

TEST(Explore, RmsIsFiniteAndDeadlockFree) {
  SystemDef sys = load("rms.rcp").system;
  auto t0 = std::chrono::steady_clock::now();
  SystemSpace sp = explore(sys);
  auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_FALSE(sp.truncated);
  EXPECT_TRUE(sp.deadlocks.empty());
  EXPECT_LT(sp.states.size(), 1'000'000u);
  EXPECT_LT(secs, 60.0);
  // the team returns to the initial configuration
  std::set<std::uint32_t> init(sp.initials.begin(), sp.initials.end());
  bool back = false;
  for (std::size_t s = 0; s < sp.states.size(); ++s)
    for (const auto& e : sp.edges[s])
      if (init.count(e.to) && s != e.to) back = true;
  EXPECT_TRUE(back);
}

TEST(Explore, EnginesProduceTheSameSpace) {
  for (const char* f : {"rms.rcp", "pair.rcp"}) {
    SystemDef sys = load(f).system;
    SystemSpace a = explore(sys, {1'000'000, Engine::Reference});
    SystemSpace b = explore(sys, {1'000'000, Engine::Symbolic});
    EXPECT_EQ(a.states, b.states) << f;
    EXPECT_EQ(a.observations, b.observations) << f;
    ASSERT_EQ(a.edges.size(), b.edges.size());
    for (std::size_t i = 0; i < a.edges.size(); ++i) {
      ASSERT_EQ(a.edges[i].size(), b.edges[i].size());
      for (std::size_t j = 0; j < a.edges[i].size(); ++j) {
        EXPECT_EQ(a.edges[i][j].obs, b.edges[i][j].obs);
        EXPECT_EQ(a.edges[i][j].to, b.edges[i][j].to);
      }
    }
  }
}
