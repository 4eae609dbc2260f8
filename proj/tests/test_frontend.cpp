#include <gtest/gtest.h>

#include "recipe/formula_parser.hpp"
#include "recipe/parser.hpp"
#include "recipe/printer.hpp"
#include "support.hpp"

using namespace recipe;
using namespace testing_support;

namespace {

using D = Descriptor;
using F = Formula;

const char* kCorpus[] = {"rms.rcp", "rms_mutant.rcp", "rms_line.rcp", "toy.rcp", "pair.rcp"};

std::string parse_error(std::string_view text) {
  try {
    (void)parse_model(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

// "line:col: msg" with positive line and column
bool positioned(const std::string& msg) {
  auto c1 = msg.find(':');
  if (c1 == std::string::npos || c1 == 0) return false;
  auto c2 = msg.find(':', c1 + 1);
  if (c2 == std::string::npos || c2 == c1 + 1) return false;
  try {
    return std::stoi(msg.substr(0, c1)) >= 1 && std::stoi(msg.substr(c1 + 1, c2 - c1 - 1)) >= 1;
  } catch (...) {
    return false;
  }
}

}  // namespace

TEST(Parser, RmsStructure) {
  SourceModel m = load("rms.rcp");
  const SystemDef& sys = m.system;
  ASSERT_EQ(sys.agent_count(), 5u);
  std::vector<std::string> ids;
  for (const auto& a : sys.agents()) ids.push_back(a.id);
  EXPECT_EQ(ids, (std::vector<std::string>{"line", "r1", "r2", "r3", "r4"}));
  EXPECT_EQ(sys.channels()->values, (std::vector<std::string>{"star", "A"}));
  ASSERT_EQ(sys.common().size(), 3u);
  EXPECT_EQ(sys.common()[0].name, "type");
  // the template parameter fixes the robot type in the initial condition
  auto robot_type = [&](std::size_t i) {
    auto init = enumerate_sat(sys.agent(i).init, sys.agent(i).locals);
    EXPECT_EQ(init.size(), 1u);
    return sys.agent(i).locals[4].domain->values[init[0][4]];
  };
  EXPECT_EQ(robot_type(1), "t1");
  EXPECT_EQ(robot_type(2), "t1");
  EXPECT_EQ(robot_type(3), "t2");
  EXPECT_EQ(robot_type(4), "t2");
  // line starts pending, product 1, stage 0
  auto line_init = enumerate_sat(sys.agent(0).init, sys.agent(0).locals);
  ASSERT_EQ(line_init.size(), 1u);
  EXPECT_EQ(format_valuation(sys.agent(0).locals, line_init[0]),
            "st=pnd, stage=0, lnk=A, prd=1, ltype=line, lasgn=false, lrdy=0");
  EXPECT_EQ(m.properties.size(), 10u);
}

TEST(Parser, RoundTripOverCorpus) {
  for (const char* f : kCorpus) {
    SourceModel m = load(f);
    const std::string text = print_model(m);
    SourceModel back = parse_model(text);
    EXPECT_TRUE(back.system == m.system) << f << "\n" << text;
    ASSERT_EQ(back.properties.size(), m.properties.size());
    for (std::size_t i = 0; i < m.properties.size(); ++i) {
      EXPECT_EQ(back.properties[i].name, m.properties[i].name);
      EXPECT_EQ(back.properties[i].formula, m.properties[i].formula) << m.properties[i].name;
    }
    EXPECT_EQ(print_model(back), text) << f;
  }
}

TEST(Parser, EmptyAgentBody) {
  std::string e = parse_error("system s { channels { star } agent a { } }");
  EXPECT_NE(e.find("missing init"), std::string::npos) << e;
  EXPECT_TRUE(positioned(e)) << e;
}

TEST(Parser, UndeclaredCommonVariable) {
  std::string e = parse_error(R"(system s {
  channels { star }
  agent a {
    locals { v : bool; }
    init: v;
    send-guard: cv.nope;
    recv-guard: true;
  }
})");
  EXPECT_NE(e.find("undeclared common variable"), std::string::npos) << e;
  EXPECT_EQ(e.substr(0, 5), "6:17:") << e;
}

TEST(Parser, Diagnostics) {
  struct Case {
    const char* text;
    const char* needle;
  };
  const Case cases[] = {
      {"system s { agent a { } }", "channels"},
      {"system s { channels { K } }", "star"},
      {"system s { channels { star } }", "no agents"},
      {"system s { channels { star } agent a { locals { v : nat; } } }", "unknown domain"},
      {"system s { channels { star } agent a { locals { v : bool; } init: w; send-guard: true; recv-guard: true; } }",
       "unknown variable"},
      {"system s { channels { star } agent a { locals { v : bool; } init: v'; send-guard: true; recv-guard: true; } }",
       "may not appear"},
      {"system s { channels { star } agent a { locals { v : bool; } init: keep(v); send-guard: true; recv-guard: true; } }",
       "keep()"},
      {"system s { channels { star } agent a { locals { v : bool; } init: v; send-guard: true; recv-guard: true; } "
       "property p := G a.w; }",
       "unknown state variable"},
      {"system s { channels { star } agent a { locals { v : bool; } init: v; send-guard: true; recv-guard: true; } "
       "property p := G ch = star; }",
       "inside <..>"},
      {"system s { channels { star } agent a : t; }", "unknown template"},
      {"system s { channels { star } # }", "unexpected character"},
      {"system s { channels { star } /* open", "unterminated comment"},
  };
  for (const auto& c : cases) {
    std::string e = parse_error(c.text);
    EXPECT_NE(e.find(c.needle), std::string::npos) << c.text << "\n  -> " << e;
    EXPECT_TRUE(positioned(e)) << e;
  }
}

TEST(Parser, SugarCompilesToValueTables) {
  SystemDef sys = parse_system(R"(
    system s {
      domain count { 0, 1, 2 }
      channels { star }
      agent a {
        locals { n : count; }
        init: n = 2;
        send-guard: true;
        recv-guard: true;
        send { n >= 1 & n' = n - 1 & ch = star; }
        recv { keep(all); }
      }
    })");
  SystemSpace sp = explore(sys);
  // 2 -> 1 -> 0, then stuck
  EXPECT_EQ(sp.states.size(), 3u);
  EXPECT_EQ(sp.deadlocks.size(), 1u);
  EXPECT_EQ(sp.states[sp.deadlocks[0]].values, (Valuation{0}));
}

TEST(FormulaParser, NotificationProperty) {
  SourceModel m = load("rms.rcp");
  const Vocabulary v = Vocabulary::of(m.system);
  F parsed = parse_formula(
      "G((line.prd=1 & line.st=pnd & <sender=line & ch=star> true) -> "
      "<E cv.type=t1 & E cv.type=t2 & A (cv.type=t1 | cv.type=t2)> true)",
      m.system);
  auto sv = [&](const char* n) { return static_cast<std::uint32_t>(*v.find_state(n)); };
  const auto type = static_cast<std::uint32_t>(*v.find_common("type"));
  F prd1 = F::lit(sv("line.prd"), 0);
  F pnd = F::lit(sv("line.st"), 0);
  F sent = F::possible(D::conj(D::sender(0), D::channel(0)), F::constant(true));
  D o1 = D::conj(D::conj(D::exists(D::cv(type, 1)), D::exists(D::cv(type, 2))),
                 D::forall(D::disj(D::cv(type, 1), D::cv(type, 2))));
  F expect = F::globally(F::disj(dual(F::conj(F::conj(prd1, pnd), sent)), F::possible(o1, F::constant(true))));
  EXPECT_EQ(parsed, expect);
  EXPECT_EQ(parsed, m.property("notify_both")->formula);
}

TEST(FormulaParser, NegatedEventually) {
  SourceModel m = load("toy.rcp");
  EXPECT_EQ(parse_formula("!(F a.v)", m.system), F::globally(F::lit(0, 1, false)));
  EXPECT_EQ(parse_formula("!G !a.v", m.system), F::eventually(F::lit(0, 1)));
  EXPECT_EQ(parse_formula("a.v -> F !a.v", m.system),
            F::disj(F::lit(0, 1, false), F::eventually(F::lit(0, 1, false))));
}

TEST(FormulaParser, DescriptorNormalization) {
  const Vocabulary v = tiny_vocab();
  F f = parse_formula("<E (cv.c0 | A (E cv.c1 = false))> true", v);
  D expect = D::exists(D::disj(D::cv(0, 1), D::cv(1, 0)));
  EXPECT_EQ(f, F::possible(expect, F::constant(true)));
}

TEST(FormulaParser, Precedence) {
  const Vocabulary v = tiny_vocab();
  F x = F::lit(0, 1), y = F::lit(1, 1), z = F::lit(2, 1);
  EXPECT_EQ(parse_formula("a.x | a.y & b.z", v), F::disj(x, F::conj(y, z)));
  EXPECT_EQ(parse_formula("a.x U a.y U b.z", v), F::until(x, F::until(y, z)));
  EXPECT_EQ(parse_formula("a.x & a.y U b.z", v), F::conj(x, F::until(y, z)));
  EXPECT_EQ(parse_formula("a.x -> a.y -> b.z", v),
            F::disj(dual(x), F::disj(dual(y), z)));
  EXPECT_EQ(parse_formula("a.x W a.y", v), F::weak_until(x, y));
  EXPECT_EQ(parse_formula("<a> true", v), F::possible(D::sender(0), F::constant(true)));
  EXPECT_EQ(parse_formula("[ch != K] a.x", v), F::necessary(D::channel(1, false), x));
}

TEST(FormulaParser, PrintedFormulasReparse) {
  const Vocabulary v = tiny_vocab();
  Rng rng(31);
  for (int i = 0; i < 500; ++i) {
    F f = random_formula(rng, 12);
    const std::string s = to_string(f, v);
    EXPECT_EQ(parse_formula(s, v), normalize_descriptors(f)) << s;
  }
}

TEST(FormulaParser, Errors) {
  const Vocabulary v = tiny_vocab();
  for (const char* bad : {"a.q", "c.x", "a.x = maybe", "<cv.c9> true", "<ch = Z> true", "a.x &", "(a.x",
                          "a", "<sender = nobody> true", "a.x a.y"}) {
    try {
      (void)parse_formula(bad, v);
      ADD_FAILURE() << "accepted: " << bad;
    } catch (const ParseError& e) {
      EXPECT_TRUE(positioned(e.what())) << bad << " -> " << e.what();
    }
  }
  std::string deep(500, '(');
  EXPECT_THROW(parse_formula(deep + "a.x" + std::string(500, ')'), v), ParseError);
}

TEST(Fuzz, MutatedModelsNeverCrash) {
  const std::string src = load("rms.rcp").text;
  Rng rng(41);
  const std::string alphabet = "{}();:,.'=!&|<>+-[] \nabc01_*/";
  std::size_t accepted = 0;
  for (int i = 0; i < 400; ++i) {
    std::string t = src;
    for (int k = 0, n = 1 + static_cast<int>(pick(rng, 4)); k < n; ++k) {
      if (t.empty()) break;
      const std::size_t p = pick(rng, t.size());
      switch (pick(rng, 4)) {
        case 0: t.erase(p, 1 + pick(rng, 8)); break;
        case 1: t.insert(p, 1, alphabet[pick(rng, alphabet.size())]); break;
        case 2: t[p] = static_cast<char>(pick(rng, 256)); break;
        default: t.resize(p); break;
      }
    }
    try {
      SourceModel m = parse_model(t);
      ++accepted;
      (void)validate_system(m.system);
    } catch (const ParseError& e) {
      EXPECT_TRUE(positioned(e.what())) << e.what();
    } catch (const Error&) {
      // model-level errors are fine
    }
  }
  EXPECT_LT(accepted, 400u);
}

TEST(Fuzz, RandomFormulaTextNeverCrashes) {
  const Vocabulary v = tiny_vocab();
  const std::vector<std::string> toks{"a.x", "b.z", "true", "false", "!", "&", "|", "->", "<->", "U", "R", "W",
                                      "F", "G", "(", ")", "<", ">", "[", "]", "E", "A", "cv.c0", "ch",
                                      "=", "!=", "star", "K", "sender", "a", "data.d0", "=", "true"};
  Rng rng(43);
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    for (std::size_t k = 0, n = 1 + pick(rng, 12); k < n; ++k) s += toks[pick(rng, toks.size())] + " ";
    try {
      F f = parse_formula(s, v);
      check_vocabulary(f, v);
    } catch (const ParseError& e) {
      EXPECT_TRUE(positioned(e.what())) << s << " -> " << e.what();
    }
  }
}
