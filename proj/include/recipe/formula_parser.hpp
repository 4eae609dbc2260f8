#pragma once

// Surface syntax for formulas. Negation, implication and F/G/W are
// eliminated while parsing; the result is in positive normal form with
// normalized descriptors.
//
//   f   := imp ('<->' imp)?
//   imp := or ('->' imp)?
//   or  := and ('|' and)*
//   and := tmp ('&' tmp)*
//   tmp := un (('U' | 'R' | 'W') tmp)?
//   un  := '!' un | 'F' un | 'G' un | '<' O '>' un | '[' O ']' un | '(' f ')'
//        | 'true' | 'false' | agent '.' var (cmp value)?
//   O   := Oor ('->' O)?    Oor := Oand ('|' Oand)*    Oand := Oun ('&' Oun)*
//   Oun := '!' Oun | 'E' Oun | 'A' Oun | '(' O ')' | 'true' | 'false'
//        | 'ch' cmp chan | 'sender' cmp agent | 'data' '.' x (cmp v)?
//        | 'cv' '.' x (cmp v)? | agent

#include <string>
#include <string_view>

#include "recipe/lexer.hpp"
#include "recipe/ltol.hpp"

namespace recipe {

class FormulaParser {
 public:
  FormulaParser(TokenStream& ts, const Vocabulary& v) : ts_(ts), v_(v) {}

  Formula parse() { return normalize_descriptors(formula()); }

 private:
  using F = Formula;
  using D = Descriptor;

  static const std::string& value_of(const Token& t) { return t.text; }

  Formula formula() {
    TokenStream::DepthGuard g(ts_);
    Formula a = implication();
    if (ts_.accept("<->")) {
      Formula b = implication();
      return F::conj(F::disj(dual(a), b), F::disj(dual(b), a));
    }
    return a;
  }

  Formula implication() {
    TokenStream::DepthGuard g(ts_);
    Formula a = disjunction();
    if (ts_.accept("->")) return F::disj(dual(a), implication());
    return a;
  }

  Formula disjunction() {
    Formula a = conjunction();
    while (ts_.accept("|")) a = F::disj(a, conjunction());
    return a;
  }

  Formula conjunction() {
    Formula a = temporal();
    while (ts_.accept("&")) a = F::conj(a, temporal());
    return a;
  }

  Formula temporal() {
    TokenStream::DepthGuard g(ts_);
    Formula a = unary();
    if (ts_.accept_word("U")) return F::until(a, temporal());
    if (ts_.accept_word("R")) return F::release(a, temporal());
    if (ts_.accept_word("W")) return F::weak_until(a, temporal());
    return a;
  }

  Formula unary() {
    TokenStream::DepthGuard g(ts_);
    const Token& t = ts_.peek();
    if (ts_.accept("!")) return dual(unary());
    if (t.is_word("F") && !ts_.peek(1).is(".")) {
      ts_.next();
      return F::eventually(unary());
    }
    if (t.is_word("G") && !ts_.peek(1).is(".")) {
      ts_.next();
      return F::globally(unary());
    }
    if (ts_.accept("<")) {
      Descriptor o = descriptor();
      ts_.expect(">");
      return F::possible(o, unary());
    }
    if (ts_.accept("[")) {
      Descriptor o = descriptor();
      ts_.expect("]");
      return F::necessary(o, unary());
    }
    if (ts_.accept("(")) {
      Formula f = formula();
      ts_.expect(")");
      return f;
    }
    if (ts_.accept_word("true")) return F::constant(true);
    if (ts_.accept_word("false")) return F::constant(false);
    return literal();
  }

  Formula literal() {
    const Token& head = ts_.peek();
    if (head.is_word("ch") || head.is_word("sender") ||
        ((head.is_word("data") || head.is_word("cv")) && ts_.peek(1).is(".")))
      ts_.fail("observation atom '" + head.text + "' must appear inside <..> or [..]");
    const Token& agent = ts_.expect_ident("a formula");
    if (!ts_.peek().is(".")) {
      if (v_.find_agent(agent.text))
        throw ParseError(agent.pos, "sender atom '" + agent.text + "' must appear inside <..> or [..]");
      throw ParseError(agent.pos, "unknown name '" + agent.text + "'");
    }
    ts_.next();
    const Token& var = ts_.expect_name("a variable name");
    const std::string name = agent.text + "." + var.text;
    auto idx = v_.find_state(name);
    if (!idx) throw ParseError(agent.pos, "unknown state variable '" + name + "'");
    const Domain& dom = *v_.state[*idx].domain;
    const auto var_id = static_cast<std::uint32_t>(*idx);
    return compare<Formula>(
        dom, agent.pos, name,
        [&](Value val, bool pos) { return F::lit(var_id, val, pos); },
        [](bool c) { return F::constant(c); }, [](Formula a, Formula b) { return F::disj(a, b); });
  }

  // Parses an optional comparison after an atom head and builds it from
  // equality literals. A bare boolean atom means `= true`.
  template <class T, class Lit, class Const, class Or>
  T compare(const Domain& dom, SourcePos pos, const std::string& name, Lit lit, Const cst, Or any) {
    static constexpr std::string_view kOps[] = {"=", "!=", "<", "<=", ">", ">="};
    std::string op;
    for (auto o : kOps)
      if (ts_.peek().is(o)) op = o;
    if (op.empty()) {
      int t = dom.index_of("true");
      if (dom.size() != 2 || t < 0 || dom.index_of("false") < 0)
        throw ParseError(pos, "'" + name + "' is not boolean; compare it with a value");
      return lit(static_cast<Value>(t), true);
    }
    ts_.next();
    const Token& val = ts_.expect_name("a value");
    int idx = dom.index_of(val.text);
    if (idx < 0)
      throw ParseError(val.pos, "value '" + val.text + "' is not in the domain of '" + name + "'");
    if (op == "=") return lit(static_cast<Value>(idx), true);
    if (op == "!=") return lit(static_cast<Value>(idx), false);
    std::optional<T> acc;
    for (std::size_t i = 0; i < dom.size(); ++i) {
      const auto ii = static_cast<int>(i);
      bool keep = op == "<" ? ii < idx : op == "<=" ? ii <= idx : op == ">" ? ii > idx : ii >= idx;
      if (!keep) continue;
      T l = lit(static_cast<Value>(i), true);
      acc = acc ? any(*acc, l) : l;
    }
    return acc ? *acc : cst(false);
  }

  // -- descriptors ----------------------------------------------------------

  Descriptor descriptor() {
    TokenStream::DepthGuard g(ts_);
    Descriptor a = desc_or();
    if (ts_.accept("->")) return D::disj(dual(a), descriptor());
    return a;
  }

  Descriptor desc_or() {
    Descriptor a = desc_and();
    while (ts_.accept("|")) a = D::disj(a, desc_and());
    return a;
  }

  Descriptor desc_and() {
    Descriptor a = desc_unary();
    while (ts_.accept("&")) a = D::conj(a, desc_unary());
    return a;
  }

  Descriptor desc_unary() {
    TokenStream::DepthGuard g(ts_);
    const Token& t = ts_.peek();
    if (ts_.accept("!")) return dual(desc_unary());
    if (t.is_word("E") && !ts_.peek(1).is("=") && !ts_.peek(1).is("!=")) {
      ts_.next();
      return D::exists(desc_unary());
    }
    if (t.is_word("A") && !ts_.peek(1).is("=") && !ts_.peek(1).is("!=")) {
      ts_.next();
      return D::forall(desc_unary());
    }
    if (ts_.accept("(")) {
      Descriptor d = descriptor();
      ts_.expect(")");
      return d;
    }
    if (ts_.accept_word("true")) return D::constant(true);
    if (ts_.accept_word("false")) return D::constant(false);
    const Token head = ts_.expect_ident("a descriptor");
    auto eq_op = [&]() {
      if (ts_.accept("=")) return true;
      if (ts_.accept("!=")) return false;
      ts_.fail("expected '=' or '!=' after '" + head.text + "'");
    };
    if (head.text == "ch") {
      bool pos = eq_op();
      const Token& c = ts_.expect_name("a channel");
      int idx = v_.channels->index_of(c.text);
      if (idx < 0) throw ParseError(c.pos, "unknown channel '" + c.text + "'");
      return D::channel(static_cast<Value>(idx), pos);
    }
    if (head.text == "sender") {
      bool pos = eq_op();
      const Token& a = ts_.expect_name("an agent");
      auto idx = v_.find_agent(a.text);
      if (!idx) throw ParseError(a.pos, "unknown agent '" + a.text + "'");
      return D::sender(static_cast<Value>(*idx), pos);
    }
    if ((head.text == "data" || head.text == "cv") && ts_.peek().is(".")) {
      ts_.next();
      const Token& var = ts_.expect_name("a variable name");
      const bool is_data = head.text == "data";
      auto idx = is_data ? v_.find_data(var.text) : v_.find_common(var.text);
      const std::string name = head.text + "." + var.text;
      if (!idx)
        throw ParseError(var.pos, std::string("unknown ") +
                                      (is_data ? "data" : "common") + " variable '" + name + "'");
      const Domain& dom = is_data ? *v_.data[*idx].domain : *v_.common[*idx].domain;
      const auto var_id = static_cast<std::uint32_t>(*idx);
      return compare<Descriptor>(
          dom, head.pos, name,
          [&](Value val, bool pos) {
            return is_data ? D::data(var_id, val, pos) : D::cv(var_id, val, pos);
          },
          [](bool c) { return D::constant(c); },
          [](Descriptor a, Descriptor b) { return D::disj(a, b); });
    }
    if (auto idx = v_.find_agent(head.text)) return D::sender(static_cast<Value>(*idx), true);
    throw ParseError(head.pos, "unknown descriptor atom '" + head.text + "'");
  }

  TokenStream& ts_;
  const Vocabulary& v_;
};

inline Formula parse_formula(TokenStream& ts, const Vocabulary& v) {
  return FormulaParser(ts, v).parse();
}

inline Formula parse_formula(std::string_view text, const Vocabulary& v) {
  TokenStream ts(tokenize(text));
  Formula f = parse_formula(ts, v);
  if (!ts.at_end()) ts.fail("unexpected " + describe(ts.peek()) + " after formula");
  return f;
}

inline Formula parse_formula(std::string_view text, const SystemDef& sys) {
  return parse_formula(text, Vocabulary::of(sys));
}

}  // namespace recipe
