#pragma once

// Model files (.rcp).
//
//   system NAME {
//     domain D { v1, v2, ... }
//     common { x : D; ... }
//     data { x : D; ... }
//     channels { star, A, ... }
//     template T(P, ...) { <agent body> }
//     agent N : T(arg, ...);
//     agent N { <agent body> }
//     property NAME := <formula>;
//   }
//
//   agent body: locals { x : D; } relabel { cvar -> local; }
//               init: e; send-guard: e; recv-guard: e; send { e; ... } recv { e; ... }
//
// Expressions mention locals `x`, primed locals `x'`, `data.x`, `cv.x`
// and `ch`, depending on the section. A name that is a variable in scope
// is read as that variable, otherwise as a value.

#include <fstream>
#include <map>
#include <sstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "recipe/formula_parser.hpp"
#include "recipe/lexer.hpp"
#include "recipe/model.hpp"

namespace recipe {

struct NamedFormula {
  std::string name;
  Formula formula;
  std::string source;  // text as written
  SourcePos pos;
};

struct SourceModel {
  std::string path;
  std::string text;
  std::string name;
  SystemDef system;
  std::vector<NamedFormula> properties;
  std::map<std::string, SourcePos> agent_pos;

  const NamedFormula* property(std::string_view n) const {
    for (const auto& p : properties)
      if (p.name == n) return &p;
    return nullptr;
  }
};

namespace detail {

enum class Section { Init, SendGuard, RecvGuard, Rule };

inline std::string_view section_name(Section s) {
  switch (s) {
    case Section::Init: return "init";
    case Section::SendGuard: return "send-guard";
    case Section::RecvGuard: return "recv-guard";
    case Section::Rule: return "a transition rule";
  }
  return "?";
}

// Compiles one agent's expressions against its frame layout.
class ExprParser {
 public:
  ExprParser(TokenStream& ts, const Layout& layout, FrameShape shape, Section sec)
      : ts_(ts), layout_(layout), shape_(shape), sec_(sec) {}

  Expr parse() {
    TokenStream::DepthGuard g(ts_);
    Expr a = implication();
    if (ts_.accept("<->")) {
      Expr b = implication();
      return Expr::all_of({Expr::implies(a, b), Expr::implies(b, a)});
    }
    return a;
  }

 private:
  struct Term {
    bool is_ref = false;
    std::size_t slot = 0;
    int offset = 0;
    std::string value;
    SourcePos pos;
  };

  Expr implication() {
    TokenStream::DepthGuard g(ts_);
    Expr a = disjunction();
    if (ts_.accept("->")) return Expr::implies(a, implication());
    return a;
  }

  Expr disjunction() {
    std::vector<Expr> xs{conjunction()};
    while (ts_.accept("|")) xs.push_back(conjunction());
    return Expr::any_of(std::move(xs));
  }

  Expr conjunction() {
    std::vector<Expr> xs{unary()};
    while (ts_.accept("&")) xs.push_back(unary());
    return Expr::all_of(std::move(xs));
  }

  Expr unary() {
    TokenStream::DepthGuard g(ts_);
    if (ts_.accept("!")) return Expr::negate(unary());
    if (ts_.accept("(")) {
      Expr e = parse();
      ts_.expect(")");
      return e;
    }
    const Token& t = ts_.peek();
    if ((t.is_word("true") || t.is_word("false")) && !is_cmp(ts_.peek(1))) {
      ts_.next();
      return Expr::constant(t.text == "true");
    }
    if (t.is_word("keep") && ts_.peek(1).is("(")) return keep();
    Term lhs = term();
    if (!is_cmp(ts_.peek())) {
      if (!lhs.is_ref) throw ParseError(lhs.pos, "unknown variable '" + lhs.value + "'");
      const Domain& d = *layout_[lhs.slot].domain;
      int tv = d.index_of("true");
      if (lhs.offset != 0 || d.size() != 2 || tv < 0 || d.index_of("false") < 0)
        throw ParseError(lhs.pos, "'" + layout_[lhs.slot].name + "' is not boolean");
      return Expr::eq_const(lhs.slot, static_cast<Value>(tv));
    }
    std::string op = ts_.next().text;
    Term rhs = term();
    return compare(lhs, op, rhs);
  }

  static bool is_cmp(const Token& t) {
    return t.is("=") || t.is("!=") || t.is("<") || t.is("<=") || t.is(">") || t.is(">=");
  }

  Expr keep() {
    const Token& kw = ts_.next();
    if (sec_ != Section::Rule) throw ParseError(kw.pos, "keep() is only allowed in send/recv rules");
    ts_.expect("(");
    std::vector<Expr> xs;
    std::set<std::size_t> seen;
    auto add = [&](std::size_t i) {
      if (seen.insert(i).second)
        xs.push_back(Expr::eq_slot(shape_.primed(i), shape_.local(i), layout_));
    };
    if (ts_.peek().is_word("all") && !local_index("all")) {
      ts_.next();
      for (std::size_t i = 0; i < shape_.locals; ++i) add(i);
    } else {
      do {
        const Token& v = ts_.expect_ident("a local variable");
        auto i = local_index(v.text);
        if (!i) throw ParseError(v.pos, "keep(): '" + v.text + "' is not a local variable");
        add(*i);
      } while (ts_.accept(","));
    }
    ts_.expect(")");
    return Expr::all_of(std::move(xs));
  }

  std::optional<std::size_t> local_index(std::string_view n) const {
    for (std::size_t i = 0; i < shape_.locals; ++i)
      if (layout_[shape_.local(i)].name == n) return i;
    return std::nullopt;
  }

  bool allowed(std::size_t slot) const {
    const bool is_local = slot < shape_.locals;
    const bool is_primed = slot >= shape_.primed(0) && slot < shape_.data_slot(0);
    const bool is_data = slot >= shape_.data_slot(0) && slot < shape_.cv_slot(0);
    const bool is_cv = slot >= shape_.cv_slot(0) && slot < shape_.ch();
    const bool is_ch = slot == shape_.ch();
    switch (sec_) {
      case Section::Init: return is_local;
      case Section::SendGuard: return is_local || is_data || is_cv || is_ch;
      case Section::RecvGuard: return is_local || is_ch;
      case Section::Rule: return is_local || is_primed || is_data || is_ch;
    }
    return false;
  }

  std::size_t ref(const std::string& name, SourcePos pos) {
    auto s = layout_.find(name);
    if (!s) {
      if (name.rfind("cv.", 0) == 0)
        throw ParseError(pos, "undeclared common variable '" + name + "'");
      if (name.rfind("data.", 0) == 0)
        throw ParseError(pos, "undeclared data variable '" + name + "'");
      throw ParseError(pos, "unknown variable '" + name + "'");
    }
    if (!allowed(*s))
      throw ParseError(pos, "'" + name + "' may not appear in " + std::string(section_name(sec_)));
    return *s;
  }

  Term term() {
    Term t;
    const Token& head = ts_.expect_name("a variable or value");
    t.pos = head.pos;
    if (head.kind == Token::Kind::Ident && (head.text == "cv" || head.text == "data") &&
        ts_.peek().is(".")) {
      ts_.next();
      const Token& v = ts_.expect_name("a variable name");
      t.is_ref = true;
      t.slot = ref(head.text + "." + v.text, head.pos);
    } else if (head.kind == Token::Kind::Ident && ts_.peek().is("'")) {
      ts_.next();
      t.is_ref = true;
      t.slot = ref(head.text + "'", head.pos);
    } else if (head.kind == Token::Kind::Ident && layout_.find(head.text) &&
               head.text.find('.') == std::string::npos) {
      t.is_ref = true;
      t.slot = ref(head.text, head.pos);
    } else {
      t.value = head.text;
    }
    if (t.is_ref && (ts_.peek().is("+") || ts_.peek().is("-"))) {
      const bool minus = ts_.next().text == "-";
      const Token& n = ts_.peek();
      if (n.kind != Token::Kind::Number) ts_.fail("expected a number after '+'/'-'");
      ts_.next();
      if (n.text.size() > 6) throw ParseError(n.pos, "offset too large");
      int k = std::stoi(n.text);
      t.offset = minus ? -k : k;
    }
    return t;
  }

  static std::optional<long> as_number(const std::string& s) {
    if (s.empty() || s.size() > 9) return std::nullopt;
    for (char c : s)
      if (c < '0' || c > '9') return std::nullopt;
    return std::stol(s);
  }

  // Name of the value at index i shifted by the term's offset.
  std::optional<std::string> shifted(const Term& t, std::size_t i) const {
    const Domain& d = *layout_[t.slot].domain;
    long j = static_cast<long>(i) + t.offset;
    if (j < 0 || j >= static_cast<long>(d.size())) return std::nullopt;
    return d.values[static_cast<std::size_t>(j)];
  }

  static bool relate(const std::string& op, int c) {
    if (op == "=") return c == 0;
    if (op == "!=") return c != 0;
    if (op == "<") return c < 0;
    if (op == "<=") return c <= 0;
    if (op == ">") return c > 0;
    return c >= 0;
  }

  // Order between two value names: by position when both belong to `d`,
  // otherwise numerically.
  static std::optional<int> order(const std::string& a, const std::string& b, const Domain& d) {
    if (a == b) return 0;
    int ia = d.index_of(a), ib = d.index_of(b);
    if (ia >= 0 && ib >= 0) return ia < ib ? -1 : 1;
    auto na = as_number(a), nb = as_number(b);
    if (na && nb) return *na < *nb ? -1 : (*na > *nb ? 1 : 0);
    return std::nullopt;
  }

  static std::string flip(const std::string& op) {
    if (op == "<") return ">";
    if (op == ">") return "<";
    if (op == "<=") return ">=";
    if (op == ">=") return "<=";
    return op;
  }

  Expr compare(Term lhs, std::string op, Term rhs) {
    if (!lhs.is_ref && rhs.is_ref) {
      std::swap(lhs, rhs);
      op = flip(op);
    }
    if (!lhs.is_ref)
      throw ParseError(lhs.pos, "comparison of two values; '" + lhs.value + "' is not a variable");
    const Domain& dl = *layout_[lhs.slot].domain;
    const bool ordered = op != "=" && op != "!=";
    if (!rhs.is_ref) {
      if (!ordered && lhs.offset == 0) {
        int idx = dl.index_of(rhs.value);
        if (idx < 0)
          throw ParseError(rhs.pos, "value '" + rhs.value + "' is not in the domain of '" +
                                        layout_[lhs.slot].name + "'");
        Expr e = Expr::eq_const(lhs.slot, static_cast<Value>(idx));
        return op == "=" ? e : Expr::negate(e);
      }
      if (dl.index_of(rhs.value) < 0 && !as_number(rhs.value))
        throw ParseError(rhs.pos, "value '" + rhs.value + "' is not in the domain of '" +
                                      layout_[lhs.slot].name + "'");
      std::vector<Expr> xs;
      for (std::size_t i = 0; i < dl.size(); ++i) {
        auto v = shifted(lhs, i);
        if (!v) continue;
        auto c = order(*v, rhs.value, dl);
        if (!c) throw ParseError(rhs.pos, "values of '" + layout_[lhs.slot].name + "' are not ordered against '" + rhs.value + "'");
        if (relate(op, *c)) xs.push_back(Expr::eq_const(lhs.slot, static_cast<Value>(i)));
      }
      return Expr::any_of(std::move(xs));
    }
    const Domain& dr = *layout_[rhs.slot].domain;
    if (!ordered && lhs.offset == 0 && rhs.offset == 0) {
      bool overlap = false;
      for (const auto& v : dl.values) overlap = overlap || dr.index_of(v) >= 0;
      if (!overlap)
        throw ParseError(rhs.pos, "'" + layout_[lhs.slot].name + "' and '" +
                                      layout_[rhs.slot].name + "' share no values");
      Expr e = Expr::eq_slot(lhs.slot, rhs.slot, layout_);
      return op == "=" ? e : Expr::negate(e);
    }
    std::vector<Expr> xs;
    for (std::size_t i = 0; i < dl.size(); ++i) {
      auto a = shifted(lhs, i);
      if (!a) continue;
      for (std::size_t j = 0; j < dr.size(); ++j) {
        auto b = shifted(rhs, j);
        if (!b) continue;
        std::optional<int> c = *a == *b ? std::optional<int>(0) : order(*a, *b, dl);
        if (!c && !ordered) c = 1;  // distinct names
        if (!c) throw ParseError(rhs.pos, "values '" + *a + "' and '" + *b + "' are not ordered");
        if (relate(op, *c))
          xs.push_back(Expr::all_of({Expr::eq_const(lhs.slot, static_cast<Value>(i)),
                                     Expr::eq_const(rhs.slot, static_cast<Value>(j))}));
      }
    }
    return Expr::any_of(std::move(xs));
  }

  TokenStream& ts_;
  const Layout& layout_;
  FrameShape shape_;
  Section sec_;
};

class ModelParser {
 public:
  explicit ModelParser(std::string_view text) : ts_(tokenize(text)) {
    domains_["bool"] = bool_domain();
  }

  SourceModel parse() {
    SourceModel m;
    bool braced = false;
    if (ts_.accept_word("system")) {
      if (ts_.peek().kind == Token::Kind::Ident) m.name = ts_.next().text;
      ts_.expect("{");
      braced = true;
    }
    while (true) {
      if (braced && ts_.peek().is("}")) {
        ts_.next();
        braced = false;
        continue;
      }
      if (ts_.at_end()) break;
      item(m);
    }
    if (braced) ts_.fail("expected '}' to close the system");
    if (!channels_) throw ParseError(ts_.peek().pos, "missing channels declaration");
    if (agents_.empty()) throw ParseError(ts_.peek().pos, "system declares no agents");
    try {
      m.system = SystemDef(common_, data_, channels_, agents_);
    } catch (const ModelError& e) {
      throw ParseError(agent_first_pos_, e.what());
    }
    m.agent_pos = agent_pos_;
    const Vocabulary vocab = Vocabulary::of(m.system);
    std::set<std::string> names;
    for (auto& p : pending_) {
      if (!names.insert(p.name).second)
        throw ParseError(p.pos, "duplicate property '" + p.name + "'");
      TokenStream fs(p.tokens);
      Formula f = parse_formula(fs, vocab);
      if (!fs.at_end()) fs.fail("unexpected " + describe(fs.peek()) + " in property");
      m.properties.push_back({p.name, f, p.source, p.pos});
    }
    return m;
  }

 private:
  struct Pending {
    std::string name;
    std::vector<Token> tokens;
    std::string source;
    SourcePos pos;
  };
  struct Template {
    std::vector<std::string> params;
    std::vector<Token> body;  // between the braces
  };

  void item(SourceModel& m) {
    const Token& t = ts_.peek();
    if (t.is_word("domain")) return domain_decl();
    if (t.is_word("common")) return var_block(common_, VarKind::Common, "common");
    if (t.is_word("data")) return var_block(data_, VarKind::Data, "data");
    if (t.is_word("channels")) return channels_decl();
    if (t.is_word("template")) return template_decl();
    if (t.is_word("agent")) return agent_decl();
    if (t.is_word("property")) return property_decl();
    (void)m;
    ts_.fail("unexpected " + describe(t) + "; expected a declaration");
  }

  void domain_decl() {
    ts_.next();
    const Token& name = ts_.expect_ident("a domain name");
    if (domains_.count(name.text)) throw ParseError(name.pos, "domain '" + name.text + "' redefined");
    ts_.expect("{");
    std::vector<std::string> vals;
    std::set<std::string> seen;
    if (!ts_.peek().is("}")) {
      do {
        const Token& v = ts_.expect_name("a value");
        if (!seen.insert(v.text).second)
          throw ParseError(v.pos, "duplicate value '" + v.text + "' in domain '" + name.text + "'");
        vals.push_back(v.text);
      } while (ts_.accept(","));
    }
    ts_.expect("}");
    ts_.accept(";");
    if (vals.empty()) throw ParseError(name.pos, "domain '" + name.text + "' is empty");
    domains_[name.text] = make_domain(name.text, std::move(vals));
  }

  DomainRef domain_ref(TokenStream& ts) {
    const Token& d = ts.expect_ident("a domain name");
    auto it = domains_.find(d.text);
    if (it == domains_.end()) throw ParseError(d.pos, "unknown domain '" + d.text + "'");
    return it->second;
  }

  void decls(TokenStream& ts, std::vector<VarDecl>& out, VarKind kind, std::string_view what) {
    ts.expect("{");
    while (!ts.peek().is("}")) {
      const Token& n = ts.expect_ident("a variable name");
      for (const auto& v : out)
        if (v.name == n.text)
          throw ParseError(n.pos, std::string(what) + " variable '" + n.text + "' declared twice");
      if (n.text == "ch" || n.text == "cv" || n.text == "data")
        throw ParseError(n.pos, "'" + n.text + "' is reserved");
      ts.expect(":");
      out.push_back({n.text, domain_ref(ts), kind});
      ts.expect(";");
    }
    ts.expect("}");
  }

  void var_block(std::vector<VarDecl>& out, VarKind kind, std::string_view what) {
    const Token& kw = ts_.next();
    if (!out.empty()) throw ParseError(kw.pos, std::string(what) + " block declared twice");
    if (!agents_.empty() || !templates_.empty())
      throw ParseError(kw.pos, std::string(what) + " block must precede templates and agents");
    decls(ts_, out, kind, what);
  }

  void channels_decl() {
    const Token& kw = ts_.next();
    if (channels_) throw ParseError(kw.pos, "channels declared twice");
    if (!agents_.empty() || !templates_.empty())
      throw ParseError(kw.pos, "channels must precede templates and agents");
    ts_.expect("{");
    std::vector<std::string> ch;
    std::set<std::string> seen;
    if (!ts_.peek().is("}")) {
      do {
        const Token& c = ts_.expect_name("a channel name");
        if (!seen.insert(c.text).second) throw ParseError(c.pos, "duplicate channel '" + c.text + "'");
        ch.push_back(c.text);
      } while (ts_.accept(","));
    }
    ts_.expect("}");
    ts_.accept(";");
    if (!seen.count(std::string(kStar)))
      throw ParseError(kw.pos, "channels must include '" + std::string(kStar) + "'");
    channels_ = make_domain("channel", std::move(ch));
  }

  // Collects tokens up to the matching closing brace.
  std::vector<Token> braced_tokens() {
    ts_.expect("{");
    std::vector<Token> body;
    int depth = 1;
    while (true) {
      const Token& t = ts_.peek();
      if (t.kind == Token::Kind::End) ts_.fail("unterminated block");
      if (t.is("{")) ++depth;
      if (t.is("}") && --depth == 0) {
        ts_.next();
        break;
      }
      body.push_back(ts_.next());
    }
    return body;
  }

  void template_decl() {
    ts_.next();
    const Token& name = ts_.expect_ident("a template name");
    if (templates_.count(name.text)) throw ParseError(name.pos, "template '" + name.text + "' redefined");
    Template t;
    ts_.expect("(");
    if (!ts_.peek().is(")")) {
      do t.params.push_back(ts_.expect_ident("a parameter").text);
      while (ts_.accept(","));
    }
    ts_.expect(")");
    t.body = braced_tokens();
    templates_[name.text] = std::move(t);
  }

  void agent_decl() {
    const Token& kw = ts_.next();
    if (!channels_) throw ParseError(kw.pos, "channels must be declared before agents");
    const Token id = ts_.expect_ident("an agent id");
    if (agent_pos_.count(id.text)) throw ParseError(id.pos, "duplicate agent id '" + id.text + "'");
    if (id.text == "data" || id.text == "cv" || id.text == "ch" || id.text == "sender")
      throw ParseError(id.pos, "'" + id.text + "' is reserved");
    if (agents_.empty()) agent_first_pos_ = id.pos;
    agent_pos_[id.text] = id.pos;
    std::vector<Token> body;
    if (ts_.accept(":")) {
      const Token& tn = ts_.expect_ident("a template name");
      auto it = templates_.find(tn.text);
      if (it == templates_.end()) throw ParseError(tn.pos, "unknown template '" + tn.text + "'");
      std::vector<Token> args;
      ts_.expect("(");
      if (!ts_.peek().is(")")) {
        do args.push_back(ts_.expect_name("a template argument"));
        while (ts_.accept(","));
      }
      ts_.expect(")");
      ts_.expect(";");
      const Template& t = it->second;
      if (args.size() != t.params.size())
        throw ParseError(tn.pos, "template '" + tn.text + "' takes " +
                                     std::to_string(t.params.size()) + " arguments");
      for (Token tok : t.body) {
        if (tok.kind == Token::Kind::Ident)
          for (std::size_t i = 0; i < t.params.size(); ++i)
            if (tok.text == t.params[i]) {
              tok.text = args[i].text;
              tok.kind = args[i].kind;
            }
        body.push_back(std::move(tok));
      }
    } else {
      body = braced_tokens();
    }
    Token end;
    end.pos = body.empty() ? id.pos : body.back().pos;
    body.push_back(end);
    TokenStream bs(std::move(body));
    agents_.push_back(agent_body(bs, id));
  }

  AgentDef agent_body(TokenStream& ts, const Token& id) {
    AgentDef a;
    a.id = id.text;
    std::optional<Expr> init, sg, rg, send, recv;
    std::optional<std::vector<std::pair<Token, Token>>> relabel;
    bool have_locals = false;
    std::optional<Layout> layout;
    FrameShape shape;
    auto need_layout = [&](const Token& at) -> const Layout& {
      if (!have_locals) throw ParseError(at.pos, "locals must be declared before expressions");
      if (!layout) {
        layout = make_agent_layout(a.locals, data_, common_, channels_);
        shape = {a.locals.size(), data_.size(), common_.size()};
      }
      return *layout;
    };
    auto dup = [&](bool present, const Token& t) {
      if (present) throw ParseError(t.pos, "section '" + t.text + "' given twice");
    };
    auto expr = [&](const Token& at, Section s) {
      ts.expect(":");
      ExprParser p(ts, need_layout(at), shape, s);
      Expr e = p.parse();
      ts.expect(";");
      return e;
    };
    auto rules = [&](const Token& at) {
      const Layout& l = need_layout(at);
      ts.expect("{");
      std::vector<Expr> xs;
      while (!ts.peek().is("}")) {
        if (ts.at_end()) ts.fail("unterminated rule block");
        ExprParser p(ts, l, shape, Section::Rule);
        xs.push_back(p.parse());
        ts.expect(";");
      }
      ts.expect("}");
      return Expr::any_of(std::move(xs));
    };
    while (!ts.at_end()) {
      const Token t = ts.peek();
      if (t.is_word("locals")) {
        ts.next();
        dup(have_locals, t);
        std::vector<VarDecl> ls;
        decls(ts, ls, VarKind::Local, "local");
        a.locals = std::move(ls);
        have_locals = true;
        // names reserved for slot syntax
        for (const auto& v : a.locals)
          if (v.name == "all") throw ParseError(t.pos, "'all' is reserved");
      } else if (t.is_word("relabel")) {
        ts.next();
        dup(relabel.has_value(), t);
        relabel.emplace();
        ts.expect("{");
        while (!ts.peek().is("}")) {
          if (ts.at_end()) ts.fail("unterminated relabel block");
          Token cv = ts.expect_ident("a common variable");
          ts.expect("->");
          Token loc = ts.expect_ident("a local variable");
          ts.expect(";");
          relabel->push_back({cv, loc});
        }
        ts.expect("}");
      } else if (t.is_word("init")) {
        ts.next();
        dup(init.has_value(), t);
        init = expr(t, Section::Init);
      } else if (t.is_word("send-guard")) {
        ts.next();
        dup(sg.has_value(), t);
        sg = expr(t, Section::SendGuard);
      } else if (t.is_word("recv-guard")) {
        ts.next();
        dup(rg.has_value(), t);
        rg = expr(t, Section::RecvGuard);
      } else if (t.is_word("send")) {
        ts.next();
        dup(send.has_value(), t);
        send = rules(t);
      } else if (t.is_word("recv")) {
        ts.next();
        dup(recv.has_value(), t);
        recv = rules(t);
      } else {
        ts.fail("unexpected " + describe(t) + " in agent '" + a.id + "'");
      }
    }
    if (!init) throw ParseError(id.pos, "agent '" + a.id + "': missing init");
    if (!sg) throw ParseError(id.pos, "agent '" + a.id + "': missing send-guard");
    if (!rg) throw ParseError(id.pos, "agent '" + a.id + "': missing recv-guard");
    a.relabel.assign(common_.size(), 0);
    std::vector<char> done(common_.size(), 0);
    if (relabel) {
      for (const auto& [cv, loc] : *relabel) {
        std::size_t ci = 0;
        while (ci < common_.size() && common_[ci].name != cv.text) ++ci;
        if (ci == common_.size())
          throw ParseError(cv.pos, "undeclared common variable '" + cv.text + "'");
        if (done[ci]) throw ParseError(cv.pos, "common variable '" + cv.text + "' relabelled twice");
        std::size_t li = 0;
        while (li < a.locals.size() && a.locals[li].name != loc.text) ++li;
        if (li == a.locals.size())
          throw ParseError(loc.pos, "'" + loc.text + "' is not a local of '" + a.id + "'");
        a.relabel[ci] = li;
        done[ci] = 1;
      }
    }
    for (std::size_t ci = 0; ci < common_.size(); ++ci)
      if (!done[ci])
        throw ParseError(id.pos, "agent '" + a.id + "' does not relabel common variable '" +
                                     common_[ci].name + "'");
    a.init = *init;
    a.send_guard = *sg;
    a.recv_guard = *rg;
    a.send_rel = send ? *send : Expr::constant(false);
    a.recv_rel = recv ? *recv : Expr::constant(false);
    return a;
  }

  void property_decl() {
    ts_.next();
    const Token name = ts_.expect_ident("a property name");
    ts_.expect(":=");
    Pending p;
    p.name = name.text;
    p.pos = name.pos;
    while (!ts_.peek().is(";")) {
      if (ts_.at_end()) ts_.fail("property '" + name.text + "' is missing ';'");
      p.tokens.push_back(ts_.next());
    }
    ts_.next();
    if (p.tokens.empty()) throw ParseError(name.pos, "property '" + name.text + "' is empty");
    for (std::size_t i = 0; i < p.tokens.size(); ++i) {
      if (i) p.source += " ";
      p.source += p.tokens[i].text;
    }
    Token end;
    end.pos = p.tokens.back().pos;
    p.tokens.push_back(end);
    pending_.push_back(std::move(p));
  }

  TokenStream ts_;
  std::map<std::string, DomainRef> domains_;
  std::vector<VarDecl> common_;
  std::vector<VarDecl> data_;
  DomainRef channels_;
  std::map<std::string, Template> templates_;
  std::vector<AgentDef> agents_;
  std::map<std::string, SourcePos> agent_pos_;
  SourcePos agent_first_pos_;
  std::vector<Pending> pending_;
};

}  // namespace detail

inline SourceModel parse_model(std::string_view text, std::string path = "") {
  SourceModel m = detail::ModelParser(text).parse();
  m.path = std::move(path);
  m.text = std::string(text);
  return m;
}

inline SystemDef parse_system(std::string_view text) { return parse_model(text).system; }

inline SourceModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str(), path);
}

}  // namespace recipe
