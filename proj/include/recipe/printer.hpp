#pragma once

// Canonical text of a parsed model. Templates are expanded and sugar is
// printed in its compiled form, so printing and re-parsing yields an equal
// SystemDef and equal properties.

#include <set>
#include <string>

#include "recipe/ltol.hpp"
#include "recipe/parser.hpp"

namespace recipe {

namespace detail {
inline std::string join(const std::vector<std::string>& xs) {
  std::string o;
  for (std::size_t i = 0; i < xs.size(); ++i) o += (i ? ", " : "") + xs[i];
  return o;
}

inline void print_rules(std::string& out, const Expr& rel, const Layout& layout) {
  if (rel.op() == Expr::Op::False) return;
  if (rel.op() == Expr::Op::Or) {
    for (const auto& k : rel.kids()) out += "      " + to_string(k, layout) + ";\n";
  } else {
    out += "      " + to_string(rel, layout) + ";\n";
  }
}
}  // namespace detail

inline std::string print_system(const SystemDef& sys, const std::vector<NamedFormula>& props = {},
                                const std::string& name = "") {
  std::string out = "system" + (name.empty() ? std::string() : " " + name) + " {\n";
  std::set<std::string> printed{"bool"};
  auto domain = [&](const DomainRef& d) {
    if (!printed.insert(d->name).second) return;
    out += "  domain " + d->name + " { " + detail::join(d->values) + " }\n";
  };
  for (const auto& v : sys.common()) domain(v.domain);
  for (const auto& v : sys.data()) domain(v.domain);
  for (const auto& a : sys.agents())
    for (const auto& v : a.locals) domain(v.domain);
  auto block = [&](const char* kw, const std::vector<VarDecl>& vs, const char* indent) {
    out += std::string(indent) + kw + " {";
    for (const auto& v : vs) out += " " + v.name + " : " + v.domain->name + ";";
    out += " }\n";
  };
  block("common", sys.common(), "  ");
  block("data", sys.data(), "  ");
  out += "  channels { " + detail::join(sys.channels()->values) + " }\n";
  for (std::size_t i = 0; i < sys.agent_count(); ++i) {
    const AgentDef& a = sys.agent(i);
    const Layout& l = sys.layout(i);
    out += "\n  agent " + a.id + " {\n";
    block("locals", a.locals, "    ");
    out += "    relabel {";
    for (std::size_t c = 0; c < sys.common().size(); ++c)
      out += " " + sys.common()[c].name + " -> " + a.locals[a.relabel[c]].name + ";";
    out += " }\n";
    out += "    init: " + to_string(a.init, l) + ";\n";
    out += "    send-guard: " + to_string(a.send_guard, l) + ";\n";
    out += "    recv-guard: " + to_string(a.recv_guard, l) + ";\n";
    out += "    send {\n";
    detail::print_rules(out, a.send_rel, l);
    out += "    }\n    recv {\n";
    detail::print_rules(out, a.recv_rel, l);
    out += "    }\n  }\n";
  }
  if (!props.empty()) {
    out += "\n";
    const Vocabulary v = Vocabulary::of(sys);
    for (const auto& p : props) out += "  property " + p.name + " := " + to_string(p.formula, v) + ";\n";
  }
  out += "}\n";
  return out;
}

inline std::string print_model(const SourceModel& m) {
  return print_system(m.system, m.properties, m.name);
}

}  // namespace recipe
