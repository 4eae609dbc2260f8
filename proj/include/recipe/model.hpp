#pragma once

// Static ReCiPe models: agents, systems, and load-time well-formedness checks.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "recipe/core.hpp"
#include "recipe/expr.hpp"

namespace recipe {

inline constexpr std::string_view kStar = "star";

// Slot positions of an agent's evaluation frame:
//   [locals | primed locals | data | common | ch]
struct FrameShape {
  std::size_t locals = 0;
  std::size_t data = 0;
  std::size_t cv = 0;

  std::size_t local(std::size_t i) const { return i; }
  std::size_t primed(std::size_t i) const { return locals + i; }
  std::size_t data_slot(std::size_t i) const { return 2 * locals + i; }
  std::size_t cv_slot(std::size_t i) const { return 2 * locals + data + i; }
  std::size_t ch() const { return 2 * locals + data + cv; }
  std::size_t size() const { return ch() + 1; }
};

inline Layout make_agent_layout(const std::vector<VarDecl>& locals,
                                const std::vector<VarDecl>& data,
                                const std::vector<VarDecl>& common, const DomainRef& channels) {
  std::vector<Slot> s;
  for (const auto& v : locals) s.push_back({v.name, v.domain});
  for (const auto& v : locals) s.push_back({v.name + "'", v.domain});
  for (const auto& v : data) s.push_back({"data." + v.name, v.domain});
  for (const auto& v : common) s.push_back({"cv." + v.name, v.domain});
  s.push_back({"ch", channels});
  return Layout(std::move(s));
}

struct AgentDef {
  std::string id;
  std::vector<VarDecl> locals;
  // relabel[v] = index of the local holding common variable v.
  std::vector<std::size_t> relabel;
  Expr init;
  Expr send_guard;
  Expr recv_guard;
  Expr send_rel;
  Expr recv_rel;

  bool operator==(const AgentDef& o) const {
    if (id != o.id || relabel != o.relabel || locals.size() != o.locals.size()) return false;
    for (std::size_t i = 0; i < locals.size(); ++i)
      if (locals[i].name != o.locals[i].name || !(*locals[i].domain == *o.locals[i].domain))
        return false;
    return init == o.init && send_guard == o.send_guard && recv_guard == o.recv_guard &&
           send_rel == o.send_rel && recv_rel == o.recv_rel;
  }
};

class SystemDef {
 public:
  SystemDef() = default;

  // Checks structural invariants (distinct ids, star present, relabel
  // arity) and precomputes frame layouts. Throws ModelError.
  SystemDef(std::vector<VarDecl> common, std::vector<VarDecl> data, DomainRef channels,
            std::vector<AgentDef> agents, std::uint64_t cv_cap = kDefaultCvCap)
      : common_(std::move(common)),
        data_(std::move(data)),
        channels_(std::move(channels)),
        agents_(std::move(agents)) {
    std::set<std::string> seen(channels_->values.begin(), channels_->values.end());
    if (seen.size() != channels_->size()) throw ModelError("duplicate channel id");
    int star = channels_->index_of(kStar);
    if (star < 0) throw ModelError("channel set must contain 'star'");
    star_ = static_cast<Value>(star);
    std::set<std::string> ids;
    for (const auto& a : agents_) {
      if (!ids.insert(a.id).second) throw ModelError("duplicate agent id '" + a.id + "'");
      if (a.relabel.size() != common_.size())
        throw ModelError("agent '" + a.id + "' must relabel every common variable");
      for (std::size_t r : a.relabel)
        if (r >= a.locals.size()) throw ModelError("agent '" + a.id + "' relabel out of range");
    }
    if (agents_.empty()) throw ModelError("system has no agents");
    std::vector<DomainRef> cvd;
    for (const auto& v : common_) cvd.push_back(v.domain);
    cv_ = CvSpace(std::move(cvd), cv_cap);
    std::size_t off = 0;
    for (const auto& a : agents_) {
      layouts_.push_back(make_agent_layout(a.locals, data_, common_, channels_));
      offsets_.push_back(off);
      off += a.locals.size();
    }
    offsets_.push_back(off);
  }

  const std::vector<VarDecl>& common() const { return common_; }
  const std::vector<VarDecl>& data() const { return data_; }
  const DomainRef& channels() const { return channels_; }
  const std::vector<AgentDef>& agents() const { return agents_; }
  const AgentDef& agent(std::size_t i) const { return agents_[i]; }
  std::size_t agent_count() const { return agents_.size(); }

  Value star() const { return star_; }
  const CvSpace& cv_space() const { return cv_; }
  const Layout& layout(std::size_t agent) const { return layouts_[agent]; }
  FrameShape shape(std::size_t agent) const {
    return {agents_[agent].locals.size(), data_.size(), common_.size()};
  }

  // Offset of agent i's locals inside a flat global state.
  std::size_t offset(std::size_t agent) const { return offsets_[agent]; }
  std::size_t state_width() const { return offsets_.back(); }

  std::optional<std::size_t> agent_index(std::string_view id) const {
    for (std::size_t i = 0; i < agents_.size(); ++i)
      if (agents_[i].id == id) return i;
    return std::nullopt;
  }

  std::vector<DomainRef> data_domains() const {
    std::vector<DomainRef> d;
    for (const auto& v : data_) d.push_back(v.domain);
    return d;
  }

  bool operator==(const SystemDef& o) const {
    auto same_vars = [](const std::vector<VarDecl>& x, const std::vector<VarDecl>& y) {
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i].name != y[i].name || !(*x[i].domain == *y[i].domain)) return false;
      return true;
    };
    return same_vars(common_, o.common_) && same_vars(data_, o.data_) &&
           channels_->values == o.channels_->values && agents_ == o.agents_;
  }

 private:
  std::vector<VarDecl> common_;
  std::vector<VarDecl> data_;
  DomainRef channels_;
  std::vector<AgentDef> agents_;
  Value star_ = 0;
  CvSpace cv_;
  std::vector<Layout> layouts_;
  std::vector<std::size_t> offsets_;
};

inline std::vector<DomainRef> local_domains(const AgentDef& a) {
  std::vector<DomainRef> d;
  for (const auto& v : a.locals) d.push_back(v.domain);
  return d;
}

// All valuations of the agent's locals in lexicographic declaration order.
inline std::vector<Valuation> enumerate_states(const AgentDef& agent,
                                               std::uint64_t cap = kDefaultEnumCap) {
  auto doms = local_domains(agent);
  if (product_size(doms, cap) > cap)
    throw ResourceError("agent '" + agent.id + "' has more than " + std::to_string(cap) +
                        " local states");
  std::vector<Valuation> out;
  Valuation v(doms.size(), 0);
  do {
    out.push_back(v);
  } while (next_valuation(v, doms));
  return out;
}

inline std::string format_valuation(const std::vector<VarDecl>& vars, std::span<const Value> v,
                                    std::string_view prefix = "") {
  std::string out;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (i) out += ", ";
    out += std::string(prefix) + vars[i].name + "=" + vars[i].domain->values[v[i]];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  std::string agent;
  std::string condition;  // relabel-domain | recv-guard-star | input-enabled | init-unsat
  std::string witness;
};

using ValidationReport = std::vector<Violation>;

inline ValidationReport validate_system(const SystemDef& sys,
                                        std::uint64_t cap = kDefaultEnumCap) {
  ValidationReport report;
  for (std::size_t ai = 0; ai < sys.agent_count(); ++ai) {
    const AgentDef& a = sys.agent(ai);
    const Layout& layout = sys.layout(ai);
    const FrameShape sh = sys.shape(ai);

    for (std::size_t v = 0; v < sys.common().size(); ++v) {
      const VarDecl& cv = sys.common()[v];
      const VarDecl& loc = a.locals[a.relabel[v]];
      if (!(*cv.domain == *loc.domain))
        report.push_back({a.id, "relabel-domain",
                          "cv." + cv.name + " -> " + loc.name + " (domains differ)"});
    }

    const auto states = enumerate_states(a, cap);
    auto frame = layout.blank_frame();
    frame[sh.ch()] = sys.star();

    for (const auto& s : states) {
      for (std::size_t i = 0; i < sh.locals; ++i) frame[sh.local(i)] = s[i];
      if (!eval(a.recv_guard, frame, layout)) {
        report.push_back({a.id, "recv-guard-star", format_valuation(a.locals, s)});
        break;
      }
    }

    std::vector<std::size_t> primed(sh.locals);
    for (std::size_t i = 0; i < sh.locals; ++i) primed[i] = sh.primed(i);
    const auto ddoms = sys.data_domains();
    bool enabled = true;
    for (const auto& s : states) {
      for (std::size_t i = 0; i < sh.locals; ++i) frame[sh.local(i)] = s[i];
      Valuation d(ddoms.size(), 0);
      do {
        for (std::size_t i = 0; i < d.size(); ++i) frame[sh.data_slot(i)] = d[i];
        if (!find_sat(a.recv_rel, layout, primed, frame, cap)) {
          std::string w = format_valuation(a.locals, s);
          if (!d.empty()) w += ", " + format_valuation(sys.data(), d, "data.");
          report.push_back({a.id, "input-enabled", w});
          enabled = false;
          break;
        }
      } while (next_valuation(d, ddoms));
      if (!enabled) break;
    }
    for (std::size_t i = 0; i < sh.data; ++i) frame[sh.data_slot(i)] = kUnknown;

    auto init_frame = layout.blank_frame();
    std::vector<std::size_t> locals(sh.locals);
    for (std::size_t i = 0; i < sh.locals; ++i) locals[i] = sh.local(i);
    if (!find_sat(a.init, layout, locals, init_frame, cap))
      report.push_back({a.id, "init-unsat", "no local valuation satisfies init"});
  }
  return report;
}

}  // namespace recipe
