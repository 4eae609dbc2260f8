#pragma once

// Shared vocabulary types: finite domains, values, variable declarations and
// the error hierarchy used across the toolkit.

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace recipe {

// A value is a position inside the declaring variable's domain.
using Value = std::uint16_t;
inline constexpr Value kUnknown = 0xFFFF;

using Valuation = std::vector<Value>;

struct Domain {
  std::string name;
  std::vector<std::string> values;

  std::size_t size() const { return values.size(); }

  // Position of `v`, or -1 when `v` is not a member.
  int index_of(std::string_view v) const {
    for (std::size_t i = 0; i < values.size(); ++i)
      if (values[i] == v) return static_cast<int>(i);
    return -1;
  }

  bool operator==(const Domain& o) const { return values == o.values; }
};

using DomainRef = std::shared_ptr<const Domain>;

inline DomainRef make_domain(std::string name, std::vector<std::string> values) {
  return std::make_shared<const Domain>(Domain{std::move(name), std::move(values)});
}

inline DomainRef bool_domain() {
  static const DomainRef d = make_domain("bool", {"false", "true"});
  return d;
}

enum class VarKind { Local, Common, Data };

struct VarDecl {
  std::string name;
  DomainRef domain;
  VarKind kind = VarKind::Local;
};

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reference to an unbound or unknown variable during evaluation.
class EvalError : public Error {
 public:
  using Error::Error;
};

// Formula or descriptor mentioning names outside the vocabulary.
class VocabularyError : public Error {
 public:
  using Error::Error;
};

// A configured size cap was exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// A structurally invalid model (no initial state, duplicate ids, ...).
class ModelError : public Error {
 public:
  using Error::Error;
};

struct SourcePos {
  int line = 1;
  int column = 1;
};

class ParseError : public Error {
 public:
  ParseError(SourcePos pos, const std::string& msg)
      : Error(std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + msg),
        pos_(pos),
        detail_(msg) {}

  SourcePos pos() const { return pos_; }
  const std::string& detail() const { return detail_; }

 private:
  SourcePos pos_;
  std::string detail_;
};

// Mixed-radix enumeration helper: advances `v` to the next valuation in
// lexicographic order (first position most significant). Returns false on
// wrap-around.
inline bool next_valuation(Valuation& v, const std::vector<DomainRef>& domains) {
  for (std::size_t i = v.size(); i-- > 0;) {
    if (static_cast<std::size_t>(v[i]) + 1 < domains[i]->size()) {
      ++v[i];
      return true;
    }
    v[i] = 0;
  }
  return false;
}

// Product of domain sizes, saturating at `cap + 1`.
inline std::uint64_t product_size(const std::vector<DomainRef>& domains, std::uint64_t cap) {
  std::uint64_t n = 1;
  for (const auto& d : domains) {
    n *= d->size();
    if (n > cap) return cap + 1;
  }
  return n;
}

}  // namespace recipe
