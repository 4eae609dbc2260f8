#pragma once

// Tokenizer shared by the model and formula grammars.

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "recipe/core.hpp"

namespace recipe {

struct Token {
  enum class Kind : std::uint8_t { Ident, Number, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  SourcePos pos;

  bool is(std::string_view p) const { return kind == Kind::Punct && text == p; }
  bool is_word(std::string_view w) const { return kind == Kind::Ident && text == w; }
  bool is_name() const { return kind == Kind::Ident || kind == Kind::Number; }
};

inline std::string describe(const Token& t) {
  if (t.kind == Token::Kind::End) return "end of input";
  return "'" + t.text + "'";
}

inline std::vector<Token> tokenize(std::string_view src) {
  static constexpr std::string_view kPunct[] = {
      "<->", "->", ":=", "!=", "<=", ">=", "{", "}", "(", ")", ";", ":", ",", ".",
      "'",   "=",  "!",  "&",  "|",  "<",  ">", "+", "-", "[", "]"};
  std::vector<Token> out;
  std::size_t i = 0;
  SourcePos pos;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++pos.line;
        pos.column = 1;
      } else {
        ++pos.column;
      }
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (src.substr(i, 2) == "//") {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (src.substr(i, 2) == "/*") {
      const SourcePos start = pos;
      auto end = src.find("*/", i + 2);
      if (end == std::string_view::npos) throw ParseError(start, "unterminated comment");
      advance(end + 2 - i);
      continue;
    }
    Token t;
    t.pos = pos;
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalpha(uc) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      t.kind = Token::Kind::Ident;
      t.text = std::string(src.substr(i, j - i));
      // section keywords with a hyphen
      if ((t.text == "send" || t.text == "recv") && src.substr(j, 6) == "-guard") {
        t.text += "-guard";
        j += 6;
      }
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isdigit(uc)) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.kind = Token::Kind::Number;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    bool matched = false;
    for (auto p : kPunct) {
      if (src.substr(i, p.size()) == p) {
        t.kind = Token::Kind::Punct;
        t.text = std::string(p);
        advance(p.size());
        out.push_back(std::move(t));
        matched = true;
        break;
      }
    }
    if (!matched) {
      std::string shown = uc < 0x20 || uc >= 0x7F ? "byte " + std::to_string(uc) : std::string(1, c);
      throw ParseError(pos, "unexpected character " + shown);
    }
  }
  Token end;
  end.pos = pos;
  out.push_back(end);
  return out;
}

// Cursor over a token vector with a recursion budget.
class TokenStream {
 public:
  static constexpr int kMaxDepth = 200;

  explicit TokenStream(std::vector<Token> toks) : toks_(std::move(toks)) {
    if (toks_.empty() || toks_.back().kind != Token::Kind::End) toks_.push_back(Token{});
  }

  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool at_end() const { return peek().kind == Token::Kind::End; }
  std::size_t position() const { return pos_; }

  bool accept(std::string_view p) {
    if (peek().is(p)) {
      next();
      return true;
    }
    return false;
  }
  bool accept_word(std::string_view w) {
    if (peek().is_word(w)) {
      next();
      return true;
    }
    return false;
  }
  const Token& expect(std::string_view p) {
    if (!peek().is(p)) fail("expected '" + std::string(p) + "' but found " + describe(peek()));
    return next();
  }
  void expect_word(std::string_view w) {
    if (!peek().is_word(w)) fail("expected '" + std::string(w) + "' but found " + describe(peek()));
    next();
  }
  const Token& expect_ident(std::string_view what) {
    if (peek().kind != Token::Kind::Ident)
      fail("expected " + std::string(what) + " but found " + describe(peek()));
    return next();
  }
  const Token& expect_name(std::string_view what) {
    if (!peek().is_name()) fail("expected " + std::string(what) + " but found " + describe(peek()));
    return next();
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(peek().pos, msg); }

  struct DepthGuard {
    TokenStream& ts;
    explicit DepthGuard(TokenStream& t) : ts(t) {
      if (++ts.depth_ > kMaxDepth) ts.fail("nesting too deep");
    }
    ~DepthGuard() { --ts.depth_; }
  };

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

}  // namespace recipe
