#pragma once

// Hand-rolled lexer. Tokens carry 1-based line/col; identifier tokens are the
// basis of the code index's references() query, so the lexer is exposed
// rather than buried in the parser.

#include <cstdint>
#include <string>
#include <vector>

#include "waypoint/minilang/errors.hpp"

namespace waypoint::minilang {

enum class Tok {
  End,
  Ident,
  Int,       // value in int_val
  Bytes,     // value in bytes_val
  Str,       // value in str_val (guard ids)
  // keywords
  KwFn, KwRecord, KwLet, KwIf, KwElse, KwWhile, KwReturn, KwHalt,
  KwCanary, KwGuard, KwTrue, KwFalse, KwInt, KwBool, KwBytes,
  // punctuation / operators
  LParen, RParen, LBrace, RBrace, Comma, Semi, Colon, Dot, Arrow,
  Assign, Plus, Minus, Star, Slash, Percent,
  EqEq, NotEq, Lt, Le, Gt, Ge, AndAnd, OrOr, Not,
};

struct Token {
  Tok kind;
  int line, col;
  std::string text;     // identifier spelling / raw text
  int64_t int_val = 0;
  std::vector<uint8_t> bytes_val;
  std::string str_val;
};

inline bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool is_ident_char(char c) {
  return is_ident_start(c) || (c >= '0' && c <= '9');
}

inline Tok keyword_kind(const std::string& s) {
  if (s == "fn") return Tok::KwFn;
  if (s == "record") return Tok::KwRecord;
  if (s == "let") return Tok::KwLet;
  if (s == "if") return Tok::KwIf;
  if (s == "else") return Tok::KwElse;
  if (s == "while") return Tok::KwWhile;
  if (s == "return") return Tok::KwReturn;
  if (s == "halt") return Tok::KwHalt;
  if (s == "canary") return Tok::KwCanary;
  if (s == "guard") return Tok::KwGuard;
  if (s == "true") return Tok::KwTrue;
  if (s == "false") return Tok::KwFalse;
  if (s == "int") return Tok::KwInt;
  if (s == "bool") return Tok::KwBool;
  if (s == "bytes") return Tok::KwBytes;
  return Tok::Ident;
}

class Lexer {
 public:
  Lexer(std::string path, const std::string& src) : path_(std::move(path)), src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      Token t = next();
      bool end = t.kind == Tok::End;
      out.push_back(std::move(t));
      if (end) break;
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError(path_, line_, col_, msg);
  }

  char peek(size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_ws() {
    for (;;) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (peek() != '\n' && peek() != '\0') advance();
      } else {
        return;
      }
    }
  }

  uint8_t hex_digit(char c) {
    if (c >= '0' && c <= '9') return static_cast<uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<uint8_t>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<uint8_t>(c - 'A' + 10);
    fail("bad hex digit");
  }

  // Shared escape handling for 'c', b"..." and "..." literals.
  uint8_t escape() {
    char c = advance();
    switch (c) {
      case 'n': return '\n';
      case 't': return '\t';
      case '0': return 0;
      case '\\': return '\\';
      case '\'': return '\'';
      case '"': return '"';
      case 'x': {
        uint8_t hi = hex_digit(advance());
        uint8_t lo = hex_digit(advance());
        return static_cast<uint8_t>(hi << 4 | lo);
      }
      default: fail("unknown escape sequence");
    }
  }

  Token next() {
    skip_ws();
    Token t;
    t.line = line_;
    t.col = col_;
    if (pos_ >= src_.size()) {
      t.kind = Tok::End;
      return t;
    }
    char c = advance();
    switch (c) {
      case '(': t.kind = Tok::LParen; return t;
      case ')': t.kind = Tok::RParen; return t;
      case '{': t.kind = Tok::LBrace; return t;
      case '}': t.kind = Tok::RBrace; return t;
      case ',': t.kind = Tok::Comma; return t;
      case ';': t.kind = Tok::Semi; return t;
      case ':': t.kind = Tok::Colon; return t;
      case '.': t.kind = Tok::Dot; return t;
      case '+': t.kind = Tok::Plus; return t;
      case '*': t.kind = Tok::Star; return t;
      case '/': t.kind = Tok::Slash; return t;
      case '%': t.kind = Tok::Percent; return t;
      case '-':
        if (peek() == '>') { advance(); t.kind = Tok::Arrow; return t; }
        t.kind = Tok::Minus;
        return t;
      case '=':
        if (peek() == '=') { advance(); t.kind = Tok::EqEq; return t; }
        t.kind = Tok::Assign;
        return t;
      case '!':
        if (peek() == '=') { advance(); t.kind = Tok::NotEq; return t; }
        t.kind = Tok::Not;
        return t;
      case '<':
        if (peek() == '=') { advance(); t.kind = Tok::Le; return t; }
        t.kind = Tok::Lt;
        return t;
      case '>':
        if (peek() == '=') { advance(); t.kind = Tok::Ge; return t; }
        t.kind = Tok::Gt;
        return t;
      case '&':
        if (peek() == '&') { advance(); t.kind = Tok::AndAnd; return t; }
        fail("expected '&&'");
      case '|':
        if (peek() == '|') { advance(); t.kind = Tok::OrOr; return t; }
        fail("expected '||'");
      case '\'': {
        uint8_t v;
        char d = advance();
        if (d == '\\') v = escape();
        else if (d == '\0' || d == '\'') fail("empty char literal");
        else v = static_cast<uint8_t>(d);
        if (advance() != '\'') fail("unterminated char literal");
        t.kind = Tok::Int;
        t.int_val = v;
        return t;
      }
      case '"': {
        t.kind = Tok::Str;
        for (;;) {
          char d = advance();
          if (d == '\0') fail("unterminated string");
          if (d == '"') break;
          if (d == '\\') t.str_val.push_back(static_cast<char>(escape()));
          else t.str_val.push_back(d);
        }
        return t;
      }
      default: break;
    }
    if (c == 'b' && peek() == '"') {
      advance();  // consume quote
      t.kind = Tok::Bytes;
      for (;;) {
        char d = advance();
        if (d == '\0') fail("unterminated bytes literal");
        if (d == '"') break;
        if (d == '\\') t.bytes_val.push_back(escape());
        else t.bytes_val.push_back(static_cast<uint8_t>(d));
      }
      return t;
    }
    if (c >= '0' && c <= '9') {
      t.kind = Tok::Int;
      if (c == '0' && (peek() == 'x' || peek() == 'X')) {
        advance();
        if (!isxdigit(static_cast<unsigned char>(peek()))) fail("bad hex literal");
        uint64_t v = 0;
        while (isxdigit(static_cast<unsigned char>(peek()))) v = v * 16 + hex_digit(advance());
        t.int_val = static_cast<int64_t>(v);
      } else {
        uint64_t v = static_cast<uint64_t>(c - '0');
        while (peek() >= '0' && peek() <= '9') {
          v = v * 10 + static_cast<uint64_t>(advance() - '0');
          if (v > (1ull << 63)) fail("integer literal out of range");
        }
        t.int_val = static_cast<int64_t>(v);
      }
      if (is_ident_start(peek())) fail("identifier starts with a digit");
      return t;
    }
    if (is_ident_start(c)) {
      std::string s(1, c);
      while (is_ident_char(peek())) s.push_back(advance());
      t.kind = keyword_kind(s);
      t.text = std::move(s);
      return t;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string path_;
  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

// All identifier tokens of a source file, for reference queries.
struct IdentOccurrence {
  std::string name;
  int line, col;
};

inline std::vector<IdentOccurrence> identifier_occurrences(const std::string& path,
                                                           const std::string& src) {
  std::vector<IdentOccurrence> out;
  for (const Token& t : Lexer(path, src).run())
    if (t.kind == Tok::Ident) out.push_back({t.text, t.line, t.col});
  return out;
}

}  // namespace waypoint::minilang
