#pragma once

// Recursive-descent parser producing one RawModule per source file. Raw
// modules are merged, resolved and type-checked by assemble() (program.hpp);
// instrument() re-enters the same pipeline after splicing guard statements.

#include <memory>
#include <string>
#include <vector>

#include "waypoint/minilang/ast.hpp"
#include "waypoint/minilang/lexer.hpp"

namespace waypoint::minilang {

struct RawModule {
  std::vector<RecordDecl> records;
  std::vector<Function> functions;
};

class Parser {
 public:
  Parser(std::string path, const std::string& src, int file_index)
      : path_(std::move(path)), file_(file_index) {
    toks_ = Lexer(path_, src).run();
  }

  RawModule parse_module() {
    RawModule m;
    while (!at(Tok::End)) {
      if (at(Tok::KwRecord)) m.records.push_back(parse_record());
      else if (at(Tok::KwFn)) m.functions.push_back(parse_function());
      else fail("expected 'fn' or 'record'");
    }
    return m;
  }

  // Entry point for predicate / canary condition snippets.
  ExprPtr parse_expression_only() {
    ExprPtr e = parse_expr(/*allow_record_lit=*/true);
    if (!at(Tok::End)) fail("trailing tokens after expression");
    return e;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  bool at(Tok k) const { return cur().kind == k; }

  const Token& advance() { return toks_[pos_++]; }

  const Token& expect(Tok k, const char* what) {
    if (!at(k)) fail(std::string("expected ") + what);
    return advance();
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError(path_, cur().line, cur().col, msg);
  }

  Loc loc_here() const { return Loc{file_, cur().line, cur().col}; }

  std::string parse_type_text() {
    if (at(Tok::KwInt)) { advance(); return "int"; }
    if (at(Tok::KwBool)) { advance(); return "bool"; }
    if (at(Tok::KwBytes)) { advance(); return "bytes"; }
    if (at(Tok::Ident)) return advance().text;
    fail("expected type");
  }

  RecordDecl parse_record() {
    RecordDecl r;
    r.loc = loc_here();
    expect(Tok::KwRecord, "'record'");
    r.name = expect(Tok::Ident, "record name").text;
    expect(Tok::LBrace, "'{'");
    while (!at(Tok::RBrace)) {
      FieldDecl f;
      f.loc = loc_here();
      f.name = expect(Tok::Ident, "field name").text;
      expect(Tok::Colon, "':'");
      f.type_text = parse_type_text();
      r.fields.push_back(std::move(f));
      if (at(Tok::Comma)) advance();
      else break;
    }
    r.end_line = cur().line;
    expect(Tok::RBrace, "'}'");
    return r;
  }

  Function parse_function() {
    Function fn;
    fn.loc = loc_here();
    expect(Tok::KwFn, "'fn'");
    fn.name = expect(Tok::Ident, "function name").text;
    expect(Tok::LParen, "'('");
    while (!at(Tok::RParen)) {
      Param p;
      p.loc = loc_here();
      p.name = expect(Tok::Ident, "parameter name").text;
      expect(Tok::Colon, "':'");
      p.type_text = parse_type_text();
      fn.params.push_back(std::move(p));
      if (at(Tok::Comma)) advance();
      else break;
    }
    expect(Tok::RParen, "')'");
    if (at(Tok::Arrow)) {
      advance();
      fn.return_type_text = parse_type_text();
    }
    fn.body = parse_block();
    fn.end_line = toks_[pos_ - 1].line;  // closing brace
    return fn;
  }

  StmtList parse_block() {
    expect(Tok::LBrace, "'{'");
    StmtList list;
    while (!at(Tok::RBrace)) list.push_back(parse_stmt());
    expect(Tok::RBrace, "'}'");
    return list;
  }

  StmtPtr parse_stmt() {
    auto s = std::make_unique<Stmt>();
    s->loc = loc_here();
    switch (cur().kind) {
      case Tok::KwLet: {
        advance();
        s->kind = StmtKind::Let;
        s->name = expect(Tok::Ident, "variable name").text;
        expect(Tok::Assign, "'='");
        s->expr = parse_expr(true);
        expect(Tok::Semi, "';'");
        return s;
      }
      case Tok::KwIf: {
        advance();
        s->kind = StmtKind::If;
        s->expr = parse_expr(/*allow_record_lit=*/false);
        s->body = parse_block();
        if (at(Tok::KwElse)) {
          advance();
          if (at(Tok::KwIf)) {
            s->else_body.push_back(parse_stmt());
          } else {
            s->else_body = parse_block();
          }
        }
        return s;
      }
      case Tok::KwWhile: {
        advance();
        s->kind = StmtKind::While;
        s->expr = parse_expr(false);
        s->body = parse_block();
        return s;
      }
      case Tok::KwReturn: {
        advance();
        s->kind = StmtKind::Return;
        if (!at(Tok::Semi)) s->expr = parse_expr(true);
        expect(Tok::Semi, "';'");
        return s;
      }
      case Tok::KwHalt: {
        advance();
        s->kind = StmtKind::Halt;
        expect(Tok::Semi, "';'");
        return s;
      }
      case Tok::KwCanary: {
        advance();
        s->kind = StmtKind::Canary;
        expect(Tok::LParen, "'('");
        s->expr = parse_expr(true);
        expect(Tok::RParen, "')'");
        expect(Tok::Semi, "';'");
        return s;
      }
      case Tok::KwGuard: {
        advance();
        s->kind = StmtKind::Guard;
        expect(Tok::LParen, "'('");
        s->name = expect(Tok::Str, "guard id string").str_val;
        expect(Tok::Comma, "','");
        s->expr = parse_expr(true);
        expect(Tok::RParen, "')'");
        expect(Tok::Semi, "';'");
        return s;
      }
      case Tok::Ident: {
        // assignment target or call statement
        ExprPtr head = parse_postfix(parse_primary(true));
        if (at(Tok::Assign)) {
          if (head->kind != ExprKind::Var && head->kind != ExprKind::Field)
            fail("assignment target must be a variable or field");
          advance();
          s->kind = StmtKind::Assign;
          s->lvalue = std::move(head);
          s->expr = parse_expr(true);
          expect(Tok::Semi, "';'");
          return s;
        }
        if (head->kind != ExprKind::Call)
          fail("expected assignment or call statement");
        s->kind = StmtKind::ExprStmt;
        s->expr = std::move(head);
        expect(Tok::Semi, "';'");
        return s;
      }
      default:
        fail("expected statement");
    }
  }

  ExprPtr make_expr(ExprKind k) {
    auto e = std::make_unique<Expr>();
    e->kind = k;
    e->loc = loc_here();
    return e;
  }

  ExprPtr parse_expr(bool allow_record_lit) { return parse_or(allow_record_lit); }

  ExprPtr parse_or(bool arl) {
    ExprPtr e = parse_and(arl);
    while (at(Tok::OrOr)) {
      auto n = make_expr(ExprKind::Binary);
      n->loc = e->loc;
      advance();
      n->bin_op = BinOp::Or;
      n->a = std::move(e);
      n->b = parse_and(arl);
      e = std::move(n);
    }
    return e;
  }

  ExprPtr parse_and(bool arl) {
    ExprPtr e = parse_cmp(arl);
    while (at(Tok::AndAnd)) {
      auto n = make_expr(ExprKind::Binary);
      n->loc = e->loc;
      advance();
      n->bin_op = BinOp::And;
      n->a = std::move(e);
      n->b = parse_cmp(arl);
      e = std::move(n);
    }
    return e;
  }

  ExprPtr parse_cmp(bool arl) {
    ExprPtr e = parse_add(arl);
    BinOp op;
    switch (cur().kind) {
      case Tok::EqEq: op = BinOp::Eq; break;
      case Tok::NotEq: op = BinOp::Ne; break;
      case Tok::Lt: op = BinOp::Lt; break;
      case Tok::Le: op = BinOp::Le; break;
      case Tok::Gt: op = BinOp::Gt; break;
      case Tok::Ge: op = BinOp::Ge; break;
      default: return e;
    }
    auto n = make_expr(ExprKind::Binary);
    n->loc = e->loc;
    advance();
    n->bin_op = op;
    n->a = std::move(e);
    n->b = parse_add(arl);  // comparisons do not chain
    return n;
  }

  ExprPtr parse_add(bool arl) {
    ExprPtr e = parse_mul(arl);
    while (at(Tok::Plus) || at(Tok::Minus)) {
      auto n = make_expr(ExprKind::Binary);
      n->loc = e->loc;
      n->bin_op = advance().kind == Tok::Plus ? BinOp::Add : BinOp::Sub;
      n->a = std::move(e);
      n->b = parse_mul(arl);
      e = std::move(n);
    }
    return e;
  }

  ExprPtr parse_mul(bool arl) {
    ExprPtr e = parse_unary(arl);
    while (at(Tok::Star) || at(Tok::Slash) || at(Tok::Percent)) {
      auto n = make_expr(ExprKind::Binary);
      n->loc = e->loc;
      Tok k = advance().kind;
      n->bin_op = k == Tok::Star ? BinOp::Mul : k == Tok::Slash ? BinOp::Div : BinOp::Mod;
      n->a = std::move(e);
      n->b = parse_unary(arl);
      e = std::move(n);
    }
    return e;
  }

  ExprPtr parse_unary(bool arl) {
    if (at(Tok::Not) || at(Tok::Minus)) {
      auto n = make_expr(ExprKind::Unary);
      n->un_op = advance().kind == Tok::Not ? UnOp::Not : UnOp::Neg;
      n->a = parse_unary(arl);
      return n;
    }
    return parse_postfix(parse_primary(arl));
  }

  ExprPtr parse_postfix(ExprPtr e) {
    while (at(Tok::Dot)) {
      auto n = make_expr(ExprKind::Field);
      n->loc = e->loc;
      advance();
      n->name = expect(Tok::Ident, "field name").text;
      n->a = std::move(e);
      e = std::move(n);
    }
    return e;
  }

  ExprPtr parse_primary(bool allow_record_lit) {
    switch (cur().kind) {
      case Tok::Int: {
        auto e = make_expr(ExprKind::IntLit);
        e->int_val = advance().int_val;
        return e;
      }
      case Tok::KwTrue:
      case Tok::KwFalse: {
        auto e = make_expr(ExprKind::BoolLit);
        e->bool_val = advance().kind == Tok::KwTrue;
        return e;
      }
      case Tok::Bytes: {
        auto e = make_expr(ExprKind::BytesLit);
        e->bytes_val = advance().bytes_val;
        return e;
      }
      case Tok::LParen: {
        advance();
        ExprPtr e = parse_expr(true);  // parens lift the record-literal ban
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Ident: {
        auto e = make_expr(ExprKind::Var);
        e->name = advance().text;
        if (at(Tok::LParen)) {
          e->kind = ExprKind::Call;
          advance();
          while (!at(Tok::RParen)) {
            e->args.push_back(parse_expr(true));
            if (at(Tok::Comma)) advance();
            else break;
          }
          expect(Tok::RParen, "')'");
        } else if (at(Tok::LBrace) && allow_record_lit) {
          e->kind = ExprKind::RecordLit;
          advance();
          while (!at(Tok::RBrace)) {
            e->init_names.push_back(expect(Tok::Ident, "field name").text);
            expect(Tok::Colon, "':'");
            e->args.push_back(parse_expr(true));
            if (at(Tok::Comma)) advance();
            else break;
          }
          expect(Tok::RBrace, "'}'");
        }
        return e;
      }
      default:
        fail("expected expression");
    }
  }

  std::string path_;
  int file_;
  std::vector<Token> toks_;
  size_t pos_ = 0;
};

}  // namespace waypoint::minilang
