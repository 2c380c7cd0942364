#pragma once

// Canonical source printer. Deterministic formatting; parse(print(p)) is
// structurally identical to p, which the round-trip tests check by comparing
// printed forms.

#include <string>

#include "waypoint/minilang/program.hpp"

namespace waypoint::minilang {

namespace detail {

inline void print_bytes_literal(std::string& out, const std::vector<uint8_t>& v) {
  static const char* digits = "0123456789abcdef";
  out += "b\"";
  for (uint8_t b : v) {
    if (b >= 0x20 && b < 0x7f && b != '"' && b != '\\') {
      out.push_back(static_cast<char>(b));
    } else {
      out += "\\x";
      out.push_back(digits[b >> 4]);
      out.push_back(digits[b & 15]);
    }
  }
  out.push_back('"');
}

inline int binop_prec(BinOp op) {
  switch (op) {
    case BinOp::Or: return 1;
    case BinOp::And: return 2;
    case BinOp::Eq: case BinOp::Ne: case BinOp::Lt: case BinOp::Le:
    case BinOp::Gt: case BinOp::Ge: return 3;
    case BinOp::Add: case BinOp::Sub: return 4;
    case BinOp::Mul: case BinOp::Div: case BinOp::Mod: return 5;
  }
  return 0;
}

inline void print_expr(std::string& out, const Expr& e, int parent_prec) {
  switch (e.kind) {
    case ExprKind::IntLit:
      out += std::to_string(e.int_val);
      return;
    case ExprKind::BoolLit:
      out += e.bool_val ? "true" : "false";
      return;
    case ExprKind::BytesLit:
      print_bytes_literal(out, e.bytes_val);
      return;
    case ExprKind::Var:
      out += e.name;
      return;
    case ExprKind::Field:
      print_expr(out, *e.a, 7);
      out.push_back('.');
      out += e.name;
      return;
    case ExprKind::Unary:
      out += unop_text(e.un_op);
      print_expr(out, *e.a, 6);
      return;
    case ExprKind::Binary: {
      int prec = binop_prec(e.bin_op);
      bool paren = prec < parent_prec;
      if (paren) out.push_back('(');
      print_expr(out, *e.a, prec);
      out.push_back(' ');
      out += binop_text(e.bin_op);
      out.push_back(' ');
      // operands print at prec+1 on the right so reparsing rebuilds the
      // same left-leaning tree
      print_expr(out, *e.b, prec + 1);
      if (paren) out.push_back(')');
      return;
    }
    case ExprKind::Call: {
      out += e.name;
      out.push_back('(');
      for (size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        print_expr(out, *e.args[i], 0);
      }
      out.push_back(')');
      return;
    }
    case ExprKind::RecordLit: {
      out += e.name;
      out += " { ";
      for (size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        out += e.init_names[i];
        out += ": ";
        print_expr(out, *e.args[i], 0);
      }
      out += " }";
      return;
    }
  }
}

inline std::string expr_to_string(const Expr& e) {
  std::string out;
  print_expr(out, e, 0);
  return out;
}

inline void indent(std::string& out, int depth) {
  out.append(static_cast<size_t>(depth) * 4, ' ');
}

inline void print_stmt_list(std::string& out, const StmtList& list, int depth);

inline void print_stmt(std::string& out, const Stmt& s, int depth) {
  indent(out, depth);
  switch (s.kind) {
    case StmtKind::Let:
      out += "let ";
      out += s.name;
      out += " = ";
      print_expr(out, *s.expr, 0);
      out += ";\n";
      return;
    case StmtKind::Assign:
      print_expr(out, *s.lvalue, 0);
      out += " = ";
      print_expr(out, *s.expr, 0);
      out += ";\n";
      return;
    case StmtKind::If: {
      out += "if ";
      print_expr(out, *s.expr, 0);
      out += " {\n";
      print_stmt_list(out, s.body, depth + 1);
      indent(out, depth);
      out += "}";
      if (!s.else_body.empty()) {
        // else-if chains collapse back onto the brace line
        if (s.else_body.size() == 1 && s.else_body[0]->kind == StmtKind::If) {
          out += " else ";
          std::string tail;
          print_stmt(tail, *s.else_body[0], depth);
          // strip the indentation the nested statement printed for itself
          out += tail.substr(static_cast<size_t>(depth) * 4);
          return;
        }
        out += " else {\n";
        print_stmt_list(out, s.else_body, depth + 1);
        indent(out, depth);
        out += "}";
      }
      out += "\n";
      return;
    }
    case StmtKind::While:
      out += "while ";
      print_expr(out, *s.expr, 0);
      out += " {\n";
      print_stmt_list(out, s.body, depth + 1);
      indent(out, depth);
      out += "}\n";
      return;
    case StmtKind::Return:
      out += "return";
      if (s.expr) {
        out.push_back(' ');
        print_expr(out, *s.expr, 0);
      }
      out += ";\n";
      return;
    case StmtKind::Halt:
      out += "halt;\n";
      return;
    case StmtKind::ExprStmt:
      print_expr(out, *s.expr, 0);
      out += ";\n";
      return;
    case StmtKind::Canary:
      out += "canary(";
      print_expr(out, *s.expr, 0);
      out += ");\n";
      return;
    case StmtKind::Guard:
      out += "guard(\"";
      out += s.name;  // guard ids are restricted to safe characters
      out += "\", ";
      print_expr(out, *s.expr, 0);
      out += ");\n";
      return;
  }
}

inline void print_stmt_list(std::string& out, const StmtList& list, int depth) {
  for (const auto& s : list) print_stmt(out, *s, depth);
}

}  // namespace detail

inline std::string print_function(const Function& fn) {
  std::string out = "fn ";
  out += fn.name;
  out.push_back('(');
  for (size_t i = 0; i < fn.params.size(); ++i) {
    if (i) out += ", ";
    out += fn.params[i].name;
    out += ": ";
    out += fn.params[i].type_text;
  }
  out.push_back(')');
  if (!fn.return_type_text.empty()) {
    out += " -> ";
    out += fn.return_type_text;
  }
  out += " {\n";
  detail::print_stmt_list(out, fn.body, 1);
  out += "}\n";
  return out;
}

inline std::string print_record(const RecordDecl& rec) {
  std::string out = "record ";
  out += rec.name;
  out += " {\n";
  for (const FieldDecl& f : rec.fields) {
    out += "    ";
    out += f.name;
    out += ": ";
    out += f.type_text;
    out += ",\n";
  }
  out += "}\n";
  return out;
}

inline std::string expr_source(const Expr& e) { return detail::expr_to_string(e); }

// One printed source per original file, declarations in source order.
inline std::vector<SourceFile> print_program(const Program& p) {
  std::vector<SourceFile> out;
  out.reserve(p.files.size());
  for (size_t fi = 0; fi < p.files.size(); ++fi) {
    std::string text;
    const auto& items = p.file_items[fi];
    for (size_t i = 0; i < items.size(); ++i) {
      if (i) text += "\n";
      if (items[i].first) text += print_record(p.records.at(items[i].second));
      else text += print_function(p.functions.at(items[i].second));
    }
    out.push_back({p.files[fi].path, std::move(text)});
  }
  return out;
}

}  // namespace waypoint::minilang
