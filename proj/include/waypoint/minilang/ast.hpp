#pragma once

// AST for the mini imperative language. Fat nodes with an explicit kind tag;
// the checker annotates types, variable slots and record field indices in
// place, and the CFG builder stamps each statement with its basic block id.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace waypoint::minilang {

struct RecordDecl;

struct Loc {
  int file = 0;  // index into Program::files
  int line = 0;  // 1-based
  int col = 0;   // 1-based
};

enum class TypeKind { Invalid, Void, Int, Bool, Bytes, Record };

struct Type {
  TypeKind kind = TypeKind::Invalid;
  const RecordDecl* rec = nullptr;  // set iff kind == Record

  static Type invalid() { return {}; }
  static Type void_() { return {TypeKind::Void, nullptr}; }
  static Type int_() { return {TypeKind::Int, nullptr}; }
  static Type bool_() { return {TypeKind::Bool, nullptr}; }
  static Type bytes() { return {TypeKind::Bytes, nullptr}; }
  static Type record(const RecordDecl* r) { return {TypeKind::Record, r}; }

  bool operator==(const Type& o) const { return kind == o.kind && rec == o.rec; }
  bool operator!=(const Type& o) const { return !(*this == o); }
  bool is(TypeKind k) const { return kind == k; }
};

std::string type_name(const Type& t);

enum class ExprKind {
  IntLit,
  BoolLit,
  BytesLit,
  Var,
  Field,      // a.name
  Unary,      // op a
  Binary,     // a op b
  Call,       // name(args...)  user function or builtin
  RecordLit,  // Name { field: expr, ... }
};

enum class UnOp { Neg, Not };
enum class BinOp { Add, Sub, Mul, Div, Mod, Eq, Ne, Lt, Le, Gt, Ge, And, Or };

const char* unop_text(UnOp op);
const char* binop_text(BinOp op);

enum class Builtin { None, Len, ByteAt, Slice, EqBytes };

struct Function;

struct Expr {
  ExprKind kind;
  Loc loc;
  Type type;  // filled by the checker

  int64_t int_val = 0;                  // IntLit
  bool bool_val = false;                // BoolLit
  std::vector<uint8_t> bytes_val;       // BytesLit
  std::string name;                     // Var/Field/Call/RecordLit
  UnOp un_op = UnOp::Neg;               // Unary
  BinOp bin_op = BinOp::Add;            // Binary
  std::unique_ptr<Expr> a, b;           // Unary(a), Binary(a,b), Field(a)
  std::vector<std::unique_ptr<Expr>> args;        // Call args, RecordLit inits
  std::vector<std::string> init_names;            // RecordLit field names
  std::vector<int> init_indices;                  // RecordLit: decl index per init

  int slot = -1;          // Var: frame slot, set by checker
  int field_index = -1;   // Field: index into record decl
  Builtin builtin = Builtin::None;      // Call
  const Function* callee = nullptr;     // Call (user functions)

  std::unique_ptr<Expr> clone() const;
};

using ExprPtr = std::unique_ptr<Expr>;

enum class StmtKind {
  Let,       // let name = expr;
  Assign,    // lvalue = expr;
  If,        // if cond {a} else {b}
  While,     // while cond {a}
  Return,    // return expr?;
  Halt,      // halt;
  ExprStmt,  // call();
  Canary,    // canary(expr);
  Guard,     // guard("id", expr);
};

struct Stmt {
  StmtKind kind;
  Loc loc;

  std::string name;              // Let: variable, Guard: predicate id
  ExprPtr expr;                  // Let/Assign rhs, If/While cond, Return value,
                                 // ExprStmt call, Canary/Guard condition
  ExprPtr lvalue;                // Assign target (Var or Field chain)
  std::vector<std::unique_ptr<Stmt>> body;       // If then, While body
  std::vector<std::unique_ptr<Stmt>> else_body;  // If else

  int let_slot = -1;    // Let: frame slot
  int block = -1;       // basic block id, set by the CFG builder
  bool synthetic = false;  // true for guards spliced by instrument()

  std::unique_ptr<Stmt> clone() const;
};

using StmtPtr = std::unique_ptr<Stmt>;
using StmtList = std::vector<StmtPtr>;

struct Param {
  std::string name;
  Type type;
  Loc loc;
  std::string type_text;  // as written, resolved by the checker
  int slot = -1;
};

struct FieldDecl {
  std::string name;
  Type type;
  Loc loc;
  std::string type_text;
};

struct RecordDecl {
  std::string name;
  std::vector<FieldDecl> fields;
  Loc loc;
  int end_line = 0;

  int field_index(const std::string& f) const {
    for (size_t i = 0; i < fields.size(); ++i)
      if (fields[i].name == f) return static_cast<int>(i);
    return -1;
  }
};

struct Cfg;  // cfg.hpp

struct Function {
  std::string name;
  std::vector<Param> params;
  Type return_type = Type::void_();
  std::string return_type_text;  // empty when void
  StmtList body;
  Loc loc;
  int end_line = 0;
  int slot_count = 0;  // params + lets, assigned by the checker
  std::shared_ptr<const Cfg> cfg;  // built after type check
};

inline const char* unop_text_impl(UnOp op) { return op == UnOp::Neg ? "-" : "!"; }

inline const char* binop_text_impl(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Mod: return "%";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
  }
  return "?";
}

inline const char* unop_text(UnOp op) { return unop_text_impl(op); }
inline const char* binop_text(BinOp op) { return binop_text_impl(op); }

inline std::string type_name(const Type& t) {
  switch (t.kind) {
    case TypeKind::Invalid: return "<invalid>";
    case TypeKind::Void: return "void";
    case TypeKind::Int: return "int";
    case TypeKind::Bool: return "bool";
    case TypeKind::Bytes: return "bytes";
    case TypeKind::Record: return t.rec ? t.rec->name : "<record>";
  }
  return "<invalid>";
}

inline std::unique_ptr<Expr> Expr::clone() const {
  auto e = std::make_unique<Expr>();
  e->kind = kind;
  e->loc = loc;
  e->type = type;
  e->int_val = int_val;
  e->bool_val = bool_val;
  e->bytes_val = bytes_val;
  e->name = name;
  e->un_op = un_op;
  e->bin_op = bin_op;
  if (a) e->a = a->clone();
  if (b) e->b = b->clone();
  e->args.reserve(args.size());
  for (const auto& x : args) e->args.push_back(x->clone());
  e->init_names = init_names;
  e->init_indices = init_indices;
  e->slot = slot;
  e->field_index = field_index;
  e->builtin = builtin;
  e->callee = nullptr;  // re-resolved when the clone is assembled
  return e;
}

inline std::unique_ptr<Stmt> Stmt::clone() const {
  auto s = std::make_unique<Stmt>();
  s->kind = kind;
  s->loc = loc;
  s->name = name;
  if (expr) s->expr = expr->clone();
  if (lvalue) s->lvalue = lvalue->clone();
  s->body.reserve(body.size());
  for (const auto& x : body) s->body.push_back(x->clone());
  s->else_body.reserve(else_body.size());
  for (const auto& x : else_body) s->else_body.push_back(x->clone());
  s->let_slot = let_slot;
  s->block = block;
  s->synthetic = synthetic;
  return s;
}

}  // namespace waypoint::minilang
