#pragma once

// Name resolution and type checking. Annotates the AST in place: variable
// slots, record field indices, builtin tags, callee pointers and expression
// types. Also rejects unreachable statements so every CFG block stays
// reachable by construction.

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "waypoint/minilang/ast.hpp"
#include "waypoint/minilang/errors.hpp"

namespace waypoint::minilang {

inline Builtin builtin_by_name(const std::string& n) {
  if (n == "len") return Builtin::Len;
  if (n == "byte_at") return Builtin::ByteAt;
  if (n == "slice") return Builtin::Slice;
  if (n == "eq_bytes") return Builtin::EqBytes;
  return Builtin::None;
}

// True when control can never flow past s.
inline bool stmt_terminates(const Stmt& s) {
  switch (s.kind) {
    case StmtKind::Return:
    case StmtKind::Halt:
      return true;
    case StmtKind::If:
      return !s.body.empty() && stmt_terminates(*s.body.back()) && !s.else_body.empty() &&
             stmt_terminates(*s.else_body.back());
    default:
      return false;
  }
}

class Checker {
 public:
  Checker(const std::map<std::string, RecordDecl>& records,
          const std::map<std::string, Function>& functions,
          const std::string& where)
      : records_(records), functions_(functions), where_(where) {}

  Type resolve_type(const std::string& text, const Loc& loc) const {
    if (text == "int") return Type::int_();
    if (text == "bool") return Type::bool_();
    if (text == "bytes") return Type::bytes();
    auto it = records_.find(text);
    if (it == records_.end())
      throw ResolveError(where_ + ": unknown type '" + text + "' at line " +
                         std::to_string(loc.line));
    return Type::record(&it->second);
  }

  void check_function(Function& fn) {
    fn_ = &fn;
    scopes_.clear();
    scopes_.emplace_back();
    next_slot_ = 0;
    for (Param& p : fn.params) {
      p.type = resolve_type(p.type_text, p.loc);
      if (lookup(p.name)) err(p.loc, "duplicate parameter '" + p.name + "'");
      p.slot = next_slot_++;
      scopes_.back()[p.name] = {p.slot, p.type};
    }
    check_list(fn.body);
    scopes_.pop_back();
    fn.slot_count = next_slot_;
    if (!fn.return_type.is(TypeKind::Void) &&
        (fn.body.empty() || !stmt_terminates(*fn.body.back())))
      err(fn.loc, "'" + fn.name + "' may reach the end of its body without returning");
  }

  // Type of a free-standing condition at a given scope (used when splicing
  // guards: the full program re-check is authoritative, this is the fast
  // path that produces the same diagnostics).
  Type check_expr_in_scope(Expr& e, const std::vector<std::pair<std::string, Type>>& vars) {
    scopes_.clear();
    scopes_.emplace_back();
    next_slot_ = 0;
    for (const auto& [name, type] : vars) scopes_.back()[name] = {next_slot_++, type};
    Type t = check_expr(e, true);
    scopes_.pop_back();
    return t;
  }

 private:
  struct Binding {
    int slot;
    Type type;
  };

  [[noreturn]] void err(const Loc& loc, const std::string& msg) const {
    throw TypeError(where_ + ":" + std::to_string(loc.line) + ":" + std::to_string(loc.col) +
                    ": " + msg);
  }

  const Binding* lookup(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return &f->second;
    }
    return nullptr;
  }

  void check_list(StmtList& list) {
    scopes_.emplace_back();
    for (size_t i = 0; i < list.size(); ++i) {
      Stmt& s = *list[i];
      if (i > 0 && stmt_terminates(*list[i - 1])) err(s.loc, "unreachable statement");
      check_stmt(s);
    }
    scopes_.pop_back();
  }

  void check_stmt(Stmt& s) {
    switch (s.kind) {
      case StmtKind::Let: {
        Type t = check_expr(*s.expr, true);
        if (t.is(TypeKind::Void)) err(s.loc, "cannot bind a void value");
        if (lookup(s.name)) err(s.loc, "shadowing of '" + s.name + "' is not allowed");
        s.let_slot = next_slot_++;
        scopes_.back()[s.name] = {s.let_slot, t};
        break;
      }
      case StmtKind::Assign: {
        Type lt = check_expr(*s.lvalue, true);
        Type rt = check_expr(*s.expr, true);
        if (lt != rt)
          err(s.loc, "assignment type mismatch: " + type_name(lt) + " vs " + type_name(rt));
        break;
      }
      case StmtKind::If: {
        require_bool(*s.expr, "if condition");
        check_list(s.body);
        check_list(s.else_body);
        break;
      }
      case StmtKind::While: {
        require_bool(*s.expr, "while condition");
        check_list(s.body);
        break;
      }
      case StmtKind::Return: {
        if (fn_->return_type.is(TypeKind::Void)) {
          if (s.expr) err(s.loc, "'" + fn_->name + "' returns no value");
        } else {
          if (!s.expr) err(s.loc, "'" + fn_->name + "' must return a value");
          Type t = check_expr(*s.expr, true);
          if (t != fn_->return_type)
            err(s.loc, "return type mismatch: expected " + type_name(fn_->return_type) +
                           ", got " + type_name(t));
        }
        break;
      }
      case StmtKind::Halt:
        break;
      case StmtKind::ExprStmt:
        check_expr(*s.expr, false);
        break;
      case StmtKind::Canary:
      case StmtKind::Guard: {
        require_bool(*s.expr, s.kind == StmtKind::Canary ? "canary condition" : "guard condition");
        require_call_free(*s.expr);
        if (s.kind == StmtKind::Guard && s.name.empty()) err(s.loc, "guard id must not be empty");
        break;
      }
    }
  }

  void require_bool(Expr& e, const char* what) {
    Type t = check_expr(e, true);
    if (!t.is(TypeKind::Bool))
      err(e.loc, std::string(what) + " must be bool, got " + type_name(t));
  }

  // Guard/canary conditions may call builtins but not user functions: a user
  // call would execute blocks and change the coverage signal of P'.
  void require_call_free(const Expr& e) const {
    if (e.kind == ExprKind::Call && e.builtin == Builtin::None)
      err(e.loc, "function calls are not allowed in canary or guard conditions");
    if (e.a) require_call_free(*e.a);
    if (e.b) require_call_free(*e.b);
    for (const auto& x : e.args) require_call_free(*x);
  }

  Type check_expr(Expr& e, bool value_needed) {
    switch (e.kind) {
      case ExprKind::IntLit: return e.type = Type::int_();
      case ExprKind::BoolLit: return e.type = Type::bool_();
      case ExprKind::BytesLit: return e.type = Type::bytes();
      case ExprKind::Var: {
        const Binding* b = lookup(e.name);
        if (!b) err(e.loc, "unknown variable '" + e.name + "'");
        e.slot = b->slot;
        return e.type = b->type;
      }
      case ExprKind::Field: {
        Type bt = check_expr(*e.a, true);
        if (!bt.is(TypeKind::Record))
          err(e.loc, "field access on non-record value of type " + type_name(bt));
        int idx = bt.rec->field_index(e.name);
        if (idx < 0) err(e.loc, "record '" + bt.rec->name + "' has no field '" + e.name + "'");
        e.field_index = idx;
        return e.type = bt.rec->fields[static_cast<size_t>(idx)].type;
      }
      case ExprKind::Unary: {
        Type t = check_expr(*e.a, true);
        if (e.un_op == UnOp::Neg) {
          if (!t.is(TypeKind::Int)) err(e.loc, "unary '-' needs int, got " + type_name(t));
          return e.type = Type::int_();
        }
        if (!t.is(TypeKind::Bool)) err(e.loc, "'!' needs bool, got " + type_name(t));
        return e.type = Type::bool_();
      }
      case ExprKind::Binary: {
        Type at = check_expr(*e.a, true);
        Type bt = check_expr(*e.b, true);
        switch (e.bin_op) {
          case BinOp::Add: case BinOp::Sub: case BinOp::Mul:
          case BinOp::Div: case BinOp::Mod:
            if (!at.is(TypeKind::Int) || !bt.is(TypeKind::Int))
              err(e.loc, std::string("'") + binop_text(e.bin_op) + "' needs int operands");
            return e.type = Type::int_();
          case BinOp::Lt: case BinOp::Le: case BinOp::Gt: case BinOp::Ge:
            if (!at.is(TypeKind::Int) || !bt.is(TypeKind::Int))
              err(e.loc, std::string("'") + binop_text(e.bin_op) + "' needs int operands");
            return e.type = Type::bool_();
          case BinOp::Eq: case BinOp::Ne:
            if (at != bt)
              err(e.loc, "comparison of mismatched types " + type_name(at) + " and " +
                             type_name(bt));
            if (at.is(TypeKind::Bytes)) err(e.loc, "compare bytes with eq_bytes()");
            if (at.is(TypeKind::Record)) err(e.loc, "records cannot be compared");
            return e.type = Type::bool_();
          case BinOp::And: case BinOp::Or:
            if (!at.is(TypeKind::Bool) || !bt.is(TypeKind::Bool))
              err(e.loc, std::string("'") + binop_text(e.bin_op) + "' needs bool operands");
            return e.type = Type::bool_();
        }
        err(e.loc, "bad binary operator");
      }
      case ExprKind::Call: {
        e.builtin = builtin_by_name(e.name);
        std::vector<Type> at;
        at.reserve(e.args.size());
        for (auto& arg : e.args) at.push_back(check_expr(*arg, true));
        if (e.builtin != Builtin::None) {
          return e.type = check_builtin(e, at);
        }
        auto it = functions_.find(e.name);
        if (it == functions_.end())
          throw ResolveError(where_ + ":" + std::to_string(e.loc.line) + ": unknown function '" +
                             e.name + "'");
        const Function& callee = it->second;
        if (at.size() != callee.params.size())
          err(e.loc, "'" + e.name + "' expects " + std::to_string(callee.params.size()) +
                         " argument(s), got " + std::to_string(at.size()));
        for (size_t i = 0; i < at.size(); ++i)
          if (at[i] != callee.params[i].type)
            err(e.args[i]->loc, "argument " + std::to_string(i + 1) + " of '" + e.name +
                                    "' expects " + type_name(callee.params[i].type) + ", got " +
                                    type_name(at[i]));
        if (value_needed && callee.return_type.is(TypeKind::Void))
          err(e.loc, "'" + e.name + "' returns no value");
        e.callee = &callee;
        return e.type = callee.return_type;
      }
      case ExprKind::RecordLit: {
        auto it = records_.find(e.name);
        if (it == records_.end())
          throw ResolveError(where_ + ":" + std::to_string(e.loc.line) + ": unknown record '" +
                             e.name + "'");
        const RecordDecl& rec = it->second;
        std::vector<bool> seen(rec.fields.size(), false);
        e.init_indices.clear();
        for (size_t i = 0; i < e.init_names.size(); ++i) {
          int idx = rec.field_index(e.init_names[i]);
          if (idx < 0)
            err(e.args[i]->loc, "record '" + rec.name + "' has no field '" + e.init_names[i] + "'");
          if (seen[static_cast<size_t>(idx)])
            err(e.args[i]->loc, "duplicate field '" + e.init_names[i] + "'");
          seen[static_cast<size_t>(idx)] = true;
          Type t = check_expr(*e.args[i], true);
          if (t != rec.fields[static_cast<size_t>(idx)].type)
            err(e.args[i]->loc, "field '" + e.init_names[i] + "' expects " +
                                    type_name(rec.fields[static_cast<size_t>(idx)].type) +
                                    ", got " + type_name(t));
          e.init_indices.push_back(idx);
        }
        for (size_t i = 0; i < rec.fields.size(); ++i)
          if (!seen[i]) err(e.loc, "missing field '" + rec.fields[i].name + "' of '" +
                                       rec.name + "'");
        return e.type = Type::record(&rec);
      }
    }
    err(e.loc, "bad expression");
  }

  Type check_builtin(Expr& e, const std::vector<Type>& at) {
    auto want = [&](size_t n) {
      if (at.size() != n)
        err(e.loc, "'" + e.name + "' expects " + std::to_string(n) + " argument(s)");
    };
    auto is = [&](size_t i, TypeKind k) {
      if (!at[i].is(k))
        err(e.args[i]->loc, "argument " + std::to_string(i + 1) + " of '" + e.name +
                                "' must be " + type_name(Type{k, nullptr}));
    };
    switch (e.builtin) {
      case Builtin::Len:
        want(1); is(0, TypeKind::Bytes);
        return Type::int_();
      case Builtin::ByteAt:
        want(2); is(0, TypeKind::Bytes); is(1, TypeKind::Int);
        return Type::int_();
      case Builtin::Slice:
        want(3); is(0, TypeKind::Bytes); is(1, TypeKind::Int); is(2, TypeKind::Int);
        return Type::bytes();
      case Builtin::EqBytes:
        want(2); is(0, TypeKind::Bytes); is(1, TypeKind::Bytes);
        return Type::bool_();
      default:
        err(e.loc, "bad builtin");
    }
  }

  const std::map<std::string, RecordDecl>& records_;
  const std::map<std::string, Function>& functions_;
  std::string where_;
  Function* fn_ = nullptr;
  std::vector<std::unordered_map<std::string, Binding>> scopes_;
  int next_slot_ = 0;
};

}  // namespace waypoint::minilang
