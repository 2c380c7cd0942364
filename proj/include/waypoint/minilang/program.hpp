#pragma once

// Program = merged, resolved, type-checked source files with per-function
// CFGs, the call graph, call sites and canary sites. Immutable once
// assembled; instrument() re-runs this pipeline on a spliced clone.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "waypoint/minilang/ast.hpp"
#include "waypoint/minilang/cfg.hpp"
#include "waypoint/minilang/check.hpp"
#include "waypoint/minilang/errors.hpp"
#include "waypoint/minilang/parser.hpp"

namespace waypoint::minilang {

struct SourceFile {
  std::string path;
  std::string text;
};

// Statement paths alternate statement index and sub-block selector:
// [4] = 5th top-level statement; [4, 0, 2] = inside its first sub-block
// (then-branch or loop body), 3rd statement; selector 1 = else-branch.
using StmtPath = std::vector<int>;

std::string path_to_string(const StmtPath& p);
StmtPath path_from_string(const std::string& s);

struct CallSite {
  std::string caller;
  std::string callee;
  StmtPath path;  // of the enclosing statement
  Loc loc;
};

struct CanarySite {
  std::string function;
  StmtPath path;
  const Stmt* stmt;
};

struct Program {
  std::vector<SourceFile> files;
  std::map<std::string, RecordDecl> records;
  std::map<std::string, Function> functions;
  std::vector<std::string> record_order;    // declaration order across files
  std::vector<std::string> function_order;  // declaration order across files
  // Per-file declaration order, (is_record, name); used by the printer and
  // the code index.
  std::vector<std::vector<std::pair<bool, std::string>>> file_items;
  std::string entry;
  std::vector<CallSite> call_sites;
  std::vector<CanarySite> canary_sites;
  std::map<std::string, std::vector<std::string>> callee_names;  // first-call-site order
  std::map<std::string, std::vector<std::string>> caller_names;  // sorted

  Program() = default;
  Program(Program&&) = default;
  Program& operator=(Program&&) = default;
  Program(const Program&) = delete;
  Program& operator=(const Program&) = delete;

  const Function& fn(const std::string& name) const {
    auto it = functions.find(name);
    if (it == functions.end()) throw UnknownFunctionError("unknown function '" + name + "'");
    return it->second;
  }

  const Function& entry_fn() const { return fn(entry); }

  bool has_function(const std::string& name) const { return functions.count(name) != 0; }
};

inline std::string path_to_string(const StmtPath& p) {
  std::string out;
  for (size_t i = 0; i < p.size(); ++i) {
    if (i) out.push_back('.');
    out += std::to_string(p[i]);
  }
  return out;
}

inline StmtPath path_from_string(const std::string& s) {
  StmtPath out;
  if (s.empty()) throw ConfigError("empty statement path");
  size_t i = 0;
  while (i < s.size()) {
    size_t j = s.find('.', i);
    if (j == std::string::npos) j = s.size();
    if (j == i) throw ConfigError("bad statement path: " + s);
    int v = 0;
    for (size_t k = i; k < j; ++k) {
      char c = s[k];
      if (c < '0' || c > '9') throw ConfigError("bad statement path: " + s);
      v = v * 10 + (c - '0');
    }
    out.push_back(v);
    i = j + 1;
  }
  return out;
}

// Depth-first statement walk with paths. fn(stmt, path) is invoked for every
// statement in source order.
template <typename F>
void walk_statements(const StmtList& list, StmtPath& path, F&& fn) {
  for (size_t i = 0; i < list.size(); ++i) {
    const Stmt& s = *list[i];
    path.push_back(static_cast<int>(i));
    fn(s, const_cast<const StmtPath&>(path));
    if (s.kind == StmtKind::If || s.kind == StmtKind::While) {
      path.push_back(0);
      walk_statements(s.body, path, fn);
      path.pop_back();
      if (!s.else_body.empty()) {
        path.push_back(1);
        walk_statements(s.else_body, path, fn);
        path.pop_back();
      }
    }
    path.pop_back();
  }
}

template <typename F>
void walk_statements(const Function& fn, F&& f) {
  StmtPath path;
  walk_statements(fn.body, path, f);
}

template <typename F>
void walk_expr(const Expr& e, F&& fn) {
  fn(e);
  if (e.a) walk_expr(*e.a, fn);
  if (e.b) walk_expr(*e.b, fn);
  for (const auto& x : e.args) walk_expr(*x, fn);
}

template <typename F>
void walk_stmt_exprs(const Stmt& s, F&& fn) {
  if (s.lvalue) walk_expr(*s.lvalue, fn);
  if (s.expr) walk_expr(*s.expr, fn);
}

namespace detail {

inline void check_record_cycles(const std::map<std::string, RecordDecl>& records) {
  // 0 = unvisited, 1 = on stack, 2 = done
  std::map<std::string, int> state;
  struct Walker {
    const std::map<std::string, RecordDecl>& records;
    std::map<std::string, int>& state;
    void visit(const RecordDecl& r) {
      state[r.name] = 1;
      for (const FieldDecl& f : r.fields) {
        if (f.type.kind != TypeKind::Record) continue;
        int& st = state[f.type.rec->name];
        if (st == 1)
          throw ResolveError("recursive record type '" + f.type.rec->name + "'");
        if (st == 0) visit(*f.type.rec);
      }
      state[r.name] = 2;
    }
  };
  Walker w{records, state};
  for (const auto& [name, rec] : records)
    if (state[name] == 0) w.visit(rec);
}

}  // namespace detail

// Merge parsed modules into a checked Program. files[i] corresponds to
// modules[i].
inline Program assemble(std::vector<SourceFile> files, std::vector<RawModule> modules,
                        std::string entry) {
  Program p;
  p.files = std::move(files);
  p.entry = std::move(entry);
  p.file_items.resize(modules.size());

  // 1. Merge declarations, preserving per-file order.
  for (size_t fi = 0; fi < modules.size(); ++fi) {
    RawModule& m = modules[fi];
    for (RecordDecl& r : m.records) {
      if (p.records.count(r.name)) throw ResolveError("duplicate record '" + r.name + "'");
      p.record_order.push_back(r.name);
      p.file_items[fi].emplace_back(true, r.name);
      p.records.emplace(r.name, std::move(r));
    }
    for (Function& f : m.functions) {
      if (p.functions.count(f.name)) throw ResolveError("duplicate function '" + f.name + "'");
      if (builtin_by_name(f.name) != Builtin::None)
        throw ResolveError("'" + f.name + "' is a builtin and cannot be redefined");
      if (p.records.count(f.name))
        throw ResolveError("'" + f.name + "' is declared as both record and function");
      p.function_order.push_back(f.name);
      p.file_items[fi].emplace_back(false, f.name);
      p.functions.emplace(f.name, std::move(f));
    }
  }
  for (const auto& [name, rec] : p.records)
    if (p.functions.count(name))
      throw ResolveError("'" + name + "' is declared as both record and function");

  // 2. Resolve record field types and function signatures up front so that
  //    call expressions can be checked in any order.
  {
    Checker sig(p.records, p.functions, "<signatures>");
    for (auto& [name, rec] : p.records)
      for (FieldDecl& f : rec.fields) f.type = sig.resolve_type(f.type_text, f.loc);
    detail::check_record_cycles(p.records);
    for (auto& [name, fn] : p.functions) {
      for (Param& par : fn.params) par.type = sig.resolve_type(par.type_text, par.loc);
      fn.return_type = fn.return_type_text.empty()
                           ? Type::void_()
                           : sig.resolve_type(fn.return_type_text, fn.loc);
    }
  }

  // 3. Entry contract: present, exactly one parameter of type bytes.
  {
    auto it = p.functions.find(p.entry);
    if (it == p.functions.end())
      throw ResolveError("entry function '" + p.entry + "' is not defined");
    const Function& e = it->second;
    if (e.params.size() != 1 || !e.params[0].type.is(TypeKind::Bytes))
      throw ResolveError("entry function '" + p.entry +
                         "' must take exactly one parameter of type bytes");
  }

  // 4. Check bodies, then build CFGs (declaration order).
  for (const std::string& name : p.function_order) {
    Function& fn = p.functions.at(name);
    std::string where = fn.loc.file >= 0 && static_cast<size_t>(fn.loc.file) < p.files.size()
                            ? p.files[static_cast<size_t>(fn.loc.file)].path
                            : name;
    Checker chk(p.records, p.functions, where);
    chk.check_function(fn);
    fn.cfg = std::make_shared<const Cfg>(CfgBuilder::build(fn));
  }

  // 5. Call sites, canary sites, call graph.
  std::map<std::string, std::set<std::string>> callers_tmp;
  for (const std::string& name : p.function_order) {
    const Function& fn = p.functions.at(name);
    auto& callees = p.callee_names[name];
    walk_statements(fn, [&](const Stmt& s, const StmtPath& path) {
      if (s.kind == StmtKind::Canary)
        p.canary_sites.push_back(CanarySite{name, path, &s});
      walk_stmt_exprs(s, [&](const Expr& e) {
        if (e.kind != ExprKind::Call || e.builtin != Builtin::None) return;
        p.call_sites.push_back(CallSite{name, e.name, path, e.loc});
        if (std::find(callees.begin(), callees.end(), e.name) == callees.end())
          callees.push_back(e.name);
        callers_tmp[e.name].insert(name);
      });
    });
  }
  for (const std::string& name : p.function_order) {
    auto it = callers_tmp.find(name);
    auto& v = p.caller_names[name];
    if (it != callers_tmp.end()) v.assign(it->second.begin(), it->second.end());
  }
  return p;
}

// Parse + assemble in one go.
inline Program parse_program(std::vector<SourceFile> files, std::string entry = "main") {
  std::vector<RawModule> modules;
  modules.reserve(files.size());
  for (size_t i = 0; i < files.size(); ++i)
    modules.push_back(Parser(files[i].path, files[i].text, static_cast<int>(i)).parse_module());
  return assemble(std::move(files), std::move(modules), std::move(entry));
}

inline Program parse_program(const std::string& path, const std::string& text,
                             std::string entry = "main") {
  std::vector<SourceFile> files{{path, text}};
  return parse_program(std::move(files), std::move(entry));
}

// Parse an expression snippet (predicate or canary condition source).
inline ExprPtr parse_condition(const std::string& text) {
  return Parser("<condition>", text, -1).parse_expression_only();
}

}  // namespace waypoint::minilang
