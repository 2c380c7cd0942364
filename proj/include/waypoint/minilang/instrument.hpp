#pragma once

// Guard splicing. Instrumentation clones the program AST, inserts one guard
// statement per predicate at its anchor point, prints the result and
// re-parses it. The re-parse runs the full checker, so an ill-formed or
// ill-typed condition surfaces as SyntaxError/TypeError here. Because guards
// are straight-line statements, the instrumented program has the same basic
// block structure (and block ids) as the original.

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "waypoint/minilang/predicate.hpp"
#include "waypoint/minilang/printer.hpp"

namespace waypoint::minilang {

namespace detail {

inline bool valid_guard_id(const std::string& id) {
  if (id.empty()) return false;
  for (char c : id) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
              (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    if (!ok) return false;
  }
  return true;
}

inline Function clone_function(const Function& f) {
  Function g;
  g.name = f.name;
  g.params = f.params;
  g.return_type = f.return_type;
  g.return_type_text = f.return_type_text;
  g.loc = f.loc;
  g.end_line = f.end_line;
  g.body.reserve(f.body.size());
  for (const auto& s : f.body) g.body.push_back(s->clone());
  return g;
}

}  // namespace detail

inline Program instrument(const Program& p, const PredicateSet& preds) {
  // Validate ids: printable, unique, and not colliding with existing guards.
  std::vector<std::string> seen;
  for (const auto& [name, fn] : p.functions)
    walk_statements(fn, [&](const Stmt& s, const StmtPath&) {
      if (s.kind == StmtKind::Guard) seen.push_back(s.name);
    });
  for (const Predicate& pred : preds) {
    if (!detail::valid_guard_id(pred.id))
      throw InvalidArgumentError("invalid guard id '" + pred.id +
                                 "' (use letters, digits, '_', '-', '.')");
    if (std::find(seen.begin(), seen.end(), pred.id) != seen.end())
      throw InvalidArgumentError("duplicate guard id '" + pred.id + "'");
    seen.push_back(pred.id);
  }

  // Clone per-file declarations in their recorded order. The name map is
  // built in a second pass, after the vectors stop growing.
  std::vector<RawModule> modules(p.files.size());
  for (size_t fi = 0; fi < p.files.size(); ++fi) {
    for (const auto& [is_record, name] : p.file_items[fi]) {
      if (is_record)
        modules[fi].records.push_back(p.records.at(name));
      else
        modules[fi].functions.push_back(detail::clone_function(p.functions.at(name)));
    }
  }
  std::map<std::string, Function*> fn_by_name;
  for (RawModule& m : modules)
    for (Function& f : m.functions) fn_by_name[f.name] = &f;

  // Resolve every anchor against the clone, then apply insertions per list
  // from the back so earlier indices stay valid. Within one insertion slot
  // the given predicate order is preserved.
  struct Insertion {
    size_t index;
    size_t order;
    StmtPtr guard;
  };
  std::map<StmtList*, std::vector<Insertion>> pending;
  size_t order = 0;
  for (const Predicate& pred : preds) {
    auto it = fn_by_name.find(pred.location.function);
    if (it == fn_by_name.end())
      throw AnchorError("anchor names unknown function '" + pred.location.function + "'");
    ResolvedPoint rp = detail::resolve_path(*it->second, pred.location.path,
                                            "anchor " + pred.location.to_string());
    if (rp.stmt->synthetic)
      throw AnchorError("anchor " + pred.location.to_string() +
                        " resolves to an instrumented guard");
    auto guard = std::make_unique<Stmt>();
    guard->kind = StmtKind::Guard;
    guard->loc = rp.stmt->loc;
    guard->name = pred.id;
    guard->expr = parse_condition(pred.condition);
    guard->synthetic = true;
    size_t at = rp.index + (pred.location.position == Position::After ? 1 : 0);
    pending[rp.list].push_back({at, order++, std::move(guard)});
  }
  for (auto& [list, ins] : pending) {
    std::sort(ins.begin(), ins.end(), [](const Insertion& a, const Insertion& b) {
      return a.index != b.index ? a.index > b.index : a.order > b.order;
    });
    for (Insertion& i : ins)
      list->insert(list->begin() + static_cast<long>(i.index), std::move(i.guard));
  }

  // Print and re-parse so the result is a fully checked program whose source
  // text matches its AST.
  std::vector<SourceFile> files;
  files.reserve(p.files.size());
  for (size_t fi = 0; fi < p.files.size(); ++fi) {
    std::string text;
    bool first = true;
    for (const RecordDecl& r : modules[fi].records) {
      if (!first) text += "\n";
      first = false;
      text += print_record(r);
    }
    for (const Function& f : modules[fi].functions) {
      if (!first) text += "\n";
      first = false;
      text += print_function(f);
    }
    files.push_back({p.files[fi].path, std::move(text)});
  }
  return parse_program(std::move(files), p.entry);
}

inline Program instrument(const Program& p, const Predicate& pred) {
  return instrument(p, PredicateSet{pred});
}

// Locates a canary by function name and printed condition text. Splicing
// guards shifts sibling statement indices, so a path recorded against the
// original program may not resolve in the instrumented one; this lookup is
// path-independent and works on both.
inline const CanarySite* find_canary(const Program& p, const std::string& function,
                                     const std::string& condition) {
  for (const CanarySite& site : p.canary_sites)
    if (site.function == function && expr_source(*site.stmt->expr) == condition)
      return &site;
  return nullptr;
}

}  // namespace waypoint::minilang
