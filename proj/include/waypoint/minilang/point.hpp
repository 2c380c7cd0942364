#pragma once

// Program points: a statement path inside a function plus a before/after
// position. Guards are spliced at points; refinement compares points by how
// shallow they sit relative to the entry function.

#include <limits>
#include <map>
#include <queue>
#include <string>

#include "waypoint/minilang/program.hpp"

namespace waypoint::minilang {

enum class Position { Before, After };

inline const char* position_name(Position p) {
  return p == Position::Before ? "before" : "after";
}

inline Position position_from_string(const std::string& s) {
  if (s == "before") return Position::Before;
  if (s == "after") return Position::After;
  throw ConfigError("invalid position '" + s + "' (expected before|after)");
}

struct ProgramPoint {
  std::string function;
  StmtPath path;
  Position position = Position::Before;

  bool operator==(const ProgramPoint& o) const {
    return function == o.function && path == o.path && position == o.position;
  }

  std::string to_string() const {
    return function + ":" + path_to_string(path) + ":" + position_name(position);
  }
};

// Where a point lands: the statement list containing the anchor statement and
// the anchor's index within it. Insertion goes at `index` (before) or
// `index + 1` (after).
struct ResolvedPoint {
  StmtList* list = nullptr;
  size_t index = 0;
  Stmt* stmt = nullptr;
};

namespace detail {

inline ResolvedPoint resolve_path(Function& fn, const StmtPath& path,
                                  const std::string& what) {
  if (path.empty() || path.size() % 2 == 0)
    throw AnchorError(what + ": statement path must alternate index and block selector");
  StmtList* list = &fn.body;
  for (size_t i = 0;; i += 2) {
    int idx = path[i];
    if (idx < 0 || static_cast<size_t>(idx) >= list->size())
      throw AnchorError(what + ": statement index " + std::to_string(idx) +
                        " out of range in " + fn.name);
    Stmt* s = (*list)[static_cast<size_t>(idx)].get();
    if (i + 1 >= path.size()) return {list, static_cast<size_t>(idx), s};
    int sel = path[i + 1];
    if (s->kind == StmtKind::If) {
      if (sel == 0) list = &s->body;
      else if (sel == 1) list = &s->else_body;
      else throw AnchorError(what + ": block selector must be 0 or 1 for if");
    } else if (s->kind == StmtKind::While) {
      if (sel != 0) throw AnchorError(what + ": block selector must be 0 for while");
      list = &s->body;
    } else {
      throw AnchorError(what + ": statement at " +
                        path_to_string(StmtPath(path.begin(), path.begin() + i + 1)) +
                        " has no nested blocks");
    }
  }
}

}  // namespace detail

inline ResolvedPoint resolve_point(Program& p, const ProgramPoint& pt) {
  auto it = p.functions.find(pt.function);
  if (it == p.functions.end())
    throw AnchorError("anchor names unknown function '" + pt.function + "'");
  return detail::resolve_path(it->second, pt.path, "anchor " + pt.to_string());
}

// Call-graph depth from the entry function (entry = 0). Functions not
// reachable from entry get max depth so every real point is shallower.
inline std::map<std::string, int> call_depths(const Program& p) {
  std::map<std::string, int> depth;
  std::queue<std::string> q;
  depth[p.entry] = 0;
  q.push(p.entry);
  while (!q.empty()) {
    std::string cur = q.front();
    q.pop();
    int d = depth[cur];
    auto it = p.callee_names.find(cur);
    if (it == p.callee_names.end()) continue;
    for (const std::string& callee : it->second) {
      if (depth.count(callee)) continue;
      depth[callee] = d + 1;
      q.push(callee);
    }
  }
  return depth;
}

inline int call_depth(const std::map<std::string, int>& depths, const std::string& fn) {
  auto it = depths.find(fn);
  return it == depths.end() ? std::numeric_limits<int>::max() : it->second;
}

// Strict "closer to the entry point" order used by refinement. A point is
// shallower when its function sits at a smaller call depth, or — within the
// same function — when its path sorts lexicographically earlier, with
// `before` beating `after` at the same statement. Points in different
// functions at equal depth are not comparable.
inline bool is_shallower(const std::map<std::string, int>& depths,
                         const ProgramPoint& a, const ProgramPoint& b) {
  int da = call_depth(depths, a.function);
  int db = call_depth(depths, b.function);
  if (da != db) return da < db;
  if (a.function != b.function) return false;
  if (a.path != b.path) return a.path < b.path;
  return a.position == Position::Before && b.position == Position::After;
}

}  // namespace waypoint::minilang
