#pragma once

// Reachability pruning ahead of validation. Builds an interprocedural block
// graph (intra-CFG edges, call-block -> callee-entry edges, callee-exit ->
// call-block return edges) and keeps the blocks that lie on some
// entry -> canary path or some entry -> predicate-point path. Functions with
// no kept block are skipped during symbolic execution and summarized by
// havocking their return value; that over-approximation can only add
// counterexamples, never hide one, and spurious ones are filtered by replay.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "waypoint/minilang/point.hpp"
#include "waypoint/minilang/program.hpp"

namespace waypoint::symcheck {

namespace ml = waypoint::minilang;

struct PruneSet {
  std::set<std::pair<std::string, int>> kept_blocks;
  std::set<std::string> skipped_functions;

  bool keeps(const std::string& fn, int block) const {
    return kept_blocks.count({fn, block}) != 0;
  }
};

namespace detail {

inline bool type_contains_bytes(const ml::Type& t) {
  if (t.kind == ml::TypeKind::Bytes) return true;
  if (t.kind == ml::TypeKind::Record && t.rec)
    for (const ml::FieldDecl& f : t.rec->fields)
      if (type_contains_bytes(f.type)) return true;
  return false;
}

struct BlockGraph {
  using Node = std::pair<std::string, int>;
  std::map<Node, std::vector<Node>> succ, pred;
  std::set<Node> nodes;

  void edge(const Node& a, const Node& b) {
    succ[a].push_back(b);
    pred[b].push_back(a);
    nodes.insert(a);
    nodes.insert(b);
  }

  explicit BlockGraph(const ml::Program& p) {
    for (const std::string& name : p.function_order) {
      const ml::Function& fn = p.functions.at(name);
      for (int b = 0; b < static_cast<int>(fn.cfg->blocks.size()); ++b)
        nodes.insert({name, b});
      for (const auto& e : fn.cfg->edges) edge({name, e.src}, {name, e.dst});
    }
    for (const ml::CallSite& cs : p.call_sites) {
      const ml::Function& caller = p.functions.at(cs.caller);
      const ml::Function& callee = p.functions.at(cs.callee);
      ml::Function& caller_mut = const_cast<ml::Function&>(caller);
      const ml::Stmt* s = ml::detail::resolve_path(caller_mut, cs.path, cs.caller).stmt;
      edge({cs.caller, s->block}, {cs.callee, callee.cfg->entry});
      if (callee.cfg->returns) edge({cs.callee, callee.cfg->exit}, {cs.caller, s->block});
    }
  }

  std::set<Node> reach(const Node& from, const std::map<Node, std::vector<Node>>& adj) const {
    std::set<Node> seen{from};
    std::vector<Node> work{from};
    while (!work.empty()) {
      Node n = work.back();
      work.pop_back();
      auto it = adj.find(n);
      if (it == adj.end()) continue;
      for (const Node& m : it->second)
        if (seen.insert(m).second) work.push_back(m);
    }
    return seen;
  }
};

}  // namespace detail

inline PruneSet prune(const ml::Program& p, const ml::ProgramPoint& predicate_point,
                      const ml::ProgramPoint& canary_point) {
  auto& mp = const_cast<ml::Program&>(p);  // resolution only reads
  const ml::Stmt* pred_stmt = ml::resolve_point(mp, predicate_point).stmt;
  const ml::Stmt* canary_stmt = ml::resolve_point(mp, canary_point).stmt;

  detail::BlockGraph g(p);
  using Node = detail::BlockGraph::Node;
  Node entry{p.entry, p.entry_fn().cfg->entry};
  Node pred_node{predicate_point.function, pred_stmt->block};
  Node canary_node{canary_point.function, canary_stmt->block};

  std::set<Node> reachable = g.reach(entry, g.succ);
  if (!reachable.count(canary_node))
    throw UnreachableCanaryError("canary at " + canary_point.to_string() +
                                 " is unreachable from entry '" + p.entry + "'");

  std::set<Node> to_canary = g.reach(canary_node, g.pred);
  std::set<Node> to_pred = g.reach(pred_node, g.pred);

  PruneSet out;
  for (const Node& n : reachable)
    if (to_canary.count(n) || to_pred.count(n)) out.kept_blocks.insert(n);

  for (const std::string& name : p.function_order) {
    if (name == p.entry) continue;
    const ml::Function& fn = p.functions.at(name);
    if (detail::type_contains_bytes(fn.return_type)) continue;  // never skipped
    bool any_kept = false;
    for (int b = 0; b < static_cast<int>(fn.cfg->blocks.size()) && !any_kept; ++b)
      any_kept = out.keeps(name, b);
    if (!any_kept) out.skipped_functions.insert(name);
  }
  return out;
}

}  // namespace waypoint::symcheck
