#pragma once

// Constraint solver for path conditions: per-byte domain narrowing followed
// by backtracking enumeration. Byte variables range over 0..255 and are
// enumerated exhaustively, fresh booleans over both values; fresh integers
// (havoc symbols) are only sampled from constants harvested out of the
// constraints, so exhausting the search with fresh integers present yields
// Timeout, never an unsound Unsat.

#include <algorithm>
#include <bitset>
#include <vector>

#include "waypoint/symcheck/term.hpp"

namespace waypoint::symcheck {

enum class SolveStatus { Sat, Unsat, Timeout };

struct SolveResult {
  SolveStatus status = SolveStatus::Unsat;
  Model model;
  long nodes = 0;  // value assignments attempted
};

namespace detail {

struct SolverVar {
  enum class Kind { Byte, Bool, Int } kind;
  int id;
  std::vector<int64_t> values;  // candidate values in trial order
};

}  // namespace detail

inline SolveResult solve(const std::vector<TermPtr>& constraints, long budget = 2'000'000) {
  SolveResult res;

  // Gather variables and fold-check constant constraints.
  VarSet all;
  std::vector<const Term*> live;
  for (const TermPtr& c : constraints) {
    if (c->kind == TermKind::ConstBool) {
      if (c->cval == 0) return res;  // Unsat
      continue;
    }
    collect_vars(*c, all);
    live.push_back(c.get());
  }
  bool sampled_ints = !all.ints.empty();

  // Narrow per-byte domains using constraints that mention exactly one byte
  // variable and nothing else; those are decided exactly here.
  std::map<int, std::bitset<256>> dom;
  for (int v : all.bytes) dom[v].set();
  std::vector<const Term*> search;  // constraints left for the backtracker
  std::vector<VarSet> search_vars;
  for (const Term* c : live) {
    VarSet vs;
    collect_vars(*c, vs);
    if (vs.single_byte_only()) {
      int v = *vs.bytes.begin();
      Model m;
      std::bitset<256>& d = dom[v];
      for (int x = 0; x < 256; ++x) {
        if (!d.test(static_cast<size_t>(x))) continue;
        m.bytes[v] = x;
        auto r = eval_term(*c, m);
        if (!r || *r == 0) d.reset(static_cast<size_t>(x));
      }
      if (d.none()) return res;  // Unsat
    } else {
      search.push_back(c);
      search_vars.push_back(std::move(vs));
    }
  }

  // Variable order: bytes (smallest domain first), then fresh booleans, then
  // sampled fresh integers.
  std::vector<detail::SolverVar> vars;
  {
    std::vector<int> byte_ids(all.bytes.begin(), all.bytes.end());
    std::stable_sort(byte_ids.begin(), byte_ids.end(),
                     [&](int a, int b) { return dom[a].count() < dom[b].count(); });
    for (int id : byte_ids) {
      detail::SolverVar v{detail::SolverVar::Kind::Byte, id, {}};
      for (int x = 0; x < 256; ++x)
        if (dom[id].test(static_cast<size_t>(x))) v.values.push_back(x);
      vars.push_back(std::move(v));
    }
    for (int id : all.bools)
      vars.push_back({detail::SolverVar::Kind::Bool, id, {0, 1}});
    if (sampled_ints) {
      std::set<int64_t> cands{-1, 0, 1, 2, 255, 256};
      for (const Term* c : search) collect_int_constants(*c, cands);
      for (int64_t c : std::set<int64_t>(cands)) {
        if (c > INT64_MIN) cands.insert(c - 1);
        if (c < INT64_MAX) cands.insert(c + 1);
      }
      std::vector<int64_t> values(cands.begin(), cands.end());
      for (int id : all.ints) vars.push_back({detail::SolverVar::Kind::Int, id, values});
    }
  }

  // A constraint is checked as soon as its last variable gets a value.
  std::map<int, size_t> order_byte, order_bool, order_int;
  for (size_t i = 0; i < vars.size(); ++i) {
    auto& m = vars[i].kind == detail::SolverVar::Kind::Byte   ? order_byte
              : vars[i].kind == detail::SolverVar::Kind::Bool ? order_bool
                                                              : order_int;
    m[vars[i].id] = i;
  }
  std::vector<std::vector<const Term*>> check_at(vars.size() + 1);
  for (size_t ci = 0; ci < search.size(); ++ci) {
    size_t last = 0;
    const VarSet& vs = search_vars[ci];
    for (int v : vs.bytes) last = std::max(last, order_byte.at(v) + 1);
    for (int v : vs.bools) last = std::max(last, order_bool.at(v) + 1);
    for (int v : vs.ints) last = std::max(last, order_int.at(v) + 1);
    check_at[last].push_back(search[ci]);
  }
  // A variable-free constraint that did not fold is a division or modulo by a
  // constant zero somewhere; no model satisfies it.
  if (!check_at[0].empty()) return res;

  Model m;
  long nodes = 0;
  bool timeout = false;

  // Depth-first enumeration.
  std::vector<size_t> choice(vars.size(), 0);
  size_t depth = 0;
  auto assign = [&](size_t d, int64_t v) {
    const detail::SolverVar& sv = vars[d];
    switch (sv.kind) {
      case detail::SolverVar::Kind::Byte: m.bytes[sv.id] = static_cast<int>(v); break;
      case detail::SolverVar::Kind::Bool: m.bools[sv.id] = v != 0; break;
      case detail::SolverVar::Kind::Int: m.ints[sv.id] = v; break;
    }
  };
  auto consistent_at = [&](size_t d) {
    for (const Term* c : check_at[d]) {
      auto r = eval_term(*c, m);
      if (!r || *r == 0) return false;
    }
    return true;
  };

  while (true) {
    if (depth == vars.size()) {
      res.status = SolveStatus::Sat;
      break;
    }
    if (choice[depth] >= vars[depth].values.size()) {
      if (depth == 0) break;  // exhausted
      choice[depth] = 0;
      --depth;
      ++choice[depth];
      continue;
    }
    if (++nodes > budget) {
      timeout = true;
      break;
    }
    assign(depth, vars[depth].values[choice[depth]]);
    if (consistent_at(depth + 1)) {
      ++depth;
    } else {
      ++choice[depth];
    }
  }
  res.nodes = nodes;

  if (res.status == SolveStatus::Sat) {
    res.model = m;
    // Byte variables whose constraints were all single-variable never reached
    // the search; pin them to their smallest remaining domain value.
    for (int v : all.bytes)
      if (!res.model.bytes.count(v))
        for (int x = 0; x < 256; ++x)
          if (dom[v].test(static_cast<size_t>(x))) {
            res.model.bytes[v] = x;
            break;
          }
    return res;
  }
  if (timeout || sampled_ints) {
    res.status = SolveStatus::Timeout;
    return res;
  }
  res.status = SolveStatus::Unsat;
  return res;
}

}  // namespace waypoint::symcheck
