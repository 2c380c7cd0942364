#pragma once

// Static block-to-target distances for directed scheduling. Hops are counted
// over intraprocedural CFG edges plus interprocedural call edges (call block
// to callee entry, callee exit back to the call block for functions that can
// return). Multiple targets combine by summed reciprocals, so a block's
// distance is dominated by — and never exceeds — its nearest target.

#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "waypoint/minilang/point.hpp"
#include "waypoint/minilang/program.hpp"

namespace waypoint::fuzzer {

namespace ml = waypoint::minilang;

using BlockRef = std::pair<std::string, int>;

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

inline std::map<BlockRef, double> block_distance(const ml::Program& p,
                                                 const std::set<BlockRef>& targets) {
  // Build the hop graph once, in reverse (edges point predecessor-ward).
  std::map<BlockRef, std::vector<BlockRef>> rev;
  std::vector<BlockRef> nodes;
  for (const std::string& name : p.function_order) {
    const ml::Function& fn = p.fn(name);
    for (int b = 0; b < static_cast<int>(fn.cfg->blocks.size()); ++b)
      nodes.push_back({name, b});
    for (const ml::CfgEdge& e : fn.cfg->edges) rev[{name, e.dst}].push_back({name, e.src});
  }
  for (const ml::CallSite& cs : p.call_sites) {
    ml::ResolvedPoint rp =
        ml::resolve_point(const_cast<ml::Program&>(p),
                          ml::ProgramPoint{cs.caller, cs.path, ml::Position::Before});
    BlockRef call{cs.caller, rp.stmt->block};
    const ml::Function& callee = p.fn(cs.callee);
    rev[{cs.callee, callee.cfg->entry}].push_back(call);
    if (callee.cfg->returns) rev[call].push_back({cs.callee, callee.cfg->exit});
  }

  std::map<BlockRef, double> out;
  for (const BlockRef& n : nodes) out[n] = kUnreachable;
  for (const BlockRef& t : targets) {
    // BFS from the target over reversed edges gives per-target hop counts.
    std::map<BlockRef, int> hops{{t, 0}};
    std::vector<BlockRef> frontier{t};
    while (!frontier.empty()) {
      std::vector<BlockRef> next;
      for (const BlockRef& n : frontier) {
        auto it = rev.find(n);
        if (it == rev.end()) continue;
        for (const BlockRef& m : it->second)
          if (hops.emplace(m, hops[n] + 1).second) next.push_back(m);
      }
      frontier = std::move(next);
    }
    for (const auto& [n, h] : hops) {
      double& d = out[n];
      if (h == 0) {
        d = 0.0;
      } else if (d != 0.0) {
        double inv = (d == kUnreachable) ? 0.0 : 1.0 / d;
        d = 1.0 / (inv + 1.0 / h);
      }
    }
  }
  return out;
}

// The same distances keyed by runtime coverage block keys, for cheap lookup
// against RunResult::block_keys.
inline std::map<uint64_t, double> distance_by_key(const ml::Program& p,
                                                  const std::map<BlockRef, double>& dist) {
  std::map<uint64_t, double> out;
  for (const auto& [ref, d] : dist) {
    const ml::Cfg& cfg = *p.fn(ref.first).cfg;
    out[cfg.block_keys[static_cast<size_t>(ref.second)]] = d;
  }
  return out;
}

// A run's distance: mean block distance over the executed blocks that can
// reach a target at all; unreachable-only runs have no distance.
inline std::optional<double> run_distance(const std::vector<uint64_t>& block_keys,
                                          const std::map<uint64_t, double>& key_dist) {
  double sum = 0;
  int n = 0;
  for (uint64_t k : block_keys) {
    auto it = key_dist.find(k);
    if (it != key_dist.end() && it->second != kUnreachable) {
      sum += it->second;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

}  // namespace waypoint::fuzzer
