#pragma once

// Per-function control-flow graph. Blocks are numbered in construction order
// (entry first, then the bodies of each construct in source order), which
// makes numbering deterministic for identical sources. canary/guard
// statements are ordinary block members: they may terminate the run at
// runtime but never split a block, so instrumenting a program preserves
// block ids and coverage keys.
//
// The exit block is the final fall-through block of the body; return blocks
// get a synthetic edge to it, because control continues in the caller. Halt
// blocks get no outgoing edge — execution ends there — so reachability over
// edges never flows through a halting branch. A function whose every path
// halts has `returns == false` and a placeholder exit.

#include <cstdint>
#include <string>
#include <vector>

#include "waypoint/minilang/ast.hpp"
#include "waypoint/util.hpp"

namespace waypoint::minilang {

enum class EdgeLabel { True, False, Fallthrough };

struct CfgEdge {
  int src, dst;
  EdgeLabel label;
};

struct CfgBlock {
  int id;
  std::vector<const Stmt*> stmts;
};

struct Cfg {
  std::string function;
  std::vector<CfgBlock> blocks;
  std::vector<CfgEdge> edges;
  int entry = 0;
  int exit = 0;
  bool returns = true;  // false when every path ends in halt
  std::vector<std::vector<int>> succ;      // by block id
  std::vector<std::vector<int>> pred;      // by block id
  std::vector<uint64_t> block_keys;        // stable coverage keys

  int block_count() const { return static_cast<int>(blocks.size()); }
};

class CfgBuilder {
 public:
  // Stamps stmt.block on every statement of fn and returns the graph.
  static Cfg build(Function& fn) {
    CfgBuilder b;
    int entry = b.new_block();
    int end = b.walk(fn.body, entry);
    b.cfg_.entry = entry;
    if (end != -1)
      b.cfg_.exit = end;
    else if (!b.pending_return_.empty())
      b.cfg_.exit = b.pending_return_.back();
    else
      b.cfg_.exit = b.pending_halt_.back();  // placeholder; returns == false
    for (int src : b.pending_return_)
      if (src != b.cfg_.exit) b.edge(src, b.cfg_.exit, EdgeLabel::Fallthrough);
    // A fall-through end can be an unreachable join (both arms of the last
    // if terminated), so "can this function return" needs reachability.
    b.cfg_.returns = !b.pending_return_.empty() || (end != -1 && b.reaches(entry, end));
    b.cfg_.function = fn.name;
    b.finish();
    return std::move(b.cfg_);
  }

 private:
  int new_block() {
    int id = static_cast<int>(cfg_.blocks.size());
    cfg_.blocks.push_back(CfgBlock{id, {}});
    return id;
  }

  void edge(int src, int dst, EdgeLabel label) { cfg_.edges.push_back({src, dst, label}); }

  bool reaches(int from, int to) const {
    std::vector<char> seen(cfg_.blocks.size(), 0);
    std::vector<int> work{from};
    seen[static_cast<size_t>(from)] = 1;
    while (!work.empty()) {
      int b = work.back();
      work.pop_back();
      if (b == to) return true;
      for (const CfgEdge& e : cfg_.edges)
        if (e.src == b && !seen[static_cast<size_t>(e.dst)]) {
          seen[static_cast<size_t>(e.dst)] = 1;
          work.push_back(e.dst);
        }
    }
    return false;
  }

  void append(Stmt& s, int block) {
    s.block = block;
    cfg_.blocks[static_cast<size_t>(block)].stmts.push_back(&s);
  }

  // Walks a statement list starting in block cur; returns the open block at
  // the end of the list, or -1 if the list ended with a terminator. The
  // checker rejects unreachable statements, so cur is never -1 mid-list.
  int walk(StmtList& list, int cur) {
    for (auto& sp : list) {
      Stmt& s = *sp;
      switch (s.kind) {
        case StmtKind::Let:
        case StmtKind::Assign:
        case StmtKind::ExprStmt:
        case StmtKind::Canary:
        case StmtKind::Guard:
          append(s, cur);
          break;
        case StmtKind::Return:
          append(s, cur);
          pending_return_.push_back(cur);
          cur = -1;
          break;
        case StmtKind::Halt:
          // Halt ends the whole run, so its block gets no outgoing edge.
          append(s, cur);
          pending_halt_.push_back(cur);
          cur = -1;
          break;
        case StmtKind::If: {
          append(s, cur);  // the condition is evaluated in this block
          int then_entry = new_block();
          edge(cur, then_entry, EdgeLabel::True);
          int then_end = walk(s.body, then_entry);
          int else_end = -1;
          bool has_else = !s.else_body.empty();
          int else_entry = -1;
          if (has_else) {
            else_entry = new_block();
            edge(cur, else_entry, EdgeLabel::False);
            else_end = walk(s.else_body, else_entry);
          }
          int join = new_block();
          if (then_end != -1) edge(then_end, join, EdgeLabel::Fallthrough);
          if (has_else) {
            if (else_end != -1) edge(else_end, join, EdgeLabel::Fallthrough);
          } else {
            edge(cur, join, EdgeLabel::False);
          }
          cur = join;
          break;
        }
        case StmtKind::While: {
          int header;
          if (cfg_.blocks[static_cast<size_t>(cur)].stmts.empty()) {
            header = cur;  // reuse an empty block as the loop header
          } else {
            header = new_block();
            edge(cur, header, EdgeLabel::Fallthrough);
          }
          append(s, header);
          int body_entry = new_block();
          edge(header, body_entry, EdgeLabel::True);
          int body_end = walk(s.body, body_entry);
          if (body_end != -1) edge(body_end, header, EdgeLabel::Fallthrough);
          int after = new_block();
          edge(header, after, EdgeLabel::False);
          cur = after;
          break;
        }
      }
    }
    return cur;
  }

  void finish() {
    size_t n = cfg_.blocks.size();
    cfg_.succ.assign(n, {});
    cfg_.pred.assign(n, {});
    for (const CfgEdge& e : cfg_.edges) {
      cfg_.succ[static_cast<size_t>(e.src)].push_back(e.dst);
      cfg_.pred[static_cast<size_t>(e.dst)].push_back(e.src);
    }
    cfg_.block_keys.resize(n);
    uint64_t fh = fnv1a64(cfg_.function);
    for (size_t i = 0; i < n; ++i)
      cfg_.block_keys[i] = splitmix64(fh ^ (static_cast<uint64_t>(i) * 0x9e3779b97f4a7c15ull));
  }

  Cfg cfg_;
  std::vector<int> pending_return_;
  std::vector<int> pending_halt_;
};

}  // namespace waypoint::minilang
