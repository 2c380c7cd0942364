#pragma once

// Semantic validation of a predicate against a canary: bounded symbolic
// execution over every concrete input length 0..max_len searches for a path
// on which the predicate's condition is false (or faults) at its location and
// the canary still fires afterwards. A satisfying assignment is replayed
// concretely before it is reported; validation run with pruning retries
// without it when a havoc summary produced a spurious counterexample.
//
// Verdicts: Counterexample (confirmed witness), Relaxation (exploration was
// exhaustive within bounds and found none), Unknown (some path family was
// truncated — loop unroll, path budget, solver budget... — so no claim).

#include <bitset>
#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "waypoint/minilang/instrument.hpp"
#include "waypoint/minilang/predicate.hpp"
#include "waypoint/minilang/printer.hpp"
#include "waypoint/runtime/interp.hpp"
#include "waypoint/symcheck/prune.hpp"
#include "waypoint/symcheck/solver.hpp"
#include "waypoint/util.hpp"

namespace waypoint::symcheck {

struct Limits {
  int max_len = 16;               // validate inputs of length 0..max_len
  long max_paths = 200000;        // terminal path events across all lengths
  int max_unroll = 8;             // loop iterations explored per header
  long solver_budget = 2'000'000; // solver node budget per counterexample
  int max_call_depth = 32;
  bool use_prune = true;
  uint64_t replay_step_budget = 1'000'000;
};

enum class VerdictKind { Relaxation, Counterexample, Unknown };

inline const char* verdict_kind_name(VerdictKind k) {
  switch (k) {
    case VerdictKind::Relaxation: return "relaxation";
    case VerdictKind::Counterexample: return "counterexample";
    case VerdictKind::Unknown: return "unknown";
  }
  return "?";
}

struct ValidationVerdict {
  VerdictKind kind = VerdictKind::Unknown;
  std::optional<std::vector<uint8_t>> witness;  // present iff Counterexample
  long explored_paths = 0;
  std::string reason;  // set for Unknown
  bool pruned = false;
  long wall_ms = 0;
};

struct CanaryRef {
  std::string function;
  ml::StmtPath path;
};

namespace detail {

class Validator {
 public:
  Validator(const ml::Program& original, const ml::Predicate& pred, const CanaryRef& canary,
            const Limits& lim)
      : pred_(pred), lim_(lim), inst_(ml::instrument(original, pred)) {
    // The canary must exist in the original program; relocate it in the
    // instrumented one by its printed condition (splicing shifts paths).
    auto& orig_mut = const_cast<ml::Program&>(original);
    const ml::Stmt* c =
        ml::resolve_point(orig_mut, {canary.function, canary.path, ml::Position::Before}).stmt;
    if (c->kind != ml::StmtKind::Canary)
      throw InvalidArgumentError("target point " + canary.function + ":" +
                                 ml::path_to_string(canary.path) + " is not a canary");
    const ml::CanarySite* site =
        ml::find_canary(inst_, canary.function, ml::expr_source(*c->expr));
    if (!site) throw InternalError("canary lost during instrumentation");
    target_canary_ = site->stmt;

    ml::ProgramPoint guard_pt = locate_guard();
    prune_ = prune(inst_, guard_pt, {site->function, site->path, ml::Position::Before});
  }

  ValidationVerdict run() {
    ValidationVerdict v;
    v.pruned = lim_.use_prune;
    try {
      for (int len = 0; len <= lim_.max_len && !stop_; ++len) {
        cur_len_ = len;
        SymState root;
        const ml::Function& entry = inst_.entry_fn();
        SymFrame fr;
        fr.fn = &entry;
        fr.slots.resize(static_cast<size_t>(entry.slot_count));
        SymValue input;
        input.k = SymValue::K::Bytes;
        input.bv = SymBytes{t_int(0), t_int(len), nullptr};
        fr.slots[static_cast<size_t>(entry.params[0].slot)] = std::move(input);
        root.frames.push_back(std::move(fr));
        for (ExecRes& r : exec_list(std::move(root), entry.body, 0)) {
          (void)r;
          record_path();  // program completed (fell through or returned)
        }
      }
    } catch (const FoundCe& ce) {
      v.kind = VerdictKind::Counterexample;
      v.witness = ce.witness;
      v.explored_paths = explored_paths_;
      return v;
    }
    v.explored_paths = explored_paths_;
    if (truncated_.empty()) {
      v.kind = VerdictKind::Relaxation;
    } else {
      v.kind = VerdictKind::Unknown;
      for (const std::string& r : truncated_) {
        if (!v.reason.empty()) v.reason += ", ";
        v.reason += r;
      }
    }
    return v;
  }

  struct SpuriousCe {};

 private:
  struct FoundCe {
    std::vector<uint8_t> witness;
  };

  struct SymBytes {
    TermPtr off, len;
    const std::vector<uint8_t>* lit = nullptr;  // null: the program input
  };

  struct SymValue {
    enum class K { None, Term, Bytes, Rec };
    K k = K::None;
    TermPtr t;
    SymBytes bv;
    std::vector<SymValue> rec;
  };

  struct SymFrame {
    const ml::Function* fn = nullptr;
    std::vector<SymValue> slots;
  };

  struct SymState {
    std::vector<TermPtr> pc;
    std::map<int, std::bitset<256>> dom;  // narrowed byte domains
    std::vector<SymFrame> frames;
    std::map<const ml::Stmt*, int> unroll;
    bool violated = false;
  };

  enum class Flow { Next, Returned };

  struct ExecRes {
    SymState st;
    Flow flow = Flow::Next;
    SymValue ret;
  };

  using EvalVec = std::vector<std::pair<SymState, SymValue>>;

  static SymValue sv_term(TermPtr t) {
    SymValue v;
    v.k = SymValue::K::Term;
    v.t = std::move(t);
    return v;
  }

  ml::ProgramPoint locate_guard() {
    for (const auto& [name, fn] : inst_.functions) {
      ml::ProgramPoint found;
      bool ok = false;
      ml::walk_statements(fn, [&](const ml::Stmt& s, const ml::StmtPath& path) {
        if (s.kind == ml::StmtKind::Guard && s.name == pred_.id) {
          found = {name, path, ml::Position::Before};
          ok = true;
        }
      });
      if (ok) return found;
    }
    throw InternalError("guard '" + pred_.id + "' missing after instrumentation");
  }

  void record_path() {
    if (++explored_paths_ > lim_.max_paths && !stop_) {
      truncated_.insert("path limit");
      stop_ = true;
    }
  }

  void truncate(const std::string& reason) {
    truncated_.insert(reason);
    record_path();
  }

  // --- constraints ----------------------------------------------------------

  // Appends a constraint; returns false when the state is provably dead.
  // Domain narrowing keeps the fork fan-out close to the set of genuinely
  // feasible branches, which is what keeps path counts bounded on inputs
  // whose positions depend on earlier bytes.
  bool add_constraint(SymState& st, const TermPtr& t) {
    if (t->kind == TermKind::ConstBool) return t->cval != 0;
    st.pc.push_back(t);
    return narrow_domains(*t, st.dom);
  }

  // Keeps the states where `ct` holds. Outside a guard condition the
  // violating side faults before reaching any canary and is dropped; inside
  // one it survives as a continuation with the predicate marked violated
  // (a faulted guard misses the canary-hitting state just like a false one).
  std::vector<SymState> require(SymState st, const TermPtr& ct) {
    if (in_guard_) {
      SymState f = st;
      if (add_constraint(f, t_not(ct))) {
        f.violated = true;
        guard_faults_.push_back(std::move(f));
      }
    }
    std::vector<SymState> out;
    if (add_constraint(st, ct)) {
      out.push_back(std::move(st));
    } else if (!in_guard_) {
      record_path();  // definite fault, fully resolved
    }
    return out;
  }

  std::vector<std::pair<SymState, bool>> fork_bool(SymState st, const TermPtr& t) {
    std::vector<std::pair<SymState, bool>> out;
    if (t->kind == TermKind::ConstBool) {
      out.emplace_back(std::move(st), t->cval != 0);
      return out;
    }
    SymState ts = st;
    if (add_constraint(ts, t)) out.emplace_back(std::move(ts), true);
    if (add_constraint(st, t_not(t))) out.emplace_back(std::move(st), false);
    return out;
  }

  // --- expression evaluation -------------------------------------------------

  TermPtr byte_term(const SymBytes& b, int64_t absolute) const {
    if (b.lit) return t_int((*b.lit)[static_cast<size_t>(absolute)]);
    return t_byte(static_cast<int>(absolute));
  }

  int64_t base_len(const SymBytes& b) const {
    return b.lit ? static_cast<int64_t>(b.lit->size()) : cur_len_;
  }

  SymValue havoc_value(const ml::Type& ty) {
    SymValue v;
    switch (ty.kind) {
      case ml::TypeKind::Int: return sv_term(t_fresh_int(fresh_++));
      case ml::TypeKind::Bool: return sv_term(t_fresh_bool(fresh_++));
      case ml::TypeKind::Record:
        v.k = SymValue::K::Rec;
        for (const ml::FieldDecl& f : ty.rec->fields) v.rec.push_back(havoc_value(f.type));
        return v;
      case ml::TypeKind::Void: return v;
      default: throw InternalError("cannot havoc a bytes-typed result");
    }
  }

  EvalVec eval(SymState st, const ml::Expr& e) {
    if (stop_) return {};
    EvalVec out;
    switch (e.kind) {
      case ml::ExprKind::IntLit: out.emplace_back(std::move(st), sv_term(t_int(e.int_val))); break;
      case ml::ExprKind::BoolLit:
        out.emplace_back(std::move(st), sv_term(t_bool(e.bool_val)));
        break;
      case ml::ExprKind::BytesLit: {
        SymValue v;
        v.k = SymValue::K::Bytes;
        v.bv = SymBytes{t_int(0), t_int(static_cast<int64_t>(e.bytes_val.size())), &e.bytes_val};
        out.emplace_back(std::move(st), std::move(v));
        break;
      }
      case ml::ExprKind::Var: {
        SymValue v = st.frames.back().slots[static_cast<size_t>(e.slot)];
        out.emplace_back(std::move(st), std::move(v));
        break;
      }
      case ml::ExprKind::Field:
        for (auto& [s1, va] : eval(std::move(st), *e.a)) {
          SymValue v = va.rec[static_cast<size_t>(e.field_index)];
          out.emplace_back(std::move(s1), std::move(v));
        }
        break;
      case ml::ExprKind::Unary:
        for (auto& [s1, va] : eval(std::move(st), *e.a))
          out.emplace_back(std::move(s1), sv_term(t_un(e.un_op, va.t)));
        break;
      case ml::ExprKind::Binary: return eval_binary(std::move(st), e);
      case ml::ExprKind::Call: return eval_call(std::move(st), e);
      case ml::ExprKind::RecordLit: {
        EvalVec acc;
        SymValue shell;
        shell.k = SymValue::K::Rec;
        shell.rec.resize(e.init_indices.size());
        acc.emplace_back(std::move(st), std::move(shell));
        for (size_t i = 0; i < e.args.size(); ++i) {
          EvalVec next;
          for (auto& [s1, partial] : acc)
            for (auto& [s2, vi] : eval(std::move(s1), *e.args[i])) {
              SymValue p = partial;
              p.rec[static_cast<size_t>(e.init_indices[i])] = std::move(vi);
              next.emplace_back(std::move(s2), std::move(p));
            }
          acc = std::move(next);
        }
        return acc;
      }
    }
    return out;
  }

  EvalVec eval_binary(SymState st, const ml::Expr& e) {
    EvalVec out;
    if (e.bin_op == ml::BinOp::And || e.bin_op == ml::BinOp::Or) {
      bool is_and = e.bin_op == ml::BinOp::And;
      for (auto& [s1, va] : eval(std::move(st), *e.a))
        for (auto& [s2, taken] : fork_bool(std::move(s1), va.t)) {
          if (taken == is_and) {  // short circuit did not trigger
            for (auto& [s3, vb] : eval(std::move(s2), *e.b))
              out.emplace_back(std::move(s3), std::move(vb));
          } else {
            out.emplace_back(std::move(s2), sv_term(t_bool(!is_and)));
          }
        }
      return out;
    }
    for (auto& [s1, va] : eval(std::move(st), *e.a))
      for (auto& [s2, vb] : eval(std::move(s1), *e.b)) {
        if (e.bin_op == ml::BinOp::Div || e.bin_op == ml::BinOp::Mod) {
          for (SymState& s3 : require(std::move(s2), t_not(t_bin(ml::BinOp::Eq, vb.t, t_int(0)))))
            out.emplace_back(std::move(s3), sv_term(t_bin(e.bin_op, va.t, vb.t)));
        } else {
          out.emplace_back(std::move(s2), sv_term(t_bin(e.bin_op, va.t, vb.t)));
        }
      }
    return out;
  }

  EvalVec eval_args(SymState st, const ml::Expr& e) {
    EvalVec acc;
    SymValue shell;
    shell.k = SymValue::K::Rec;  // reuse the record shape as an argument pack
    shell.rec.resize(e.args.size());
    acc.emplace_back(std::move(st), std::move(shell));
    for (size_t i = 0; i < e.args.size(); ++i) {
      EvalVec next;
      for (auto& [s1, pack] : acc)
        for (auto& [s2, vi] : eval(std::move(s1), *e.args[i])) {
          SymValue p = pack;
          p.rec[i] = std::move(vi);
          next.emplace_back(std::move(s2), std::move(p));
        }
      acc = std::move(next);
    }
    return acc;
  }

  EvalVec eval_call(SymState st, const ml::Expr& e) {
    EvalVec out;
    using ml::Builtin;
    switch (e.builtin) {
      case Builtin::Len:
        for (auto& [s1, v] : eval(std::move(st), *e.args[0]))
          out.emplace_back(std::move(s1), sv_term(v.bv.len));
        return out;
      case Builtin::ByteAt:
        for (auto& [s1, pack] : eval_args(std::move(st), e)) {
          const SymBytes bv = pack.rec[0].bv;
          TermPtr idx = pack.rec[1].t;
          for (SymState& s2 : require(std::move(s1), t_bin(ml::BinOp::Ge, idx, t_int(0))))
            for (SymState& s3 : require(std::move(s2), t_bin(ml::BinOp::Lt, idx, bv.len))) {
              TermPtr abs = t_bin(ml::BinOp::Add, bv.off, idx);
              if (abs->kind == TermKind::ConstInt) {
                out.emplace_back(std::move(s3), sv_term(byte_term(bv, abs->cval)));
              } else {
                for (int64_t k = 0; k < base_len(bv); ++k) {
                  SymState s4 = s3;
                  if (add_constraint(s4, t_bin(ml::BinOp::Eq, abs, t_int(k))))
                    out.emplace_back(std::move(s4), sv_term(byte_term(bv, k)));
                }
              }
            }
        }
        return out;
      case Builtin::Slice:
        for (auto& [s1, pack] : eval_args(std::move(st), e)) {
          const SymBytes bv = pack.rec[0].bv;
          TermPtr lo = pack.rec[1].t, hi = pack.rec[2].t;
          for (SymState& s2 : require(std::move(s1), t_bin(ml::BinOp::Ge, lo, t_int(0))))
            for (SymState& s3 : require(std::move(s2), t_bin(ml::BinOp::Ge, hi, lo)))
              for (SymState& s4 : require(std::move(s3), t_bin(ml::BinOp::Le, hi, bv.len))) {
                SymValue v;
                v.k = SymValue::K::Bytes;
                v.bv = SymBytes{t_bin(ml::BinOp::Add, bv.off, lo), t_bin(ml::BinOp::Sub, hi, lo),
                                bv.lit};
                out.emplace_back(std::move(s4), std::move(v));
              }
        }
        return out;
      case Builtin::EqBytes:
        for (auto& [s1, pack] : eval_args(std::move(st), e)) {
          const SymBytes& a = pack.rec[0].bv;
          const SymBytes& b = pack.rec[1].bv;
          if (a.len->kind != TermKind::ConstInt || b.len->kind != TermKind::ConstInt ||
              a.off->kind != TermKind::ConstInt || b.off->kind != TermKind::ConstInt) {
            truncate("symbolic bytes comparison");
            continue;
          }
          if (a.len->cval != b.len->cval) {
            out.emplace_back(std::move(s1), sv_term(t_bool(false)));
            continue;
          }
          TermPtr acc = t_bool(true);
          for (int64_t i = 0; i < a.len->cval; ++i)
            acc = t_bin(ml::BinOp::And, acc,
                        t_bin(ml::BinOp::Eq, byte_term(a, a.off->cval + i),
                              byte_term(b, b.off->cval + i)));
          out.emplace_back(std::move(s1), sv_term(acc));
        }
        return out;
      case Builtin::None: break;
      default: throw InternalError("unexpected builtin");
    }

    const ml::Function* callee = e.callee;
    if (!callee) throw InternalError("unresolved call to '" + e.name + "'");
    bool skipped = lim_.use_prune && prune_.skipped_functions.count(e.name) != 0;
    for (auto& [s1, pack] : eval_args(std::move(st), e)) {
      if (skipped) {
        out.emplace_back(std::move(s1), havoc_value(callee->return_type));
        continue;
      }
      if (static_cast<int>(s1.frames.size()) >= lim_.max_call_depth) {
        truncate("call depth limit");
        continue;
      }
      SymFrame fr;
      fr.fn = callee;
      fr.slots.resize(static_cast<size_t>(callee->slot_count));
      for (size_t i = 0; i < e.args.size(); ++i)
        fr.slots[static_cast<size_t>(callee->params[i].slot)] = std::move(pack.rec[i]);
      s1.frames.push_back(std::move(fr));
      for (ExecRes& r : exec_list(std::move(s1), callee->body, 0)) {
        r.st.frames.pop_back();
        out.emplace_back(std::move(r.st),
                         r.flow == Flow::Returned ? std::move(r.ret) : SymValue{});
      }
    }
    return out;
  }

  // --- statement execution ---------------------------------------------------

  SymValue* lvalue_slot(SymState& st, const ml::Expr& lv) {
    if (lv.kind == ml::ExprKind::Var)
      return &st.frames.back().slots[static_cast<size_t>(lv.slot)];
    SymValue* base = lvalue_slot(st, *lv.a);
    return &base->rec[static_cast<size_t>(lv.field_index)];
  }

  bool branch_pruned(const SymState& st, const ml::StmtList& body) const {
    if (!lim_.use_prune || body.empty()) return false;
    return !prune_.keeps(st.frames.back().fn->name, body.front()->block);
  }

  std::vector<ExecRes> exec_list(SymState st, const ml::StmtList& list, size_t i) {
    if (stop_) return {};
    std::vector<ExecRes> out;
    if (i == list.size()) {
      out.push_back({std::move(st), Flow::Next, {}});
      return out;
    }
    for (ExecRes& r : exec_stmt(std::move(st), *list[i])) {
      if (r.flow == Flow::Returned) {
        out.push_back(std::move(r));
      } else {
        for (ExecRes& r2 : exec_list(std::move(r.st), list, i + 1)) out.push_back(std::move(r2));
      }
    }
    return out;
  }

  std::vector<ExecRes> exec_stmt(SymState st, const ml::Stmt& s) {
    if (stop_) return {};
    std::vector<ExecRes> out;
    switch (s.kind) {
      case ml::StmtKind::Let:
        for (auto& [s1, v] : eval(std::move(st), *s.expr)) {
          s1.frames.back().slots[static_cast<size_t>(s.let_slot)] = std::move(v);
          out.push_back({std::move(s1), Flow::Next, {}});
        }
        break;
      case ml::StmtKind::Assign:
        for (auto& [s1, v] : eval(std::move(st), *s.expr)) {
          *lvalue_slot(s1, *s.lvalue) = std::move(v);
          out.push_back({std::move(s1), Flow::Next, {}});
        }
        break;
      case ml::StmtKind::ExprStmt:
        for (auto& [s1, v] : eval(std::move(st), *s.expr)) {
          (void)v;
          out.push_back({std::move(s1), Flow::Next, {}});
        }
        break;
      case ml::StmtKind::Return:
        if (s.expr) {
          for (auto& [s1, v] : eval(std::move(st), *s.expr))
            out.push_back({std::move(s1), Flow::Returned, std::move(v)});
        } else {
          out.push_back({std::move(st), Flow::Returned, {}});
        }
        break;
      case ml::StmtKind::Halt:
        record_path();  // terminal for the whole program
        break;
      case ml::StmtKind::If:
        for (auto& [s1, t] : eval(std::move(st), *s.expr))
          for (auto& [s2, taken] : fork_bool(std::move(s1), t.t)) {
            const ml::StmtList& branch = taken ? s.body : s.else_body;
            if (branch_pruned(s2, branch)) {
              record_path();  // no canary or predicate point beyond this branch
              continue;
            }
            for (ExecRes& r : exec_list(std::move(s2), branch, 0)) out.push_back(std::move(r));
          }
        break;
      case ml::StmtKind::While:
        for (auto& [s1, t] : eval(std::move(st), *s.expr))
          for (auto& [s2, taken] : fork_bool(std::move(s1), t.t)) {
            if (!taken) {
              s2.unroll.erase(&s);
              out.push_back({std::move(s2), Flow::Next, {}});
              continue;
            }
            if (s2.unroll[&s] >= lim_.max_unroll) {
              truncate("loop unroll limit");
              continue;
            }
            if (branch_pruned(s2, s.body)) {
              record_path();
              continue;
            }
            ++s2.unroll[&s];
            for (ExecRes& r : exec_list(std::move(s2), s.body, 0)) {
              if (r.flow == Flow::Returned) {
                out.push_back(std::move(r));
              } else {
                for (ExecRes& r2 : exec_stmt(std::move(r.st), s)) out.push_back(std::move(r2));
              }
            }
          }
        break;
      case ml::StmtKind::Canary:
        if (&s != target_canary_) {
          out.push_back({std::move(st), Flow::Next, {}});  // inactive canary
          break;
        }
        for (auto& [s1, t] : eval(std::move(st), *s.expr))
          for (auto& [s2, taken] : fork_bool(std::move(s1), t.t)) {
            if (!taken) {
              out.push_back({std::move(s2), Flow::Next, {}});
              continue;
            }
            record_path();
            if (s2.violated) counterexample_candidate(s2);  // may throw FoundCe
          }
        break;
      case ml::StmtKind::Guard: {
        if (s.name != pred_.id) {
          out.push_back({std::move(st), Flow::Next, {}});  // foreign guard: no-op here
          break;
        }
        in_guard_ = true;
        guard_faults_.clear();
        EvalVec conds = eval(std::move(st), *s.expr);
        in_guard_ = false;
        for (SymState& f : guard_faults_) out.push_back({std::move(f), Flow::Next, {}});
        guard_faults_.clear();
        for (auto& [s1, t] : conds)
          for (auto& [s2, taken] : fork_bool(std::move(s1), t.t)) {
            if (!taken) s2.violated = true;
            out.push_back({std::move(s2), Flow::Next, {}});
          }
        break;
      }
    }
    return out;
  }

  // --- counterexample confirmation -------------------------------------------

  void counterexample_candidate(const SymState& st) {
    SolveResult sr = solve(st.pc, lim_.solver_budget);
    if (sr.status == SolveStatus::Timeout) {
      truncated_.insert("solver budget");
      return;
    }
    if (sr.status == SolveStatus::Unsat) return;  // infeasible path, nothing lost
    std::vector<uint8_t> input(static_cast<size_t>(cur_len_), 0);
    for (const auto& [idx, val] : sr.model.bytes)
      if (idx >= 0 && idx < cur_len_) input[static_cast<size_t>(idx)] = static_cast<uint8_t>(val);
    if (replay_confirms(input)) throw FoundCe{std::move(input)};
    if (lim_.use_prune && !prune_.skipped_functions.empty()) throw SpuriousCe{};
    throw InternalError("counterexample failed concrete replay: input 0x" + to_hex(input));
  }

  bool replay_confirms(const std::vector<uint8_t>& input) const {
    runtime::RunOptions opt;
    opt.guard_mode = runtime::GuardMode::Observe;
    opt.active_canary = target_canary_;
    opt.step_budget = lim_.replay_step_budget;
    runtime::RunResult r = runtime::run_program(inst_, input, opt);
    if (r.verdict != runtime::VerdictKind::CanaryHit) return false;
    auto it = r.guard_stats.find(pred_.id);
    if (it == r.guard_stats.end()) return false;
    return it->second.false_count + it->second.fault_count > 0;
  }

  ml::Predicate pred_;
  Limits lim_;
  ml::Program inst_;
  const ml::Stmt* target_canary_ = nullptr;
  PruneSet prune_;

  int64_t cur_len_ = 0;
  long explored_paths_ = 0;
  std::set<std::string> truncated_;
  bool stop_ = false;
  int fresh_ = 0;
  bool in_guard_ = false;
  std::vector<SymState> guard_faults_;
};

}  // namespace detail

inline ValidationVerdict validate_relaxation(const ml::Program& p, const ml::Predicate& pred,
                                             const CanaryRef& canary, Limits limits = {}) {
  auto t0 = std::chrono::steady_clock::now();
  ValidationVerdict v;
  try {
    v = detail::Validator(p, pred, canary, limits).run();
  } catch (const detail::Validator::SpuriousCe&) {
    // A havoc summary manufactured the path; redo the search exactly.
    limits.use_prune = false;
    v = detail::Validator(p, pred, canary, limits).run();
  }
  v.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
  return v;
}

inline nlohmann::ordered_json verdict_to_json(const ValidationVerdict& v) {
  nlohmann::ordered_json j;
  j["kind"] = verdict_kind_name(v.kind);
  j["witness"] = v.witness ? nlohmann::ordered_json(to_hex(*v.witness))
                           : nlohmann::ordered_json(nullptr);
  j["explored_paths"] = v.explored_paths;
  j["reason"] = v.reason.empty() ? nlohmann::ordered_json(nullptr)
                                 : nlohmann::ordered_json(v.reason);
  j["pruned"] = v.pruned;
  j["wall_ms"] = v.wall_ms;
  return j;
}

}  // namespace waypoint::symcheck
