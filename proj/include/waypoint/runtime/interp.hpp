#pragma once

// Tree-walking interpreter with deterministic semantics:
//   - ints are 64-bit two's complement and wrap on overflow (INT64_MIN / -1
//     wraps too; only division by zero is a fault),
//   - bytes values are immutable views into shared buffers (slice is O(1)),
//   - records are plain values: assignment, argument passing and returns copy.
//
// Every executed statement costs one step against the budget; a while loop
// pays one step per condition check. Faults (out-of-bounds access, division
// by zero, call depth) end the run with a runtime_error verdict — except
// inside guard conditions under GuardMode::Observe, where the fault is
// recorded and execution continues as if the guard were not there.

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "waypoint/minilang/cfg.hpp"
#include "waypoint/minilang/program.hpp"
#include "waypoint/runtime/coverage.hpp"

namespace waypoint::runtime {

namespace ml = waypoint::minilang;

// ---------------------------------------------------------------------------
// Values

struct Value;
using RecordVal = std::vector<Value>;

struct BytesVal {
  std::shared_ptr<const std::vector<uint8_t>> data;
  size_t off = 0;
  size_t len = 0;

  uint8_t at(size_t i) const { return (*data)[off + i]; }
};

struct Value {
  ml::TypeKind kind = ml::TypeKind::Void;
  int64_t i = 0;
  bool b = false;
  BytesVal bytes;
  std::shared_ptr<RecordVal> rec;

  static Value of_int(int64_t v) {
    Value out;
    out.kind = ml::TypeKind::Int;
    out.i = v;
    return out;
  }
  static Value of_bool(bool v) {
    Value out;
    out.kind = ml::TypeKind::Bool;
    out.b = v;
    return out;
  }
  static Value of_bytes(BytesVal v) {
    Value out;
    out.kind = ml::TypeKind::Bytes;
    out.bytes = std::move(v);
    return out;
  }
};

// Records are value types; sharing must not leak past a store.
inline Value deep_copy(const Value& v) {
  if (v.kind != ml::TypeKind::Record) return v;
  Value out = v;
  out.rec = std::make_shared<RecordVal>(*v.rec);
  for (Value& f : *out.rec) f = deep_copy(f);
  return out;
}

// ---------------------------------------------------------------------------
// Run results

enum class VerdictKind { Completed, CanaryHit, Rejected, BudgetExceeded, RuntimeError };
enum class FaultKind { None, OutOfBounds, DivByZero, StackOverflow, TypeFault };
enum class GuardMode { Reject, Observe };

inline const char* verdict_name(VerdictKind v) {
  switch (v) {
    case VerdictKind::Completed: return "completed";
    case VerdictKind::CanaryHit: return "canary_hit";
    case VerdictKind::Rejected: return "rejected";
    case VerdictKind::BudgetExceeded: return "budget_exceeded";
    case VerdictKind::RuntimeError: return "runtime_error";
  }
  return "?";
}

inline const char* fault_name(FaultKind f) {
  switch (f) {
    case FaultKind::None: return "none";
    case FaultKind::OutOfBounds: return "out_of_bounds";
    case FaultKind::DivByZero: return "div_by_zero";
    case FaultKind::StackOverflow: return "stack_overflow";
    case FaultKind::TypeFault: return "type_fault";
  }
  return "?";
}

struct GuardStats {
  int true_count = 0;
  int false_count = 0;
  int fault_count = 0;
};

struct RunOptions {
  uint64_t step_budget = 1'000'000;
  int max_call_depth = 200;
  GuardMode guard_mode = GuardMode::Reject;
  const ml::Stmt* active_canary = nullptr;  // null: every canary is active
  bool record_trace = false;
};

struct RunResult {
  VerdictKind verdict = VerdictKind::Completed;
  FaultKind fault = FaultKind::None;
  std::string fault_detail;
  std::string reject_id;        // Rejected: which guard fired
  std::string canary_function;  // CanaryHit: where
  ml::StmtPath canary_path;
  uint64_t steps = 0;
  std::vector<uint16_t> edges;           // sorted unique coverage indices
  std::vector<uint64_t> block_keys;      // sorted unique executed blocks
  std::vector<std::string> guards_passed;  // sorted unique, Reject mode
  std::map<std::string, GuardStats> guard_stats;  // Observe mode
  std::vector<std::string> trace;        // "function:block" per block entry
};

// ---------------------------------------------------------------------------
// Interpreter

class Interp {
 public:
  explicit Interp(const ml::Program& p) : p_(p) {}

  RunResult run(const std::vector<uint8_t>& input, const RunOptions& opt) {
    opt_ = opt;
    result_ = RunResult{};
    steps_ = 0;
    depth_ = 0;
    prev_key_ = 0;
    raw_edges_.clear();
    raw_blocks_.clear();
    guards_passed_.clear();

    const ml::Function& entry = p_.entry_fn();
    Frame fr;
    fr.fn = &entry;
    fr.slots.resize(static_cast<size_t>(entry.slot_count));
    BytesVal in;
    in.data = std::make_shared<const std::vector<uint8_t>>(input);
    in.off = 0;
    in.len = input.size();
    fr.slots[0] = Value::of_bytes(std::move(in));

    try {
      exec_list(entry.body, fr);
      result_.verdict = VerdictKind::Completed;
    } catch (const StopRun& sr) {
      result_.verdict = sr.verdict;
      result_.fault = sr.fault;
      result_.fault_detail = sr.detail;
      result_.reject_id = sr.reject_id;
      if (sr.verdict == VerdictKind::CanaryHit) {
        for (const ml::CanarySite& site : p_.canary_sites) {
          if (site.stmt == sr.canary) {
            result_.canary_function = site.function;
            result_.canary_path = site.path;
            break;
          }
        }
      }
    }

    result_.steps = steps_;
    std::sort(raw_edges_.begin(), raw_edges_.end());
    raw_edges_.erase(std::unique(raw_edges_.begin(), raw_edges_.end()), raw_edges_.end());
    result_.edges = std::move(raw_edges_);
    std::sort(raw_blocks_.begin(), raw_blocks_.end());
    raw_blocks_.erase(std::unique(raw_blocks_.begin(), raw_blocks_.end()), raw_blocks_.end());
    result_.block_keys = std::move(raw_blocks_);
    result_.guards_passed.assign(guards_passed_.begin(), guards_passed_.end());
    return result_;
  }

 private:
  struct StopRun {
    VerdictKind verdict;
    FaultKind fault = FaultKind::None;
    std::string detail;
    std::string reject_id;
    const ml::Stmt* canary = nullptr;
  };

  struct Frame {
    const ml::Function* fn = nullptr;
    std::vector<Value> slots;
    int cur_block = -1;
  };

  enum class Flow { Next, Returned };

  [[noreturn]] void fault(FaultKind kind, std::string detail) {
    throw StopRun{VerdictKind::RuntimeError, kind, std::move(detail), "", nullptr};
  }

  void step() {
    if (++steps_ > opt_.step_budget) {
      steps_ = opt_.step_budget;
      throw StopRun{VerdictKind::BudgetExceeded, FaultKind::None, "", "", nullptr};
    }
  }

  void enter_block(const ml::Stmt& s, Frame& fr) {
    if (s.block == fr.cur_block) return;
    fr.cur_block = s.block;
    uint64_t key = fr.fn->cfg->block_keys[static_cast<size_t>(s.block)];
    raw_edges_.push_back(edge_index(prev_key_, key));
    prev_key_ = key;
    raw_blocks_.push_back(key);
    if (opt_.record_trace)
      result_.trace.push_back(fr.fn->name + ":" + std::to_string(s.block));
  }

  Flow exec_list(const ml::StmtList& list, Frame& fr) {
    for (const auto& sp : list) {
      Flow f = exec_stmt(*sp, fr);
      if (f == Flow::Returned) return f;
    }
    return Flow::Next;
  }

  Flow exec_stmt(const ml::Stmt& s, Frame& fr) {
    step();
    enter_block(s, fr);
    switch (s.kind) {
      case ml::StmtKind::Let:
        fr.slots[static_cast<size_t>(s.let_slot)] = deep_copy(eval(*s.expr, fr));
        return Flow::Next;
      case ml::StmtKind::Assign: {
        Value v = deep_copy(eval(*s.expr, fr));
        *lvalue_slot(*s.lvalue, fr) = std::move(v);
        return Flow::Next;
      }
      case ml::StmtKind::If: {
        if (eval_bool(*s.expr, fr)) return exec_list(s.body, fr);
        return exec_list(s.else_body, fr);
      }
      case ml::StmtKind::While: {
        for (;;) {
          if (!eval_bool(*s.expr, fr)) return Flow::Next;
          Flow f = exec_list(s.body, fr);
          if (f == Flow::Returned) return f;
          step();              // each re-check costs a step
          enter_block(s, fr);  // loop back into the header block
        }
      }
      case ml::StmtKind::Return:
        ret_val_ = s.expr ? deep_copy(eval(*s.expr, fr)) : Value{};
        return Flow::Returned;
      case ml::StmtKind::Halt:
        throw StopRun{VerdictKind::Completed, FaultKind::None, "", "", nullptr};
      case ml::StmtKind::ExprStmt:
        eval(*s.expr, fr);
        return Flow::Next;
      case ml::StmtKind::Canary: {
        bool active = opt_.active_canary == nullptr || opt_.active_canary == &s;
        if (active && eval_bool(*s.expr, fr))
          throw StopRun{VerdictKind::CanaryHit, FaultKind::None, "", "", &s};
        return Flow::Next;
      }
      case ml::StmtKind::Guard:
        exec_guard(s, fr);
        return Flow::Next;
    }
    fault(FaultKind::TypeFault, "bad statement kind");
  }

  void exec_guard(const ml::Stmt& s, Frame& fr) {
    if (opt_.guard_mode == GuardMode::Reject) {
      bool v = eval_bool(*s.expr, fr);  // guard faults are real faults here
      // synthetic outcome edge; prev_key_ stays untouched so block-level
      // coverage matches the uninstrumented program
      raw_edges_.push_back(guard_edge_index(s.name, v));
      if (!v) throw StopRun{VerdictKind::Rejected, FaultKind::None, "", s.name, nullptr};
      guards_passed_.insert(s.name);
      return;
    }
    // Observe mode: evaluate, record, never interfere.
    GuardStats& st = result_.guard_stats[s.name];
    try {
      if (eval_bool(*s.expr, fr)) ++st.true_count;
      else ++st.false_count;
    } catch (const StopRun& sr) {
      if (sr.verdict != VerdictKind::RuntimeError) throw;
      ++st.fault_count;
    }
  }

  // --- expressions ---------------------------------------------------------

  bool eval_bool(const ml::Expr& e, Frame& fr) {
    Value v = eval(e, fr);
    if (v.kind != ml::TypeKind::Bool) fault(FaultKind::TypeFault, "condition is not bool");
    return v.b;
  }

  Value* lvalue_slot(const ml::Expr& e, Frame& fr) {
    if (e.kind == ml::ExprKind::Var) return &fr.slots[static_cast<size_t>(e.slot)];
    // field chain
    Value* base = lvalue_slot(*e.a, fr);
    if (base->kind != ml::TypeKind::Record || !base->rec)
      fault(FaultKind::TypeFault, "field assignment on non-record");
    return &(*base->rec)[static_cast<size_t>(e.field_index)];
  }

  static int64_t wrap_add(int64_t a, int64_t b) {
    return static_cast<int64_t>(static_cast<uint64_t>(a) + static_cast<uint64_t>(b));
  }
  static int64_t wrap_sub(int64_t a, int64_t b) {
    return static_cast<int64_t>(static_cast<uint64_t>(a) - static_cast<uint64_t>(b));
  }
  static int64_t wrap_mul(int64_t a, int64_t b) {
    return static_cast<int64_t>(static_cast<uint64_t>(a) * static_cast<uint64_t>(b));
  }
  static int64_t wrap_neg(int64_t a) {
    return static_cast<int64_t>(0 - static_cast<uint64_t>(a));
  }

  Value eval(const ml::Expr& e, Frame& fr) {
    switch (e.kind) {
      case ml::ExprKind::IntLit:
        return Value::of_int(e.int_val);
      case ml::ExprKind::BoolLit:
        return Value::of_bool(e.bool_val);
      case ml::ExprKind::BytesLit: {
        auto& cached = literal_cache_[&e];
        if (!cached) cached = std::make_shared<const std::vector<uint8_t>>(e.bytes_val);
        BytesVal v;
        v.data = cached;
        v.off = 0;
        v.len = cached->size();
        return Value::of_bytes(std::move(v));
      }
      case ml::ExprKind::Var:
        return fr.slots[static_cast<size_t>(e.slot)];
      case ml::ExprKind::Field: {
        Value base = eval(*e.a, fr);
        if (base.kind != ml::TypeKind::Record || !base.rec)
          fault(FaultKind::TypeFault, "field access on non-record");
        return (*base.rec)[static_cast<size_t>(e.field_index)];
      }
      case ml::ExprKind::Unary: {
        Value a = eval(*e.a, fr);
        if (e.un_op == ml::UnOp::Neg) return Value::of_int(wrap_neg(a.i));
        return Value::of_bool(!a.b);
      }
      case ml::ExprKind::Binary:
        return eval_binary(e, fr);
      case ml::ExprKind::Call:
        return eval_call(e, fr);
      case ml::ExprKind::RecordLit: {
        auto rec = std::make_shared<RecordVal>(e.init_names.size());
        for (size_t i = 0; i < e.args.size(); ++i)
          (*rec)[static_cast<size_t>(e.init_indices[i])] = deep_copy(eval(*e.args[i], fr));
        Value out;
        out.kind = ml::TypeKind::Record;
        out.rec = std::move(rec);
        return out;
      }
    }
    fault(FaultKind::TypeFault, "bad expression kind");
  }

  Value eval_binary(const ml::Expr& e, Frame& fr) {
    using ml::BinOp;
    if (e.bin_op == BinOp::And) {
      Value a = eval(*e.a, fr);
      if (!a.b) return Value::of_bool(false);
      return Value::of_bool(eval(*e.b, fr).b);
    }
    if (e.bin_op == BinOp::Or) {
      Value a = eval(*e.a, fr);
      if (a.b) return Value::of_bool(true);
      return Value::of_bool(eval(*e.b, fr).b);
    }
    Value a = eval(*e.a, fr);
    Value b = eval(*e.b, fr);
    switch (e.bin_op) {
      case BinOp::Add: return Value::of_int(wrap_add(a.i, b.i));
      case BinOp::Sub: return Value::of_int(wrap_sub(a.i, b.i));
      case BinOp::Mul: return Value::of_int(wrap_mul(a.i, b.i));
      case BinOp::Div:
        if (b.i == 0) fault(FaultKind::DivByZero, "division by zero");
        if (a.i == INT64_MIN && b.i == -1) return Value::of_int(a.i);  // wraps
        return Value::of_int(a.i / b.i);
      case BinOp::Mod:
        if (b.i == 0) fault(FaultKind::DivByZero, "modulo by zero");
        if (a.i == INT64_MIN && b.i == -1) return Value::of_int(0);
        return Value::of_int(a.i % b.i);
      case BinOp::Lt: return Value::of_bool(a.i < b.i);
      case BinOp::Le: return Value::of_bool(a.i <= b.i);
      case BinOp::Gt: return Value::of_bool(a.i > b.i);
      case BinOp::Ge: return Value::of_bool(a.i >= b.i);
      case BinOp::Eq:
      case BinOp::Ne: {
        bool eq;
        if (a.kind == ml::TypeKind::Int) eq = a.i == b.i;
        else if (a.kind == ml::TypeKind::Bool) eq = a.b == b.b;
        else {
          fault(FaultKind::TypeFault, "bad equality operands");
        }
        return Value::of_bool(e.bin_op == BinOp::Eq ? eq : !eq);
      }
      default:
        fault(FaultKind::TypeFault, "bad binary operator");
    }
  }

  Value eval_call(const ml::Expr& e, Frame& fr) {
    using ml::Builtin;
    if (e.builtin != Builtin::None) {
      switch (e.builtin) {
        case Builtin::Len: {
          Value v = eval(*e.args[0], fr);
          return Value::of_int(static_cast<int64_t>(v.bytes.len));
        }
        case Builtin::ByteAt: {
          Value v = eval(*e.args[0], fr);
          Value idx = eval(*e.args[1], fr);
          if (idx.i < 0 || static_cast<uint64_t>(idx.i) >= v.bytes.len)
            fault(FaultKind::OutOfBounds,
                  "byte_at index " + std::to_string(idx.i) + " out of range for length " +
                      std::to_string(v.bytes.len));
          return Value::of_int(v.bytes.at(static_cast<size_t>(idx.i)));
        }
        case Builtin::Slice: {
          Value v = eval(*e.args[0], fr);
          Value lo = eval(*e.args[1], fr);
          Value hi = eval(*e.args[2], fr);
          if (lo.i < 0 || hi.i < lo.i || static_cast<uint64_t>(hi.i) > v.bytes.len)
            fault(FaultKind::OutOfBounds,
                  "slice [" + std::to_string(lo.i) + ", " + std::to_string(hi.i) +
                      ") out of range for length " + std::to_string(v.bytes.len));
          BytesVal out = v.bytes;
          out.off += static_cast<size_t>(lo.i);
          out.len = static_cast<size_t>(hi.i - lo.i);
          return Value::of_bytes(std::move(out));
        }
        case Builtin::EqBytes: {
          Value a = eval(*e.args[0], fr);
          Value b = eval(*e.args[1], fr);
          if (a.bytes.len != b.bytes.len) return Value::of_bool(false);
          for (size_t i = 0; i < a.bytes.len; ++i)
            if (a.bytes.at(i) != b.bytes.at(i)) return Value::of_bool(false);
          return Value::of_bool(true);
        }
        default:
          fault(FaultKind::TypeFault, "bad builtin");
      }
    }
    const ml::Function* callee = e.callee;
    if (!callee) fault(FaultKind::TypeFault, "unresolved call to '" + e.name + "'");
    if (++depth_ > opt_.max_call_depth) {
      --depth_;
      fault(FaultKind::StackOverflow, "call depth limit reached in '" + e.name + "'");
    }
    Frame callee_fr;
    callee_fr.fn = callee;
    callee_fr.slots.resize(static_cast<size_t>(callee->slot_count));
    for (size_t i = 0; i < e.args.size(); ++i)
      callee_fr.slots[static_cast<size_t>(callee->params[i].slot)] =
          deep_copy(eval(*e.args[i], fr));
    Flow f = exec_list(callee->body, callee_fr);
    --depth_;
    if (f == Flow::Returned) return std::move(ret_val_);
    return Value{};  // void fall-through
  }

  const ml::Program& p_;
  RunOptions opt_;
  RunResult result_;
  uint64_t steps_ = 0;
  int depth_ = 0;
  uint64_t prev_key_ = 0;
  Value ret_val_;
  std::vector<uint16_t> raw_edges_;
  std::vector<uint64_t> raw_blocks_;
  std::set<std::string> guards_passed_;
  std::unordered_map<const ml::Expr*, std::shared_ptr<const std::vector<uint8_t>>>
      literal_cache_;
};

inline RunResult run_program(const ml::Program& p, const std::vector<uint8_t>& input,
                             const RunOptions& opt = {}) {
  return Interp(p).run(input, opt);
}

}  // namespace waypoint::runtime
