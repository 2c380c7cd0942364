#pragma once

// Symbolic terms over input bytes and havoc symbols. Terms are immutable
// shared trees with constant folding at construction; arithmetic wraps
// exactly like the interpreter (64-bit two's complement, INT64_MIN / -1
// special cases), so a model that satisfies a term set replays concretely.

#include <algorithm>
#include <bitset>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "waypoint/minilang/ast.hpp"

namespace waypoint::symcheck {

namespace ml = waypoint::minilang;

enum class TermKind { ConstInt, ConstBool, ByteVar, FreshInt, FreshBool, Unary, Binary };

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  TermKind kind;
  bool is_bool = false;
  int64_t cval = 0;  // ConstInt value; ConstBool as 0/1
  int var = -1;      // ByteVar: input byte index; Fresh*: symbol id
  ml::UnOp un = ml::UnOp::Neg;
  ml::BinOp bin = ml::BinOp::Add;
  TermPtr a, b;
};

inline int64_t wrap_add(int64_t a, int64_t b) {
  return static_cast<int64_t>(static_cast<uint64_t>(a) + static_cast<uint64_t>(b));
}
inline int64_t wrap_sub(int64_t a, int64_t b) {
  return static_cast<int64_t>(static_cast<uint64_t>(a) - static_cast<uint64_t>(b));
}
inline int64_t wrap_mul(int64_t a, int64_t b) {
  return static_cast<int64_t>(static_cast<uint64_t>(a) * static_cast<uint64_t>(b));
}
inline int64_t wrap_neg(int64_t a) { return static_cast<int64_t>(-static_cast<uint64_t>(a)); }

inline TermPtr t_int(int64_t v) {
  auto t = std::make_shared<Term>();
  t->kind = TermKind::ConstInt;
  t->cval = v;
  return t;
}

inline TermPtr t_bool(bool v) {
  auto t = std::make_shared<Term>();
  t->kind = TermKind::ConstBool;
  t->is_bool = true;
  t->cval = v ? 1 : 0;
  return t;
}

inline TermPtr t_byte(int index) {
  auto t = std::make_shared<Term>();
  t->kind = TermKind::ByteVar;
  t->var = index;
  return t;
}

inline TermPtr t_fresh_int(int id) {
  auto t = std::make_shared<Term>();
  t->kind = TermKind::FreshInt;
  t->var = id;
  return t;
}

inline TermPtr t_fresh_bool(int id) {
  auto t = std::make_shared<Term>();
  t->kind = TermKind::FreshBool;
  t->is_bool = true;
  t->var = id;
  return t;
}

inline bool is_const(const TermPtr& t) {
  return t->kind == TermKind::ConstInt || t->kind == TermKind::ConstBool;
}

// Evaluates a binary operator on concrete values; booleans are 0/1. Returns
// nullopt for division or modulo by zero (the path constraint machinery rules
// those out separately; under a candidate model they make the term false).
inline std::optional<int64_t> eval_bin(ml::BinOp op, int64_t a, int64_t b) {
  switch (op) {
    case ml::BinOp::Add: return wrap_add(a, b);
    case ml::BinOp::Sub: return wrap_sub(a, b);
    case ml::BinOp::Mul: return wrap_mul(a, b);
    case ml::BinOp::Div:
      if (b == 0) return std::nullopt;
      if (a == INT64_MIN && b == -1) return a;
      return a / b;
    case ml::BinOp::Mod:
      if (b == 0) return std::nullopt;
      if (a == INT64_MIN && b == -1) return static_cast<int64_t>(0);
      return a % b;
    case ml::BinOp::Eq: return a == b ? 1 : 0;
    case ml::BinOp::Ne: return a != b ? 1 : 0;
    case ml::BinOp::Lt: return a < b ? 1 : 0;
    case ml::BinOp::Le: return a <= b ? 1 : 0;
    case ml::BinOp::Gt: return a > b ? 1 : 0;
    case ml::BinOp::Ge: return a >= b ? 1 : 0;
    case ml::BinOp::And: return (a != 0 && b != 0) ? 1 : 0;
    case ml::BinOp::Or: return (a != 0 || b != 0) ? 1 : 0;
  }
  return std::nullopt;
}

inline bool bin_is_bool(ml::BinOp op) {
  switch (op) {
    case ml::BinOp::Add:
    case ml::BinOp::Sub:
    case ml::BinOp::Mul:
    case ml::BinOp::Div:
    case ml::BinOp::Mod: return false;
    default: return true;
  }
}

inline TermPtr t_un(ml::UnOp op, TermPtr a) {
  if (is_const(a)) {
    if (op == ml::UnOp::Neg) return t_int(wrap_neg(a->cval));
    return t_bool(a->cval == 0);
  }
  // !!x => x
  if (op == ml::UnOp::Not && a->kind == TermKind::Unary && a->un == ml::UnOp::Not)
    return a->a;
  auto t = std::make_shared<Term>();
  t->kind = TermKind::Unary;
  t->is_bool = op == ml::UnOp::Not;
  t->un = op;
  t->a = std::move(a);
  return t;
}

inline TermPtr t_not(TermPtr a) { return t_un(ml::UnOp::Not, std::move(a)); }

inline TermPtr t_bin(ml::BinOp op, TermPtr a, TermPtr b) {
  if (is_const(a) && is_const(b)) {
    if (auto v = eval_bin(op, a->cval, b->cval))
      return bin_is_bool(op) ? t_bool(*v != 0) : t_int(*v);
    // division by a constant zero: keep the node, it can never be satisfied
  }
  auto t = std::make_shared<Term>();
  t->kind = TermKind::Binary;
  t->is_bool = bin_is_bool(op);
  t->bin = op;
  t->a = std::move(a);
  t->b = std::move(b);
  return t;
}

// --- models ---------------------------------------------------------------

struct Model {
  std::map<int, int> bytes;      // byte index -> 0..255
  std::map<int, int64_t> ints;   // fresh int id -> value
  std::map<int, bool> bools;     // fresh bool id -> value
};

inline std::optional<int64_t> eval_term(const Term& t, const Model& m) {
  switch (t.kind) {
    case TermKind::ConstInt:
    case TermKind::ConstBool: return t.cval;
    case TermKind::ByteVar: {
      auto it = m.bytes.find(t.var);
      return it == m.bytes.end() ? 0 : it->second;
    }
    case TermKind::FreshInt: {
      auto it = m.ints.find(t.var);
      return it == m.ints.end() ? 0 : it->second;
    }
    case TermKind::FreshBool: {
      auto it = m.bools.find(t.var);
      return it == m.bools.end() ? 0 : (it->second ? 1 : 0);
    }
    case TermKind::Unary: {
      auto v = eval_term(*t.a, m);
      if (!v) return std::nullopt;
      return t.un == ml::UnOp::Neg ? wrap_neg(*v) : (*v == 0 ? 1 : 0);
    }
    case TermKind::Binary: {
      auto a = eval_term(*t.a, m);
      if (!a) return std::nullopt;
      auto b = eval_term(*t.b, m);
      if (!b) return std::nullopt;
      return eval_bin(t.bin, *a, *b);
    }
  }
  return std::nullopt;
}

struct VarSet {
  std::set<int> bytes, ints, bools;

  bool single_byte_only() const { return bytes.size() == 1 && ints.empty() && bools.empty(); }
};

inline void collect_vars(const Term& t, VarSet& out) {
  switch (t.kind) {
    case TermKind::ByteVar: out.bytes.insert(t.var); break;
    case TermKind::FreshInt: out.ints.insert(t.var); break;
    case TermKind::FreshBool: out.bools.insert(t.var); break;
    case TermKind::Unary: collect_vars(*t.a, out); break;
    case TermKind::Binary:
      collect_vars(*t.a, out);
      collect_vars(*t.b, out);
      break;
    default: break;
  }
}

using ByteDomains = std::map<int, std::bitset<256>>;

// A term's possible value set: sorted and deduplicated, nullopt when
// unbounded (fresh integers, or past the cutoff).
using ValRange = std::optional<std::vector<int64_t>>;

// Abstract evaluation of value sets over the byte domains, with one variable
// optionally pinned to a concrete value. Subterm results that do not mention
// the pinned variable are cached, so sweeping the pin across 0..255 only
// re-walks the spine that contains it.
class RangeEval {
 public:
  RangeEval(const ByteDomains& dom, int pin_var, size_t cutoff = 256)
      : dom_(dom), pin_(pin_var), cutoff_(cutoff) {}

  // The result reference is valid until the next eval() call.
  const ValRange& eval(const Term& t, int64_t pin_val) {
    if (!mentions_pin(t)) return cached(t);
    scratch_ = compute(t, pin_val);
    return scratch_;
  }

 private:
  static void sort_unique(std::vector<int64_t>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }

  bool mentions_pin(const Term& t) {
    if (pin_ < 0) return false;
    auto it = mentions_.find(&t);
    if (it != mentions_.end()) return it->second;
    bool m = false;
    switch (t.kind) {
      case TermKind::ByteVar: m = t.var == pin_; break;
      case TermKind::Unary: m = mentions_pin(*t.a); break;
      case TermKind::Binary: m = mentions_pin(*t.a) || mentions_pin(*t.b); break;
      default: break;
    }
    mentions_[&t] = m;
    return m;
  }

  const ValRange& cached(const Term& t) {
    auto it = fixed_.find(&t);
    if (it == fixed_.end()) it = fixed_.emplace(&t, compute(t, 0)).first;
    return it->second;
  }

  ValRange compute(const Term& t, int64_t pin_val) {
    switch (t.kind) {
      case TermKind::ConstInt:
      case TermKind::ConstBool: return std::vector<int64_t>{t.cval};
      case TermKind::ByteVar: {
        if (t.var == pin_) return std::vector<int64_t>{pin_val};
        std::vector<int64_t> r;
        auto it = dom_.find(t.var);
        for (int x = 0; x < 256; ++x)
          if (it == dom_.end() || it->second.test(static_cast<size_t>(x)))
            r.push_back(x);
        if (r.size() > cutoff_) return std::nullopt;
        return r;
      }
      case TermKind::FreshBool: return std::vector<int64_t>{0, 1};
      case TermKind::FreshInt: return std::nullopt;
      case TermKind::Unary: {
        const ValRange& ra =
            mentions_pin(*t.a) ? (spine_ = compute(*t.a, pin_val)) : cached(*t.a);
        if (!ra)
          return t.un == ml::UnOp::Not ? ValRange(std::vector<int64_t>{0, 1}) : std::nullopt;
        std::vector<int64_t> r;
        r.reserve(ra->size());
        for (int64_t a : *ra) r.push_back(t.un == ml::UnOp::Not ? (a == 0 ? 1 : 0) : wrap_neg(a));
        sort_unique(r);
        return r;
      }
      case TermKind::Binary: {
        // Evaluate both sides before aliasing spine_, which each side may use.
        ValRange ra = mentions_pin(*t.a) ? compute(*t.a, pin_val) : cached(*t.a);
        ValRange rb = mentions_pin(*t.b) ? compute(*t.b, pin_val) : cached(*t.b);
        bool small = ra && rb && ra->size() * rb->size() <= 4096;
        if (!small) {
          if (bin_is_bool(t.bin)) return std::vector<int64_t>{0, 1};
          // n % m stays bounded for a known small positive divisor.
          if (t.bin == ml::BinOp::Mod && rb && rb->size() == 1) {
            int64_t m = rb->front();
            if (m > 0 && static_cast<size_t>(2 * m - 1) <= cutoff_) {
              std::vector<int64_t> r;
              for (int64_t v = -(m - 1); v < m; ++v) r.push_back(v);
              return r;
            }
          }
          return std::nullopt;
        }
        std::vector<int64_t> r;
        r.reserve(std::min<size_t>(ra->size() * rb->size(), cutoff_ + 1));
        for (int64_t a : *ra)
          for (int64_t b : *rb) {
            auto v = eval_bin(t.bin, a, b);
            if (v) r.push_back(*v);
          }
        sort_unique(r);
        if (r.size() > cutoff_) return std::nullopt;
        return r;
      }
    }
    return std::nullopt;
  }

  const ByteDomains& dom_;
  int pin_;
  size_t cutoff_;
  std::map<const Term*, bool> mentions_;
  std::map<const Term*, ValRange> fixed_;
  ValRange scratch_, spine_;
};

inline bool range_can_be_true(const ValRange& r) {
  if (!r) return true;
  for (int64_t v : *r)
    if (v != 0) return true;
  return false;
}

// Convenience wrapper: the full (unpinned) value set of a term.
inline ValRange term_range(const Term& t, const ByteDomains& dom) {
  RangeEval re(dom, -1);
  return re.eval(t, 0);
}

// Arc-consistency pass for one constraint: removes byte values that cannot
// satisfy it regardless of what the other variables do. Returns false when
// a domain empties, i.e. the constraint set is unsatisfiable.
inline bool narrow_domains(const Term& t, ByteDomains& dom) {
  VarSet vs;
  collect_vars(t, vs);
  if (vs.bytes.empty()) return range_can_be_true(term_range(t, dom));
  for (int var : vs.bytes) {
    auto it = dom.find(var);
    if (it == dom.end()) it = dom.emplace(var, std::bitset<256>().set()).first;
    RangeEval re(dom, var);
    std::bitset<256> keep;
    for (int x = 0; x < 256; ++x) {
      if (!it->second.test(static_cast<size_t>(x))) continue;
      if (range_can_be_true(re.eval(t, x))) keep.set(static_cast<size_t>(x));
    }
    if (keep.none()) return false;
    it->second = keep;
  }
  return true;
}

inline void collect_int_constants(const Term& t, std::set<int64_t>& out) {
  switch (t.kind) {
    case TermKind::ConstInt: out.insert(t.cval); break;
    case TermKind::Unary: collect_int_constants(*t.a, out); break;
    case TermKind::Binary:
      collect_int_constants(*t.a, out);
      collect_int_constants(*t.b, out);
      break;
    default: break;
  }
}

}  // namespace waypoint::symcheck
