// Symbolic validation: the constraint solver, reachability pruning and
// relaxation/counterexample verdicts, cross-checked against brute-force
// enumeration and concrete replay.

#include <catch2/catch_amalgamated.hpp>

#include <optional>
#include <string>
#include <vector>

#include "waypoint/symcheck/validate.hpp"
#include "waypoint/util.hpp"

using namespace waypoint;
using namespace waypoint::minilang;
namespace sc = waypoint::symcheck;
using Catch::Matchers::ContainsSubstring;

namespace {

std::string corpus_path(const std::string& rel) {
  return std::string(WAYPOINT_SOURCE_DIR) + "/corpus/" + rel;
}

Program load_corpus(const std::string& name) {
  std::string path = corpus_path(name + "/" + name + ".ml");
  return parse_program(path, read_text_file(path));
}

Predicate make_pred(const std::string& fn, const std::string& path, Position pos,
                    const std::string& condition) {
  Predicate p;
  p.id = "wp1";
  p.location = ProgramPoint{fn, path_from_string(path), pos};
  p.condition = condition;
  return p;
}

sc::CanaryRef only_canary(const Program& p) {
  REQUIRE(p.canary_sites.size() == 1);
  return {p.canary_sites[0].function, p.canary_sites[0].path};
}

// Ground truth by enumeration: the smallest input (length, then value order)
// whose run hits the canary while the observed guard missed it (evaluated
// false or faulted) at least once beforehand.
std::optional<std::vector<uint8_t>> brute_ce(const Program& orig, const Predicate& pred,
                                             int max_len) {
  Program inst = instrument(orig, pred);
  REQUIRE(inst.canary_sites.size() == 1);
  runtime::RunOptions opt;
  opt.guard_mode = runtime::GuardMode::Observe;
  opt.active_canary = inst.canary_sites[0].stmt;
  for (int len = 0; len <= max_len; ++len) {
    std::vector<uint8_t> in(static_cast<size_t>(len), 0);
    while (true) {
      runtime::RunResult r = runtime::run_program(inst, in, opt);
      if (r.verdict == runtime::VerdictKind::CanaryHit) {
        auto it = r.guard_stats.find(pred.id);
        if (it != r.guard_stats.end() &&
            it->second.false_count + it->second.fault_count > 0)
          return in;
      }
      int i = len - 1;
      while (i >= 0 && in[static_cast<size_t>(i)] == 255) in[static_cast<size_t>(i--)] = 0;
      if (i < 0) break;
      ++in[static_cast<size_t>(i)];
    }
  }
  return std::nullopt;
}

// A verdict must agree with enumeration over the same bounded input space.
void check_against_brute(const Program& p, const Predicate& pred, int max_len) {
  sc::Limits lim;
  lim.max_len = max_len;
  sc::ValidationVerdict v = sc::validate_relaxation(p, pred, only_canary(p), lim);
  auto truth = brute_ce(p, pred, max_len);
  if (truth) {
    REQUIRE(v.kind == sc::VerdictKind::Counterexample);
    REQUIRE(v.witness.has_value());
  } else {
    REQUIRE(v.kind == sc::VerdictKind::Relaxation);
  }
}

const char* kProbe =
    "fn main(input: bytes) {\n"
    "    if byte_at(input, 0) == 7 {\n"
    "        canary(true);\n"
    "    }\n"
    "    halt;\n"
    "}\n";

}  // namespace

TEST_CASE("solver finds models and proves small systems unsatisfiable") {
  using namespace sc;

  auto b0 = t_byte(0), b1 = t_byte(1);

  auto r = solve({t_bin(BinOp::Eq, b0, t_int(7)), t_bin(BinOp::Gt, b0, t_int(0))});
  REQUIRE(r.status == SolveStatus::Sat);
  CHECK(r.model.bytes.at(0) == 7);

  CHECK(solve({t_bin(BinOp::Eq, b0, t_int(7)), t_bin(BinOp::Eq, b0, t_int(8))}).status ==
        SolveStatus::Unsat);

  // Two-byte sum: verify the model by substitution.
  std::vector<TermPtr> sum300{t_bin(BinOp::Eq, t_bin(BinOp::Add, b0, b1), t_int(300)),
                              t_bin(BinOp::Le, b0, t_int(255)),
                              t_bin(BinOp::Le, b1, t_int(255))};
  r = solve(sum300);
  REQUIRE(r.status == SolveStatus::Sat);
  for (const TermPtr& c : sum300) {
    auto val = eval_term(*c, r.model);
    REQUIRE(val.has_value());
    CHECK(*val == 1);
  }

  // Every byte variable mentioned gets a value, even vacuously constrained ones.
  r = solve({t_bin(BinOp::Gt, b0, t_int(10)), t_bin(BinOp::Eq, b1, b1)});
  REQUIRE(r.status == SolveStatus::Sat);
  CHECK(r.model.bytes.count(0) == 1);
  CHECK(r.model.bytes.count(1) == 1);
}

TEST_CASE("solver status is cross-checked against brute force") {
  using namespace sc;
  auto b0 = t_byte(0), b1 = t_byte(1), b2 = t_byte(2);

  struct System {
    std::vector<TermPtr> cs;
    int nbytes;
  };
  std::vector<System> systems;
  systems.push_back({{t_bin(BinOp::Eq, t_bin(BinOp::Mod, b0, t_int(3)), t_int(1)),
                      t_bin(BinOp::Gt, b1, b0),
                      t_bin(BinOp::Eq, t_bin(BinOp::Add, b0, b1), t_int(100))},
                     2});
  systems.push_back({{t_bin(BinOp::Eq, t_bin(BinOp::Mul, b0, b1), t_int(391))}, 2});  // 17*23
  systems.push_back({{t_bin(BinOp::Lt, t_bin(BinOp::Add, b0, b1), t_int(3)),
                      t_bin(BinOp::Gt, t_bin(BinOp::Mul, b0, b1), t_int(1))},
                     2});  // unsat: product > 1 forces sum >= 3
  systems.push_back({{t_bin(BinOp::Eq, t_bin(BinOp::Add, t_bin(BinOp::Add, b0, b1), b2),
                            t_int(700)),
                      t_bin(BinOp::Ge, b0, t_int(200))},
                     3});

  for (const System& sys : systems) {
    SolveResult got = solve(sys.cs);
    bool sat = false;
    Model m;
    std::vector<int> v(static_cast<size_t>(sys.nbytes), 0);
    while (!sat) {
      for (int i = 0; i < sys.nbytes; ++i) m.bytes[i] = v[static_cast<size_t>(i)];
      bool ok = true;
      for (const TermPtr& c : sys.cs) {
        auto r = eval_term(*c, m);
        if (!r || *r == 0) {
          ok = false;
          break;
        }
      }
      if (ok) {
        sat = true;
        break;
      }
      int i = sys.nbytes - 1;
      while (i >= 0 && v[static_cast<size_t>(i)] == 255) v[static_cast<size_t>(i--)] = 0;
      if (i < 0) break;
      ++v[static_cast<size_t>(i)];
    }
    REQUIRE(got.status == (sat ? SolveStatus::Sat : SolveStatus::Unsat));
    if (sat) {
      for (const TermPtr& c : sys.cs) {
        auto r = eval_term(*c, got.model);
        REQUIRE(r.has_value());
        CHECK(*r == 1);
      }
    }
  }
}

TEST_CASE("solver never claims unsat for sampled havoc integers") {
  using namespace sc;
  auto fi = t_fresh_int(0);

  auto r = solve({t_bin(BinOp::Eq, fi, t_int(1000000))});
  REQUIRE(r.status == SolveStatus::Sat);
  CHECK(r.model.ints.at(0) == 1000000);

  // Unsatisfiable over the integers, but sampling cannot prove that.
  r = solve({t_bin(BinOp::Gt, fi, t_int(10)), t_bin(BinOp::Lt, fi, t_int(5))});
  CHECK(r.status == SolveStatus::Timeout);

  auto fb = t_fresh_bool(1);
  CHECK(solve({fb}).status == SolveStatus::Sat);
  CHECK(solve({t_bin(BinOp::And, fb, t_not(fb))}).status == SolveStatus::Unsat);

  CHECK(solve({t_bin(BinOp::Eq, t_byte(0), t_byte(1))}, 1).status == SolveStatus::Timeout);
}

TEST_CASE("prune keeps entry-to-canary and entry-to-predicate blocks") {
  // Linear program: everything is kept.
  Program lin = parse_program("t.ml",
                              "fn main(input: bytes) {\n"
                              "    let n = len(input);\n"
                              "    canary(n > 2);\n"
                              "    halt;\n"
                              "}\n");
  ProgramPoint canary_pt{"main", path_from_string("1"), Position::Before};
  ProgramPoint pred_pt{"main", path_from_string("0"), Position::Before};
  sc::PruneSet ps = sc::prune(lin, pred_pt, canary_pt);
  CHECK(ps.kept_blocks.size() == lin.fn("main").cfg->blocks.size());
  CHECK(ps.skipped_functions.empty());

  // A helper used only on a halting branch has no path to the canary: its
  // blocks are dropped and the function is summarized.
  Program pr = parse_program("t.ml",
                             "fn helper(x: int) -> int {\n"
                             "    return x * 2;\n"
                             "}\n"
                             "fn main(input: bytes) {\n"
                             "    if len(input) < 1 {\n"
                             "        let z = helper(5);\n"
                             "        halt;\n"
                             "    }\n"
                             "    canary(byte_at(input, 0) == 1);\n"
                             "    halt;\n"
                             "}\n");
  ProgramPoint c2{"main", path_from_string("1"), Position::Before};
  sc::PruneSet ps2 = sc::prune(pr, c2, c2);
  CHECK(ps2.skipped_functions == std::set<std::string>{"helper"});
  const Function& m = pr.fn("main");
  int then_block = m.body[0]->body[0]->block;
  CHECK(!ps2.keeps("main", then_block));
  CHECK(ps2.keeps("main", m.body[1]->block));

  // Bytes-returning helpers are never summarized away.
  Program pb = parse_program("t.ml",
                             "fn grab(d: bytes) -> bytes {\n"
                             "    return slice(d, 0, 0);\n"
                             "}\n"
                             "fn main(input: bytes) {\n"
                             "    if len(input) < 1 {\n"
                             "        let z = grab(input);\n"
                             "        halt;\n"
                             "    }\n"
                             "    canary(byte_at(input, 0) == 1);\n"
                             "    halt;\n"
                             "}\n");
  sc::PruneSet ps3 = sc::prune(pb, c2, c2);
  CHECK(ps3.skipped_functions.empty());

  // Unreachable canary is an error, not a verdict.
  Program un = parse_program("t.ml",
                             "fn dead(x: int) {\n"
                             "    canary(x > 0);\n"
                             "}\n"
                             "fn main(input: bytes) {\n"
                             "    halt;\n"
                             "}\n");
  ProgramPoint dead_pt{"dead", path_from_string("0"), Position::Before};
  ProgramPoint main_pt{"main", path_from_string("0"), Position::Before};
  REQUIRE_THROWS_AS(sc::prune(un, main_pt, dead_pt), UnreachableCanaryError);
}

TEST_CASE("prune agrees with a brute-force transitive-closure walk") {
  Program p = load_corpus("chunkpng");
  ProgramPoint pred_pt{"read_info", path_from_string("4"), Position::Before};
  ProgramPoint canary_pt{"apply_palette", path_from_string("0"), Position::Before};
  sc::PruneSet ps = sc::prune(p, pred_pt, canary_pt);

  // Oracle: rebuild the node set and edges directly, then take the closure
  // by repeated scans instead of a worklist.
  using Node = std::pair<std::string, int>;
  std::set<Node> nodes;
  std::set<std::pair<Node, Node>> edges;
  for (const std::string& name : p.function_order) {
    const Function& fn = p.fn(name);
    for (int b = 0; b < static_cast<int>(fn.cfg->blocks.size()); ++b) nodes.insert({name, b});
    for (const auto& e : fn.cfg->edges)
      edges.insert(std::make_pair(Node{name, e.src}, Node{name, e.dst}));
  }
  for (const CallSite& cs : p.call_sites) {
    const Stmt* s = resolve_point(p, ProgramPoint{cs.caller, cs.path, Position::Before}).stmt;
    Node call{cs.caller, s->block};
    Node entry{cs.callee, p.fn(cs.callee).cfg->entry};
    Node exit{cs.callee, p.fn(cs.callee).cfg->exit};
    edges.insert(std::make_pair(call, entry));
    if (p.fn(cs.callee).cfg->returns) edges.insert(std::make_pair(exit, call));
  }
  auto closure_from = [&](Node start, bool forward) {
    std::set<Node> seen{start};
    bool grew = true;
    while (grew) {
      grew = false;
      for (const auto& [a, b] : edges) {
        Node from = forward ? a : b, to = forward ? b : a;
        if (seen.count(from) && !seen.count(to)) {
          seen.insert(to);
          grew = true;
        }
      }
    }
    return seen;
  };
  Node entry{"main", p.fn("main").cfg->entry};
  Node canary{"apply_palette", resolve_point(p, canary_pt).stmt->block};
  Node pred{"read_info", resolve_point(p, pred_pt).stmt->block};
  auto reach = closure_from(entry, true);
  auto to_canary = closure_from(canary, false);
  auto to_pred = closure_from(pred, false);
  std::set<Node> expect;
  for (const Node& n : reach)
    if (to_canary.count(n) || to_pred.count(n)) expect.insert(n);
  CHECK(ps.kept_blocks == expect);
}

TEST_CASE("validation separates relaxations from counterexamples on a probe") {
  Program p = parse_program("probe.ml", kProbe);
  sc::CanaryRef canary = only_canary(p);
  sc::Limits lim;
  lim.max_len = 2;

  // `true` is a relaxation of anything.
  auto v = sc::validate_relaxation(p, make_pred("main", "0", Position::Before, "true"), canary,
                                   lim);
  CHECK(v.kind == sc::VerdictKind::Relaxation);
  CHECK(v.explored_paths > 0);
  CHECK(!v.witness.has_value());

  // No byte equal to 7 is <= 0, so the guard admits every canary path.
  v = sc::validate_relaxation(
      p, make_pred("main", "0", Position::Before, "byte_at(input, 0) > 0"), canary, lim);
  CHECK(v.kind == sc::VerdictKind::Relaxation);

  // Wrong byte value: input [0x07] defeats the guard and still hits.
  v = sc::validate_relaxation(
      p, make_pred("main", "0", Position::Before, "byte_at(input, 0) == 8"), canary, lim);
  REQUIRE(v.kind == sc::VerdictKind::Counterexample);
  REQUIRE(v.witness.has_value());
  CHECK(*v.witness == std::vector<uint8_t>{0x07});

  // A guard that faults on the canary input misses it just like a false one.
  v = sc::validate_relaxation(
      p, make_pred("main", "0", Position::Before, "byte_at(input, 1) == 0"), canary, lim);
  REQUIRE(v.kind == sc::VerdictKind::Counterexample);
  REQUIRE(v.witness.has_value());
  CHECK(*v.witness == std::vector<uint8_t>{0x07});

  // Verdicts agree with enumeration over the whole bounded input space.
  for (const char* cond : {"true", "byte_at(input, 0) > 0", "byte_at(input, 0) == 8",
                           "byte_at(input, 1) == 0", "byte_at(input, 0) != 3"})
    check_against_brute(p, make_pred("main", "0", Position::Before, cond), 2);
}

TEST_CASE("validation handles multi-byte arithmetic constraints") {
  Program p = parse_program("sum.ml",
                            "fn main(input: bytes) {\n"
                            "    if len(input) == 2 {\n"
                            "        if byte_at(input, 0) + byte_at(input, 1) == 300 {\n"
                            "            canary(true);\n"
                            "        }\n"
                            "    }\n"
                            "    halt;\n"
                            "}\n");
  sc::CanaryRef canary = only_canary(p);
  sc::Limits lim;
  lim.max_len = 2;

  // b0 >= 45 holds on every solution of b0 + b1 == 300 with byte operands.
  auto v = sc::validate_relaxation(
      p, make_pred("main", "0", Position::Before, "byte_at(input, 0) >= 45"), canary, lim);
  CHECK(v.kind == sc::VerdictKind::Relaxation);

  v = sc::validate_relaxation(
      p, make_pred("main", "0", Position::Before, "byte_at(input, 0) >= 46"), canary, lim);
  REQUIRE(v.kind == sc::VerdictKind::Counterexample);
  CHECK(*v.witness == std::vector<uint8_t>{45, 255});

  check_against_brute(p, make_pred("main", "0", Position::Before, "byte_at(input, 0) >= 45"), 2);
  check_against_brute(p, make_pred("main", "0", Position::Before, "byte_at(input, 0) >= 46"), 2);
}

TEST_CASE("bounded loops downgrade would-be relaxations to unknown") {
  Program p = parse_program("loop.ml",
                            "fn main(input: bytes) {\n"
                            "    let i = 0;\n"
                            "    while i < 20 {\n"
                            "        i = i + 1;\n"
                            "    }\n"
                            "    if len(input) >= 1 {\n"
                            "        canary(byte_at(input, 0) == 3);\n"
                            "    }\n"
                            "    halt;\n"
                            "}\n");
  sc::CanaryRef canary = only_canary(p);
  sc::Limits lim;
  lim.max_len = 1;

  auto v = sc::validate_relaxation(p, make_pred("main", "0", Position::Before, "true"), canary,
                                   lim);
  CHECK(v.kind == sc::VerdictKind::Unknown);
  CHECK_THAT(v.reason, ContainsSubstring("loop unroll limit"));

  lim.max_unroll = 32;
  v = sc::validate_relaxation(p, make_pred("main", "0", Position::Before, "true"), canary, lim);
  CHECK(v.kind == sc::VerdictKind::Relaxation);

  lim.max_paths = 2;
  v = sc::validate_relaxation(p, make_pred("main", "0", Position::Before, "true"), canary, lim);
  CHECK(v.kind == sc::VerdictKind::Unknown);
  CHECK_THAT(v.reason, ContainsSubstring("path limit"));
}

TEST_CASE("validation on chunkpng confirms a real relaxation and a real flaw") {
  Program p = load_corpus("chunkpng");
  sc::CanaryRef canary = only_canary(p);
  sc::Limits lim;
  lim.max_len = 8;

  // Decoding applies the palette only when one was found: every canary run
  // leaves read_info with found_plte set.
  Predicate good = make_pred("read_info", "4", Position::Before, "info.found_plte");
  auto v1 = sc::validate_relaxation(p, good, canary, lim);
  CHECK(v1.kind == sc::VerdictKind::Relaxation);
  CHECK(v1.explored_paths > 0);

  // chunk_count == 1 is not implied: a PLTE chunk plus a DATA chunk counts 2.
  Predicate bad = make_pred("read_info", "4", Position::Before, "info.chunk_count == 1");
  auto v2 = sc::validate_relaxation(p, bad, canary, lim);
  REQUIRE(v2.kind == sc::VerdictKind::Counterexample);
  REQUIRE(v2.witness.has_value());

  // The witness replays: guard missed, canary hit, in the observer run.
  Program inst = instrument(p, bad);
  runtime::RunOptions opt;
  opt.guard_mode = runtime::GuardMode::Observe;
  opt.active_canary = find_canary(inst, "apply_palette", "info.plte_size > 3")->stmt;
  runtime::RunResult rr = runtime::run_program(inst, *v2.witness, opt);
  CHECK(rr.verdict == runtime::VerdictKind::CanaryHit);
  CHECK(rr.guard_stats.at("wp1").false_count > 0);

  // Pruning must not change verdict kinds, and reruns are deterministic.
  sc::Limits nop = lim;
  nop.use_prune = false;
  CHECK(sc::validate_relaxation(p, good, canary, nop).kind == sc::VerdictKind::Relaxation);
  auto v2b = sc::validate_relaxation(p, bad, canary, nop);
  REQUIRE(v2b.kind == sc::VerdictKind::Counterexample);
  auto v2c = sc::validate_relaxation(p, bad, canary, lim);
  CHECK(*v2c.witness == *v2.witness);
  CHECK(v2c.explored_paths == v2.explored_paths);
}

TEST_CASE("validation on bytemaze pins the exact trigger") {
  Program p = load_corpus("bytemaze");
  sc::CanaryRef canary = only_canary(p);
  sc::Limits lim;
  lim.max_len = 5;

  auto v = sc::validate_relaxation(
      p, make_pred("main", "0", Position::Before, "len(input) >= 5 && byte_at(input, 0) == 'M'"),
      canary, lim);
  CHECK(v.kind == sc::VerdictKind::Relaxation);

  auto bad = sc::validate_relaxation(
      p, make_pred("main", "0", Position::Before, "len(input) >= 1 && byte_at(input, 1) == 'X'"),
      canary, lim);
  REQUIRE(bad.kind == sc::VerdictKind::Counterexample);
  CHECK(*bad.witness == std::vector<uint8_t>{'M', 'W', 'A', 'Y', '!'});
}

TEST_CASE("validation of skipped helpers stays sound with and without pruning") {
  Program p = parse_program("skip.ml",
                            "fn helper(x: int) -> int {\n"
                            "    return x * 2;\n"
                            "}\n"
                            "fn main(input: bytes) {\n"
                            "    if len(input) < 1 {\n"
                            "        let z = helper(5);\n"
                            "        halt;\n"
                            "    }\n"
                            "    canary(byte_at(input, 0) == 1);\n"
                            "    halt;\n"
                            "}\n");
  sc::CanaryRef canary = only_canary(p);
  for (bool use_prune : {true, false}) {
    sc::Limits lim;
    lim.max_len = 2;
    lim.use_prune = use_prune;
    auto ok = sc::validate_relaxation(p, make_pred("main", "0", Position::Before, "true"),
                                      canary, lim);
    CHECK(ok.kind == sc::VerdictKind::Relaxation);
    auto ce = sc::validate_relaxation(
        p, make_pred("main", "0", Position::Before, "byte_at(input, 0) == 2"), canary, lim);
    REQUIRE(ce.kind == sc::VerdictKind::Counterexample);
    CHECK(*ce.witness == std::vector<uint8_t>{1});
  }
}

TEST_CASE("solver exhaustion surfaces as unknown, never as a verdict") {
  Program p = load_corpus("chunkpng");
  sc::CanaryRef canary = only_canary(p);
  sc::Limits lim;
  lim.max_len = 8;
  lim.solver_budget = 1;
  Predicate bad = make_pred("read_info", "4", Position::Before, "info.chunk_count == 1");
  auto v = sc::validate_relaxation(p, bad, canary, lim);
  CHECK(v.kind == sc::VerdictKind::Unknown);
  CHECK_THAT(v.reason, ContainsSubstring("solver budget"));
}

TEST_CASE("unreachable canaries and verdict reports") {
  Program un = parse_program("t.ml",
                             "fn dead(x: int) {\n"
                             "    canary(x > 0);\n"
                             "}\n"
                             "fn main(input: bytes) {\n"
                             "    halt;\n"
                             "}\n");
  sc::CanaryRef canary = only_canary(un);
  REQUIRE_THROWS_AS(sc::validate_relaxation(
                        un, make_pred("main", "0", Position::Before, "true"), canary, {}),
                    UnreachableCanaryError);

  Program p = parse_program("probe.ml", kProbe);
  sc::Limits lim;
  lim.max_len = 2;
  auto v = sc::validate_relaxation(
      p, make_pred("main", "0", Position::Before, "byte_at(input, 0) == 8"), only_canary(p),
      lim);
  auto j = sc::verdict_to_json(v);
  CHECK(j["kind"] == "counterexample");
  CHECK(j["witness"] == "07");
  CHECK(j["explored_paths"].get<long>() > 0);
  CHECK(j["wall_ms"].get<long>() >= 0);
}
