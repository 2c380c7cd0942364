// Parser, checker, CFG, printer, program points, instrumentation and patch
// serialization for the mini language.

#include <catch2/catch_amalgamated.hpp>

#include "waypoint/minilang/patch.hpp"
#include "waypoint/util.hpp"

using namespace waypoint;
using namespace waypoint::minilang;
using Catch::Matchers::ContainsSubstring;

namespace {

Program parse1(const std::string& src) { return parse_program("test.ml", src); }

std::string corpus_path(const std::string& rel) {
  return std::string(WAYPOINT_SOURCE_DIR) + "/corpus/" + rel;
}

Program load_corpus(const std::string& name) {
  std::string path = corpus_path(name + "/" + name + ".ml");
  return parse_program(path, read_text_file(path));
}

const Stmt* stmt_at(const Program& p, const std::string& fn, const std::string& path) {
  return resolve_point(const_cast<Program&>(p),
                       ProgramPoint{fn, path_from_string(path), Position::Before})
      .stmt;
}

int count_edges(const Cfg& cfg, EdgeLabel label) {
  int n = 0;
  for (const CfgEdge& e : cfg.edges)
    if (e.label == label) ++n;
  return n;
}

}  // namespace

TEST_CASE("minimal program parses to a single one-block function") {
  Program p = parse1("fn main(input: bytes) { halt; }");
  REQUIRE(p.functions.size() == 1);
  REQUIRE(p.entry == "main");
  const Cfg& cfg = *p.entry_fn().cfg;
  REQUIRE(cfg.blocks.size() == 1);
  REQUIRE(cfg.edges.empty());
  REQUIRE(cfg.entry == 0);
  REQUIRE(cfg.exit == 0);
}

TEST_CASE("straight-line statements share one block") {
  Program p = parse1(
      "fn main(input: bytes) {\n"
      "    let x = 1;\n"
      "    let y = x + 2;\n"
      "    halt;\n"
      "}\n");
  const Cfg& cfg = *p.entry_fn().cfg;
  REQUIRE(cfg.blocks.size() == 1);
  REQUIRE(cfg.edges.empty());
  REQUIRE(cfg.blocks[0].stmts.size() == 3);
  for (const Stmt* s : cfg.blocks[0].stmts) REQUIRE(s->block == 0);
}

TEST_CASE("if/else builds the four-block diamond") {
  Program p = parse1(
      "fn main(input: bytes) {\n"
      "    let x = len(input);\n"
      "    if x > 0 {\n"
      "        x = 1;\n"
      "    } else {\n"
      "        x = 2;\n"
      "    }\n"
      "    halt;\n"
      "}\n");
  const Cfg& cfg = *p.entry_fn().cfg;
  REQUIRE(cfg.blocks.size() == 4);
  REQUIRE(cfg.edges.size() == 4);

  const Stmt* cond = stmt_at(p, "main", "1");
  const Stmt* then_stmt = stmt_at(p, "main", "1.0.0");
  const Stmt* else_stmt = stmt_at(p, "main", "1.1.0");
  const Stmt* join_stmt = stmt_at(p, "main", "2");
  int b0 = cond->block, b1 = then_stmt->block, b2 = else_stmt->block, b3 = join_stmt->block;
  REQUIRE(b0 == 0);
  REQUIRE(cfg.exit == b3);

  auto has_edge = [&](int s, int d, EdgeLabel l) {
    for (const CfgEdge& e : cfg.edges)
      if (e.src == s && e.dst == d && e.label == l) return true;
    return false;
  };
  REQUIRE(has_edge(b0, b1, EdgeLabel::True));
  REQUIRE(has_edge(b0, b2, EdgeLabel::False));
  REQUIRE(has_edge(b1, b3, EdgeLabel::Fallthrough));
  REQUIRE(has_edge(b2, b3, EdgeLabel::Fallthrough));
}

TEST_CASE("if without else gets a direct false edge to the join") {
  Program p = parse1(
      "fn main(input: bytes) {\n"
      "    if len(input) > 0 {\n"
      "        let x = 1;\n"
      "    }\n"
      "    halt;\n"
      "}\n");
  const Cfg& cfg = *p.entry_fn().cfg;
  REQUIRE(cfg.blocks.size() == 3);
  REQUIRE(cfg.edges.size() == 3);
  REQUIRE(count_edges(cfg, EdgeLabel::True) == 1);
  REQUIRE(count_edges(cfg, EdgeLabel::False) == 1);
  REQUIRE(count_edges(cfg, EdgeLabel::Fallthrough) == 1);
}

TEST_CASE("while builds exactly one back-edge") {
  Program p = parse1(
      "fn main(input: bytes) {\n"
      "    let i = 0;\n"
      "    while i < 3 {\n"
      "        i = i + 1;\n"
      "    }\n"
      "    halt;\n"
      "}\n");
  const Cfg& cfg = *p.entry_fn().cfg;
  REQUIRE(cfg.blocks.size() == 4);
  int back_edges = 0;
  for (const CfgEdge& e : cfg.edges)
    if (e.dst <= e.src) ++back_edges;
  REQUIRE(back_edges == 1);

  const Stmt* loop = stmt_at(p, "main", "1");
  int header = loop->block;
  // the back-edge re-enters the loop header
  for (const CfgEdge& e : cfg.edges)
    if (e.dst <= e.src) REQUIRE(e.dst == header);
  REQUIRE(cfg.exit != header);
}

TEST_CASE("function starting with a loop reuses the entry block as header") {
  Program p = parse1(
      "fn main(input: bytes) {\n"
      "    while len(input) > 0 {\n"
      "        halt;\n"
      "    }\n"
      "    halt;\n"
      "}\n");
  const Cfg& cfg = *p.entry_fn().cfg;
  const Stmt* loop = stmt_at(p, "main", "0");
  REQUIRE(loop->block == cfg.entry);
  // body halts, so there is no back-edge
  for (const CfgEdge& e : cfg.edges) REQUIRE(e.dst > e.src);
  REQUIRE(cfg.blocks.size() == 3);
}

TEST_CASE("halting branches do not flow onward") {
  Program p = parse1(
      "fn main(input: bytes) {\n"
      "    if len(input) > 0 {\n"
      "        halt;\n"
      "    } else {\n"
      "        halt;\n"
      "    }\n"
      "}\n");
  const Cfg& cfg = *p.entry_fn().cfg;
  REQUIRE(cfg.blocks.size() == 4);
  // halt ends the run: neither branch block has an outgoing edge
  const Stmt* then_halt = stmt_at(p, "main", "0.0.0");
  const Stmt* else_halt = stmt_at(p, "main", "0.1.0");
  for (const CfgEdge& e : cfg.edges) {
    REQUIRE(e.src != then_halt->block);
    REQUIRE(e.src != else_halt->block);
  }

  // a function that cannot return is marked as such; one that can is not
  REQUIRE(!cfg.returns);
  Program q = parse1("fn main(input: bytes) { let x = 1; halt; }");
  REQUIRE(!q.entry_fn().cfg->returns);
  Program r = parse1(
      "fn f(x: int) -> int {\n"
      "    return x;\n"
      "}\n"
      "fn main(input: bytes) {\n"
      "    let y = f(1);\n"
      "    halt;\n"
      "}\n");
  REQUIRE(r.fn("f").cfg->returns);
}

TEST_CASE("operator precedence and literals") {
  SECTION("multiplication binds tighter than addition") {
    auto e = parse_condition("1 + 2 * 3");
    REQUIRE(expr_source(*e) == "1 + 2 * 3");
    REQUIRE(e->bin_op == BinOp::Add);
    REQUIRE(e->b->bin_op == BinOp::Mul);
  }
  SECTION("parenthesized groups survive printing") {
    auto e = parse_condition("(1 + 2) * 3");
    REQUIRE(e->bin_op == BinOp::Mul);
    REQUIRE(expr_source(*e) == "(1 + 2) * 3");
  }
  SECTION("and binds tighter than or") {
    auto e = parse_condition("a && b || c");
    REQUIRE(e->bin_op == BinOp::Or);
    REQUIRE(e->a->bin_op == BinOp::And);
  }
  SECTION("comparisons do not chain") {
    REQUIRE_THROWS_AS(parse_condition("1 < 2 < 3"), SyntaxError);
  }
  SECTION("character literals are ints") {
    auto e = parse_condition("'A'");
    REQUIRE(e->kind == ExprKind::IntLit);
    REQUIRE(e->int_val == 65);
  }
  SECTION("hex literals") {
    auto e = parse_condition("0xff");
    REQUIRE(e->int_val == 255);
  }
  SECTION("bytes literals round-trip escapes") {
    auto e = parse_condition("b\"A\\x00\\xff\\\"\"");
    REQUIRE(e->kind == ExprKind::BytesLit);
    REQUIRE(e->bytes_val == std::vector<uint8_t>{0x41, 0x00, 0xff, 0x22});
    std::string printed = expr_source(*e);
    auto e2 = parse_condition(printed);
    REQUIRE(e2->bytes_val == e->bytes_val);
    REQUIRE(expr_source(*e2) == printed);
  }
  SECTION("unary minus nests") {
    auto e = parse_condition("-(1 + 2)");
    REQUIRE(e->kind == ExprKind::Unary);
    REQUIRE(expr_source(*e) == "-(1 + 2)");
  }
  SECTION("trailing tokens rejected") {
    REQUIRE_THROWS_AS(parse_condition("1 + "), SyntaxError);
    REQUIRE_THROWS_AS(parse_condition("1 1"), SyntaxError);
    REQUIRE_THROWS_AS(parse_condition(""), SyntaxError);
  }
}

TEST_CASE("record literals are banned at condition top level") {
  const char* prefix =
      "record Pt { x: int }\n"
      "fn main(input: bytes) {\n";
  REQUIRE_THROWS_AS(
      parse1(std::string(prefix) + "    if Pt { x: 1 }.x > 0 { halt; }\n    halt;\n}\n"),
      SyntaxError);
  // parentheses lift the restriction
  Program ok =
      parse1(std::string(prefix) + "    if (Pt { x: 1 }).x > 0 { halt; }\n    halt;\n}\n");
  REQUIRE(ok.functions.size() == 1);
}

TEST_CASE("checker rejects ill-formed programs") {
  auto wrap = [](const std::string& body) {
    return "fn main(input: bytes) {\n" + body + "\n    halt;\n}\n";
  };
  SECTION("unknown variable") {
    REQUIRE_THROWS_WITH(parse1(wrap("    let x = nope;")),
                        ContainsSubstring("unknown variable 'nope'"));
  }
  SECTION("bytes equality points at eq_bytes") {
    REQUIRE_THROWS_WITH(parse1(wrap("    let x = input == input;")),
                        ContainsSubstring("eq_bytes"));
  }
  SECTION("shadowing is rejected") {
    REQUIRE_THROWS_WITH(parse1(wrap("    let x = 1;\n    let x = 2;")),
                        ContainsSubstring("shadowing"));
    REQUIRE_THROWS_WITH(
        parse1(wrap("    if len(input) > 0 {\n        let input = 1;\n    }")),
        ContainsSubstring("shadowing"));
  }
  SECTION("unreachable statement") {
    REQUIRE_THROWS_WITH(parse1(wrap("    halt;\n    let x = 1;")),
                        ContainsSubstring("unreachable"));
    REQUIRE_THROWS_WITH(
        parse1(wrap("    if len(input) > 0 {\n        halt;\n    } else {\n"
                    "        halt;\n    }\n    let x = 1;")),
        ContainsSubstring("unreachable"));
  }
  SECTION("condition must be bool") {
    REQUIRE_THROWS_WITH(parse1(wrap("    if 1 {\n        halt;\n    }")),
                        ContainsSubstring("must be bool"));
  }
  SECTION("canary and guard conditions are call-free") {
    std::string src =
        "fn flag(input: bytes) -> bool { return len(input) > 0; }\n"
        "fn main(input: bytes) {\n    canary(flag(input));\n    halt;\n}\n";
    REQUIRE_THROWS_WITH(parse1(src), ContainsSubstring("not allowed in canary or guard"));
    // builtins are fine
    Program ok = parse1(wrap("    canary(len(input) > 0);"));
    REQUIRE(ok.canary_sites.size() == 1);
  }
  SECTION("guard id must not be empty") {
    REQUIRE_THROWS_WITH(parse1(wrap("    guard(\"\", true);")),
                        ContainsSubstring("guard id"));
  }
  SECTION("void function results cannot be bound") {
    std::string src =
        "fn ping(input: bytes) { halt; }\n"
        "fn main(input: bytes) {\n    let x = ping(input);\n    halt;\n}\n";
    REQUIRE_THROWS_WITH(parse1(src), ContainsSubstring("returns no value"));
  }
  SECTION("non-void function must return on all paths") {
    std::string src = "fn f(x: int) -> int {\n    if x > 0 {\n        return 1;\n    }\n}\n"
                      "fn main(input: bytes) { halt; }\n";
    REQUIRE_THROWS_WITH(parse1(src), ContainsSubstring("without returning"));
  }
  SECTION("arity and argument types") {
    std::string src =
        "fn add(a: int, b: int) -> int { return a + b; }\n"
        "fn main(input: bytes) {\n    let x = add(1);\n    halt;\n}\n";
    REQUIRE_THROWS_WITH(parse1(src), ContainsSubstring("expects 2 argument(s)"));
    std::string src2 =
        "fn add(a: int, b: int) -> int { return a + b; }\n"
        "fn main(input: bytes) {\n    let x = add(1, true);\n    halt;\n}\n";
    REQUIRE_THROWS_WITH(parse1(src2), ContainsSubstring("expects int, got bool"));
  }
  SECTION("builtin argument checks") {
    REQUIRE_THROWS_WITH(parse1(wrap("    let x = len(1);")),
                        ContainsSubstring("must be bytes"));
    REQUIRE_THROWS_WITH(parse1(wrap("    let x = byte_at(input);")),
                        ContainsSubstring("expects 2 argument(s)"));
  }
  SECTION("records cannot be compared") {
    std::string src =
        "record Pt { x: int }\n"
        "fn main(input: bytes) {\n"
        "    let a = Pt { x: 1 };\n    let b = Pt { x: 2 };\n"
        "    let e = a == b;\n    halt;\n}\n";
    REQUIRE_THROWS_WITH(parse1(src), ContainsSubstring("records cannot be compared"));
  }
  SECTION("record literal field coverage") {
    std::string head = "record Pt { x: int, y: int }\nfn main(input: bytes) {\n";
    REQUIRE_THROWS_WITH(parse1(head + "    let a = Pt { x: 1 };\n    halt;\n}\n"),
                        ContainsSubstring("missing field 'y'"));
    REQUIRE_THROWS_WITH(parse1(head + "    let a = Pt { x: 1, z: 2, y: 3 };\n    halt;\n}\n"),
                        ContainsSubstring("no field 'z'"));
    REQUIRE_THROWS_WITH(parse1(head + "    let a = Pt { x: 1, x: 2 };\n    halt;\n}\n"),
                        ContainsSubstring("duplicate field 'x'"));
  }
  SECTION("recursive record types") {
    std::string src =
        "record A { b: B }\nrecord B { a: A }\n"
        "fn main(input: bytes) { halt; }\n";
    REQUIRE_THROWS_WITH(parse1(src), ContainsSubstring("recursive record"));
  }
  SECTION("entry contract") {
    REQUIRE_THROWS_WITH(parse_program("t.ml", "fn other(input: bytes) { halt; }"),
                        ContainsSubstring("'main' is not defined"));
    REQUIRE_THROWS_WITH(parse1("fn main(a: int) { halt; }"),
                        ContainsSubstring("one parameter of type bytes"));
  }
  SECTION("duplicate declarations") {
    REQUIRE_THROWS_WITH(
        parse1("fn main(input: bytes) { halt; }\nfn main(input: bytes) { halt; }"),
        ContainsSubstring("duplicate function"));
    REQUIRE_THROWS_WITH(parse1("fn len(input: bytes) { halt; }"),
                        ContainsSubstring("builtin"));
  }
}

TEST_CASE("statement paths serialize and resolve") {
  REQUIRE(path_to_string({4, 0, 2}) == "4.0.2");
  REQUIRE(path_from_string("4.0.2") == StmtPath{4, 0, 2});
  REQUIRE(path_from_string("17") == StmtPath{17});
  REQUIRE_THROWS_AS(path_from_string(""), ConfigError);
  REQUIRE_THROWS_AS(path_from_string("1..2"), ConfigError);
  REQUIRE_THROWS_AS(path_from_string("a"), ConfigError);

  // every walked path resolves back to the same statement
  Program p = load_corpus("chunkpng");
  for (const auto& [name, fn] : p.functions) {
    walk_statements(fn, [&](const Stmt& s, const StmtPath& path) {
      ResolvedPoint rp = resolve_point(p, ProgramPoint{name, path, Position::Before});
      REQUIRE(rp.stmt == &s);
      REQUIRE((*rp.list)[rp.index].get() == &s);
    });
  }
}

TEST_CASE("call graph and canary sites of the chunk decoder") {
  Program p = load_corpus("chunkpng");
  REQUIRE(p.function_order ==
          std::vector<std::string>{"read_chunk_len", "set_plte", "read_info",
                                   "apply_palette", "decode", "main"});
  // callees in first-call-site order
  REQUIRE(p.callee_names.at("main") == std::vector<std::string>{"read_info", "decode"});
  REQUIRE(p.callee_names.at("read_info") ==
          std::vector<std::string>{"read_chunk_len", "set_plte"});
  REQUIRE(p.callee_names.at("decode") == std::vector<std::string>{"apply_palette"});
  // callers sorted by name
  REQUIRE(p.caller_names.at("apply_palette") == std::vector<std::string>{"decode"});
  REQUIRE(p.caller_names.at("set_plte") == std::vector<std::string>{"read_info"});

  REQUIRE(p.canary_sites.size() == 1);
  REQUIRE(p.canary_sites[0].function == "apply_palette");
  REQUIRE(p.canary_sites[0].path == StmtPath{0});
  REQUIRE(expr_source(*p.canary_sites[0].stmt->expr) == "info.plte_size > 3");

  // call depths from the entry point
  auto depths = call_depths(p);
  REQUIRE(depths.at("main") == 0);
  REQUIRE(depths.at("read_info") == 1);
  REQUIRE(depths.at("decode") == 1);
  REQUIRE(depths.at("read_chunk_len") == 2);
  REQUIRE(depths.at("set_plte") == 2);
  REQUIRE(depths.at("apply_palette") == 2);
}

TEST_CASE("point ordering prefers shallower locations") {
  Program p = load_corpus("chunkpng");
  auto depths = call_depths(p);
  auto pt = [](const std::string& fn, const std::string& path, Position pos) {
    return ProgramPoint{fn, path_from_string(path), pos};
  };
  // smaller call depth wins
  REQUIRE(is_shallower(depths, pt("main", "0", Position::Before),
                       pt("read_info", "0", Position::Before)));
  REQUIRE(is_shallower(depths, pt("decode", "0", Position::Before),
                       pt("apply_palette", "0", Position::Before)));
  // within a function, lexicographically earlier paths win
  REQUIRE(is_shallower(depths, pt("read_info", "3", Position::Before),
                       pt("read_info", "4", Position::Before)));
  REQUIRE(is_shallower(depths, pt("read_info", "3.0.1", Position::Before),
                       pt("read_info", "4", Position::Before)));
  // before beats after at the same statement
  REQUIRE(is_shallower(depths, pt("read_info", "3", Position::Before),
                       pt("read_info", "3", Position::After)));
  // equal depth, different functions: not comparable
  REQUIRE_FALSE(is_shallower(depths, pt("read_info", "0", Position::Before),
                             pt("decode", "0", Position::Before)));
  REQUIRE_FALSE(is_shallower(depths, pt("decode", "0", Position::Before),
                             pt("read_info", "0", Position::Before)));
  // irreflexive
  REQUIRE_FALSE(is_shallower(depths, pt("main", "0", Position::Before),
                             pt("main", "0", Position::Before)));
}

TEST_CASE("printing is stable under reparse") {
  auto stable = [](const Program& p) {
    std::vector<SourceFile> printed = print_program(p);
    Program p2 = parse_program(printed, p.entry);
    std::vector<SourceFile> printed2 = print_program(p2);
    REQUIRE(printed.size() == printed2.size());
    for (size_t i = 0; i < printed.size(); ++i) {
      REQUIRE(printed[i].path == printed2[i].path);
      REQUIRE(printed[i].text == printed2[i].text);
    }
    // block structure is preserved as well
    for (const auto& [name, fn] : p.functions) {
      REQUIRE(p2.functions.at(name).cfg->blocks.size() == fn.cfg->blocks.size());
      REQUIRE(p2.functions.at(name).cfg->edges.size() == fn.cfg->edges.size());
    }
  };
  for (const char* name : {"chunkpng", "bytemaze", "flagchain", "overflow", "gatekeeper"})
    stable(load_corpus(name));

  // tricky shapes: else-if chains, nested records, bytes escapes
  stable(parse1(
      "record Hdr { tag: int, ok: bool }\n"
      "fn classify(h: Hdr) -> int {\n"
      "    if h.tag == 'A' {\n"
      "        return 1;\n"
      "    } else if h.tag == 'B' && h.ok {\n"
      "        return 2;\n"
      "    } else if h.tag > 100 {\n"
      "        return 3;\n"
      "    } else {\n"
      "        return 4;\n"
      "    }\n"
      "}\n"
      "fn main(input: bytes) {\n"
      "    let h = Hdr { tag: 'A', ok: eq_bytes(slice(input, 0, 1), b\"\\x00z\\\"q\") };\n"
      "    let c = classify(h);\n"
      "    while c > 0 {\n"
      "        c = c - 1;\n"
      "    }\n"
      "    halt;\n"
      "}\n"));
}

TEST_CASE("canonical sources print byte-identically") {
  std::string canonical =
      "record Pt {\n"
      "    x: int,\n"
      "    y: int,\n"
      "}\n"
      "\n"
      "fn main(input: bytes) {\n"
      "    let p = Pt { x: 1, y: 2 };\n"
      "    if p.x > 0 {\n"
      "        p.y = p.y - 1;\n"
      "    } else if p.x < 0 {\n"
      "        p.y = 0;\n"
      "    }\n"
      "    while p.y > 0 && len(input) > 0 {\n"
      "        p.y = p.y / 2;\n"
      "    }\n"
      "    guard(\"g0\", p.y == 0 || p.x != 3);\n"
      "    canary(!(p.x == 1));\n"
      "    halt;\n"
      "}\n";
  Program p = parse1(canonical);
  std::vector<SourceFile> printed = print_program(p);
  REQUIRE(printed.size() == 1);
  REQUIRE(printed[0].text == canonical);
}

TEST_CASE("instrumentation splices guards without renumbering blocks") {
  Program p = load_corpus("chunkpng");
  Predicate pred;
  pred.id = "wp1";
  pred.location = {"read_info", path_from_string("3"), Position::After};
  pred.condition = "info.found_plte";

  Program q = instrument(p, pred);

  // the guard landed between the loop and the return
  const Function& rf = q.functions.at("read_info");
  REQUIRE(rf.body.size() == p.functions.at("read_info").body.size() + 1);
  const Stmt* g = rf.body[4].get();
  REQUIRE(g->kind == StmtKind::Guard);
  REQUIRE(g->name == "wp1");
  REQUIRE(expr_source(*g->expr) == "info.found_plte");
  REQUIRE(rf.body[5]->kind == StmtKind::Return);

  // block ids of all original statements are unchanged
  for (const auto& [name, fn] : p.functions) {
    const Function& fn2 = q.functions.at(name);
    REQUIRE(fn.cfg->blocks.size() == fn2.cfg->blocks.size());
    REQUIRE(fn.cfg->block_keys == fn2.cfg->block_keys);
    std::vector<const Stmt*> orig, instr;
    walk_statements(fn, [&](const Stmt& s, const StmtPath&) { orig.push_back(&s); });
    walk_statements(fn2, [&](const Stmt& s, const StmtPath&) {
      if (s.kind != StmtKind::Guard) instr.push_back(&s);
    });
    REQUIRE(orig.size() == instr.size());
    for (size_t i = 0; i < orig.size(); ++i) {
      REQUIRE(orig[i]->kind == instr[i]->kind);
      REQUIRE(orig[i]->block == instr[i]->block);
    }
  }

  // and the edges match too
  for (const auto& [name, fn] : p.functions) {
    const Cfg& a = *fn.cfg;
    const Cfg& b = *q.functions.at(name).cfg;
    REQUIRE(a.edges.size() == b.edges.size());
    for (size_t i = 0; i < a.edges.size(); ++i) {
      REQUIRE(a.edges[i].src == b.edges[i].src);
      REQUIRE(a.edges[i].dst == b.edges[i].dst);
      REQUIRE(a.edges[i].label == b.edges[i].label);
    }
  }
}

TEST_CASE("instrumentation insertion positions") {
  Program p = parse1(
      "fn main(input: bytes) {\n"
      "    let a = 1;\n"
      "    let b = 2;\n"
      "    let c = 3;\n"
      "    halt;\n"
      "}\n");
  auto mk = [](const std::string& id, const std::string& path, Position pos) {
    Predicate pr;
    pr.id = id;
    pr.location = {"main", path_from_string(path), pos};
    pr.condition = "a > 0";
    return pr;
  };

  SECTION("before and after the same statement") {
    Program q = instrument(p, PredicateSet{mk("w1", "1", Position::Before),
                                           mk("w2", "1", Position::After)});
    const Function& fn = q.entry_fn();
    REQUIRE(fn.body.size() == 6);
    REQUIRE(fn.body[1]->kind == StmtKind::Guard);
    REQUIRE(fn.body[1]->name == "w1");
    REQUIRE(fn.body[2]->name == "b");
    REQUIRE(fn.body[3]->kind == StmtKind::Guard);
    REQUIRE(fn.body[3]->name == "w2");
  }
  SECTION("same anchor keeps predicate order") {
    Program q = instrument(p, PredicateSet{mk("w1", "2", Position::Before),
                                           mk("w2", "2", Position::Before),
                                           mk("w3", "0", Position::After)});
    const Function& fn = q.entry_fn();
    REQUIRE(fn.body.size() == 7);
    REQUIRE(fn.body[1]->name == "w3");
    REQUIRE(fn.body[3]->name == "w1");
    REQUIRE(fn.body[4]->name == "w2");
    REQUIRE(fn.body[5]->name == "c");
  }
  SECTION("guard conditions must typecheck in scope") {
    Predicate bad = mk("w1", "0", Position::After);
    bad.condition = "c > 0";  // c is declared later
    REQUIRE_THROWS_AS(instrument(p, bad), TypeError);
    Predicate ok = mk("w2", "2", Position::After);
    ok.condition = "c > 0";
    REQUIRE(instrument(p, ok).functions.size() == 1);
  }
  SECTION("guard conditions must be bool and call-free") {
    Predicate bad = mk("w1", "1", Position::After);
    bad.condition = "a + 1";
    REQUIRE_THROWS_WITH(instrument(p, bad), ContainsSubstring("must be bool"));
  }
  SECTION("syntax errors surface") {
    Predicate bad = mk("w1", "1", Position::After);
    bad.condition = "a >";
    REQUIRE_THROWS_AS(instrument(p, bad), SyntaxError);
  }
  SECTION("bad anchors") {
    Predicate bad = mk("w1", "9", Position::Before);
    REQUIRE_THROWS_AS(instrument(p, bad), AnchorError);
    bad = mk("w1", "0.0.0", Position::Before);  // let has no nested blocks
    REQUIRE_THROWS_AS(instrument(p, bad), AnchorError);
    bad = mk("w1", "1.0", Position::Before);  // even-length path
    REQUIRE_THROWS_AS(instrument(p, bad), AnchorError);
    bad.location.function = "nope";
    bad.location.path = path_from_string("0");
    REQUIRE_THROWS_AS(instrument(p, bad), AnchorError);
  }
  SECTION("guard ids are validated") {
    Predicate bad = mk("has space", "1", Position::Before);
    REQUIRE_THROWS_AS(instrument(p, bad), InvalidArgumentError);
    REQUIRE_THROWS_AS(
        instrument(p, PredicateSet{mk("w1", "1", Position::Before),
                                   mk("w1", "2", Position::Before)}),
        InvalidArgumentError);
  }
}

TEST_CASE("patch files round-trip") {
  Patch patch;
  patch.target = "chunkpng";
  Predicate pr;
  pr.id = "wp1";
  pr.location = {"read_info", path_from_string("3"), Position::After};
  pr.condition = "info.found_plte";
  pr.hypothesis = "palette must be recorded before decode";
  pr.iteration = 2;
  pr.backend = "scripted";
  patch.predicates.push_back(pr);

  std::string text = patch_to_string(patch);
  Patch back = patch_from_string(text);
  REQUIRE(back.target == patch.target);
  REQUIRE(back.predicates.size() == 1);
  REQUIRE(back.predicates[0].id == "wp1");
  REQUIRE(back.predicates[0].location == patch.predicates[0].location);
  REQUIRE(back.predicates[0].condition == "info.found_plte");
  REQUIRE(back.predicates[0].hypothesis == pr.hypothesis);
  REQUIRE(back.predicates[0].iteration == 2);
  REQUIRE(back.predicates[0].backend == "scripted");
  // serialization is deterministic
  REQUIRE(patch_to_string(back) == text);

  REQUIRE_THROWS_AS(patch_from_string("not json"), ConfigError);
  REQUIRE_THROWS_AS(patch_from_string("{\"format\": \"other\"}"), ConfigError);
  REQUIRE_THROWS_AS(patch_from_string("{\"format\": \"waypoint-patch-v1\"}"), ConfigError);
}

TEST_CASE("applying a patch equals direct instrumentation") {
  Program p = load_corpus("chunkpng");
  Predicate pr;
  pr.id = "wp1";
  pr.location = {"read_info", path_from_string("3"), Position::After};
  pr.condition = "info.found_plte";
  Patch patch{"chunkpng", {pr}};
  Patch loaded = patch_from_string(patch_to_string(patch));
  Program q1 = instrument(p, pr);
  Program q2 = instrument(p, loaded.predicates);
  std::vector<SourceFile> s1 = print_program(q1);
  std::vector<SourceFile> s2 = print_program(q2);
  REQUIRE(s1.size() == s2.size());
  for (size_t i = 0; i < s1.size(); ++i) REQUIRE(s1[i].text == s2[i].text);
}

TEST_CASE("identifier occurrences scan for the reference index") {
  std::string src =
      "fn main(input: bytes) {\n"
      "    let count = len(input);\n"
      "    count = count + 1; // count is also a word in this comment\n"
      "    halt;\n"
      "}\n";
  auto occ = identifier_occurrences("t.ml", src);
  int count_hits = 0;
  for (const auto& o : occ)
    if (o.name == "count") ++count_hits;
  REQUIRE(count_hits == 3);  // comments and strings are not scanned
  int input_hits = 0;
  for (const auto& o : occ)
    if (o.name == "input") ++input_hits;
  REQUIRE(input_hits == 2);  // declaration plus one use
}
