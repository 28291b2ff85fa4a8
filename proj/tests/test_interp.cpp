#include <doctest.h>

#include <functional>
#include <random>

#include "coeffect/harness.hpp"
#include "coeffect/interp.hpp"
#include "support.hpp"

using namespace coeffect;

namespace {

Value I(std::int64_t n) { return Value{n}; }
Value R(const char* r) { return Value{Ref{r}}; }

Trace run(const Program& p, const Memory& mem, std::size_t budget = Interpreter::kDefaultBudget) {
  Interpreter in(p.table);
  return in.run(Config{p.main, mem}, budget);
}

// Symmetric, reflexive, transitive closure of field edges by iteration.
std::set<std::pair<std::string, std::string>> naive_sharing(const Memory& mem) {
  std::set<std::pair<std::string, std::string>> rel;
  for (const auto& [x, obj] : mem) {
    rel.insert({x, x});
    for (const auto& v : obj.fields)
      if (auto r = std::get_if<Ref>(&v); r && mem.count(r->name)) {
        rel.insert({x, r->name});
        rel.insert({r->name, x});
      }
  }
  bool changed = true;
  while (changed) {
    changed = false;
    auto snapshot = rel;
    for (const auto& [a, b] : snapshot)
      for (const auto& [c, d] : snapshot)
        if (b == c && rel.insert({a, d}).second) changed = true;
  }
  return rel;
}

std::set<std::string> dfs_reach(const Memory& mem, const std::string& x) {
  std::set<std::string> seen;
  std::function<void(const std::string&)> go = [&](const std::string& y) {
    if (!seen.insert(y).second) return;
    auto it = mem.find(y);
    if (it == mem.end()) return;
    for (const auto& v : it->second.fields)
      if (auto r = std::get_if<Ref>(&v)) go(r->name);
  };
  go(x);
  return seen;
}

}  // namespace

TEST_SUITE("interp") {
  TEST_CASE("block example runs to the expected memory") {
    Program p = support::load("ex21.fjc");
    Memory mem = support::load_mem("ex21.mem.json");
    Trace t = run(p, mem);
    REQUIRE(t.outcome == Trace::Outcome::Done);
    CHECK(t.steps.size() == 5);
    auto v = t.last().expr->as<Var>();
    REQUIRE(v);
    CHECK(v->name == "r1");
    Memory want{{"x", {"C", {R("y"), R("x1")}}},
                {"x1", {"B", {I(0)}}},
                {"y", {"B", {I(1)}}},
                {"r0", {"B", {I(2)}}},
                {"r1", {"C", {R("r0"), R("r0")}}}};
    CHECK(t.last().mem == want);

    Partition s = sharing_rel(t.last().mem);
    CHECK(related(s, "r1", "r0"));
    CHECK_FALSE(related(s, "r1", "x"));
    CHECK(related(s, "x", "y"));
    CHECK(reach(t.last().mem, "r1") == std::set<std::string>{"r1", "r0"});
  }

  TEST_CASE("step rules") {
    Program p = parse_program("class B {int f;} class C {B f1; B f2;} ; x.f1");
    Memory mem{{"x", {"C", {R("b"), R("b")}}}, {"b", {"B", {I(0)}}}};
    Interpreter in(p.table);
    StepResult r = in.step(Config{p.main, mem});
    REQUIRE(r.kind == StepResult::Kind::Stepped);
    CHECK(r.info.rule == "field-access");
    CHECK(equal(*r.next.expr, *make_var("b")));
    CHECK(in.step(r.next).kind == StepResult::Kind::Done);
    CHECK(run(parse_program("class B {int f;} ; 4"), {}).steps.empty());
  }

  TEST_CASE("stuck configurations") {
    Program p = parse_program("class B {int f;} ; b.nope()");
    Memory mem{{"b", {"B", {I(0)}}}};
    Trace t = run(p, mem);
    CHECK(t.outcome == Trace::Outcome::Stuck);
    CHECK_FALSE(t.reason.empty());

    Interpreter in(p.table);
    CHECK(in.step(Config{make_field_access(make_const(1), "f"), {}}).kind == StepResult::Kind::Stuck);
    CHECK(in.step(Config{make_field_access(make_var("q"), "f"), {}}).kind == StepResult::Kind::Stuck);
    CHECK(in.step(Config{make_new("B", {}), {}}).kind == StepResult::Kind::Stuck);
  }

  TEST_CASE("step budget") {
    Program p = parse_program("class A {int f; A loop() {this.loop()}} ; a.loop()");
    Memory mem{{"a", {"A", {I(0)}}}};
    Trace t = run(p, mem, 50);
    CHECK(t.outcome == Trace::Outcome::Budget);
    CHECK(t.steps.size() == 50);
    CHECK(t.configs.size() == 51);
  }

  TEST_CASE("substitution avoids capture") {
    Program p = parse_program("class A {int f; A m(A p) {{A y = new A(1); p}}} ; y.m(y)");
    Memory mem{{"y", {"A", {I(0)}}}};
    Trace t = run(p, mem);
    REQUIRE(t.outcome == Trace::Outcome::Done);
    auto v = t.last().expr->as<Var>();
    REQUIRE(v);
    CHECK(v->name == "y");
  }

  TEST_CASE("imm binders are reported") {
    Program p = parse_program("class B {int f;} ; imm B c = b; c.f");
    Memory mem{{"b", {"B", {I(0)}}}};
    Interpreter in(p.table);
    StepResult r = in.step(Config{p.main, mem});
    CHECK(r.info.rule == "block");
    CHECK(r.info.imm_bindings == std::set<std::string>{"b"});
  }

  TEST_CASE("sharing relation and reachability against oracles") {
    std::mt19937_64 rng(21);
    GenOptions opt;
    for (int i = 0; i < 300; ++i) {
      ClassTable table = gen_class_table(rng, opt);
      Memory mem = gen_memory(table, rng, 3);
      Partition p = sharing_rel(mem);
      auto rel = naive_sharing(mem);
      for (const auto& [x, ox] : mem) {
        for (const auto& [y, oy] : mem) CHECK(related(p, x, y) == (rel.count({x, y}) > 0));
        CHECK(reach(mem, x) == dfs_reach(mem, x));
      }
    }
  }

  TEST_CASE("memory only grows along a trace") {
    GenOptions opt;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      Generated g = gen_random_program(seed, opt);
      Trace t = run(g.program, g.mem, 2000);
      CHECK(t.steps.size() <= 2000);
      CHECK(t.steps.size() + 1 == t.configs.size());
      for (std::size_t i = 1; i < t.configs.size(); ++i)
        for (const auto& [x, obj] : t.configs[i - 1].mem) {
          REQUIRE(t.configs[i].mem.count(x));
          CHECK(t.configs[i].mem.at(x).cls == obj.cls);
        }
    }
  }

  TEST_CASE("reduction is deterministic") {
    Generated g = gen_random_program(7, {});
    Trace a = run(g.program, g.mem, 500), b = run(g.program, g.mem, 500);
    REQUIRE(a.configs.size() == b.configs.size());
    for (std::size_t i = 0; i < a.configs.size(); ++i) {
      CHECK(equal(*a.configs[i].expr, *b.configs[i].expr));
      CHECK(a.configs[i].mem == b.configs[i].mem);
    }
  }

  TEST_CASE("capsule result is fresh") {
    Program p = support::load("ex22_e1.fjc");
    Memory mem = support::load_mem("ex22.mem.json");
    Trace t = run(p, mem);
    REQUIRE(t.outcome == Trace::Outcome::Done);
    std::string res = t.last().expr->as<Var>()->name;
    Partition s = sharing_rel(t.last().mem);
    CHECK_FALSE(related(s, res, "a1"));
    CHECK_FALSE(related(s, res, "b0"));

    Program q = support::load("ex22_e2.fjc");
    Trace u = run(q, mem);
    REQUIRE(u.outcome == Trace::Outcome::Done);
    CHECK(related(sharing_rel(u.last().mem), u.last().expr->as<Var>()->name, "a1"));
  }

  TEST_CASE("trace lines") {
    Program p = support::load("ex21.fjc");
    Memory mem = support::load_mem("ex21.mem.json");
    nlohmann::json j = trace_line(0, "block", Config{p.main, mem});
    CHECK(j.contains("memory"));
    CHECK(j.dump().find("\"x1\"") != std::string::npos);
  }
}
