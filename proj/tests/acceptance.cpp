// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>

#include "coeffect/harness.hpp"
#include "coeffect/lambda.hpp"
#include "laws.hpp"
#include "support.hpp"

using namespace coeffect;

namespace {

using GroupSet = std::set<std::pair<std::set<std::string>, bool>>;

struct Outcome {
  bool ok = true;
  std::string note;
  void require(bool cond, const std::string& what) {
    if (!cond && ok) note = what;
    ok = ok && cond;
  }
};

TypeEnv classes(std::initializer_list<std::pair<const char*, const char*>> xs) {
  TypeEnv out;
  for (auto [x, c] : xs) out[x] = Type::cls(c);
  return out;
}

GroupSet sharing_groups(const std::string& file, const TypeEnv& env) {
  Program p = support::load(file);
  LinkSupply supply;
  SharingChecker chk(p.table, supply);
  return support::groups(canonical(chk.infer(env, *p.main).ctx));
}

std::string modifier_error(const std::string& file) {
  Program p = support::load(file);
  LinkSupply supply;
  ModifierChecker chk(p.table, supply);
  try {
    chk.infer({}, *p.main);
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

struct Loaded {
  Program program;
  Subject subject;
};

std::unique_ptr<Loaded> subject(const std::string& file, const std::string& mem = "") {
  auto l = std::make_unique<Loaded>();
  l->program = support::load(file);
  l->subject = Subject{file, &l->program.table, l->program.main, {}, {}};
  if (!mem.empty()) l->subject.mem = support::load_mem(mem);
  return l;
}

std::string suite_note(const Suite& s) {
  std::string out = s.name + ": " + std::to_string(s.cases.size()) + " cases, " + std::to_string(s.failures()) +
                    " failures";
  for (const auto& c : s.cases)
    if (c.applicable && !c.passed) return out + " (" + c.name + ": " + c.detail + ")";
  return out;
}

// ---------------------------------------------------------------------------

Outcome star() {
  Outcome o;
  Program p = support::load("star.fjc");
  LinkSupply supply;
  SharingChecker chk(p.table, supply);
  Judgment j = chk.infer(classes({{"x", "C"}, {"y", "B"}, {"z1", "B"}, {"z2", "B"}}), *p.main);
  o.require(j.type == Type::cls("C"), "type");
  o.require(support::groups(canonical(j.ctx)) == GroupSet{{{"x", "y"}, false}, {{"z1", "z2"}, true}}, "groups");
  return o;
}

Outcome calls() {
  Outcome o;
  o.require(sharing_groups("method_m.fjc", classes({{"x", "C"}, {"z", "B"}, {"y1", "B"}, {"y2", "B"}})) ==
                GroupSet{{{"x", "z"}, false}, {{"y1", "y2"}, true}},
            "x.m(z,y1,y2)");
  o.require(sharing_groups("method_m_shared.fjc", classes({{"x", "C"}, {"z", "B"}, {"y", "B"}})) ==
                GroupSet{{{"x", "y", "z"}, true}},
            "x.m(z,z,y)");
  return o;
}

Outcome capsules() {
  Outcome o;
  Memory mem = support::load_mem("ex22.mem.json");
  Program e1 = support::load("ex22_e1.fjc"), e2 = support::load("ex22_e2.fjc");
  LinkSupply s;
  ConfigJudgment c1 = type_configuration(e1.table, *e1.main, mem, s);
  ConfigJudgment c2 = type_configuration(e2.table, *e2.main, mem, s);
  o.require(is_capsule(c1.expr.ctx), "e1 not a capsule");
  o.require(!is_capsule(c2.expr.ctx), "e2 reported capsule");
  Canonical groups = canonical(c2.expr.ctx);
  const Group* g = groups.group_of("a1");
  o.require(g && g->contains_res, "a1 group lacks res in e2");
  return o;
}

Outcome modifier_goldens() {
  Outcome o;
  o.require(modifier_error("ex51_read_assign.fjc") == codes::ReadAssign, "read receiver assignment");
  o.require(modifier_error("ex51_caps_line1.fjc").empty(), "caps with line (1)");
  o.require(modifier_error("ex51_caps_line2.fjc") == codes::Promote, "caps with line (2)");
  o.require(modifier_error("double_caps.fjc") == codes::Linear, "double caps use");
  return o;
}

Outcome memory_lemma() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::size_t mismatches = 0;
  for (System sys : {System::Sharing, System::Modifiers}) {
    GenOptions opt;
    opt.system = sys;
    for (int i = 0; i < 1000; ++i) {
      ClassTable table = gen_class_table(rng, opt);
      std::set<std::string> pool;
      Memory mem = gen_memory(table, rng, 3, sys == System::Modifiers ? &pool : nullptr);
      LinkSupply supply;
      ModAssignment mods;
      TypeCtx ctx;
      if (sys == System::Modifiers) {
        mods = gen_mod_assignment(table, mem, pool, rng);
        ctx = type_memory_mod(table, mem, mods, supply).ctx;
      } else {
        ctx = type_memory(table, mem, supply).ctx;
      }
      auto up_to_mut = [&](const std::string& r) {
        return sys == System::Sharing || mod_leq(mods.at(r), Modifier::mut());
      };
      support::UnionFind uf;
      for (const auto& [x, obj] : mem)
        for (const auto& v : obj.fields)
          if (auto r = std::get_if<Ref>(&v); r && up_to_mut(x) && up_to_mut(r->name)) uf.unite(x, r->name);
      for (const auto& [x, ox] : mem)
        for (const auto& [y, oy] : mem) {
          bool same = !ctx.coeff(x).empty() && ctx.coeff(x) == ctx.coeff(y);
          if (same != uf.same(x, y)) ++mismatches;
        }
    }
  }
  o.require(mismatches == 0, std::to_string(mismatches) + " mismatches");
  if (o.ok) o.note = "2 x 1000 memories";
  return o;
}

Outcome subject_reduction() {
  Outcome o;
  struct Case {
    const char* file;
    const char* mem;
  };
  for (Case c : {Case{"ex21.fjc", "ex21.mem.json"}, Case{"ex22_e1.fjc", "ex22.mem.json"},
                 Case{"ex22_e2.fjc", "ex22.mem.json"}, Case{"ex51_caps_line1.fjc", ""},
                 Case{"ex51_imm_line1.fjc", ""}}) {
    auto l = subject(c.file, c.mem);
    for (System sys : {System::Sharing, System::Modifiers}) {
      Report r = verify_subject_reduction(l->subject, sys);
      bool must_apply = sys == System::Sharing || std::string(c.file) != "ex22_e2.fjc";
      o.require(r.passed && (r.applicable || !must_apply),
                std::string(c.file) + " (" + to_string(sys) + "): " + r.detail);
    }
  }
  for (System sys : {System::Sharing, System::Modifiers}) {
    Suite s = random_sr_suite(sys, 6, 1000);
    o.require(s.failures() == 0 && s.cases.size() >= 1000, suite_note(s));
  }
  if (o.ok) o.note = "corpus + 2 x 1000 random configurations";
  return o;
}

Outcome runtime_guarantees() {
  Outcome o;
  for (System sys : {System::Sharing, System::Modifiers}) {
    Suite s = random_capsule_suite(sys, 7, 1000);
    o.require(s.failures() == 0 && s.cases.size() >= 1000, suite_note(s));
  }
  Suite imm = random_imm_suite(7, 1000);
  o.require(imm.failures() == 0 && imm.cases.size() >= 1000, suite_note(imm));

  auto e1 = subject("ex22_e1.fjc", "ex22.mem.json");
  for (System sys : {System::Sharing, System::Modifiers}) {
    Report r = verify_capsule(e1->subject, sys);
    o.require(r.applicable && r.passed, "e1: " + r.detail);
  }
  auto line1 = subject("ex51_imm_line1.fjc");
  Report r1 = verify_immutability(line1->subject);
  o.require(r1.applicable && r1.passed, "imm line (1): " + r1.detail);

  // Negative controls: rejected statically, violation observed dynamically.
  auto e2 = subject("ex22_e2.fjc", "ex22.mem.json");
  o.require(!verify_capsule(e2->subject, System::Sharing).applicable, "e2 accepted as capsule");
  Interpreter in(e2->program.table);
  Trace t = in.run(Config{e2->subject.expr, e2->subject.mem});
  auto v = t.last().expr->as<Var>();
  o.require(v && related(sharing_rel(t.last().mem), v->name, "a1"), "e2 result does not share with a1");

  auto line2 = subject("ex51_imm_line2.fjc");
  o.require(!verify_immutability(line2->subject).applicable, "imm line (2) accepted");
  Report dyn = verify_immutability(line2->subject, false);
  o.require(dyn.applicable && !dyn.passed, "imm line (2) shows no mutation");

  o.require(modifier_error("double_caps.fjc") == codes::Linear, "double caps accepted");
  if (o.ok) o.note = "3 x 1000 random + corpus + negative controls";
  return o;
}

Outcome algebra() {
  Outcome o;
  std::mt19937_64 rng(8);
  const int n = 10000;
  auto links = [](std::mt19937_64& r) { return laws::random_links(r); };
  o.require(laws::semiring_violations<UsageSemiring>(laws::random_usage, rng, n) == 0, "{0,1,w} laws");
  o.require(laws::semiring_violations<NatSemiring>(laws::random_nat, rng, n) == 0, "nat laws");
  o.require(laws::semiring_violations<LinkSemiring>(links, rng, n) == 0, "link laws");
  o.require(laws::pointwise_module_violations<UsageSemiring>(laws::random_usage, rng, n) == 0, "{0,1,w} module");
  o.require(laws::pointwise_module_violations<NatSemiring>(laws::random_nat, rng, n) == 0, "nat module");
  o.require(laws::pointwise_module_violations<LinkSemiring>(links, rng, n) == 0, "link module");
  o.require(laws::closed_module_violations(rng, n) == 0, "closed-context module");
  if (o.ok) o.note = "10000 cases per law set";
  return o;
}

Outcome lambda_demo() {
  Outcome o;
  using namespace coeffect::lambda;
  auto p = parse_lambda<UsageSemiring>(support::slurp(support::corpus_path("lambda_const.lam")));
  auto cbn = Checker<UsageSemiring>(Strategy::ByName).infer(p.env, *p.term);
  auto cbv = Checker<UsageSemiring>(Strategy::ByValue).infer(p.env, *p.term);
  o.require(cbn.ctx.at("y") == Usage::Zero, "cbn grade of y");
  o.require(cbv.ctx.at("y") != Usage::Zero, "cbv grade of y");
  auto q = parse_lambda<NatSemiring>(support::slurp(support::corpus_path("lambda_const.lam")));
  o.require(Checker<NatSemiring>(Strategy::ByName).infer(q.env, *q.term).ctx.at("y") == 0, "nat cbn");
  o.require(Checker<NatSemiring>(Strategy::ByValue).infer(q.env, *q.term).ctx.at("y") == 1, "nat cbv");
  if (o.ok) o.note = "cbn y:0, cbv y:" + UsageSemiring::to_string(cbv.ctx.at("y"));
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* what;
    std::function<Outcome()> run;
  };
  std::vector<Criterion> all = {
      {1, "golden judgment for field update then fresh object", star},
      {2, "golden call contexts", calls},
      {3, "capsule discrimination", capsules},
      {4, "modifier goldens", modifier_goldens},
      {5, "memory lemma against union-find", memory_lemma},
      {6, "subject reduction", subject_reduction},
      {7, "runtime capsule and immutability", runtime_guarantees},
      {8, "algebra laws", algebra},
      {9, "lambda demo", lambda_demo},
  };
  bool all_ok = true;
  auto t0 = std::chrono::steady_clock::now();
  for (const auto& c : all) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.note = std::string("exception: ") + e.what();
    }
    all_ok = all_ok && o.ok;
    std::cout << "criterion " << c.id << ": " << (o.ok ? "PASS" : "FAIL") << "  " << c.what;
    if (!o.note.empty()) std::cout << " [" << o.note << "]";
    std::cout << std::endl;
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("total %.1fs\n", secs);
  return all_ok ? 0 : 1;
}
