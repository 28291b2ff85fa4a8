#include "coeffect/harness.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include "coeffect/json_io.hpp"
#include "coeffect/parser.hpp"

namespace coeffect {

std::string to_string(System s) { return s == System::Sharing ? "sharing" : "modifiers"; }

namespace {

using K = Modifier::Kind;

Report fail(Report r, std::string detail) {
  r.passed = false;
  r.detail = std::move(detail);
  return r;
}

Report not_applicable(Report r, std::string detail) {
  r.applicable = false;
  r.detail = std::move(detail);
  return r;
}

std::set<std::string> dom_of(const TypeCtx& g) {
  std::set<std::string> out;
  for (const auto& [x, t] : g.types) out.insert(x);
  return out;
}

struct Typed {
  TypeCtx ctx;
  Type type;
  ModAssignment mods;
  TypeCtx expr_ctx;
};

Typed type_config(const ClassTable& table, const Config& c, System sys, const std::set<std::string>& imm,
                  const std::optional<Type>& expected, LinkSupply& supply, const ModAssignment* prior = nullptr,
                  CheckMode mode = CheckMode::Runtime) {
  if (sys == System::Sharing) {
    ConfigJudgment j = type_configuration(table, *c.expr, c.mem, supply);
    return {j.ctx, j.expr.type, {}, j.expr.ctx};
  }
  ModConfigJudgment j = type_configuration_mod(table, *c.expr, c.mem, imm, expected, supply, prior, mode);
  return {j.ctx, j.expr.type, j.mods, j.expr.ctx};
}

void require_methods(const ClassTable& table, System sys, LinkSupply& supply) {
  if (sys == System::Sharing) SharingChecker(table, supply).require_coherent();
  else ModifierChecker(table, supply).require_coherent();
}

}  // namespace

Report verify_subject_reduction(const Subject& s, System sys, std::size_t budget) {
  Report rep;
  rep.name = s.name;
  const ClassTable& table = *s.table;
  LinkSupply supply;
  const std::set<std::string>& imm = s.imm_refs;
  Typed cur;
  try {
    require_methods(table, sys, supply);
    cur = type_config(table, {s.expr, s.mem}, sys, imm, std::nullopt, supply, nullptr, s.initial);
  } catch (const Error& e) {
    return not_applicable(rep, e.describe());
  }
  const Type t0 = cur.type;
  const std::optional<Type> expected = sys == System::Modifiers ? std::optional<Type>(t0) : std::nullopt;

  Interpreter interp(table);
  Config cfg{s.expr, s.mem};
  for (std::size_t i = 0; i < budget; ++i) {
    StepResult r = interp.step(cfg);
    if (r.kind == StepResult::Kind::Done) return rep;
    std::string where = "step " + std::to_string(i + 1);
    if (r.kind == StepResult::Kind::Stuck) return fail(rep, where + ": stuck: " + r.reason);
    where += " (" + r.info.rule + ")";
    auto violation = [&](const Typed& next) -> std::optional<std::string> {
      if (!next.type.same_shape(t0))
        return where + ": type changed from " + t0.to_string() + " to " + next.type.to_string();
      TypeCtx restricted = restrict(sum(cur.ctx, next.ctx), dom_of(cur.ctx), links_of(cur.ctx));
      if (!erased_equal(restricted, cur.ctx))
        return where + ": sharing not preserved: before " + to_string(canonical(cur.ctx)) + ", restricted sum " +
               to_string(canonical(restricted));
      std::string witness;
      if (sys == System::Modifiers && !mod_nondecreasing(cur.ctx, next.ctx, &witness))
        return where + ": modifier decreased: " + witness;
      return std::nullopt;
    };
    // Δ is existential: keep the previous seals and imm references, then only
    // the imm references, then neither.
    ModAssignment imm_only;
    for (const auto& [x, m] : cur.mods)
      if (m.is(K::Imm)) imm_only.emplace(x, m);
    std::optional<Typed> next;
    std::optional<std::string> first_problem;
    const ModAssignment* priors[] = {&cur.mods, &imm_only, nullptr};
    for (const ModAssignment* prior : priors) {
      try {
        Typed cand = type_config(table, r.next, sys, imm, expected, supply, prior);
        auto v = violation(cand);
        if (!v) {
          next = std::move(cand);
          break;
        }
        if (!first_problem) first_problem = v;
      } catch (const Error& e) {
        if (!first_problem) first_problem = where + ": " + print_expr(*r.next.expr) + " does not type: " + e.describe();
      }
      if (sys == System::Sharing) break;
    }
    if (!next) return fail(rep, *first_problem);
    cur = std::move(*next);
    cfg = std::move(r.next);
    ++rep.steps;
  }
  rep.detail = "step budget exhausted";
  return rep;
}

Report verify_capsule(const Subject& s, System sys, std::size_t budget) {
  Report rep;
  rep.name = s.name;
  const ClassTable& table = *s.table;
  LinkSupply supply;
  Typed init;
  try {
    require_methods(table, sys, supply);
    init = type_config(table, {s.expr, s.mem}, sys, s.imm_refs, std::nullopt, supply, nullptr, s.initial);
    if (!init.type.is_class()) return not_applicable(rep, "result is not a reference");
    if (sys == System::Sharing) {
      if (!is_capsule(init.expr_ctx)) return not_applicable(rep, "expression is not a capsule");
    } else {
      init = type_config(table, {s.expr, s.mem}, sys, s.imm_refs, init.type.with_mod(Modifier::caps()), supply,
                         nullptr, s.initial);
    }
  } catch (const Error& e) {
    return not_applicable(rep, e.describe());
  }

  Trace t = Interpreter(table).run({s.expr, s.mem}, budget);
  rep.steps = t.steps.size();
  if (t.outcome != Trace::Outcome::Done) return fail(rep, "evaluation " + to_string(t.outcome) + ": " + t.reason);
  const Config& last = t.last();
  auto y = last.expr->as<Var>();
  if (!y) return fail(rep, "result " + print_expr(*last.expr) + " is not a reference");

  if (sys == System::Sharing) {
    Partition rel = sharing_rel(last.mem);
    for (const auto& [x, obj] : s.mem)
      if (!init.ctx.coeff(x).count(Link::res()) && related(rel, x, y->name))
        return fail(rep, "lent reference " + x + " shares with result " + y->name);
    return rep;
  }

  // Γ′ is chosen step by step so that earlier seals are kept where possible.
  Typed fin = init;
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    try {
      fin = type_config(table, t.configs[i + 1], sys, s.imm_refs, init.type, supply, &fin.mods);
    } catch (const Error& e) {
      return fail(rep, "configuration after step " + std::to_string(i + 1) + " does not type: " + e.describe());
    }
  }
  Partition rel = mod_sharing(last.mem, fin.mods);
  for (const auto& [x, obj] : s.mem) {
    if (!related(rel, x, y->name)) continue;
    const Modifier& before = init.mods.at(x);
    const Modifier& after = fin.mods.at(x);
    if (after.is(K::Mut) || !mod_leq(before, after))
      return fail(rep, "reference " + x + " (" + before.to_string() + " -> " + after.to_string() +
                           ") shares with result " + y->name);
  }
  return rep;
}

Report verify_immutability(const Subject& s, bool require_typed, std::size_t budget) {
  Report rep;
  rep.name = s.name;
  const ClassTable& table = *s.table;
  if (require_typed) {
    try {
      LinkSupply supply;
      require_methods(table, System::Modifiers, supply);
      type_configuration_mod(table, *s.expr, s.mem, s.imm_refs, std::nullopt, supply, nullptr, s.initial);
    } catch (const Error& e) {
      return not_applicable(rep, e.describe());
    }
  }

  std::set<std::string> imm = s.imm_refs;
  std::map<std::string, Object> snapshot;
  auto record = [&](const Memory& mem) {
    for (const auto& x : forced_imm(table, mem, imm))
      for (const auto& y : reach(mem, x))
        if (mem.count(y)) snapshot.emplace(y, mem.at(y));
  };

  Interpreter interp(table);
  Config cfg{s.expr, s.mem};
  record(cfg.mem);
  for (std::size_t i = 0; i < budget; ++i) {
    StepResult r = interp.step(cfg);
    if (r.kind != StepResult::Kind::Stepped) {
      if (r.kind == StepResult::Kind::Stuck) rep.detail = "stuck: " + r.reason;
      return rep;
    }
    for (const auto& [y, obj] : snapshot) {
      const Object& now = r.next.mem.at(y);
      if (!(now == obj)) {
        std::ostringstream os;
        os << "step " << i + 1 << " (" << r.info.rule << ") changed immutable object " << y;
        return fail(rep, os.str());
      }
    }
    for (const auto& x : r.info.imm_bindings) {
      if (imm.count(x)) continue;
      if (require_typed) {
        // tracked only once the configuration types with x imm
        std::set<std::string> with = imm;
        with.insert(x);
        try {
          LinkSupply supply;
          type_configuration_mod(table, *r.next.expr, r.next.mem, with, std::nullopt, supply);
        } catch (const Error&) {
          continue;
        }
      }
      imm.insert(x);
    }
    cfg = std::move(r.next);
    record(cfg.mem);
    ++rep.steps;
  }
  return rep;
}

Report verify_memory_lemma(const ClassTable& table, const Memory& mem, const ModAssignment* mods) {
  Report rep;
  rep.name = "memory";
  LinkSupply supply;
  MemTyping mt;
  Partition rel;
  try {
    if (mods) {
      mt = type_memory_mod(table, mem, *mods, supply);
      rel = mod_sharing(mem, *mods);
    } else {
      mt = type_memory(table, mem, supply);
      rel = sharing_rel(mem);
    }
  } catch (const Error& e) {
    return not_applicable(rep, e.describe());
  }
  for (const auto& [x, ox] : mem)
    for (const auto& [y, oy] : mem) {
      bool same = mt.ctx.coeff(x) == mt.ctx.coeff(y);
      if (same != related(rel, x, y))
        return fail(rep, x + " and " + y + ": coeffects " + (same ? "equal" : "differ") + ", oracle says " +
                             (same ? "unrelated" : "related"));
      if (mods && same && !mod_equiv(mods->at(x), mods->at(y)))
        return fail(rep, x + " and " + y + " share a group with modifiers " + mods->at(x).to_string() + ", " +
                             mods->at(y).to_string());
    }
  if (!mods) return rep;
  for (const auto& [x, ox] : mem) {
    const Modifier& mx = mods->at(x);
    for (const auto& y : reach(mem, x)) {
      const Modifier& my = mods->at(y);
      bool ok = my.is(K::Imm) || (mx.is(K::Mut) && my.is(K::Mut)) || (mx.is_seal() && my.is_seal());
      if (!ok) return fail(rep, y + " (" + my.to_string() + ") is reachable from " + x + " (" + mx.to_string() + ")");
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

bool chance(std::mt19937_64& rng, double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; }

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

int range(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

const char* kClassNames[] = {"A", "B", "C", "D"};

Type random_shape(std::mt19937_64& rng, const std::vector<std::string>& classes, double p_int) {
  if (chance(rng, p_int)) return Type::integer();
  return Type::cls(classes[pick(rng, classes.size())]);
}

Modifier random_local_mod(std::mt19937_64& rng) {
  switch (pick(rng, 8)) {
    case 0: return Modifier::read();
    case 1: return Modifier::imm();
    case 2: return Modifier::caps();
    default: return Modifier::mut();
  }
}

struct Callable {
  std::string cls, method;
  Type ret;
  std::vector<Type> params;
};

class ExprGen {
 public:
  using Env = std::vector<std::pair<std::string, Type>>;

  ExprGen(std::mt19937_64& rng, const std::vector<ClassDecl>& classes, const std::vector<Callable>& callable,
          bool modifiers)
      : rng_(rng), classes_(classes), callable_(callable), modifiers_(modifiers) {
    for (const auto& c : classes_) names_.push_back(c.name);
  }

  ExprPtr gen(const Env& env, const Type& t, int depth) {
    std::vector<int> options{0, 1, 2, 3, 4, 5, 6, 7};
    std::shuffle(options.begin(), options.end(), rng_);
    if (depth <= 0 || chance(rng_, 0.15)) std::stable_partition(options.begin(), options.end(), [](int o) { return o < 2; });
    for (int o : options) {
      if (o >= 2 && depth <= 0) {
        if (o == 2 && t.is_class())
          if (auto e = gen_new(env, t, depth)) return e;
        continue;
      }
      ExprPtr e;
      switch (o) {
        case 0: e = gen_atom(env, t); break;
        case 1: e = t.is_class() ? gen_var(env, t) : nullptr; break;
        case 2: e = t.is_class() ? gen_new(env, t, depth) : nullptr; break;
        case 3: e = gen_field_access(env, t, depth); break;
        case 4: e = gen_field_assign(env, t, depth); break;
        case 5: e = gen_invoke(env, t, depth); break;
        case 6: e = gen_block(env, t, depth); break;
        case 7: e = gen_seq(env, t, depth); break;
      }
      if (e) return e;
    }
    return nullptr;
  }

  // Built from constants and new objects only.
  ExprPtr gen_fresh(const Type& t, int depth) {
    if (t.is_prim()) return make_const(range(rng_, 0, 9));
    if (depth < 0) return nullptr;
    std::vector<ExprPtr> args;
    for (const auto& f : cls(t.name).fields) {
      ExprPtr a = gen_fresh(f.type, depth - 1);
      if (!a) return nullptr;
      args.push_back(a);
    }
    return make_new(t.name, args);
  }

 private:
  const ClassDecl& cls(const std::string& name) const {
    for (const auto& c : classes_)
      if (c.name == name) return c;
    throw std::logic_error("unknown class " + name);
  }

  ExprPtr gen_atom(const Env& env, const Type& t) {
    if (t.is_prim()) return make_const(range(rng_, 0, 9));
    return gen_var(env, t);
  }

  ExprPtr gen_var(const Env& env, const Type& t) {
    std::vector<std::string> vs;
    for (const auto& [x, u] : env)
      if (u.same_shape(t) && (!modifiers_ || !t.is_class() || mod_leq(u.mod, t.mod))) vs.push_back(x);
    if (vs.empty()) return nullptr;
    return make_var(vs[pick(rng_, vs.size())]);
  }

  ExprPtr gen_new(const Env& env, const Type& t, int depth) {
    std::vector<ExprPtr> args;
    for (const auto& f : cls(t.name).fields) {
      ExprPtr a = depth <= 0 ? gen_atom(env, f.type) : gen(env, f.type, depth - 1);
      if (!a) return nullptr;
      args.push_back(a);
    }
    return make_new(t.name, args);
  }

  Type field_type(const std::string& c, const std::string& f) const {
    for (const auto& fd : cls(c).fields)
      if (fd.name == f) return fd.type;
    throw std::logic_error("unknown field " + f);
  }

  // Some class with a field of the wanted shape; the receiver is generated.
  std::optional<std::pair<std::string, std::string>> field_of_shape(const Type& t) {
    std::vector<std::pair<std::string, std::string>> cands;
    for (const auto& c : classes_)
      for (const auto& f : c.fields)
        if (f.type.same_shape(t)) cands.emplace_back(c.name, f.name);
    if (cands.empty()) return std::nullopt;
    return cands[pick(rng_, cands.size())];
  }

  ExprPtr gen_field_access(const Env& env, const Type& t, int depth) {
    auto f = field_of_shape(t);
    if (!f) return nullptr;
    Modifier want = t.mod.is(K::Read) || t.mod.is(K::Imm) ? Modifier::read() : Modifier::mut();
    ExprPtr r = gen(env, Type::cls(f->first, want), depth - 1);
    return r ? make_field_access(r, f->second) : nullptr;
  }

  ExprPtr gen_field_assign(const Env& env, const Type& t, int depth) {
    auto f = field_of_shape(t);
    if (!f) return nullptr;
    ExprPtr r = gen(env, Type::cls(f->first), depth - 1);
    if (!r) return nullptr;
    ExprPtr v = gen(env, field_type(f->first, f->second), depth - 1);
    return v ? make_field_assign(r, f->second, v) : nullptr;
  }

  ExprPtr gen_invoke(const Env& env, const Type& t, int depth) {
    std::vector<const Callable*> cands;
    for (const auto& c : callable_)
      if (c.ret.same_shape(t)) cands.push_back(&c);
    if (cands.empty()) return nullptr;
    const Callable& c = *cands[pick(rng_, cands.size())];
    ExprPtr r = gen(env, Type::cls(c.cls), depth - 1);
    if (!r) return nullptr;
    std::vector<ExprPtr> args;
    for (const auto& p : c.params) {
      ExprPtr a = gen(env, p, depth - 1);
      if (!a) return nullptr;
      args.push_back(a);
    }
    return make_invoke(r, c.method, args);
  }

  ExprPtr gen_block(const Env& env, const Type& t, int depth) {
    Type d = random_shape(rng_, names_, 0.25);
    if (modifiers_ && d.is_class()) d.mod = random_local_mod(rng_);
    ExprPtr init = gen(env, d, depth - 1);
    if (!init) return nullptr;
    std::string x = "x" + std::to_string(fresh_++);
    Env inner = env;
    inner.emplace_back(x, d);
    ExprPtr body = gen(inner, t, depth - 1);
    return body ? make_block(d, x, init, body) : nullptr;
  }

  ExprPtr gen_seq(const Env& env, const Type& t, int depth) {
    ExprPtr first = gen(env, random_shape(rng_, names_, 0.5), depth - 1);
    if (!first) return nullptr;
    ExprPtr rest = gen(env, t, depth - 1);
    return rest ? make_seq(first, rest) : nullptr;
  }

  std::mt19937_64& rng_;
  const std::vector<ClassDecl>& classes_;
  const std::vector<Callable>& callable_;
  bool modifiers_;
  std::vector<std::string> names_;
  int fresh_ = 0;
};

}  // namespace

ClassTable gen_class_table(std::mt19937_64& rng, const GenOptions& opt) {
  bool mods = opt.system == System::Modifiers;
  int n = range(rng, opt.min_classes, opt.max_classes);
  std::vector<std::string> names(kClassNames, kClassNames + n);
  std::vector<ClassDecl> classes;
  for (int i = 0; i < n; ++i) {
    ClassDecl c{names[i], {}, {}, {}};
    int nf = range(rng, 1, opt.max_fields);
    for (int j = 0; j < nf; ++j) {
      Type t = random_shape(rng, names, 0.4);
      if (mods && t.is_class() && chance(rng, 0.2)) t.mod = Modifier::imm();
      c.fields.push_back({t, "f" + std::to_string(j), {}});
    }
    classes.push_back(std::move(c));
  }

  std::vector<Callable> callable;
  int mcount = 0;
  for (auto& c : classes) {
    int nm = range(rng, 0, opt.max_methods);
    for (int j = 0; j < nm; ++j) {
      MethodDecl md;
      md.name = "m" + std::to_string(mcount++);
      md.receiver_mod = mods && chance(rng, 0.3) ? Modifier::read() : Modifier::mut();
      int np = range(rng, 0, 2);
      ExprGen::Env env{{"this", Type::cls(c.name, md.receiver_mod)}};
      for (int k = 0; k < np; ++k) {
        Type t = random_shape(rng, names, 0.3);
        if (mods && t.is_class() && chance(rng, 0.3)) t.mod = chance(rng, 0.5) ? Modifier::read() : Modifier::imm();
        md.params.push_back({t, "p" + std::to_string(k), std::nullopt});
        env.emplace_back("p" + std::to_string(k), t);
      }
      md.ret = random_shape(rng, names, 0.3);
      ExprGen gen(rng, classes, callable, mods);
      md.body = gen.gen(env, md.ret, 3);
      if (!md.body) {
        md.ret = Type::integer();
        md.body = make_const(range(rng, 0, 9));
      }
      if (chance(rng, opt.annotate)) {
        md.receiver_coeffect = Coeffect{Link::res()};
        for (auto& p : md.params) p.coeffect = Coeffect{Link::res()};
      }
      callable.push_back({c.name, md.name, md.ret, {}});
      for (const auto& p : md.params) callable.back().params.push_back(p.type);
      c.methods.push_back(std::move(md));
    }
  }
  return ClassTable(std::move(classes));
}

Memory gen_memory(const ClassTable& table, std::mt19937_64& rng, int per_class, std::set<std::string>* imm_pool) {
  Memory mem;
  std::map<std::string, std::vector<std::string>> mut_refs, imm_refs;
  int next = 0;
  std::vector<std::string> todo;
  auto alloc = [&](const std::string& cls, bool imm) {
    std::string r = (imm ? "i" : "o") + std::to_string(next++);
    mem[r] = Object{cls, {}};
    (imm ? imm_refs : mut_refs)[cls].push_back(r);
    todo.push_back(r);
    if (imm && imm_pool) imm_pool->insert(r);
    return r;
  };
  for (const auto& c : table.classes()) {
    int k = range(rng, 1, std::max(1, per_class));
    for (int i = 0; i < k; ++i) alloc(c.name, false);
    if (imm_pool && chance(rng, 0.4)) alloc(c.name, true);
  }
  for (std::size_t i = 0; i < todo.size(); ++i) {
    std::string x = todo[i];
    bool x_imm = imm_pool && imm_pool->count(x);
    std::string cls = mem[x].cls;
    std::vector<Value> fields;
    for (const auto& f : table.fields(cls)) {
      if (f.type.is_prim()) {
        fields.emplace_back(std::int64_t(range(rng, 0, 9)));
        continue;
      }
      bool want_imm = imm_pool && (x_imm || f.type.mod.is(K::Imm));
      auto& pool = (want_imm ? imm_refs : mut_refs)[f.type.name];
      if (pool.empty()) alloc(f.type.name, want_imm);
      fields.emplace_back(Ref{pool[pick(rng, pool.size())]});
    }
    mem[x].fields = std::move(fields);
  }
  return mem;
}

ModAssignment gen_mod_assignment(const ClassTable& table, const Memory& mem, const std::set<std::string>& imm_pool,
                                 std::mt19937_64& rng) {
  ModAssignment given;
  for (const auto& x : imm_pool) given[x] = Modifier::imm();
  auto typable = [&](const ModAssignment& g) {
    try {
      LinkSupply supply;
      type_memory_mod(table, mem, complete_modifiers(table, mem, g), supply);
      return true;
    } catch (const Error&) {
      return false;
    }
  };
  std::vector<std::string> refs;
  for (const auto& [x, obj] : mem)
    if (!imm_pool.count(x)) refs.push_back(x);
  std::shuffle(refs.begin(), refs.end(), rng);
  std::uint64_t seal = 0;
  for (const auto& x : refs) {
    if (!chance(rng, 0.3)) continue;
    ModAssignment g = given;
    g[x] = Modifier::sealed(seal);
    if (typable(g)) {
      given = std::move(g);
      ++seal;
    }
  }
  return complete_modifiers(table, mem, given);
}

Generated gen_random_program(std::uint64_t seed, const GenOptions& opt) {
  std::mt19937_64 rng(seed);
  bool mods = opt.system == System::Modifiers;
  Generated out;
  ClassTable table = gen_class_table(rng, opt);
  out.mem = gen_memory(table, rng, opt.objects_per_class, mods ? &out.imm_refs : nullptr);

  ExprGen::Env env;
  for (const auto& [x, obj] : out.mem)
    env.emplace_back(x, Type::cls(obj.cls, out.imm_refs.count(x) ? Modifier::imm() : Modifier::mut()));
  std::vector<std::string> names;
  for (const auto& c : table.classes()) names.push_back(c.name);
  std::vector<Callable> callable;
  for (const auto& c : table.classes())
    for (const auto& m : c.methods) {
      callable.push_back({c.name, m.name, m.ret, {}});
      for (const auto& p : m.params) callable.back().params.push_back(p.type);
    }
  ExprGen gen(rng, table.classes(), callable, mods);
  ExprPtr main;
  if (chance(rng, opt.fresh_result)) {
    ExprPtr prefix, result;
    while (!prefix) prefix = gen.gen(env, random_shape(rng, names, 0.3), opt.expr_depth);
    for (int tries = 0; !result && tries < 8; ++tries) result = gen.gen_fresh(Type::cls(names[pick(rng, names.size())]), 2);
    if (result) main = make_seq(prefix, result);
  }
  while (!main) main = gen.gen(env, random_shape(rng, names, 0.2), opt.expr_depth);
  out.program = Program{std::move(table), main};
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<ExprPtr> children(const Expr& e) {
  if (auto n = e.as<FieldAccess>()) return {n->target};
  if (auto n = e.as<FieldAssign>()) return {n->target, n->value};
  if (auto n = e.as<New>()) return n->args;
  if (auto n = e.as<Invoke>()) {
    std::vector<ExprPtr> out{n->target};
    out.insert(out.end(), n->args.begin(), n->args.end());
    return out;
  }
  if (auto n = e.as<Block>()) return {n->init, n->body};
  return {};
}

ExprPtr with_child(const Expr& e, std::size_t i, ExprPtr c) {
  if (auto n = e.as<FieldAccess>()) return make_field_access(c, n->field, e.loc);
  if (auto n = e.as<FieldAssign>())
    return i == 0 ? make_field_assign(c, n->field, n->value, e.loc) : make_field_assign(n->target, n->field, c, e.loc);
  if (auto n = e.as<New>()) {
    auto args = n->args;
    args[i] = c;
    return make_new(n->cls, args, e.loc);
  }
  if (auto n = e.as<Invoke>()) {
    if (i == 0) return make_invoke(c, n->method, n->args, e.loc);
    auto args = n->args;
    args[i - 1] = c;
    return make_invoke(n->target, n->method, args, e.loc);
  }
  const auto& b = std::get<Block>(e.node);
  return i == 0 ? make_block(b.declared, b.var, c, b.body, e.loc) : make_block(b.declared, b.var, b.init, c, e.loc);
}

void variants(const ExprPtr& e, std::vector<ExprPtr>& out) {
  auto cs = children(*e);
  for (const auto& c : cs) out.push_back(c);
  if (!e->as<Const>() && !e->as<Var>()) out.push_back(make_const(0));
  for (std::size_t i = 0; i < cs.size(); ++i) {
    std::vector<ExprPtr> sub;
    variants(cs[i], sub);
    for (auto& v : sub) out.push_back(with_child(*e, i, v));
  }
}

}  // namespace

ExprPtr shrink(const ExprPtr& e, const std::function<bool(const ExprPtr&)>& still_fails) {
  ExprPtr cur = e;
  for (bool progress = true; progress;) {
    progress = false;
    std::vector<ExprPtr> cands;
    variants(cur, cands);
    std::stable_sort(cands.begin(), cands.end(), [](const ExprPtr& a, const ExprPtr& b) { return size(*a) < size(*b); });
    for (const auto& c : cands) {
      if (size(*c) >= size(*cur)) break;
      if (still_fails(c)) {
        cur = c;
        progress = true;
        break;
      }
    }
  }
  return cur;
}

// ---------------------------------------------------------------------------

std::size_t Suite::failures() const {
  return std::count_if(cases.begin(), cases.end(), [](const Report& r) { return r.applicable && !r.passed; });
}

std::size_t Suite::skipped() const {
  return std::count_if(cases.begin(), cases.end(), [](const Report& r) { return !r.applicable; });
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string junit_xml(const std::vector<Suite>& suites) {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<testsuites>\n";
  for (const auto& s : suites) {
    os << "  <testsuite name=\"" << xml_escape(s.name) << "\" tests=\"" << s.cases.size() << "\" failures=\""
       << s.failures() << "\" skipped=\"" << s.skipped() << "\" time=\"" << s.seconds << "\">\n";
    for (const auto& c : s.cases) {
      os << "    <testcase name=\"" << xml_escape(c.name) << "\" classname=\"" << xml_escape(s.name) << "\"";
      if (c.applicable && c.passed) {
        os << "/>\n";
        continue;
      }
      os << ">\n";
      if (!c.applicable) os << "      <skipped message=\"" << xml_escape(c.detail) << "\"/>\n";
      else os << "      <failure message=\"" << xml_escape(c.detail) << "\"/>\n";
      os << "    </testcase>\n";
    }
    os << "  </testsuite>\n";
  }
  os << "</testsuites>\n";
  return os.str();
}

nlohmann::json summary_json(const std::vector<Suite>& suites) {
  nlohmann::json out;
  out["schema"] = kSchemaVersion;
  out["suites"] = nlohmann::json::array();
  bool ok = true;
  for (const auto& s : suites) {
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& c : s.cases)
      if (c.applicable && !c.passed) failures.push_back({{"name", c.name}, {"detail", c.detail}});
    out["suites"].push_back({{"name", s.name},
                             {"cases", s.cases.size()},
                             {"skipped", s.skipped()},
                             {"failures", failures}});
    ok = ok && s.failures() == 0;
  }
  out["passed"] = ok;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::uint64_t mix(std::uint64_t seed, std::uint64_t i) { return seed * 0x9E3779B97F4A7C15ULL + i; }

template <class Check>
Suite program_suite(const std::string& name, const GenOptions& opt, std::uint64_t seed, std::size_t count,
                    Check check) {
  Suite suite{name, {}, 0};
  auto t0 = Clock::now();
  std::size_t applicable = 0, attempts = 0, cap = count * 50;
  while (applicable < count && attempts < cap) {
    std::uint64_t s = mix(seed, attempts++);
    Generated g = gen_random_program(s, opt);
    Subject subj{"seed " + std::to_string(s), &g.program.table, g.program.main, g.mem, g.imm_refs};
    Report r = check(subj);
    if (!r.applicable) continue;
    ++applicable;
    if (!r.passed) {
      ExprPtr small = shrink(subj.expr, [&](const ExprPtr& e) {
        Subject t = subj;
        t.expr = e;
        Report rr = check(t);
        return rr.applicable && !rr.passed;
      });
      Subject t = subj;
      t.expr = small;
      Report rr = check(t);
      Program shown{g.program.table, small};
      r.detail += "\n  shrunk: " + rr.detail + "\n" + print_program(shown);
    }
    suite.cases.push_back(std::move(r));
  }
  if (applicable < count) {
    Report r;
    r.name = "coverage";
    r.passed = false;
    r.detail = "only " + std::to_string(applicable) + " applicable cases in " + std::to_string(attempts) + " attempts";
    suite.cases.push_back(r);
  }
  suite.seconds = since(t0);
  return suite;
}

}  // namespace

Suite random_memory_suite(System sys, std::uint64_t seed, std::size_t count) {
  Suite suite{"memory-" + to_string(sys), {}, 0};
  auto t0 = Clock::now();
  GenOptions opt;
  opt.system = sys;
  for (std::size_t i = 0; i < count; ++i) {
    std::mt19937_64 rng(mix(seed, i));
    ClassTable table = gen_class_table(rng, opt);
    std::set<std::string> pool;
    bool mods = sys == System::Modifiers;
    Memory mem = gen_memory(table, rng, 4, mods ? &pool : nullptr);
    Report r;
    if (mods) {
      ModAssignment m = gen_mod_assignment(table, mem, pool, rng);
      r = verify_memory_lemma(table, mem, &m);
    } else {
      r = verify_memory_lemma(table, mem, nullptr);
    }
    r.name = "seed " + std::to_string(mix(seed, i));
    if (!r.applicable) {
      r.applicable = true;
      r.passed = false;
      r.detail = "generated memory does not type: " + r.detail;
    }
    suite.cases.push_back(std::move(r));
  }
  suite.seconds = since(t0);
  return suite;
}

Suite random_sr_suite(System sys, std::uint64_t seed, std::size_t count) {
  GenOptions opt;
  opt.system = sys;
  return program_suite("subject-reduction-" + to_string(sys), opt, seed, count,
                       [sys](const Subject& s) { return verify_subject_reduction(s, sys); });
}

Suite random_capsule_suite(System sys, std::uint64_t seed, std::size_t count) {
  GenOptions opt;
  opt.system = sys;
  opt.fresh_result = 0.7;
  return program_suite("capsule-" + to_string(sys), opt, seed, count,
                       [sys](const Subject& s) { return verify_capsule(s, sys); });
}

Suite random_imm_suite(std::uint64_t seed, std::size_t count) {
  GenOptions opt;
  opt.system = System::Modifiers;
  return program_suite("immutability", opt, seed, count,
                       [](const Subject& s) { return verify_immutability(s); });
}

}  // namespace coeffect
