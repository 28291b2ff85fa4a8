#include "coeffect/modifiers.hpp"

#include <deque>

#include "coeffect/interp.hpp"
#include "coeffect/parser.hpp"

namespace coeffect {

namespace {

using K = Modifier::Kind;

// Position in the lattice: seal < caps < {mut, imm} < read.
int rank(const Modifier& m) {
  switch (m.kind) {
    case K::Seal: return 0;
    case K::Caps: return 1;
    case K::Mut:
    case K::Imm: return 2;
    case K::Read: return 3;
  }
  return 3;
}

}  // namespace

bool mod_leq(const Modifier& a, const Modifier& b) {
  if (mod_equiv(a, b)) return true;
  if (rank(a) == 2 && rank(b) == 2) return false;
  return rank(a) < rank(b);
}

bool mod_equiv(const Modifier& a, const Modifier& b) { return a.kind == b.kind; }

bool subtype(const Type& a, const Type& b) {
  if (!a.same_shape(b)) return false;
  return a.is_prim() || mod_leq(a.mod, b.mod);
}

std::optional<Modifier> combine(const Modifier& m, const Modifier& m2) {
  if (mod_leq(m, Modifier::imm())) return m;
  if (m.is(K::Mut)) return m2;
  // m is read
  if (m2.is(K::Imm) || m2.is(K::Caps)) return Modifier::imm();
  if (m2.is_seal()) return std::nullopt;
  return Modifier::read();
}

Modifier combine_or_throw(const Modifier& m, const Modifier& m2, Loc loc) {
  auto r = combine(m, m2);
  if (!r) throw Error(codes::Combine, m.to_string() + "[" + m2.to_string() + "] is undefined", loc);
  return *r;
}

Type modif(const Type& t, const Modifier& m) {
  if (t.is_prim()) return t;
  return t.with_mod(combine_or_throw(t.mod, m));
}

TypeCtx sum_linear(const TypeCtx& g, const TypeCtx& d, Loc loc) {
  for (const auto& [x, t] : d.types) {
    auto it = g.types.find(x);
    if (it == g.types.end()) continue;
    if (it->second.mod.is_linear() || t.mod.is_linear())
      throw Error(codes::Linear,
                  "'" + x + "' has type " + (it->second.mod.is_linear() ? it->second : t).to_string() +
                      " and is used more than once",
                  loc);
  }
  return sum(g, d);
}

TypeCtx ModifierChecker::add(const TypeCtx& g, const TypeCtx& d, Loc loc) {
  if (mode_ == CheckMode::Source) return sum_linear(g, d, loc);
  TypeCtx out = sum(g, d);
  for (const auto& [x, t] : d.types) {
    auto it = g.types.find(x);
    if (it == g.types.end() || !t.is_class() || mod_equiv(it->second.mod, t.mod)) continue;
    if (t.mod.is_seal()) out.types.at(x) = t;
    if (t.mod.is_seal() || it->second.mod.is_seal()) needs_seal_.insert(x);
  }
  return out;
}

TypeCtx seal(const TypeCtx& g, const Modifier& sigma, Loc loc) {
  TypeCtx out = g;
  for (auto& [x, t] : out.types) {
    if (!t.is_class() || !g.coeff(x).count(Link::res())) continue;
    auto m = combine(t.mod, sigma);
    if (!m)
      throw Error(codes::Combine,
                  "'" + x + "' of type " + t.to_string() + " is connected to the result and cannot be sealed",
                  loc);
    t = t.with_mod(*m);
  }
  return out;
}

bool mod_nondecreasing(const TypeCtx& g, const TypeCtx& d, std::string* witness) {
  for (const auto& [x, t] : g.types) {
    if (!t.is_class() || !d.contains(x)) continue;
    if (!mod_leq(t.mod, d.type(x).mod)) {
      if (witness) *witness = x + ": " + t.mod.to_string() + " -> " + d.type(x).mod.to_string();
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

namespace {

DerivationPtr node(std::string rule, const Expr& e, const TypeCtx& ctx, const Type& type,
                   std::vector<DerivationPtr> premises = {}, std::vector<Coeffect> scalars = {},
                   std::vector<std::string> unbinds = {}) {
  auto d = std::make_shared<Derivation>();
  d->rule = std::move(rule);
  d->expr = &e;
  d->ctx = ctx;
  d->type = type;
  d->premises = std::move(premises);
  d->scalars = std::move(scalars);
  d->unbinds = std::move(unbinds);
  return d;
}

const Coeffect kOne{Link::res()};

void require_shape(const Type& actual, const Type& expected, const Expr& e, const std::string& what) {
  if (!actual.same_shape(expected))
    throw Error(codes::Type, what + ": expected " + expected.name + ", got " + actual.name, e.loc);
}

bool imm_like(const Type& t) { return t.is_prim() || t.mod.is(K::Imm); }

}  // namespace

Judgment ModifierChecker::imm_rule(Judgment j, const Expr& e) {
  if (!imm_like(j.type)) return j;
  Coeffect l{supply_.fresh()};
  TypeCtx ctx = scale(l, j.ctx);
  return {ctx, j.type, node("t-imm", e, ctx, j.type, {j.derivation}, {l})};
}

Judgment ModifierChecker::promote(Judgment j, const Expr& e) {
  for (const auto& [x, t] : j.ctx.types) {
    if (!t.is_class() || !j.ctx.coeff(x).count(Link::res())) continue;
    bool blocked = t.mod.is(K::Read) || (mode_ == CheckMode::Source && t.mod.is(K::Mut));
    if (blocked)
      throw Error(codes::Promote,
                  "cannot promote to " + combine_or_throw(j.type.mod, Modifier::caps()).to_string() + ": '" +
                      x + "' (" + t.mod.to_string() + ") is connected to the result",
                  e.loc);
  }
  Modifier sigma = Modifier::sealed(next_seal_++);
  TypeCtx ctx = seal(j.ctx, sigma, e.loc);
  Type t = j.type.with_mod(combine_or_throw(j.type.mod, Modifier::caps(), e.loc));
  return {ctx, t, node("t-prom", e, ctx, t, {j.derivation}, {kOne})};
}

Judgment ModifierChecker::check(const TypeEnv& env, const Expr& e, const Type& expected) {
  Judgment j = infer(env, e);
  if (expected.is_prim()) {
    if (!j.type.is_prim()) throw Error(codes::Type, "expected int, got " + j.type.name, e.loc);
    return j;
  }
  require_shape(j.type, expected, e, "expression");
  if (!mod_leq(j.type.mod, expected.mod)) {
    bool promotable = (j.type.mod.is(K::Mut) && (expected.mod.is(K::Caps) || expected.mod.is(K::Imm))) ||
                      (j.type.mod.is(K::Read) && expected.mod.is(K::Imm));
    if (!promotable)
      throw Error(codes::Subtype, j.type.to_string() + " is not a subtype of " + expected.to_string(), e.loc);
    j = imm_rule(promote(std::move(j), e), e);
    if (!mod_leq(j.type.mod, expected.mod))
      throw Error(codes::Subtype, j.type.to_string() + " is not a subtype of " + expected.to_string(), e.loc);
  }
  if (j.type == expected) return j;
  return {j.ctx, expected, node("t-sub", e, j.ctx, expected, {j.derivation}, {kOne})};
}

Judgment ModifierChecker::infer(const TypeEnv& env, const Expr& e) { return imm_rule(infer_node(env, e), e); }

Judgment ModifierChecker::infer_node(const TypeEnv& env, const Expr& e) {
  if (auto n = e.as<Var>()) {
    auto it = env.find(n->name);
    if (it == env.end()) throw Error(codes::Unbound, "unbound variable '" + n->name + "'", e.loc);
    TypeCtx ctx = TypeCtx::single(n->name, it->second, kOne);
    return {ctx, it->second, node("t-var", e, ctx, it->second)};
  }
  if (e.as<Const>()) {
    Type t = Type::integer();
    return {{}, t, node("t-const", e, {}, t)};
  }
  if (auto n = e.as<FieldAccess>()) {
    Judgment r = infer(env, *n->target);
    if (!r.type.is_class()) throw Error(codes::Type, "field access on a value of type int", e.loc);
    Type t = modif(table_.field(r.type.name, n->field, e.loc).type, r.type.mod);
    return {r.ctx, t, node("t-field-access", e, r.ctx, t, {r.derivation}, {kOne})};
  }
  if (auto n = e.as<FieldAssign>()) {
    Judgment r = infer(env, *n->target);
    if (!r.type.is_class()) throw Error(codes::Type, "field assignment on a value of type int", e.loc);
    if (!mod_leq(r.type.mod, Modifier::mut()))
      throw Error(codes::ReadAssign,
                  "cannot assign field '" + n->field + "' through a " + r.type.mod.to_string() + " reference",
                  e.loc);
    Type t = table_.field(r.type.name, n->field, e.loc).type;
    Judgment v = check(env, *n->value, t);
    TypeCtx ctx = add(r.ctx, v.ctx, e.loc);
    return {ctx, t, node("t-field-assign", e, ctx, t, {r.derivation, v.derivation}, {kOne, kOne})};
  }
  if (auto n = e.as<New>()) {
    const auto& fields = table_.fields(n->cls);
    if (fields.size() != n->args.size())
      throw Error(codes::Arity, "new " + n->cls + ": expected " + std::to_string(fields.size()) +
                                    " arguments, got " + std::to_string(n->args.size()),
                  e.loc);
    TypeCtx ctx;
    std::vector<DerivationPtr> ps;
    std::vector<Coeffect> ss;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      Judgment a = check(env, *n->args[i], fields[i].type);
      ctx = add(ctx, a.ctx, n->args[i]->loc);
      ps.push_back(a.derivation);
      ss.push_back(kOne);
    }
    Type t = Type::cls(n->cls);
    return {ctx, t, node("t-new", e, ctx, t, ps, ss)};
  }
  if (auto n = e.as<Invoke>()) {
    Judgment probe = infer(env, *n->target);
    if (!probe.type.is_class()) throw Error(codes::Type, "method call on a value of type int", e.loc);
    MethodSig sig = alpha_fresh_sig(signature(probe.type.name, n->method, e.loc), supply_);
    if (sig.param_types.size() != n->args.size())
      throw Error(codes::Arity, probe.type.name + "." + n->method + ": expected " +
                                    std::to_string(sig.param_types.size()) + " arguments, got " +
                                    std::to_string(n->args.size()),
                  e.loc);
    Judgment r = check(env, *n->target, probe.type.with_mod(sig.receiver_mod));
    Coeffect x0 = sig.receiver;
    x0.insert(supply_.fresh());
    TypeCtx ctx = scale(x0, r.ctx);
    std::vector<DerivationPtr> ps{r.derivation};
    std::vector<Coeffect> ss{x0};
    for (std::size_t i = 0; i < n->args.size(); ++i) {
      Judgment a = check(env, *n->args[i], sig.param_types[i]);
      Coeffect xi = sig.param_coeffects[i];
      xi.insert(supply_.fresh());
      ctx = add(ctx, scale(xi, a.ctx), n->args[i]->loc);
      ps.push_back(a.derivation);
      ss.push_back(xi);
    }
    return {ctx, sig.ret, node("t-invk", e, ctx, sig.ret, ps, ss)};
  }
  const auto& b = std::get<Block>(e.node);
  Judgment init = b.declared ? check(env, *b.init, *b.declared) : infer(env, *b.init);
  TypeEnv inner = env;
  if (b.declared) inner[b.var] = *b.declared;
  Judgment body = infer(inner, *b.body);
  if (b.declared && body.ctx.contains(b.var)) {
    const Type& used = body.ctx.types.at(b.var);
    if (used.is_class() && used.mod.is_seal() && !b.declared->mod.is_seal())
      throw Error(codes::Promote,
                  "local '" + b.var + "' declared " + b.declared->to_string() + " would be sealed by promotion",
                  e.loc);
  }
  Coeffect x = body.ctx.contains(b.var) && b.declared ? body.ctx.coeff(b.var) : Coeffect{};
  x.insert(supply_.fresh());
  std::string unbind = b.declared ? b.var : std::string();
  TypeCtx rest = b.declared ? without(body.ctx, b.var) : body.ctx;
  TypeCtx ctx = add(scale(x, init.ctx), rest, e.loc);
  return {ctx, body.type,
          node("t-block", e, ctx, body.type, {init.derivation, body.derivation}, {x, kOne},
               {"", unbind})};
}

TypeEnv ModifierChecker::method_env(const std::string& cls, const MethodDecl& md,
                                    const MethodSig& sig) const {
  TypeEnv env;
  env["this"] = Type::cls(cls, sig.receiver_mod);
  for (std::size_t i = 0; i < md.params.size(); ++i) env[md.params[i].name] = sig.param_types[i];
  return env;
}

const MethodSig& ModifierChecker::signature(const std::string& cls, const std::string& m, Loc loc) {
  auto key = std::make_pair(cls, m);
  if (auto it = sigs_.find(key); it != sigs_.end()) return it->second;
  const MethodDecl& md = table_.method(cls, m, loc);
  if (auto declared = table_.mtype(cls, m, loc)) return sigs_.emplace(key, *declared).first->second;

  if (in_progress_.count(key))
    throw Error(codes::Recursion,
                "method " + cls + "." + m + " is recursive and needs coeffect annotations", md.loc);
  MethodSig sig{md.receiver_mod, {}, {}, {}, md.ret};
  for (const auto& p : md.params) sig.param_types.push_back(p.type);
  sig.param_coeffects.resize(md.params.size());

  in_progress_.insert(key);
  CheckMode saved = mode_;
  mode_ = CheckMode::Source;
  Judgment body;
  try {
    body = check(method_env(cls, md, sig), *md.body, md.ret);
  } catch (...) {
    mode_ = saved;
    in_progress_.erase(key);
    throw;
  }
  mode_ = saved;
  in_progress_.erase(key);

  sig.receiver = body.ctx.contains("this") ? body.ctx.coeff("this") : Coeffect{};
  for (std::size_t i = 0; i < md.params.size(); ++i)
    sig.param_coeffects[i] =
        body.ctx.contains(md.params[i].name) ? body.ctx.coeff(md.params[i].name) : Coeffect{};
  return sigs_.emplace(key, sig).first->second;
}

CoherenceReport ModifierChecker::check_method(const std::string& cls, const std::string& m) {
  const MethodDecl& md = table_.method(cls, m);
  CoherenceReport rep;
  rep.cls = cls;
  rep.method = m;
  rep.annotated = md.annotated();
  std::vector<std::string> names{"this"};
  for (const auto& p : md.params) names.push_back(p.name);
  CheckMode saved = mode_;
  mode_ = CheckMode::Source;
  try {
    rep.sig = signature(cls, m);
    Judgment body = check(method_env(cls, md, rep.sig), *md.body, md.ret);
    rep.inferred = coefficients_of(body.ctx, names);
    std::vector<Coeffect> declared{rep.sig.receiver};
    declared.insert(declared.end(), rep.sig.param_coeffects.begin(), rep.sig.param_coeffects.end());
    if (auto why = coherence_violation(names, declared, rep.inferred)) {
      rep.ok = false;
      rep.code = codes::Coherence;
      rep.message = *why;
    }
  } catch (const Error& e) {
    rep.ok = false;
    rep.code = e.code();
    rep.message = e.describe();
  }
  mode_ = saved;
  return rep;
}

std::vector<CoherenceReport> ModifierChecker::check_method_coherence() {
  std::vector<CoherenceReport> out;
  for (const auto& c : table_.classes())
    for (const auto& m : c.methods) out.push_back(check_method(c.name, m.name));
  return out;
}

void ModifierChecker::require_coherent() {
  for (const auto& c : table_.classes())
    for (const auto& m : c.methods) {
      CoherenceReport r = check_method(c.name, m.name);
      if (!r.ok) throw Error(r.code, "method " + c.name + "." + m.name + ": " + r.message, m.loc);
    }
}

// ---------------------------------------------------------------------------

std::set<std::string> forced_imm(const ClassTable& table, const Memory& mem,
                                 const std::set<std::string>& imm_refs) {
  std::deque<std::string> work(imm_refs.begin(), imm_refs.end());
  for (const auto& [x, obj] : mem) {
    const auto& fields = table.fields(obj.cls);
    for (std::size_t i = 0; i < fields.size() && i < obj.fields.size(); ++i)
      if (fields[i].type.is_class() && fields[i].type.mod.is(K::Imm))
        if (auto r = std::get_if<Ref>(&obj.fields[i])) work.push_back(r->name);
  }
  std::set<std::string> out;
  while (!work.empty()) {
    std::string x = work.front();
    work.pop_front();
    if (!mem.count(x) || !out.insert(x).second) continue;
    for (const auto& v : mem.at(x).fields)
      if (auto r = std::get_if<Ref>(&v)) work.push_back(r->name);
  }
  return out;
}

ModAssignment complete_modifiers(const ClassTable& table, const Memory& mem, const ModAssignment& given) {
  validate_memory(table, mem);
  std::set<std::string> imm_given;
  for (const auto& [x, m] : given) {
    if (!mem.count(x)) continue;
    if (m.is(K::Read) || m.is(K::Caps))
      throw Error(codes::Memory, "reference " + x + " cannot be " + m.to_string());
    if (m.is(K::Imm)) imm_given.insert(x);
  }
  std::set<std::string> imm = forced_imm(table, mem, imm_given);

  ModAssignment out;
  for (const auto& x : imm) {
    auto it = given.find(x);
    if (it != given.end() && !it->second.is(K::Imm))
      throw Error(codes::Memory, "reference " + x + " is reachable from an immutable reference but is " +
                                     it->second.to_string());
    out[x] = Modifier::imm();
  }

  std::deque<std::string> work;
  for (const auto& [x, m] : given)
    if (m.is_seal() && mem.count(x)) {
      if (imm.count(x)) throw Error(codes::Memory, "reference " + x + " is both sealed and immutable");
      out[x] = m;
      work.push_back(x);
    }
  while (!work.empty()) {
    std::string x = work.front();
    work.pop_front();
    const Object& obj = mem.at(x);
    const auto& fields = table.fields(obj.cls);
    for (std::size_t i = 0; i < fields.size(); ++i) {
      auto r = std::get_if<Ref>(&obj.fields[i]);
      if (!r || !fields[i].type.mod.is(K::Mut)) continue;
      auto it = out.find(r->name);
      if (it != out.end()) {
        if (!it->second.is_seal())
          throw Error(codes::Memory, "reference " + r->name + " is reachable from sealed " + x + " but is " +
                                         it->second.to_string());
        continue;
      }
      auto g = given.find(r->name);
      if (g != given.end() && !g->second.is_seal())
        throw Error(codes::Memory, "reference " + r->name + " is reachable from sealed " + x + " but is " +
                                       g->second.to_string());
      out[r->name] = out.at(x);
      work.push_back(r->name);
    }
  }
  for (const auto& [x, obj] : mem)
    if (!out.count(x)) out[x] = Modifier::mut();
  return out;
}

MemTyping type_memory_mod(const ClassTable& table, const Memory& mem, const ModAssignment& mods,
                          LinkSupply& supply) {
  validate_memory(table, mem);
  auto mod_of = [&](const std::string& x) {
    auto it = mods.find(x);
    if (it == mods.end()) throw Error(codes::Memory, "reference " + x + " has no modifier");
    const Modifier& m = it->second;
    if (!(m.is(K::Mut) || m.is(K::Imm) || m.is_seal()))
      throw Error(codes::Memory, "reference " + x + " cannot be " + m.to_string());
    return m;
  };

  MemTyping out;
  TypeCtx acc;
  for (const auto& [x, obj] : mem) {
    Link l = supply.fresh();
    out.links.emplace(x, l);
    acc.set(x, Type::cls(obj.cls, mod_of(x)), {l});
  }
  for (const auto& [x, obj] : mem) {
    Modifier m = mod_of(x);
    const auto& fields = table.fields(obj.cls);
    TypeCtx obj_ctx;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      auto r = std::get_if<Ref>(&obj.fields[i]);
      if (!r) continue;
      Modifier want = modif(fields[i].type, m).mod;
      Modifier have = mod_of(r->name);
      if (!mod_equiv(want, have))
        throw Error(codes::Memory, "reference " + x + " (" + m.to_string() + ") field " + fields[i].name +
                                       " must hold a " + want.to_string() + " reference, " + r->name +
                                       " is " + have.to_string());
      Type t = Type::cls(mem.at(r->name).cls, have);
      Coeffect c = have.is(K::Imm) ? Coeffect{supply.fresh()} : kOne;
      obj_ctx = sum(obj_ctx, TypeCtx::single(r->name, t, c));
    }
    acc = sum(acc, scale({out.links.at(x)}, obj_ctx));
  }
  out.ctx = acc;
  return out;
}

Partition mod_sharing(const Memory& mem, const ModAssignment& mods) {
  auto below_mut = [&](const std::string& x) {
    auto it = mods.find(x);
    return it != mods.end() && mod_leq(it->second, Modifier::mut());
  };
  std::vector<std::pair<std::string, std::string>> edges;
  for (const auto& [x, obj] : mem)
    for (const auto& v : obj.fields)
      if (auto r = std::get_if<Ref>(&v))
        if (below_mut(x) && below_mut(r->name)) edges.emplace_back(x, r->name);
  return partition_of(mem, edges);
}

ModAssignment modifiers_of(const TypeCtx& ctx) {
  ModAssignment out;
  for (const auto& [x, t] : ctx.types)
    if (t.is_class()) out[x] = t.mod;
  return out;
}

namespace {

// Objects linked through mut fields share their modifier: a component holding
// an imm reference becomes imm, one holding a sealed reference takes its seal.
ModAssignment close_components(const ClassTable& table, const Memory& mem, ModAssignment given,
                               std::set<std::string> imm) {
  std::vector<std::pair<std::string, std::string>> edges;
  for (const auto& [x, obj] : mem) {
    const auto& fields = table.fields(obj.cls);
    for (std::size_t i = 0; i < fields.size() && i < obj.fields.size(); ++i)
      if (auto r = std::get_if<Ref>(&obj.fields[i]); r && fields[i].type.mod.is(K::Mut)) edges.emplace_back(x, r->name);
  }
  Partition p = partition_of(mem, edges);
  for (;;) {
    imm = forced_imm(table, mem, imm);
    std::set<std::string> imm_reps, grown = imm;
    for (const auto& x : imm)
      if (p.count(x)) imm_reps.insert(p.at(x));
    for (const auto& [x, rep] : p)
      if (imm_reps.count(rep)) grown.insert(x);
    if (grown.size() == imm.size()) break;
    imm = std::move(grown);
  }
  std::map<std::string, Modifier> seal_of;
  for (const auto& [x, m] : given)
    if (m.is_seal() && p.count(x) && !imm.count(x)) seal_of.emplace(p.at(x), m);
  for (const auto& [x, rep] : p) {
    if (imm.count(x)) given[x] = Modifier::imm();
    else if (auto it = seal_of.find(rep); it != seal_of.end()) given[x] = it->second;
  }
  return given;
}

ModConfigJudgment type_with(const ClassTable& table, const Expr& e, const Memory& mem, const std::set<std::string>& imm,
                            const std::optional<Type>& expected, LinkSupply& supply, const ModAssignment* prior,
                            CheckMode mode) {
  TypeEnv env;
  for (const auto& [x, obj] : mem)
    env[x] = Type::cls(obj.cls, imm.count(x) ? Modifier::imm() : Modifier::mut());
  if (prior)
    for (const auto& [x, m] : *prior)
      if (m.is_seal() && mem.count(x) && !imm.count(x)) env[x] = env[x].with_mod(m);

  for (std::size_t round = 0; round <= mem.size(); ++round) {
    ModifierChecker checker(table, supply, mode);
    ModConfigJudgment out;
    out.expr = expected ? checker.check(env, e, *expected) : checker.infer(env, e);
    if (!checker.needs_seal().empty()) {
      for (const auto& x : checker.needs_seal())
        if (env.count(x) && !env[x].mod.is_seal()) env[x] = env[x].with_mod(Modifier::sealed(checker.seals_issued()));
      continue;
    }

    ModAssignment given;
    for (const auto& x : imm) given[x] = Modifier::imm();
    for (const auto& [x, t] : env)
      if (t.mod.is_seal()) given[x] = t.mod;
    for (const auto& [x, t] : out.expr.ctx.types) given[x] = t.mod;
    given = close_components(table, mem, std::move(given), imm);

    bool retype = false;
    for (const auto& [x, t] : out.expr.ctx.types) {
      const Modifier& m = given.at(x);
      if ((m.is(K::Imm) && !t.mod.is(K::Imm)) || (m.is_seal() && !t.mod.is_seal())) {
        env[x] = env[x].with_mod(m);
        retype = true;
      }
    }
    if (retype) continue;

    out.mods = complete_modifiers(table, mem, given);
    out.mem = type_memory_mod(table, mem, out.mods, supply);
    out.ctx = sum(out.expr.ctx, out.mem.ctx);
    return out;
  }
  throw Error(codes::Memory, "seal assignment did not stabilise", e.loc);
}

}  // namespace

ModConfigJudgment type_configuration_mod(const ClassTable& table, const Expr& e, const Memory& mem,
                                         const std::set<std::string>& imm_refs,
                                         const std::optional<Type>& expected, LinkSupply& supply,
                                         const ModAssignment* prior, CheckMode mode) {
  validate_memory(table, mem);
  for (const auto& x : free_vars(e))
    if (!mem.count(x))
      throw Error(codes::Unbound, "free variable '" + x + "' is not a reference in memory", e.loc);
  std::set<std::string> imm = forced_imm(table, mem, imm_refs);
  if (prior) {
    std::set<std::string> kept = imm_refs;
    for (const auto& [x, m] : *prior)
      if (m.is(Modifier::Kind::Imm) && mem.count(x)) kept.insert(x);
    try {
      return type_with(table, e, mem, forced_imm(table, mem, kept), expected, supply, prior, mode);
    } catch (const Error&) {
    }
    try {
      return type_with(table, e, mem, imm, expected, supply, prior, mode);
    } catch (const Error&) {
    }
  }
  return type_with(table, e, mem, imm, expected, supply, nullptr, mode);
}

}  // namespace coeffect
