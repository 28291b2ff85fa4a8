#include "coeffect/sharing.hpp"

#include <algorithm>

#include "coeffect/parser.hpp"

namespace coeffect {

std::string to_string(const Value& v) {
  if (auto r = std::get_if<Ref>(&v)) return r->name;
  return std::to_string(std::get<std::int64_t>(v));
}

TypeCtx TypeCtx::single(const std::string& x, const Type& t, Coeffect c) {
  TypeCtx g;
  g.set(x, t, std::move(c));
  return g;
}

const Type& TypeCtx::type(const std::string& x) const {
  auto it = types.find(x);
  if (it == types.end()) throw Error(codes::Unbound, "variable '" + x + "' not in context");
  return it->second;
}

std::vector<std::string> TypeCtx::domain() const {
  std::vector<std::string> out;
  for (const auto& [x, t] : types) out.push_back(x);
  return out;
}

void TypeCtx::set(const std::string& x, const Type& t, Coeffect c) {
  types[x] = t;
  coeffs.set(x, std::move(c));
}

void TypeCtx::erase(const std::string& x) {
  types.erase(x);
  coeffs.erase(x);
}

TypeCtx sum(const TypeCtx& g, const TypeCtx& d) {
  TypeCtx out;
  out.types = g.types;
  for (const auto& [x, t] : d.types) {
    auto it = out.types.find(x);
    if (it == out.types.end()) {
      out.types.emplace(x, t);
    } else if (!it->second.same_shape(t)) {
      throw Error(codes::Type, "variable '" + x + "' used at types " + it->second.to_string() +
                                   " and " + t.to_string());
    }
  }
  out.coeffs = ctx_sum(g.coeffs, d.coeffs);
  return out;
}

TypeCtx scale(const Coeffect& x, const TypeCtx& g) {
  TypeCtx out;
  out.types = g.types;
  out.coeffs = ctx_scale(x, g.coeffs);
  return out;
}

TypeCtx without(const TypeCtx& g, const std::string& x) {
  TypeCtx out = g;
  out.erase(x);
  return out;
}

TypeCtx restrict(const TypeCtx& g, const std::set<std::string>& vars, const Coeffect& links) {
  TypeCtx out;
  for (const auto& x : vars) {
    if (!g.contains(x)) continue;
    Coeffect c;
    for (const auto& l : g.coeff(x))
      if (links.count(l)) c.insert(l);
    out.set(x, g.type(x), std::move(c));
  }
  return out;
}

Coeffect links_of(const TypeCtx& g) {
  Coeffect out{Link::res()};
  for (const auto& [x, c] : g.coeffs) out.insert(c.begin(), c.end());
  return out;
}

bool erased_equal(const TypeCtx& a, const TypeCtx& b) {
  if (a.types.size() != b.types.size()) return false;
  for (const auto& [x, t] : a.types) {
    auto it = b.types.find(x);
    if (it == b.types.end() || !it->second.same_shape(t)) return false;
  }
  return a.coeffs == b.coeffs;
}

bool is_lent(const TypeCtx& g, const std::string& x) {
  if (!g.contains(x)) throw Error(codes::Unbound, "variable '" + x + "' not in context");
  return !g.coeff(x).count(Link::res());
}

bool is_capsule(const TypeCtx& g) {
  for (const auto& [x, c] : g.coeffs)
    if (c.count(Link::res())) return false;
  return true;
}

const Group* Canonical::group_of(const std::string& x) const {
  for (const auto& g : groups)
    if (std::find(g.vars.begin(), g.vars.end(), x) != g.vars.end()) return &g;
  return nullptr;
}

Canonical canonical(const CoeffectCtx& g) {
  std::map<Coeffect, std::vector<std::string>> by_coeffect;
  Canonical out;
  for (const auto& [x, c] : g) {
    if (c.empty())
      out.groups.push_back({{x}, false});
    else
      by_coeffect[c].push_back(x);
  }
  for (auto& [c, vars] : by_coeffect) out.groups.push_back({vars, c.count(Link::res()) != 0});
  std::sort(out.groups.begin(), out.groups.end());
  return out;
}

Canonical canonical(const TypeCtx& g) { return canonical(g.coeffs); }

std::string to_string(const Canonical& c) {
  std::string out;
  for (const auto& g : c.groups) {
    if (!out.empty()) out += " ";
    out += "{";
    for (std::size_t i = 0; i < g.vars.size(); ++i) out += (i ? "," : "") + g.vars[i];
    if (g.contains_res) out += g.vars.empty() ? "res" : ",res";
    out += "}";
  }
  return out;
}

CoeffectCtx replay(const Derivation& d) {
  if (d.premises.empty()) return d.ctx.coeffs;
  CoeffectCtx acc;
  for (std::size_t i = 0; i < d.premises.size(); ++i) {
    CoeffectCtx part = d.premises[i]->ctx.coeffs;
    if (i < d.unbinds.size() && !d.unbinds[i].empty()) part.erase(d.unbinds[i]);
    acc = ctx_sum(acc, ctx_scale(d.scalars.at(i), part));
  }
  return acc;
}

bool replays(const Derivation& d) {
  for (const auto& p : d.premises)
    if (!replays(*p)) return false;
  return replay(d) == d.ctx.coeffs;
}

std::vector<Coeffect> coefficients_of(const TypeCtx& ctx, const std::vector<std::string>& vars) {
  std::vector<Coeffect> out;
  for (const auto& x : vars) out.push_back(ctx.contains(x) ? ctx.coeff(x) : Coeffect{});
  return out;
}

std::optional<std::string> coherence_violation(const std::vector<std::string>& names,
                                               const std::vector<Coeffect>& declared,
                                               const std::vector<Coeffect>& inferred) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (inferred[i].count(Link::res()) && !declared[i].count(Link::res()))
      return "'" + names[i] + "' is connected to the result but its declared coeffect " +
             print_coeffect(declared[i]) + " lacks res";
    for (std::size_t j = i; j < names.size(); ++j) {
      if (inferred[i].empty() || inferred[i] != inferred[j]) continue;
      if (declared[i].empty() || declared[i] != declared[j]) {
        if (i == j)
          return "'" + names[i] + "' is used but declared with an empty coeffect";
        return "'" + names[i] + "' and '" + names[j] + "' share in the body but are declared " +
               print_coeffect(declared[i]) + " and " + print_coeffect(declared[j]);
      }
    }
  }
  return std::nullopt;
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

}  // namespace

Judgment SharingChecker::prim(Judgment j, const Expr& e) {
  if (!j.type.is_prim()) return j;
  Coeffect l{supply_.fresh()};
  TypeCtx ctx = scale(l, j.ctx);
  return {ctx, j.type, node("t-prim", e, ctx, j.type, {j.derivation}, {l})};
}

Judgment SharingChecker::infer(const TypeEnv& env, const Expr& e) { return prim(infer_node(env, e), e); }

Judgment SharingChecker::infer_node(const TypeEnv& env, const Expr& e) {
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
    Type t = table_.field(r.type.name, n->field, e.loc).type;
    return {r.ctx, t, node("t-field-access", e, r.ctx, t, {r.derivation}, {kOne})};
  }
  if (auto n = e.as<FieldAssign>()) {
    Judgment r = infer(env, *n->target);
    if (!r.type.is_class()) throw Error(codes::Type, "field assignment on a value of type int", e.loc);
    Type t = table_.field(r.type.name, n->field, e.loc).type;
    Judgment v = infer(env, *n->value);
    require_shape(v.type, t, *n->value, "assigned value");
    TypeCtx ctx = sum(r.ctx, v.ctx);
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
      Judgment a = infer(env, *n->args[i]);
      require_shape(a.type, fields[i].type, *n->args[i], "argument " + std::to_string(i + 1));
      ctx = sum(ctx, a.ctx);
      ps.push_back(a.derivation);
      ss.push_back(kOne);
    }
    Type t = Type::cls(n->cls);
    return {ctx, t, node("t-new", e, ctx, t, ps, ss)};
  }
  if (auto n = e.as<Invoke>()) {
    Judgment r = infer(env, *n->target);
    if (!r.type.is_class()) throw Error(codes::Type, "method call on a value of type int", e.loc);
    MethodSig sig = alpha_fresh_sig(signature(r.type.name, n->method, e.loc), supply_);
    if (sig.param_types.size() != n->args.size())
      throw Error(codes::Arity, r.type.name + "." + n->method + ": expected " +
                                    std::to_string(sig.param_types.size()) + " arguments, got " +
                                    std::to_string(n->args.size()),
                  e.loc);
    Coeffect x0 = sig.receiver;
    x0.insert(supply_.fresh());
    TypeCtx ctx = scale(x0, r.ctx);
    std::vector<DerivationPtr> ps{r.derivation};
    std::vector<Coeffect> ss{x0};
    for (std::size_t i = 0; i < n->args.size(); ++i) {
      Judgment a = infer(env, *n->args[i]);
      require_shape(a.type, sig.param_types[i], *n->args[i], "argument " + std::to_string(i + 1));
      Coeffect xi = sig.param_coeffects[i];
      xi.insert(supply_.fresh());
      ctx = sum(ctx, scale(xi, a.ctx));
      ps.push_back(a.derivation);
      ss.push_back(xi);
    }
    return {ctx, sig.ret, node("t-invk", e, ctx, sig.ret, ps, ss)};
  }
  const auto& b = std::get<Block>(e.node);
  Judgment init = infer(env, *b.init);
  TypeEnv inner = env;
  if (b.declared) {
    require_shape(init.type, *b.declared, *b.init, "initializer of '" + b.var + "'");
    inner[b.var] = *b.declared;
  }
  Judgment body = infer(inner, *b.body);
  Coeffect x = body.ctx.contains(b.var) && b.declared ? body.ctx.coeff(b.var) : Coeffect{};
  x.insert(supply_.fresh());
  std::string unbind = b.declared ? b.var : std::string();
  TypeCtx rest = b.declared ? without(body.ctx, b.var) : body.ctx;
  TypeCtx ctx = sum(scale(x, init.ctx), rest);
  return {ctx, body.type,
          node("t-block", e, ctx, body.type, {init.derivation, body.derivation}, {x, kOne},
               {"", unbind})};
}

TypeEnv SharingChecker::method_env(const std::string& cls, const MethodDecl& md,
                                   const MethodSig* sig) const {
  TypeEnv env;
  env["this"] = Type::cls(cls, sig ? sig->receiver_mod : md.receiver_mod);
  for (std::size_t i = 0; i < md.params.size(); ++i)
    env[md.params[i].name] = sig ? sig->param_types[i] : md.params[i].type;
  return env;
}

const MethodSig& SharingChecker::signature(const std::string& cls, const std::string& m, Loc loc) {
  auto key = std::make_pair(cls, m);
  if (auto it = sigs_.find(key); it != sigs_.end()) return it->second;
  const MethodDecl& md = table_.method(cls, m, loc);
  if (auto declared = table_.mtype(cls, m, loc)) return sigs_.emplace(key, *declared).first->second;

  if (in_progress_.count(key))
    throw Error(codes::Recursion,
                "method " + cls + "." + m + " is recursive and needs coeffect annotations", md.loc);
  in_progress_.insert(key);
  Judgment body;
  try {
    body = infer(method_env(cls, md, nullptr), *md.body);
  } catch (...) {
    in_progress_.erase(key);
    throw;
  }
  in_progress_.erase(key);
  if (!body.type.same_shape(md.ret))
    throw Error(codes::Type, "method " + cls + "." + m + " returns " + body.type.name +
                                 " but is declared " + md.ret.name,
                md.loc);

  MethodSig sig{md.receiver_mod, {}, {}, {}, md.ret};
  sig.receiver = body.ctx.contains("this") ? body.ctx.coeff("this") : Coeffect{};
  for (const auto& p : md.params) {
    sig.param_types.push_back(p.type);
    sig.param_coeffects.push_back(body.ctx.contains(p.name) ? body.ctx.coeff(p.name) : Coeffect{});
  }
  return sigs_.emplace(key, sig).first->second;
}

CoherenceReport SharingChecker::check_method(const std::string& cls, const std::string& m) {
  const MethodDecl& md = table_.method(cls, m);
  CoherenceReport rep;
  rep.cls = cls;
  rep.method = m;
  rep.annotated = md.annotated();
  std::vector<std::string> names{"this"};
  for (const auto& p : md.params) names.push_back(p.name);
  try {
    rep.sig = signature(cls, m);
    Judgment body = infer(method_env(cls, md, &rep.sig), *md.body);
    rep.inferred = coefficients_of(body.ctx, names);
    if (!body.type.same_shape(md.ret)) {
      rep.ok = false;
      rep.code = codes::Type;
      rep.message = "body has type " + body.type.name + ", declared " + md.ret.name;
      return rep;
    }
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
  return rep;
}

std::vector<CoherenceReport> SharingChecker::check_method_coherence() {
  std::vector<CoherenceReport> out;
  for (const auto& c : table_.classes())
    for (const auto& m : c.methods) out.push_back(check_method(c.name, m.name));
  return out;
}

void SharingChecker::require_coherent() {
  for (const auto& c : table_.classes())
    for (const auto& m : c.methods) {
      CoherenceReport r = check_method(c.name, m.name);
      if (!r.ok)
        throw Error(r.code, "method " + c.name + "." + m.name + ": " + r.message, m.loc);
    }
}

// ---------------------------------------------------------------------------

void validate_memory(const ClassTable& table, const Memory& mem) {
  for (const auto& [x, obj] : mem) {
    if (!table.has_class(obj.cls))
      throw Error(codes::Memory, "reference " + x + " has unknown class '" + obj.cls + "'");
    const auto& fields = table.fields(obj.cls);
    if (fields.size() != obj.fields.size())
      throw Error(codes::Memory, "reference " + x + ": class " + obj.cls + " has " +
                                     std::to_string(fields.size()) + " fields, object has " +
                                     std::to_string(obj.fields.size()));
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const auto& v = obj.fields[i];
      const Type& t = fields[i].type;
      if (auto r = std::get_if<Ref>(&v)) {
        auto it = mem.find(r->name);
        if (it == mem.end())
          throw Error(codes::Memory, "reference " + x + "." + fields[i].name + " dangles (" + r->name + ")");
        if (!t.is_class() || it->second.cls != t.name)
          throw Error(codes::Memory, "reference " + x + "." + fields[i].name + " holds a " +
                                         it->second.cls + ", expected " + t.name);
      } else if (!t.is_prim()) {
        throw Error(codes::Memory, "reference " + x + "." + fields[i].name + " holds an int, expected " +
                                       t.name);
      }
    }
  }
}

MemTyping type_memory(const ClassTable& table, const Memory& mem, LinkSupply& supply) {
  validate_memory(table, mem);
  MemTyping out;
  TypeCtx gamma_mu;
  for (const auto& [x, obj] : mem) {
    Link l = supply.fresh();
    out.links.emplace(x, l);
    gamma_mu.set(x, Type::cls(obj.cls), {l});
  }
  TypeCtx acc = gamma_mu;
  for (const auto& [x, obj] : mem) {
    TypeCtx obj_ctx;
    for (const auto& v : obj.fields)
      if (auto r = std::get_if<Ref>(&v))
        obj_ctx = sum(obj_ctx, TypeCtx::single(r->name, Type::cls(mem.at(r->name).cls), kOne));
    acc = sum(acc, scale({out.links.at(x)}, obj_ctx));
  }
  out.ctx = acc;
  return out;
}

TypeEnv env_of_memory(const Memory& mem) {
  TypeEnv env;
  for (const auto& [x, obj] : mem) env[x] = Type::cls(obj.cls);
  return env;
}

ConfigJudgment type_configuration(const ClassTable& table, const Expr& e, const Memory& mem,
                                  LinkSupply& supply) {
  for (const auto& x : free_vars(e))
    if (!mem.count(x)) throw Error(codes::Unbound, "free variable '" + x + "' is not a reference in memory", e.loc);
  SharingChecker checker(table, supply);
  ConfigJudgment out;
  out.expr = checker.infer(env_of_memory(mem), e);
  out.mem = type_memory(table, mem, supply);
  out.ctx = sum(out.expr.ctx, out.mem.ctx);
  return out;
}

}  // namespace coeffect
