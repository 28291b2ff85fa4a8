#include "coeffect/interp.hpp"

#include <deque>
#include <numeric>

namespace coeffect {

namespace {

struct Stuck {
  std::string reason;
};

bool binds(const Block& b) { return b.declared.has_value(); }

bool captures(const std::map<std::string, ExprPtr>& s, const std::string& name) {
  for (const auto& [x, v] : s)
    if (auto var = v->as<Var>(); var && var->name == name) return true;
  return false;
}

}  // namespace

std::string to_string(Trace::Outcome o) {
  switch (o) {
    case Trace::Outcome::Done: return "done";
    case Trace::Outcome::Stuck: return "stuck";
    case Trace::Outcome::Budget: return "budget";
  }
  return "?";
}

ExprPtr value_expr(const Value& v) {
  if (auto r = std::get_if<Ref>(&v)) return make_var(r->name);
  return make_const(std::get<std::int64_t>(v));
}

std::optional<Value> as_value(const Expr& e) {
  if (auto v = e.as<Var>()) return Value{Ref{v->name}};
  if (auto c = e.as<Const>()) return Value{c->value};
  return std::nullopt;
}

ExprPtr substitute(const ExprPtr& e, const std::map<std::string, ExprPtr>& s, std::uint64_t& counter) {
  if (s.empty()) return e;
  auto sub = [&](const ExprPtr& x) { return substitute(x, s, counter); };
  auto subs = [&](const std::vector<ExprPtr>& xs) {
    std::vector<ExprPtr> out;
    for (const auto& x : xs) out.push_back(sub(x));
    return out;
  };
  if (auto n = e->as<Var>()) {
    auto it = s.find(n->name);
    return it == s.end() ? e : it->second;
  }
  if (e->as<Const>()) return e;
  if (auto n = e->as<FieldAccess>()) return make_field_access(sub(n->target), n->field, e->loc);
  if (auto n = e->as<FieldAssign>()) return make_field_assign(sub(n->target), n->field, sub(n->value), e->loc);
  if (auto n = e->as<New>()) return make_new(n->cls, subs(n->args), e->loc);
  if (auto n = e->as<Invoke>()) return make_invoke(sub(n->target), n->method, subs(n->args), e->loc);

  const auto& b = std::get<Block>(e->node);
  ExprPtr init = sub(b.init);
  if (!binds(b)) return make_block(std::nullopt, b.var, init, sub(b.body), e->loc);
  std::map<std::string, ExprPtr> inner = s;
  inner.erase(b.var);
  std::string var = b.var;
  ExprPtr body = b.body;
  if (!inner.empty() && captures(inner, var)) {
    std::string base = var.substr(0, var.find('$'));
    var = base + "$" + std::to_string(counter++);
    std::map<std::string, ExprPtr> rn{{b.var, make_var(var)}};
    body = substitute(body, rn, counter);
  }
  return make_block(b.declared, var, init, substitute(body, inner, counter), e->loc);
}

std::string Interpreter::fresh_ref(const Memory& mem) {
  for (;;) {
    std::string r = "r" + std::to_string(next_++);
    if (!mem.count(r)) return r;
  }
}

ExprPtr Interpreter::contract(const Expr& e, Memory& mem, StepInfo& info) {
  auto deref = [&](const Expr& target, const char* what) -> std::pair<std::string, Object*> {
    auto v = target.as<Var>();
    if (!v) throw Stuck{std::string(what) + " on a constant"};
    auto it = mem.find(v->name);
    if (it == mem.end()) throw Stuck{"reference " + v->name + " is not in memory"};
    return {v->name, &it->second};
  };
  auto field_index = [&](const Object& obj, const std::string& f) {
    const auto& fields = table_.fields(obj.cls);
    for (std::size_t i = 0; i < fields.size(); ++i)
      if (fields[i].name == f) return i;
    throw Stuck{"class " + obj.cls + " has no field '" + f + "'"};
  };

  if (auto n = e.as<FieldAccess>()) {
    auto [x, obj] = deref(*n->target, "field access");
    std::size_t i = field_index(*obj, n->field);
    if (i >= obj->fields.size()) throw Stuck{"object " + x + " is missing field '" + n->field + "'"};
    info.rule = "field-access";
    return value_expr(obj->fields[i]);
  }
  if (auto n = e.as<FieldAssign>()) {
    auto [x, obj] = deref(*n->target, "field assignment");
    std::size_t i = field_index(*obj, n->field);
    if (i >= obj->fields.size()) throw Stuck{"object " + x + " is missing field '" + n->field + "'"};
    obj->fields[i] = *as_value(*n->value);
    info.rule = "field-assign";
    return n->value;
  }
  if (auto n = e.as<New>()) {
    if (!table_.has_class(n->cls)) throw Stuck{"unknown class " + n->cls};
    if (table_.fields(n->cls).size() != n->args.size()) throw Stuck{"arity mismatch in new " + n->cls};
    Object obj{n->cls, {}};
    for (const auto& a : n->args) obj.fields.push_back(*as_value(*a));
    std::string r = fresh_ref(mem);
    mem.emplace(r, std::move(obj));
    info.rule = "new";
    return make_var(r);
  }
  if (auto n = e.as<Invoke>()) {
    auto [x, obj] = deref(*n->target, "method call");
    if (!table_.has_method(obj->cls, n->method)) throw Stuck{"class " + obj->cls + " has no method " + n->method};
    const MethodDecl& md = table_.method(obj->cls, n->method);
    if (md.params.size() != n->args.size()) throw Stuck{"arity mismatch in call to " + n->method};
    std::map<std::string, ExprPtr> s{{"this", n->target}};
    if (md.receiver_mod.is(Modifier::Kind::Imm)) info.imm_bindings.insert(x);
    for (std::size_t i = 0; i < md.params.size(); ++i) {
      s[md.params[i].name] = n->args[i];
      auto r = n->args[i]->as<Var>();
      if (r && md.params[i].type.is_class() && md.params[i].type.mod.is(Modifier::Kind::Imm))
        info.imm_bindings.insert(r->name);
    }
    info.rule = "invk";
    return substitute(md.body, s, renames_);
  }
  const auto& b = std::get<Block>(e.node);
  info.rule = "block";
  if (!binds(b)) return b.body;
  if (auto r = b.init->as<Var>(); r && b.declared->is_class() && b.declared->mod.is(Modifier::Kind::Imm))
    info.imm_bindings.insert(r->name);
  return substitute(b.body, {{b.var, b.init}}, renames_);
}

ExprPtr Interpreter::reduce(const Expr& e, Memory& mem, StepInfo& info) {
  if (e.is_value()) return nullptr;
  auto args = [&](const std::vector<ExprPtr>& xs) -> std::optional<std::vector<ExprPtr>> {
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (ExprPtr r = reduce(*xs[i], mem, info)) {
        std::vector<ExprPtr> out = xs;
        out[i] = r;
        return out;
      }
    return std::nullopt;
  };
  if (auto n = e.as<FieldAccess>()) {
    if (ExprPtr t = reduce(*n->target, mem, info)) return make_field_access(t, n->field, e.loc);
  } else if (auto n = e.as<FieldAssign>()) {
    if (ExprPtr t = reduce(*n->target, mem, info)) return make_field_assign(t, n->field, n->value, e.loc);
    if (ExprPtr v = reduce(*n->value, mem, info)) return make_field_assign(n->target, n->field, v, e.loc);
  } else if (auto n = e.as<New>()) {
    if (auto a = args(n->args)) return make_new(n->cls, *a, e.loc);
  } else if (auto n = e.as<Invoke>()) {
    if (ExprPtr t = reduce(*n->target, mem, info)) return make_invoke(t, n->method, n->args, e.loc);
    if (auto a = args(n->args)) return make_invoke(n->target, n->method, *a, e.loc);
  } else if (auto n = e.as<Block>()) {
    if (ExprPtr i = reduce(*n->init, mem, info)) return make_block(n->declared, n->var, i, n->body, e.loc);
  }
  return contract(e, mem, info);
}

StepResult Interpreter::step(const Config& cfg) {
  StepResult out;
  if (cfg.expr->is_value()) {
    out.kind = StepResult::Kind::Done;
    return out;
  }
  Memory mem = cfg.mem;
  try {
    ExprPtr e = reduce(*cfg.expr, mem, out.info);
    out.kind = StepResult::Kind::Stepped;
    out.next = Config{e, std::move(mem)};
  } catch (const Stuck& s) {
    out.kind = StepResult::Kind::Stuck;
    out.reason = s.reason;
    out.info = {};
  } catch (const Error& err) {
    out.kind = StepResult::Kind::Stuck;
    out.reason = err.what();
    out.info = {};
  }
  return out;
}

Trace Interpreter::run(Config cfg, std::size_t budget) {
  Trace t;
  t.configs.push_back(std::move(cfg));
  for (;;) {
    StepResult r = step(t.configs.back());
    if (r.kind == StepResult::Kind::Done) {
      t.outcome = Trace::Outcome::Done;
      return t;
    }
    if (r.kind == StepResult::Kind::Stuck) {
      t.outcome = Trace::Outcome::Stuck;
      t.reason = r.reason;
      return t;
    }
    if (t.steps.size() == budget) {
      t.outcome = Trace::Outcome::Budget;
      t.reason = "step budget of " + std::to_string(budget) + " exhausted";
      return t;
    }
    t.steps.push_back(std::move(r.info));
    t.configs.push_back(std::move(r.next));
  }
}

// ---------------------------------------------------------------------------

Partition partition_of(const Memory& mem, const std::vector<std::pair<std::string, std::string>>& edges) {
  std::vector<std::string> names;
  std::map<std::string, std::size_t> idx;
  for (const auto& [x, obj] : mem) {
    idx[x] = names.size();
    names.push_back(x);
  }
  std::vector<std::size_t> parent(names.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (const auto& [a, b] : edges) {
    auto ia = idx.find(a), ib = idx.find(b);
    if (ia == idx.end() || ib == idx.end()) continue;
    std::size_t ra = find(ia->second), rb = find(ib->second);
    // keep the smallest name as representative
    if (ra < rb) parent[rb] = ra;
    else parent[ra] = rb;
  }
  Partition p;
  for (std::size_t i = 0; i < names.size(); ++i) p[names[i]] = names[find(i)];
  return p;
}

Partition sharing_rel(const Memory& mem) {
  std::vector<std::pair<std::string, std::string>> edges;
  for (const auto& [x, obj] : mem)
    for (const auto& v : obj.fields)
      if (auto r = std::get_if<Ref>(&v)) edges.emplace_back(x, r->name);
  return partition_of(mem, edges);
}

bool related(const Partition& p, const std::string& a, const std::string& b) {
  auto ia = p.find(a), ib = p.find(b);
  return ia != p.end() && ib != p.end() && ia->second == ib->second;
}

std::set<std::string> reach(const Memory& mem, const std::string& x) {
  std::set<std::string> seen;
  std::deque<std::string> work{x};
  while (!work.empty()) {
    std::string y = work.front();
    work.pop_front();
    if (!seen.insert(y).second) continue;
    auto it = mem.find(y);
    if (it == mem.end()) continue;
    for (const auto& v : it->second.fields)
      if (auto r = std::get_if<Ref>(&v)) work.push_back(r->name);
  }
  return seen;
}

}  // namespace coeffect
