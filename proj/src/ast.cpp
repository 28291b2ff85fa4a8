#include "coeffect/ast.hpp"

#include <set>

namespace coeffect {

std::string Modifier::to_string() const {
  switch (kind) {
    case Kind::Mut: return "mut";
    case Kind::Read: return "read";
    case Kind::Imm: return "imm";
    case Kind::Caps: return "caps";
    case Kind::Seal: return "seal#" + std::to_string(seal);
  }
  return "?";
}

std::optional<Modifier> Modifier::parse(std::string_view word) {
  if (word == "mut") return mut();
  if (word == "read") return read();
  if (word == "imm") return imm();
  if (word == "caps") return caps();
  return std::nullopt;
}

std::string Type::to_string() const {
  if (is_prim()) return name;
  if (mod.is(Modifier::Kind::Mut)) return name;
  return mod.to_string() + " " + name;
}

namespace {

ExprPtr wrap(Expr::Node node, Loc loc) {
  return std::make_shared<const Expr>(Expr{std::move(node), loc});
}

bool equal_list(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!equal(*a[i], *b[i])) return false;
  return true;
}

void collect_free(const Expr& e, std::multiset<std::string>& bound, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, Var>) {
          if (!bound.count(n.name)) out.insert(n.name);
        } else if constexpr (std::is_same_v<N, Const>) {
        } else if constexpr (std::is_same_v<N, FieldAccess>) {
          collect_free(*n.target, bound, out);
        } else if constexpr (std::is_same_v<N, FieldAssign>) {
          collect_free(*n.target, bound, out);
          collect_free(*n.value, bound, out);
        } else if constexpr (std::is_same_v<N, New>) {
          for (const auto& a : n.args) collect_free(*a, bound, out);
        } else if constexpr (std::is_same_v<N, Invoke>) {
          collect_free(*n.target, bound, out);
          for (const auto& a : n.args) collect_free(*a, bound, out);
        } else if constexpr (std::is_same_v<N, Block>) {
          collect_free(*n.init, bound, out);
          auto it = bound.insert(n.var);
          collect_free(*n.body, bound, out);
          bound.erase(it);
        }
      },
      e.node);
}

}  // namespace

ExprPtr make_var(std::string name, Loc loc) { return wrap(Var{std::move(name)}, loc); }
ExprPtr make_const(std::int64_t value, Loc loc) { return wrap(Const{value}, loc); }
ExprPtr make_field_access(ExprPtr target, std::string field, Loc loc) {
  return wrap(FieldAccess{std::move(target), std::move(field)}, loc);
}
ExprPtr make_field_assign(ExprPtr target, std::string field, ExprPtr value, Loc loc) {
  return wrap(FieldAssign{std::move(target), std::move(field), std::move(value)}, loc);
}
ExprPtr make_new(std::string cls, std::vector<ExprPtr> args, Loc loc) {
  return wrap(New{std::move(cls), std::move(args)}, loc);
}
ExprPtr make_invoke(ExprPtr target, std::string method, std::vector<ExprPtr> args, Loc loc) {
  return wrap(Invoke{std::move(target), std::move(method), std::move(args)}, loc);
}
ExprPtr make_block(std::optional<Type> declared, std::string var, ExprPtr init, ExprPtr body,
                   Loc loc) {
  return wrap(Block{std::move(declared), std::move(var), std::move(init), std::move(body)}, loc);
}
ExprPtr make_seq(ExprPtr first, ExprPtr rest, Loc loc) {
  return make_block(std::nullopt, kSeqBinder, std::move(first), std::move(rest), loc);
}

bool equal(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  if (auto x = a.as<Var>()) return x->name == b.as<Var>()->name;
  if (auto x = a.as<Const>()) return x->value == b.as<Const>()->value;
  if (auto x = a.as<FieldAccess>()) {
    auto y = b.as<FieldAccess>();
    return x->field == y->field && equal(*x->target, *y->target);
  }
  if (auto x = a.as<FieldAssign>()) {
    auto y = b.as<FieldAssign>();
    return x->field == y->field && equal(*x->target, *y->target) && equal(*x->value, *y->value);
  }
  if (auto x = a.as<New>()) {
    auto y = b.as<New>();
    return x->cls == y->cls && equal_list(x->args, y->args);
  }
  if (auto x = a.as<Invoke>()) {
    auto y = b.as<Invoke>();
    return x->method == y->method && equal(*x->target, *y->target) && equal_list(x->args, y->args);
  }
  auto x = a.as<Block>();
  auto y = b.as<Block>();
  return x->declared == y->declared && x->var == y->var && equal(*x->init, *y->init) &&
         equal(*x->body, *y->body);
}

std::set<std::string> free_vars(const Expr& e) {
  std::set<std::string> out;
  std::multiset<std::string> bound;
  collect_free(e, bound, out);
  return out;
}

std::size_t size(const Expr& e) {
  std::size_t n = 1;
  if (auto x = e.as<FieldAccess>()) n += size(*x->target);
  if (auto x = e.as<FieldAssign>()) n += size(*x->target) + size(*x->value);
  if (auto x = e.as<New>())
    for (const auto& a : x->args) n += size(*a);
  if (auto x = e.as<Invoke>()) {
    n += size(*x->target);
    for (const auto& a : x->args) n += size(*a);
  }
  if (auto x = e.as<Block>()) n += size(*x->init) + size(*x->body);
  return n;
}

// ---------------------------------------------------------------------------

MethodSig alpha_fresh_sig(const MethodSig& sig, LinkSupply& supply) {
  std::map<Link, Link> renaming;
  auto rename = [&](const Coeffect& c) {
    Coeffect out;
    for (const auto& l : c) {
      if (l.is_res()) {
        out.insert(l);
        continue;
      }
      auto it = renaming.find(l);
      if (it == renaming.end()) it = renaming.emplace(l, supply.fresh()).first;
      out.insert(it->second);
    }
    return out;
  };
  MethodSig out = sig;
  out.receiver = rename(sig.receiver);
  for (auto& c : out.param_coeffects) c = rename(c);
  return out;
}

namespace {

void check_type_known(const Type& t, const std::map<std::string, std::size_t>& index) {
  if (t.is_class() && !index.count(t.name))
    throw Error(codes::UnknownClass, "unknown class '" + t.name + "'");
}

void check_expr_classes(const Expr& e, const std::map<std::string, std::size_t>& index) {
  std::visit(
      [&](const auto& n) {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, FieldAccess>) {
          check_expr_classes(*n.target, index);
        } else if constexpr (std::is_same_v<N, FieldAssign>) {
          check_expr_classes(*n.target, index);
          check_expr_classes(*n.value, index);
        } else if constexpr (std::is_same_v<N, New>) {
          if (!index.count(n.cls)) throw Error(codes::UnknownClass, "unknown class '" + n.cls + "'", e.loc);
          for (const auto& a : n.args) check_expr_classes(*a, index);
        } else if constexpr (std::is_same_v<N, Invoke>) {
          check_expr_classes(*n.target, index);
          for (const auto& a : n.args) check_expr_classes(*a, index);
        } else if constexpr (std::is_same_v<N, Block>) {
          if (n.declared && n.declared->is_class() && !index.count(n.declared->name))
            throw Error(codes::UnknownClass, "unknown class '" + n.declared->name + "'", e.loc);
          check_expr_classes(*n.init, index);
          check_expr_classes(*n.body, index);
        }
      },
      e.node);
}

}  // namespace

ClassTable::ClassTable(std::vector<ClassDecl> classes) : classes_(std::move(classes)) {
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    const auto& c = classes_[i];
    if (c.name == "int") throw Error(codes::Duplicate, "class may not be named 'int'", c.loc);
    if (!index_.emplace(c.name, i).second)
      throw Error(codes::Duplicate, "duplicate class '" + c.name + "'", c.loc);
  }
  for (const auto& c : classes_) {
    std::set<std::string> names;
    for (const auto& f : c.fields) {
      if (!names.insert(f.name).second)
        throw Error(codes::Duplicate, "duplicate field '" + f.name + "' in class " + c.name, f.loc);
      try {
        check_type_known(f.type, index_);
      } catch (const Error& e) {
        throw Error(e.code(), e.what(), f.loc);
      }
    }
    std::set<std::string> methods;
    for (const auto& m : c.methods) {
      if (!methods.insert(m.name).second)
        throw Error(codes::Duplicate, "duplicate method '" + m.name + "' in class " + c.name, m.loc);
      std::set<std::string> params{"this"};
      try {
        check_type_known(m.ret, index_);
        for (const auto& p : m.params) {
          check_type_known(p.type, index_);
          if (!params.insert(p.name).second)
            throw Error(codes::Duplicate, "duplicate parameter '" + p.name + "' in method " + c.name +
                                              "." + m.name);
        }
      } catch (const Error& e) {
        throw Error(e.code(), e.what(), m.loc);
      }
      check_expr_classes(*m.body, index_);
    }
  }
}

const ClassDecl& ClassTable::cls(const std::string& c) const {
  auto it = index_.find(c);
  if (it == index_.end()) throw Error(codes::UnknownClass, "unknown class '" + c + "'");
  return classes_[it->second];
}

const FieldDecl& ClassTable::field(const std::string& c, const std::string& f, Loc loc) const {
  return fields(c)[field_index(c, f, loc)];
}

std::size_t ClassTable::field_index(const std::string& c, const std::string& f, Loc loc) const {
  const auto& fs = fields(c);
  for (std::size_t i = 0; i < fs.size(); ++i)
    if (fs[i].name == f) return i;
  throw Error(codes::Lookup, "class " + c + " has no field '" + f + "'", loc);
}

bool ClassTable::has_method(const std::string& c, const std::string& m) const {
  if (!has_class(c)) return false;
  for (const auto& md : cls(c).methods)
    if (md.name == m) return true;
  return false;
}

const MethodDecl& ClassTable::method(const std::string& c, const std::string& m, Loc loc) const {
  for (const auto& md : cls(c).methods)
    if (md.name == m) return md;
  throw Error(codes::Lookup, "class " + c + " has no method '" + m + "'", loc);
}

std::optional<MethodSig> ClassTable::mtype(const std::string& c, const std::string& m, Loc loc) const {
  const auto& md = method(c, m, loc);
  if (!md.annotated()) return std::nullopt;
  MethodSig sig{md.receiver_mod, *md.receiver_coeffect, {}, {}, md.ret};
  for (const auto& p : md.params) {
    sig.param_types.push_back(p.type);
    sig.param_coeffects.push_back(p.coeffect.value_or(Coeffect{}));
  }
  return sig;
}

std::pair<std::vector<std::string>, ExprPtr> ClassTable::mbody(const std::string& c,
                                                               const std::string& m, Loc loc) const {
  const auto& md = method(c, m, loc);
  std::vector<std::string> names;
  for (const auto& p : md.params) names.push_back(p.name);
  return {names, md.body};
}

}  // namespace coeffect
