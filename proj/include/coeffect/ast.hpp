#pragma once

// Abstract syntax of the object calculus and its class table.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "coeffect/algebra.hpp"
#include "coeffect/error.hpp"

namespace coeffect {

struct Modifier {
  enum class Kind : std::uint8_t { Mut, Read, Imm, Caps, Seal };

  Kind kind = Kind::Mut;
  std::uint64_t seal = 0;  // meaningful only for Seal

  static Modifier mut() { return {Kind::Mut, 0}; }
  static Modifier read() { return {Kind::Read, 0}; }
  static Modifier imm() { return {Kind::Imm, 0}; }
  static Modifier caps() { return {Kind::Caps, 0}; }
  static Modifier sealed(std::uint64_t id) { return {Kind::Seal, id}; }

  bool is(Kind k) const { return kind == k; }
  bool is_seal() const { return kind == Kind::Seal; }
  bool is_linear() const { return kind == Kind::Caps || kind == Kind::Seal; }

  std::string to_string() const;
  static std::optional<Modifier> parse(std::string_view word);

  bool operator==(const Modifier& o) const {
    return kind == o.kind && (kind != Kind::Seal || seal == o.seal);
  }
};

struct Type {
  enum class Kind : std::uint8_t { Prim, Class };

  Kind kind = Kind::Prim;
  std::string name = "int";
  Modifier mod;  // ignored for primitives

  static Type integer() { return {Kind::Prim, "int", {}}; }
  static Type cls(std::string name, Modifier mod = Modifier::mut()) {
    return {Kind::Class, std::move(name), mod};
  }

  bool is_prim() const { return kind == Kind::Prim; }
  bool is_class() const { return kind == Kind::Class; }
  Type with_mod(Modifier m) const {
    Type t = *this;
    if (is_class()) t.mod = m;
    return t;
  }

  // Equality of the underlying simple type, modifiers disregarded.
  bool same_shape(const Type& o) const { return kind == o.kind && name == o.name; }

  // "int", "C" for mut classes, otherwise "<mod> C".
  std::string to_string() const;

  bool operator==(const Type& o) const {
    return kind == o.kind && name == o.name && (is_prim() || mod == o.mod);
  }
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// The binder used for sequences `e1; e2`; not a valid source identifier.
inline constexpr const char* kSeqBinder = "_";

struct Var {
  std::string name;
};
struct Const {
  std::int64_t value;
};
struct FieldAccess {
  ExprPtr target;
  std::string field;
};
struct FieldAssign {
  ExprPtr target;
  std::string field;
  ExprPtr value;
};
struct New {
  std::string cls;
  std::vector<ExprPtr> args;
};
struct Invoke {
  ExprPtr target;
  std::string method;
  std::vector<ExprPtr> args;
};
// `{T x = init; body}`; a sequence has no declared type and binds kSeqBinder.
struct Block {
  std::optional<Type> declared;
  std::string var;
  ExprPtr init;
  ExprPtr body;

  bool is_seq() const { return !declared.has_value(); }
};

struct Expr {
  using Node = std::variant<Var, Const, FieldAccess, FieldAssign, New, Invoke, Block>;

  Node node;
  Loc loc;

  template <class T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
  bool is_value() const { return as<Var>() || as<Const>(); }
};

// Constructors.
ExprPtr make_var(std::string name, Loc loc = {});
ExprPtr make_const(std::int64_t value, Loc loc = {});
ExprPtr make_field_access(ExprPtr target, std::string field, Loc loc = {});
ExprPtr make_field_assign(ExprPtr target, std::string field, ExprPtr value, Loc loc = {});
ExprPtr make_new(std::string cls, std::vector<ExprPtr> args, Loc loc = {});
ExprPtr make_invoke(ExprPtr target, std::string method, std::vector<ExprPtr> args, Loc loc = {});
ExprPtr make_block(std::optional<Type> declared, std::string var, ExprPtr init, ExprPtr body,
                   Loc loc = {});
ExprPtr make_seq(ExprPtr first, ExprPtr rest, Loc loc = {});

bool equal(const Expr& a, const Expr& b);  // structural, locations ignored
std::set<std::string> free_vars(const Expr& e);
std::size_t size(const Expr& e);

// ---------------------------------------------------------------------------

struct FieldDecl {
  Type type;
  std::string name;
  Loc loc;
};

struct Param {
  Type type;
  std::string name;
  std::optional<Coeffect> coeffect;
};

struct MethodDecl {
  std::string name;
  Type ret;
  Modifier receiver_mod;
  std::optional<Coeffect> receiver_coeffect;
  std::vector<Param> params;
  ExprPtr body;
  Loc loc;

  bool annotated() const { return receiver_coeffect.has_value(); }
};

struct ClassDecl {
  std::string name;
  std::vector<FieldDecl> fields;
  std::vector<MethodDecl> methods;
  Loc loc;
};

// Enriched method type: receiver modifier and coeffect, decorated parameter
// types, return type.
struct MethodSig {
  Modifier receiver_mod;
  Coeffect receiver;
  std::vector<Type> param_types;
  std::vector<Coeffect> param_coeffects;
  Type ret;

  bool operator==(const MethodSig&) const = default;
};

// Renames every non-res link consistently to fresh links from `supply`.
MethodSig alpha_fresh_sig(const MethodSig& sig, LinkSupply& supply);

class ClassTable {
 public:
  ClassTable() = default;
  // Validates: unique class/field/method/parameter names, known classes in
  // every type, no class named like a primitive.
  explicit ClassTable(std::vector<ClassDecl> classes);

  bool has_class(const std::string& c) const { return index_.count(c) != 0; }
  const ClassDecl& cls(const std::string& c) const;
  const std::vector<ClassDecl>& classes() const { return classes_; }

  const std::vector<FieldDecl>& fields(const std::string& c) const { return cls(c).fields; }
  const FieldDecl& field(const std::string& c, const std::string& f, Loc loc = {}) const;
  std::size_t field_index(const std::string& c, const std::string& f, Loc loc = {}) const;

  bool has_method(const std::string& c, const std::string& m) const;
  const MethodDecl& method(const std::string& c, const std::string& m, Loc loc = {}) const;
  // Declared signature; nullopt if the method carries no coeffect annotations.
  std::optional<MethodSig> mtype(const std::string& c, const std::string& m, Loc loc = {}) const;
  // Parameter names (without `this`) and body.
  std::pair<std::vector<std::string>, ExprPtr> mbody(const std::string& c, const std::string& m,
                                                     Loc loc = {}) const;

 private:
  std::vector<ClassDecl> classes_;
  std::map<std::string, std::size_t> index_;
};

struct Program {
  ClassTable table;
  ExprPtr main;
};

}  // namespace coeffect
