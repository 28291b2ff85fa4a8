#pragma once

// Sharing coeffects: type-and-coeffect contexts, bottom-up inference over
// expressions, memory and configuration typing.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "coeffect/algebra.hpp"
#include "coeffect/ast.hpp"
#include "coeffect/memory.hpp"

namespace coeffect {

using TypeEnv = std::map<std::string, Type>;

struct TypeCtx {
  std::map<std::string, Type> types;
  CoeffectCtx coeffs;

  static TypeCtx single(const std::string& x, const Type& t, Coeffect c);

  bool contains(const std::string& x) const { return types.count(x) != 0; }
  Coeffect coeff(const std::string& x) const { return coeffs.at(x); }
  const Type& type(const std::string& x) const;
  std::vector<std::string> domain() const;
  std::size_t size() const { return types.size(); }
  bool empty() const { return types.empty(); }
  void set(const std::string& x, const Type& t, Coeffect c);
  void erase(const std::string& x);

  bool operator==(const TypeCtx& o) const { return types == o.types && coeffs == o.coeffs; }
};

// Γ + Δ: union of domains, closed pointwise union of coeffects. A variable in
// both operands must have the same simple type; the left operand's modifier wins.
TypeCtx sum(const TypeCtx& g, const TypeCtx& d);
// X × Γ.
TypeCtx scale(const Coeffect& x, const TypeCtx& g);
TypeCtx without(const TypeCtx& g, const std::string& x);

// Keeps `vars` and intersects every coeffect with `links`.
TypeCtx restrict(const TypeCtx& g, const std::set<std::string>& vars, const Coeffect& links);
// ⋃ coeffects ∪ {res}.
Coeffect links_of(const TypeCtx& g);
// Coeffects and simple types only.
bool erased_equal(const TypeCtx& a, const TypeCtx& b);

bool is_lent(const TypeCtx& g, const std::string& x);
bool is_capsule(const TypeCtx& g);

// Quotient of dom(Γ) by coeffect equality. Variables with ∅ are singleton
// groups; a group is marked when its coeffect holds res.
struct Group {
  std::vector<std::string> vars;
  bool contains_res = false;

  auto operator<=>(const Group&) const = default;
};

struct Canonical {
  std::vector<Group> groups;
  bool operator==(const Canonical&) const = default;
  const Group* group_of(const std::string& x) const;
};

Canonical canonical(const TypeCtx& g);
Canonical canonical(const CoeffectCtx& g);
std::string to_string(const Canonical& c);

// ---------------------------------------------------------------------------

// One rule instance. The context of a non-leaf node is the sum over premises
// of scalars[i] × (premise i's context without unbinds[i]).
struct Derivation {
  std::string rule;
  const Expr* expr = nullptr;
  TypeCtx ctx;
  Type type;
  std::vector<std::shared_ptr<const Derivation>> premises;
  std::vector<Coeffect> scalars;
  std::vector<std::string> unbinds;
};

using DerivationPtr = std::shared_ptr<const Derivation>;

struct Judgment {
  TypeCtx ctx;
  Type type;
  DerivationPtr derivation;
};

// Recomputes a node's coeffect context from its premises.
CoeffectCtx replay(const Derivation& d);
// Checks replay against the stored context at every node.
bool replays(const Derivation& d);

// Declared and inferred coeffects of one method.
struct CoherenceReport {
  std::string cls;
  std::string method;
  bool annotated = false;
  bool ok = true;
  std::string code;  // diagnostic code when !ok
  std::string message;
  MethodSig sig;                  // declared, or inferred for unannotated methods
  std::vector<Coeffect> inferred;  // receiver first, then parameters
};

class SharingChecker {
 public:
  SharingChecker(const ClassTable& table, LinkSupply& supply) : table_(table), supply_(supply) {}

  Judgment infer(const TypeEnv& env, const Expr& e);

  // Declared signature, or the one inferred from the body (non-recursive
  // unannotated methods only).
  const MethodSig& signature(const std::string& cls, const std::string& m, Loc loc = {});

  CoherenceReport check_method(const std::string& cls, const std::string& m);
  std::vector<CoherenceReport> check_method_coherence();
  // Throws the first failing report with its diagnostic code.
  void require_coherent();

 private:
  Judgment infer_node(const TypeEnv& env, const Expr& e);
  Judgment prim(Judgment j, const Expr& e);
  TypeEnv method_env(const std::string& cls, const MethodDecl& md, const MethodSig* sig) const;

  const ClassTable& table_;
  LinkSupply& supply_;
  std::map<std::pair<std::string, std::string>, MethodSig> sigs_;
  std::set<std::pair<std::string, std::string>> in_progress_;
};

// Coeffect of each variable in `ctx`, ∅ when absent.
std::vector<Coeffect> coefficients_of(const TypeCtx& ctx, const std::vector<std::string>& vars);
// Declared-vs-inferred coherence condition; returns an explanation on failure.
std::optional<std::string> coherence_violation(const std::vector<std::string>& names,
                                               const std::vector<Coeffect>& declared,
                                               const std::vector<Coeffect>& inferred);

// ---------------------------------------------------------------------------

struct MemTyping {
  TypeCtx ctx;
  std::map<std::string, Link> links;  // ℓᵢ chosen for each reference
};

// Validates object shapes against the class table; throws E_MEMORY.
void validate_memory(const ClassTable& table, const Memory& mem);

MemTyping type_memory(const ClassTable& table, const Memory& mem, LinkSupply& supply);

struct ConfigJudgment {
  Judgment expr;
  MemTyping mem;
  TypeCtx ctx;  // expr.ctx + mem.ctx
};

TypeEnv env_of_memory(const Memory& mem);

ConfigJudgment type_configuration(const ClassTable& table, const Expr& e, const Memory& mem,
                                  LinkSupply& supply);

}  // namespace coeffect
