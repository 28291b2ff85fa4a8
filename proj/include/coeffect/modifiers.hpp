#pragma once

// Type modifiers on top of sharing coeffects: lattice, combination, linear
// sum, sealing, promotion, and modifier-aware memory typing.

#include <map>
#include <optional>
#include <set>
#include <string>

#include "coeffect/sharing.hpp"

namespace coeffect {

// σ ≤ σ′, σ ≤ caps, caps ≤ mut, caps ≤ imm, mut ≤ read, imm ≤ read, closed
// reflexively and transitively. All seals are mutually related.
bool mod_leq(const Modifier& a, const Modifier& b);
bool subtype(const Type& a, const Type& b);
// Modifiers equal up to σ ≈ σ′.
bool mod_equiv(const Modifier& a, const Modifier& b);

// m[m′]; nullopt exactly for read[σ].
std::optional<Modifier> combine(const Modifier& m, const Modifier& m2);
Modifier combine_or_throw(const Modifier& m, const Modifier& m2, Loc loc = {});
// Modif(T, m): a class type's modifier becomes T.mod[m]; primitives unchanged.
Type modif(const Type& t, const Modifier& m);

// Γ ⊕ Δ: as Γ + Δ, but a caps or sealed variable may occur in one operand only.
TypeCtx sum_linear(const TypeCtx& g, const TypeCtx& d, Loc loc = {});
// Γ^σ: variables connected to res get their modifier combined with σ.
TypeCtx seal(const TypeCtx& g, const Modifier& sigma, Loc loc = {});
// Γ ⊑ Δ: modifiers pointwise non-decreasing on dom Γ (seals equivalent).
bool mod_nondecreasing(const TypeCtx& g, const TypeCtx& d, std::string* witness = nullptr);

enum class CheckMode {
  Source,   // promotion fails if a mut/read variable is connected to the result
  Runtime,  // promotion seals connected mut variables
};

class ModifierChecker {
 public:
  ModifierChecker(const ClassTable& table, LinkSupply& supply, CheckMode mode = CheckMode::Source)
      : table_(table), supply_(supply), mode_(mode) {}

  Judgment infer(const TypeEnv& env, const Expr& e);
  // Demand position: subsumption, or promotion followed by subsumption.
  Judgment check(const TypeEnv& env, const Expr& e, const Type& expected);

  const MethodSig& signature(const std::string& cls, const std::string& m, Loc loc = {});
  CoherenceReport check_method(const std::string& cls, const std::string& m);
  std::vector<CoherenceReport> check_method_coherence();
  void require_coherent();

  std::uint64_t seals_issued() const { return next_seal_; }
  // Runtime mode: free references sealed in one subderivation but not in
  // another. A derivation exists once they are sealed in the environment.
  const std::set<std::string>& needs_seal() const { return needs_seal_; }

 private:
  Judgment infer_node(const TypeEnv& env, const Expr& e);
  Judgment imm_rule(Judgment j, const Expr& e);
  Judgment promote(Judgment j, const Expr& e);
  // ⊕ in source code, + for runtime expressions.
  TypeCtx add(const TypeCtx& g, const TypeCtx& d, Loc loc);
  TypeEnv method_env(const std::string& cls, const MethodDecl& md, const MethodSig& sig) const;

  const ClassTable& table_;
  LinkSupply& supply_;
  CheckMode mode_;
  std::uint64_t next_seal_ = 0;
  std::set<std::string> needs_seal_;
  std::map<std::pair<std::string, std::string>, MethodSig> sigs_;
  std::set<std::pair<std::string, std::string>> in_progress_;
};

// ---------------------------------------------------------------------------

using ModAssignment = std::map<std::string, Modifier>;

// Extends a partial assignment to all of dom(mem): everything reachable from
// an imm reference or through an imm field is imm, seals spread through mut
// fields, the rest is mut. Throws E_MEMORY when the constraints conflict.
ModAssignment complete_modifiers(const ClassTable& table, const Memory& mem, const ModAssignment& given);

// References forced imm by `imm_refs` and imm fields, closed under reachability.
std::set<std::string> forced_imm(const ClassTable& table, const Memory& mem,
                                 const std::set<std::string>& imm_refs);

// ⊩ memory typing under a full assignment; throws E_MEMORY on violations.
MemTyping type_memory_mod(const ClassTable& table, const Memory& mem, const ModAssignment& mods,
                          LinkSupply& supply);

// Smallest equivalence generated by heap edges whose endpoints are both ≤ mut.
Partition mod_sharing(const Memory& mem, const ModAssignment& mods);
ModAssignment modifiers_of(const TypeCtx& ctx);

struct ModConfigJudgment {
  Judgment expr;
  MemTyping mem;
  ModAssignment mods;
  TypeCtx ctx;  // expr.ctx + mem.ctx
};

// Runtime-mode typing of ⟨e, mem⟩. References in `imm_refs` (plus those forced
// by imm fields) are imm, others start out mut; `expected`, when given, is
// checked with subsumption/promotion. A seal covers every reference linked to
// a sealed one through mut fields; references of the expression caught this
// way are retyped as sealed. `prior` (the assignment of a previous
// configuration) keeps its seals and imm references where that still types. With
// CheckMode::Source the expression is checked as source code over references,
// as for the initial configuration of a program.
ModConfigJudgment type_configuration_mod(const ClassTable& table, const Expr& e, const Memory& mem,
                                         const std::set<std::string>& imm_refs,
                                         const std::optional<Type>& expected, LinkSupply& supply,
                                         const ModAssignment* prior = nullptr,
                                         CheckMode mode = CheckMode::Runtime);

}  // namespace coeffect
