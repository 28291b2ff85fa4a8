#pragma once

// Differential checks of the type systems against the interpreter, random
// program generation and shrinking, and report output.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "coeffect/interp.hpp"
#include "coeffect/modifiers.hpp"

namespace coeffect {

enum class System { Sharing, Modifiers };
std::string to_string(System s);

// A configuration under test. `imm_refs` are references typed imm initially.
struct Subject {
  std::string name;
  const ClassTable* table = nullptr;
  ExprPtr expr;
  Memory mem;
  std::set<std::string> imm_refs;
  // How the initial expression is checked in modifier mode.
  CheckMode initial = CheckMode::Source;
};

struct Report {
  std::string name;
  bool applicable = true;  // precondition held
  bool passed = true;
  std::string detail;
  std::size_t steps = 0;
};

inline constexpr std::size_t kHarnessBudget = 10000;

// In all checks the initial configuration is typed with its expression
// checked as source code over the references of memory (unless
// Subject::initial says otherwise); later configurations are typed as runtime
// expressions.

// After every step the new configuration is retyped; erased contexts must
// satisfy restrict(Γ+Δ, dom Γ, links Γ) = Γ, the type must be preserved and,
// with modifiers, Γ ⊑ Δ.
Report verify_subject_reduction(const Subject& s, System sys, std::size_t budget = kHarnessBudget);

// Sharing: the expression context must be a capsule; every initial reference
// not connected to res must end up unrelated to the result.
// Modifiers: the configuration must type at C^caps; every initial reference
// related to the result (modifier-aware) must have moved above mut.
Report verify_capsule(const Subject& s, System sys, std::size_t budget = kHarnessBudget);

// Objects reachable from an imm reference must never change afterwards. A
// reference bound to an imm binder joins the tracked set.
// With `require_typed` the configuration must type in the modifier system
// (otherwise the report is not applicable), and a bound reference is tracked
// only if the next configuration types with it imm. Without it the dynamic
// check runs regardless, as for negative controls.
Report verify_immutability(const Subject& s, bool require_typed = true, std::size_t budget = kHarnessBudget);

// Coeffect-group equality coincides with the heap sharing relation (plain, or
// filtered through imm endpoints when `mods` is given). Also checks the
// same-group-same-modifier and deep-modifier properties in modifier mode.
Report verify_memory_lemma(const ClassTable& table, const Memory& mem, const ModAssignment* mods);

// ---------------------------------------------------------------------------

struct GenOptions {
  System system = System::Sharing;
  int min_classes = 2;
  int max_classes = 4;
  int max_fields = 3;
  int max_methods = 2;
  int objects_per_class = 2;  // upper bound; at least one each
  int expr_depth = 4;
  double annotate = 0.3;  // chance a method carries all-{res} annotations
  // Chance that main ends in an object built only from constants and fresh
  // objects, after some side-effecting prefix.
  double fresh_result = 0.0;
};

struct Generated {
  Program program;
  Memory mem;
  std::set<std::string> imm_refs;
};

ClassTable gen_class_table(std::mt19937_64& rng, const GenOptions& opt);
// Arbitrary heap (cycles included). With `imm_pool`, objects are split into a
// mutable part and an immutable part closed under field edges, so that marking
// the pool imm yields a memory typable with modifiers.
Memory gen_memory(const ClassTable& table, std::mt19937_64& rng, int per_class,
                  std::set<std::string>* imm_pool = nullptr);
// Pool references imm, plus randomly sealed groups; always accepted by
// complete_modifiers and type_memory_mod.
ModAssignment gen_mod_assignment(const ClassTable& table, const Memory& mem,
                                 const std::set<std::string>& imm_pool, std::mt19937_64& rng);

// Well-typed in the sharing system by construction; in modifier mode the
// caller filters with the modifier checker.
Generated gen_random_program(std::uint64_t seed, const GenOptions& opt = {});

// Greedy shrinking: repeatedly replaces a subexpression by one of its
// children (or drops a sequence prefix) while `still_fails` holds.
ExprPtr shrink(const ExprPtr& e, const std::function<bool(const ExprPtr&)>& still_fails);

// ---------------------------------------------------------------------------

struct Suite {
  std::string name;
  std::vector<Report> cases;
  double seconds = 0;

  std::size_t failures() const;
  std::size_t skipped() const;
};

std::string junit_xml(const std::vector<Suite>& suites);
nlohmann::json summary_json(const std::vector<Suite>& suites);

// Seeded random suites. Each produces `count` applicable cases (or fewer if the
// attempt cap is reached, reported as a failure).
Suite random_memory_suite(System sys, std::uint64_t seed, std::size_t count);
Suite random_sr_suite(System sys, std::uint64_t seed, std::size_t count);
Suite random_capsule_suite(System sys, std::uint64_t seed, std::size_t count);
Suite random_imm_suite(std::uint64_t seed, std::size_t count);

}  // namespace coeffect
