#pragma once

// Small-step reduction of configurations and the dynamic heap relations.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "coeffect/ast.hpp"
#include "coeffect/memory.hpp"

namespace coeffect {

struct Config {
  ExprPtr expr;
  Memory mem;
};

struct StepInfo {
  std::string rule;  // field-access | field-assign | new | invk | block
  // References bound to an imm block binder, imm parameter or imm receiver.
  std::set<std::string> imm_bindings;
};

struct StepResult {
  enum class Kind { Stepped, Done, Stuck };
  Kind kind = Kind::Done;
  Config next;  // valid when Stepped
  StepInfo info;
  std::string reason;  // when Stuck
};

struct Trace {
  enum class Outcome { Done, Stuck, Budget };
  std::vector<Config> configs;  // initial configuration first
  std::vector<StepInfo> steps;  // steps[i] leads from configs[i] to configs[i+1]
  Outcome outcome = Outcome::Done;
  std::string reason;

  const Config& last() const { return configs.back(); }
};

std::string to_string(Trace::Outcome o);

class Interpreter {
 public:
  static constexpr std::size_t kDefaultBudget = 100000;

  explicit Interpreter(const ClassTable& table, std::uint64_t counter = 0) : table_(table), next_(counter) {}

  StepResult step(const Config& cfg);
  Trace run(Config cfg, std::size_t budget = kDefaultBudget);

 private:
  // Reduces the leftmost-innermost redex of e; nullptr when e is a value.
  ExprPtr reduce(const Expr& e, Memory& mem, StepInfo& info);
  ExprPtr contract(const Expr& e, Memory& mem, StepInfo& info);
  std::string fresh_ref(const Memory& mem);

  const ClassTable& table_;
  std::uint64_t next_;
  std::uint64_t renames_ = 0;
};

// Capture-avoiding simultaneous substitution of variables by values. Binders
// that would capture a substituted name are renamed `x$k`.
ExprPtr substitute(const ExprPtr& e, const std::map<std::string, ExprPtr>& s, std::uint64_t& counter);

ExprPtr value_expr(const Value& v);
// The value denoted by a value expression.
std::optional<Value> as_value(const Expr& e);

// Smallest equivalence on dom(mem) containing the given edges (union-find).
Partition partition_of(const Memory& mem, const std::vector<std::pair<std::string, std::string>>& edges);
// Sharing relation of the heap: generated by every field edge.
Partition sharing_rel(const Memory& mem);
bool related(const Partition& p, const std::string& a, const std::string& b);
// Reflexive-transitive reachability (BFS).
std::set<std::string> reach(const Memory& mem, const std::string& x);

}  // namespace coeffect
