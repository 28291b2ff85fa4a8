// coeffect-lab: check, run and verify programs of the object calculus, and
// type terms of the graded λ-calculus.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "coeffect/harness.hpp"
#include "coeffect/interp.hpp"
#include "coeffect/json_io.hpp"
#include "coeffect/lambda.hpp"
#include "coeffect/modifiers.hpp"
#include "coeffect/parser.hpp"
#include "coeffect/sharing.hpp"

namespace {

using namespace coeffect;
using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Prefixes diagnostics with the file name.
[[noreturn]] void report(const std::string& file, const Error& e) {
  std::cerr << file << ":" << e.describe() << "\n";
  std::exit(1);
}

TypeEnv parse_env(const std::vector<std::string>& items) {
  TypeEnv env;
  for (const auto& group : items) {
    std::stringstream ss(group);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      auto eq = item.find('=');
      if (eq == std::string::npos || eq == 0) throw UsageError("--env expects name=Class[@mod], got '" + item + "'");
      std::string name = item.substr(0, eq), rhs = item.substr(eq + 1);
      Modifier mod = Modifier::mut();
      if (auto at = rhs.find('@'); at != std::string::npos) {
        auto m = Modifier::parse(rhs.substr(at + 1));
        if (!m) throw UsageError("unknown modifier in '" + item + "'");
        mod = *m;
        rhs = rhs.substr(0, at);
      }
      env[name] = rhs == "int" ? Type::integer() : Type::cls(rhs, mod);
    }
  }
  return env;
}

struct LoadedMemory {
  Memory mem;
  std::set<std::string> imm;
};

LoadedMemory load_memory(const std::string& path) {
  LoadedMemory out;
  if (path.empty()) return out;
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(codes::Memory, std::string("malformed JSON: ") + e.what());
  }
  ModAssignment mods;
  out.mem = memory_from_json(j, &mods);
  for (const auto& [x, m] : mods)
    if (m.is(Modifier::Kind::Imm)) out.imm.insert(x);
  return out;
}

void print_judgment(const json& j) {
  std::cout << "type: " << (j.contains("modifier") ? j["modifier"].get<std::string>() + " " : "")
            << j["type"].get<std::string>() << "\n";
  for (const auto& g : j["groups"]) {
    std::cout << "group: {";
    bool first = true;
    for (const auto& v : g["vars"]) {
      std::cout << (first ? "" : ", ") << v.get<std::string>();
      first = false;
    }
    std::cout << "}" << (g["contains_res"].get<bool>() ? " + res" : "") << "\n";
  }
  for (const auto& [x, v] : j["vars"].items()) {
    std::cout << "  " << x << " : "
              << (v.contains("modifier") ? v["modifier"].get<std::string>() + " " : "") << v["type"].get<std::string>()
              << " " << v["coeffect"].get<std::string>() << (v["lent"].get<bool>() ? "  lent" : "") << "\n";
  }
  std::cout << "capsule: " << (j["capsule"].get<bool>() ? "true" : "false") << "\n";
}

System parse_system(const std::string& s) { return s == "modifiers" ? System::Modifiers : System::Sharing; }

int cmd_check(const std::string& file, const std::string& system, const std::vector<std::string>& env_items,
              const std::string& mem_file, bool as_json, std::uint64_t seed) {
  Program p;
  LoadedMemory lm;
  TypeEnv env;
  try {
    p = parse_program(read_file(file));
    env = parse_env(env_items);
    lm = load_memory(mem_file);
  } catch (const Error& e) {
    report(file, e);
  }
  System sys = parse_system(system);
  LinkSupply supply(seed);
  TypeCtx ctx;
  Type type;
  try {
    if (sys == System::Sharing) {
      SharingChecker checker(p.table, supply);
      checker.require_coherent();
      if (!mem_file.empty()) {
        ConfigJudgment j = type_configuration(p.table, *p.main, lm.mem, supply);
        ctx = j.ctx;
        type = j.expr.type;
      } else {
        Judgment j = checker.infer(env, *p.main);
        ctx = j.ctx;
        type = j.type;
      }
    } else {
      ModifierChecker checker(p.table, supply);
      checker.require_coherent();
      if (!mem_file.empty()) {
        ModConfigJudgment j = type_configuration_mod(p.table, *p.main, lm.mem, lm.imm, std::nullopt, supply);
        ctx = j.ctx;
        type = j.expr.type;
      } else {
        Judgment j = checker.infer(env, *p.main);
        ctx = j.ctx;
        type = j.type;
      }
    }
  } catch (const Error& e) {
    report(file, e);
  }
  json j = judgment_json(ctx, type, to_string(sys));
  if (as_json) std::cout << j.dump() << "\n";
  else print_judgment(j);
  return 0;
}

int cmd_run(const std::string& file, const std::string& mem_file, bool trace, std::size_t budget) {
  Program p;
  LoadedMemory lm;
  try {
    p = parse_program(read_file(file));
    lm = load_memory(mem_file);
    validate_memory(p.table, lm.mem);
    for (const auto& x : free_vars(*p.main))
      if (!lm.mem.count(x)) throw Error(codes::Unbound, "free variable '" + x + "' is not a reference in memory");
  } catch (const Error& e) {
    report(file, e);
  }
  Trace t = Interpreter(p.table).run({p.main, lm.mem}, budget);
  if (trace) {
    std::cout << trace_line(0, "init", t.configs[0]).dump() << "\n";
    for (std::size_t i = 0; i < t.steps.size(); ++i)
      std::cout << trace_line(i + 1, t.steps[i].rule, t.configs[i + 1]).dump() << "\n";
  }
  json out{{"schema", kSchemaVersion},
           {"outcome", to_string(t.outcome)},
           {"steps", t.steps.size()},
           {"value", print_expr(*t.last().expr)},
           {"memory", memory_to_json(t.last().mem)}};
  if (!t.reason.empty()) out["reason"] = t.reason;
  std::cout << out.dump() << "\n";
  return t.outcome == Trace::Outcome::Done ? 0 : 1;
}

int cmd_verify(const std::string& file, const std::string& theorem, const std::string& system,
               const std::string& mem_file, std::size_t random, std::uint64_t seed, const std::string& junit,
               bool as_json) {
  System sys = parse_system(system);
  std::vector<Suite> suites;
  Program p;
  if (!file.empty()) {
    LoadedMemory lm;
    try {
      p = parse_program(read_file(file));
      lm = load_memory(mem_file);
    } catch (const Error& e) {
      report(file, e);
    }
    Subject s{file, &p.table, p.main, lm.mem, lm.imm};
    Suite suite{theorem == "imm" ? theorem : theorem + "-" + to_string(sys), {}, 0};
    if (theorem == "sr") suite.cases.push_back(verify_subject_reduction(s, sys));
    else if (theorem == "capsule") suite.cases.push_back(verify_capsule(s, sys));
    else suite.cases.push_back(verify_immutability(s));
    suites.push_back(std::move(suite));
  }
  if (random > 0) {
    if (theorem == "sr") suites.push_back(random_sr_suite(sys, seed, random));
    else if (theorem == "capsule") suites.push_back(random_capsule_suite(sys, seed, random));
    else suites.push_back(random_imm_suite(seed, random));
  }
  if (!junit.empty()) {
    std::ofstream out(junit);
    out << junit_xml(suites);
  }
  json summary = summary_json(suites);
  if (as_json) {
    std::cout << summary.dump() << "\n";
  } else {
    for (const auto& s : suites) {
      std::cout << s.name << ": " << s.cases.size() << " cases, " << s.failures() << " failures, " << s.skipped()
                << " not applicable\n";
      for (const auto& c : s.cases)
        if (!c.applicable || !c.passed)
          std::cout << "  " << (c.applicable ? "FAIL " : "n/a  ") << c.name << ": " << c.detail << "\n";
    }
  }
  return summary["passed"].get<bool>() ? 0 : 1;
}

template <JoinSemiring S>
int lambda_with(const std::string& file, bool cbv, bool as_json) {
  lambda::LProgram<S> p;
  lambda::LJudgment<S> j;
  try {
    p = lambda::parse_lambda<S>(read_file(file));
    j = lambda::Checker<S>(cbv ? lambda::Strategy::ByValue : lambda::Strategy::ByName).infer(p.env, *p.term);
  } catch (const Error& e) {
    report(file, e);
  }
  if (as_json) {
    json ctx = json::object();
    for (const auto& [x, g] : j.ctx) ctx[x] = S::to_string(g);
    std::cout << json{{"schema", kSchemaVersion}, {"type", lambda::to_string(*j.type)}, {"context", ctx}}.dump()
              << "\n";
    return 0;
  }
  bool first = true;
  for (const auto& [x, g] : j.ctx) {
    std::cout << (first ? "" : ", ") << x << ":" << S::to_string(g);
    first = false;
  }
  std::cout << (first ? "" : " ") << "|- " << lambda::to_string(*p.term) << " : " << lambda::to_string(*j.type)
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sharing and modifier coeffects for a small object calculus"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  if (const char* env = std::getenv("COEFFECT_LAB_SEED")) {
    try {
      seed = std::stoull(env);
    } catch (const std::exception&) {
      std::cerr << "COEFFECT_LAB_SEED must be a non-negative integer\n";
      return 2;
    }
  }
  app.add_option("--seed", seed, "Seed for fresh-link counters and random generation");

  std::string file, system = "sharing", mem_file, theorem = "sr", semiring = "zow", junit;
  std::vector<std::string> env_items;
  bool as_json = false, trace = false, cbv = false;
  std::size_t budget = Interpreter::kDefaultBudget, random = 0;

  auto* check = app.add_subcommand("check", "Type a program's main expression");
  check->add_option("file", file, "Source file")->required();
  check->add_option("--system", system, "sharing | modifiers")->check(CLI::IsMember({"sharing", "modifiers"}));
  check->add_option("--env", env_items, "Free variables, e.g. x=C,y=B@imm");
  check->add_option("--mem", mem_file, "Initial memory (JSON); types the configuration");
  check->add_flag("--json", as_json, "Print the canonical JSON judgment");

  auto* run = app.add_subcommand("run", "Evaluate a program");
  run->add_option("file", file, "Source file")->required();
  run->add_option("--mem", mem_file, "Initial memory (JSON)");
  run->add_flag("--trace", trace, "Print one JSON line per step");
  run->add_option("--budget", budget, "Step budget");

  auto* verify = app.add_subcommand("verify", "Check a theorem empirically");
  verify->add_option("file", file, "Source file");
  verify->add_option("--theorem", theorem, "sr | capsule | imm")->check(CLI::IsMember({"sr", "capsule", "imm"}));
  verify->add_option("--system", system, "sharing | modifiers")->check(CLI::IsMember({"sharing", "modifiers"}));
  verify->add_option("--mem", mem_file, "Initial memory (JSON)");
  verify->add_option("--random", random, "Also run N seeded random configurations");
  verify->add_option("--junit", junit, "Write a JUnit XML report");
  verify->add_flag("--json", as_json, "Print a JSON summary");

  auto* lam = app.add_subcommand("lambda", "Type a term of the graded λ-calculus");
  lam->add_option("file", file, "Source file")->required();
  lam->add_option("--semiring", semiring, "zow | nat")->check(CLI::IsMember({"zow", "nat"}));
  lam->add_flag("--cbv", cbv, "Call-by-value application rule");
  lam->add_flag("--json", as_json, "Print JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*check) return cmd_check(file, system, env_items, mem_file, as_json, seed);
    if (*run) return cmd_run(file, mem_file, trace, budget);
    if (*verify) {
      if (file.empty() && random == 0) {
        std::cerr << "verify: give a file, --random N, or both\n";
        return 2;
      }
      return cmd_verify(file, theorem, system, mem_file, random, seed, junit, as_json);
    }
    if (semiring == "nat") return lambda_with<NatSemiring>(file, cbv, as_json);
    return lambda_with<UsageSemiring>(file, cbv, as_json);
  } catch (const UsageError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}
