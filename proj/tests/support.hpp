#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "coeffect/json_io.hpp"
#include "coeffect/parser.hpp"

namespace support {

inline std::string corpus_path(const std::string& name) { return std::string(COEFFECT_CORPUS_DIR) + "/" + name; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline coeffect::Program load(const std::string& name) { return coeffect::parse_program(slurp(corpus_path(name))); }

inline coeffect::Memory load_mem(const std::string& name, coeffect::ModAssignment* mods = nullptr) {
  return coeffect::memory_from_json(nlohmann::json::parse(slurp(corpus_path(name))), mods);
}

// Groups as sorted variable lists, for order-independent comparisons.
inline std::set<std::pair<std::set<std::string>, bool>> groups(const coeffect::Canonical& c) {
  std::set<std::pair<std::set<std::string>, bool>> out;
  for (const auto& g : c.groups) out.insert({{g.vars.begin(), g.vars.end()}, g.contains_res});
  return out;
}

// Naive union-find used as an oracle.
struct UnionFind {
  std::map<std::string, std::string> parent;
  std::string find(const std::string& x) {
    if (!parent.count(x)) parent[x] = x;
    if (parent[x] == x) return x;
    return parent[x] = find(parent[x]);
  }
  void unite(const std::string& a, const std::string& b) { parent[find(a)] = find(b); }
  bool same(const std::string& a, const std::string& b) { return find(a) == find(b); }
};

}  // namespace support
