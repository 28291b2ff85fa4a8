#pragma once

// Heaps: references mapped to objects whose fields hold references or ints.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace coeffect {

struct Ref {
  std::string name;
  bool operator==(const Ref&) const = default;
};

using Value = std::variant<Ref, std::int64_t>;

struct Object {
  std::string cls;
  std::vector<Value> fields;
  bool operator==(const Object&) const = default;
};

using Memory = std::map<std::string, Object>;

std::string to_string(const Value& v);

// Equivalence relation on dom(mem) as a map from reference to a canonical
// representative.
using Partition = std::map<std::string, std::string>;

}  // namespace coeffect
