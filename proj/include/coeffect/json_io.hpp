#pragma once

// JSON forms: canonical judgments, memory files, trace lines.

#include <string>

#include <json.hpp>

#include "coeffect/interp.hpp"
#include "coeffect/modifiers.hpp"

namespace coeffect {

inline constexpr const char* kSchemaVersion = "1";

// {"schema", "system", "type", "groups": [{"vars", "contains_res"}],
//  "vars": {x: {"type", "coeffect", "modifier"?, "lent"}}, "capsule"}
nlohmann::json judgment_json(const TypeCtx& ctx, const Type& type, const std::string& system);

// {"r0": {"class": "C", "fields": ["r1", 3], "mod": "imm"}, ...}; "mod" is
// optional and collected into `mods` when given.
Memory memory_from_json(const nlohmann::json& j, ModAssignment* mods = nullptr);
nlohmann::json memory_to_json(const Memory& mem);

nlohmann::json trace_line(std::size_t index, const std::string& rule, const Config& cfg);

}  // namespace coeffect
