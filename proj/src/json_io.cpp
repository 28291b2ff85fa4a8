#include "coeffect/json_io.hpp"

#include "coeffect/parser.hpp"

namespace coeffect {

using nlohmann::json;

json judgment_json(const TypeCtx& ctx, const Type& type, const std::string& system) {
  json out;
  out["schema"] = kSchemaVersion;
  out["system"] = system;
  out["type"] = type.is_prim() ? "int" : type.name;
  if (system == "modifiers" && type.is_class()) out["modifier"] = type.mod.to_string();

  json groups = json::array();
  for (const auto& g : canonical(ctx).groups) groups.push_back({{"vars", g.vars}, {"contains_res", g.contains_res}});
  out["groups"] = groups;

  json vars = json::object();
  for (const auto& [x, t] : ctx.types) {
    json v;
    v["type"] = t.is_prim() ? "int" : t.name;
    v["coeffect"] = print_coeffect(ctx.coeff(x));
    if (system == "modifiers" && t.is_class()) v["modifier"] = t.mod.to_string();
    v["lent"] = is_lent(ctx, x);
    vars[x] = v;
  }
  out["vars"] = vars;
  out["capsule"] = is_capsule(ctx);
  return out;
}

Memory memory_from_json(const json& j, ModAssignment* mods) {
  if (!j.is_object()) throw Error(codes::Memory, "memory file must be a JSON object");
  Memory mem;
  for (const auto& [x, o] : j.items()) {
    if (!o.is_object() || !o.contains("class") || !o["class"].is_string())
      throw Error(codes::Memory, "reference " + x + ": expected {\"class\": ..., \"fields\": [...]}");
    Object obj{o["class"].get<std::string>(), {}};
    if (o.contains("fields")) {
      if (!o["fields"].is_array()) throw Error(codes::Memory, "reference " + x + ": fields must be an array");
      for (const auto& v : o["fields"]) {
        if (v.is_string()) obj.fields.emplace_back(Ref{v.get<std::string>()});
        else if (v.is_number_integer()) obj.fields.emplace_back(v.get<std::int64_t>());
        else throw Error(codes::Memory, "reference " + x + ": field values are references or integers");
      }
    }
    if (o.contains("mod")) {
      auto m = o["mod"].is_string() ? Modifier::parse(o["mod"].get<std::string>()) : std::nullopt;
      if (!m) throw Error(codes::Memory, "reference " + x + ": bad modifier");
      if (mods) (*mods)[x] = *m;
    }
    mem.emplace(x, std::move(obj));
  }
  return mem;
}

json memory_to_json(const Memory& mem) {
  json out = json::object();
  for (const auto& [x, obj] : mem) {
    json fields = json::array();
    for (const auto& v : obj.fields) {
      if (auto r = std::get_if<Ref>(&v)) fields.push_back(r->name);
      else fields.push_back(std::get<std::int64_t>(v));
    }
    out[x] = {{"class", obj.cls}, {"fields", fields}};
  }
  return out;
}

json trace_line(std::size_t index, const std::string& rule, const Config& cfg) {
  return {{"step", index}, {"rule", rule}, {"expr", print_expr(*cfg.expr)}, {"memory", memory_to_json(cfg.mem)}};
}

}  // namespace coeffect
