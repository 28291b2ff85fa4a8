#pragma once

#include <stdexcept>
#include <string>

namespace coeffect {

struct Loc {
  int line = 0;
  int col = 0;

  bool known() const { return line > 0; }
  std::string to_string() const { return std::to_string(line) + ":" + std::to_string(col); }
};

// Diagnostic codes. The E_ prefix is part of the external interface.
namespace codes {
inline constexpr const char* Parse = "E_PARSE";
inline constexpr const char* UnknownClass = "E_UNKNOWN_CLASS";
inline constexpr const char* Duplicate = "E_DUPLICATE";
inline constexpr const char* Unbound = "E_UNBOUND";
inline constexpr const char* Lookup = "E_LOOKUP";
inline constexpr const char* Arity = "E_ARITY";
inline constexpr const char* Type = "E_TYPE";
inline constexpr const char* Coherence = "E_COHERENCE";
inline constexpr const char* Recursion = "E_RECURSION";
inline constexpr const char* Memory = "E_MEMORY";
inline constexpr const char* ReadAssign = "E_READ_ASSIGN";
inline constexpr const char* Linear = "E_LINEAR";
inline constexpr const char* Promote = "E_PROMOTE";
inline constexpr const char* Subtype = "E_SUBTYPE";
inline constexpr const char* Combine = "E_COMBINE";
}  // namespace codes

class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message, Loc loc = {})
      : std::runtime_error(message), code_(std::move(code)), loc_(loc) {}

  const std::string& code() const { return code_; }
  const Loc& loc() const { return loc_; }

  // "line:col: E_CODE: message" (location omitted when unknown).
  std::string describe() const {
    std::string out;
    if (loc_.known()) out += loc_.to_string() + ": ";
    return out + code_ + ": " + what();
  }

 private:
  std::string code_;
  Loc loc_;
};

}  // namespace coeffect
