#pragma once

// Structural coeffect λ-calculus, generic over the grading semiring.
//
//   t ::= n | x | \x:T. t | t t        T ::= int | T -[c]-> T
//
// A source file may start with `x:T, y:T |-` declaring the free variables.

#include <cctype>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "coeffect/algebra.hpp"
#include "coeffect/error.hpp"

namespace coeffect::lambda {

template <JoinSemiring S>
struct LType {
  using grade = typename S::value_type;
  using Ptr = std::shared_ptr<const LType>;

  bool is_fun = false;
  Ptr dom, cod;
  grade g{};

  static Ptr integer() { return std::make_shared<LType>(); }
  static Ptr fun(Ptr d, grade c, Ptr r) {
    auto t = std::make_shared<LType>();
    t->is_fun = true;
    t->dom = std::move(d);
    t->g = std::move(c);
    t->cod = std::move(r);
    return t;
  }
};

template <JoinSemiring S>
using TypePtr = typename LType<S>::Ptr;

template <JoinSemiring S>
bool same_type(const LType<S>& a, const LType<S>& b) {
  if (a.is_fun != b.is_fun) return false;
  if (!a.is_fun) return true;
  return a.g == b.g && same_type(*a.dom, *b.dom) && same_type(*a.cod, *b.cod);
}

// Equality after forgetting grades.
template <JoinSemiring S>
bool same_shape(const LType<S>& a, const LType<S>& b) {
  if (a.is_fun != b.is_fun) return false;
  return !a.is_fun || (same_shape(*a.dom, *b.dom) && same_shape(*a.cod, *b.cod));
}

template <JoinSemiring S>
std::string to_string(const LType<S>& t) {
  if (!t.is_fun) return "int";
  std::string d = to_string(*t.dom);
  if (t.dom->is_fun) d = "(" + d + ")";
  return d + " -[" + S::to_string(t.g) + "]-> " + to_string(*t.cod);
}

template <JoinSemiring S>
struct Term;
template <JoinSemiring S>
using TermPtr = std::shared_ptr<const Term<S>>;

template <JoinSemiring S>
struct Term {
  struct Num {
    std::int64_t value;
  };
  struct Var {
    std::string name;
  };
  struct Abs {
    std::string var;
    TypePtr<S> type;
    TermPtr<S> body;
  };
  struct App {
    TermPtr<S> fn;
    TermPtr<S> arg;
  };
  std::variant<Num, Var, Abs, App> node;
  Loc loc;

  template <class T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
  static TermPtr<S> make(decltype(node) n, Loc loc = {}) {
    return std::make_shared<Term>(Term{std::move(n), loc});
  }
};

template <JoinSemiring S>
std::string to_string(const Term<S>& t) {
  using T = Term<S>;
  if (auto n = t.template as<typename T::Num>()) return std::to_string(n->value);
  if (auto v = t.template as<typename T::Var>()) return v->name;
  if (auto a = t.template as<typename T::Abs>())
    return "\\" + a->var + ":" + to_string(*a->type) + ". " + to_string(*a->body);
  const auto& ap = std::get<typename T::App>(t.node);
  std::string f = to_string(*ap.fn);
  if (ap.fn->template as<typename T::Abs>()) f = "(" + f + ")";
  std::string x = to_string(*ap.arg);
  if (ap.arg->template as<typename T::Abs>() || ap.arg->template as<typename T::App>()) x = "(" + x + ")";
  return f + " " + x;
}

template <JoinSemiring S>
using Ctx = GradedMap<S, std::string>;

template <JoinSemiring S>
using Env = std::vector<std::pair<std::string, TypePtr<S>>>;

template <JoinSemiring S>
struct LProgram {
  Env<S> env;
  TermPtr<S> term;
};

template <JoinSemiring S>
struct LJudgment {
  TypePtr<S> type;
  Ctx<S> ctx;  // one entry per environment variable
};

// ---------------------------------------------------------------------------

namespace detail {

template <JoinSemiring S>
class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  LProgram<S> program() {
    LProgram<S> p;
    std::size_t save = pos_;
    if (has_turnstile()) {
      skip();
      if (!peek("|-")) {
        for (;;) {
          std::string x = ident();
          expect(":");
          p.env.emplace_back(x, type());
          if (!accept(",")) break;
        }
      }
      expect("|-");
    } else {
      pos_ = save;
    }
    p.term = term();
    skip();
    if (pos_ != src_.size()) fail("unexpected input");
    return p;
  }

  TypePtr<S> type() {
    TypePtr<S> d = type_atom();
    if (accept("-[")) {
      skip();
      std::size_t start = pos_;
      while (pos_ < src_.size() && src_[pos_] != ']') ++pos_;
      std::string g(src_.substr(start, pos_ - start));
      while (!g.empty() && std::isspace(static_cast<unsigned char>(g.back()))) g.pop_back();
      expect("]->");
      typename S::value_type c;
      try {
        c = S::parse(g);
      } catch (const std::exception&) {
        fail("bad grade '" + g + "'");
      }
      return LType<S>::fun(d, c, type());
    }
    return d;
  }

 private:
  using T = Term<S>;

  bool has_turnstile() const { return src_.find("|-") != std::string_view::npos; }

  TypePtr<S> type_atom() {
    if (accept("(")) {
      auto t = type();
      expect(")");
      return t;
    }
    if (ident() != "int") fail("expected a type");
    return LType<S>::integer();
  }

  TermPtr<S> term() {
    skip();
    if (accept("\\")) {
      Loc l = loc();
      std::string x = ident();
      expect(":");
      auto t = type();
      expect(".");
      return T::make(typename T::Abs{x, t, term()}, l);
    }
    TermPtr<S> f = atom();
    for (;;) {
      skip();
      if (pos_ >= src_.size() || src_[pos_] == ')') return f;
      Loc l = loc();
      TermPtr<S> a = src_[pos_] == '\\' ? term() : atom();
      f = T::make(typename T::App{f, a}, l);
    }
  }

  TermPtr<S> atom() {
    skip();
    Loc l = loc();
    if (accept("(")) {
      auto t = term();
      expect(")");
      return t;
    }
    if (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '-')) {
      std::size_t start = pos_++;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      std::string digits(src_.substr(start, pos_ - start));
      if (digits == "-") fail("expected a term");
      return T::make(typename T::Num{std::stoll(digits)}, l);
    }
    return T::make(typename T::Var{ident()}, l);
  }

  std::string ident() {
    skip();
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_' || src_[pos_] == '\''))
      ++pos_;
    if (start == pos_ || std::isdigit(static_cast<unsigned char>(src_[start]))) {
      pos_ = start;
      fail("expected an identifier");
    }
    return std::string(src_.substr(start, pos_ - start));
  }

  void skip() {
    for (;;) {
      while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (src_.substr(pos_, 2) == "//") {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        continue;
      }
      return;
    }
  }
  bool peek(std::string_view s) {
    skip();
    return src_.substr(pos_, s.size()) == s;
  }
  bool accept(std::string_view s) {
    if (!peek(s)) return false;
    pos_ += s.size();
    return true;
  }
  void expect(std::string_view s) {
    if (!accept(s)) fail("expected '" + std::string(s) + "'");
  }

  Loc loc() const {
    Loc l{1, 1};
    for (std::size_t i = 0; i < pos_ && i < src_.size(); ++i) {
      if (src_[i] == '\n') {
        ++l.line;
        l.col = 1;
      } else {
        ++l.col;
      }
    }
    return l;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw Error(codes::Parse, msg, loc()); }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace detail

template <JoinSemiring S>
LProgram<S> parse_lambda(std::string_view src) {
  return detail::Parser<S>(src).program();
}

template <JoinSemiring S>
TypePtr<S> parse_ltype(std::string_view src) {
  return detail::Parser<S>(src).type();
}

// ---------------------------------------------------------------------------

enum class Strategy { ByName, ByValue };

template <JoinSemiring S>
class Checker {
 public:
  explicit Checker(Strategy strategy = Strategy::ByName) : strategy_(strategy) {}

  LJudgment<S> infer(const Env<S>& env, const Term<S>& t) const {
    using T = Term<S>;
    if (t.template as<typename T::Num>()) return {LType<S>::integer(), zeros(env)};
    if (auto v = t.template as<typename T::Var>()) {
      for (auto it = env.rbegin(); it != env.rend(); ++it)
        if (it->first == v->name) {
          Ctx<S> ctx = zeros(env);
          ctx.set(v->name, S::one());
          return {it->second, ctx};
        }
      throw Error(codes::Unbound, "unbound variable '" + v->name + "'", t.loc);
    }
    if (auto a = t.template as<typename T::Abs>()) {
      Env<S> inner = env;
      inner.emplace_back(a->var, a->type);
      LJudgment<S> body = infer(inner, *a->body);
      typename S::value_type c = body.ctx.at(a->var);
      return {LType<S>::fun(a->type, c, body.type), unbind(body.ctx, env, a->var)};
    }
    const auto& ap = std::get<typename T::App>(t.node);
    LJudgment<S> f = infer(env, *ap.fn);
    if (!f.type->is_fun) throw Error(codes::Type, "applying a value of type " + to_string(*f.type), t.loc);
    LJudgment<S> x = infer(env, *ap.arg);
    if (!same_type(*x.type, *f.type->dom))
      throw Error(codes::Type,
                  "argument has type " + to_string(*x.type) + ", expected " + to_string(*f.type->dom),
                  ap.arg->loc);
    typename S::value_type c = f.type->g;
    if (strategy_ == Strategy::ByValue) c = S::join(c, S::one());
    return {f.type->cod, f.ctx + (c * x.ctx)};
  }

 private:
  static Ctx<S> zeros(const Env<S>& env) {
    Ctx<S> ctx;
    for (const auto& [x, t] : env) ctx.set(x, S::zero());
    return ctx;
  }

  // Drops the binder; a shadowed outer entry is unused inside the body.
  static Ctx<S> unbind(const Ctx<S>& body, const Env<S>& outer, const std::string& x) {
    Ctx<S> out;
    for (const auto& [y, t] : outer) out.set(y, y == x ? S::zero() : body.at(y));
    return out;
  }

  Strategy strategy_;
};

// Γ usable in place of the inferred context: inferred ⪯ target pointwise,
// absent entries read as 0.
template <JoinSemiring S>
bool lsub(const LJudgment<S>& j, const Ctx<S>& target) {
  for (const auto& [x, g] : j.ctx)
    if (!S::leq(g, target.at(x))) return false;
  for (const auto& [x, g] : target)
    if (!S::leq(j.ctx.at(x), g)) return false;
  return true;
}

}  // namespace coeffect::lambda
