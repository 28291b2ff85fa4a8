#include "coeffect/parser.hpp"

#include <cctype>
#include <set>
#include <vector>

namespace coeffect {

namespace {

enum class Tok { Ident, Int, Punct, End };

struct Token {
  Tok kind;
  std::string text;
  Loc loc;
};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (src.substr(i, 2) == "//") {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (src.substr(i, 2) == "/*") {
      Loc start{line, col};
      std::size_t end = src.find("*/", i + 2);
      if (end == std::string_view::npos) throw Error(codes::Parse, "unterminated comment", start);
      advance(end + 2 - i);
      continue;
    }
    Loc loc{line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), loc});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      out.push_back({Tok::Int, std::string(src.substr(i, j - i)), loc});
      advance(j - i);
      continue;
    }
    if (std::string_view("{}()[];,.=^").find(c) != std::string_view::npos) {
      out.push_back({Tok::Punct, std::string(1, c), loc});
      advance(1);
      continue;
    }
    throw Error(codes::Parse, std::string("unexpected character '") + c + "'", loc);
  }
  out.push_back({Tok::End, "", {line, col}});
  return out;
}

const std::set<std::string> kKeywords = {"class", "new", "int", "mut", "read", "imm", "caps", "res"};

bool is_mod_word(const std::string& s) { return s == "mut" || s == "read" || s == "imm" || s == "caps"; }

// One item of a `;`-separated sequence: a declaration or an expression.
struct SeqItem {
  std::optional<Type> declared;
  std::string var;
  ExprPtr expr;
  Loc loc;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  Program program() {
    std::vector<ClassDecl> classes;
    while (peek_ident("class")) classes.push_back(class_decl());
    expect(";");
    ExprPtr main = sequence(/*top_level=*/true);
    expect_end();
    Program p{ClassTable(std::move(classes)), main};
    check_main_classes(p);
    return p;
  }

  ExprPtr bare_sequence() {
    ExprPtr e = sequence(true);
    expect_end();
    return e;
  }

  Type bare_type() {
    Type t = type();
    expect_end();
    return t;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  const Token& ahead(std::size_t k) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }

  bool peek(const char* punct) const { return cur().kind == Tok::Punct && cur().text == punct; }
  bool peek_ident(const char* word) const { return cur().kind == Tok::Ident && cur().text == word; }

  [[noreturn]] void fail(const std::string& what) const {
    std::string got = cur().kind == Tok::End ? "end of input" : "'" + cur().text + "'";
    throw Error(codes::Parse, what + ", got " + got, cur().loc);
  }

  void expect(const char* punct) {
    if (!peek(punct)) fail(std::string("expected '") + punct + "'");
    ++pos_;
  }
  bool accept(const char* punct) {
    if (!peek(punct)) return false;
    ++pos_;
    return true;
  }
  void expect_end() {
    if (cur().kind != Tok::End) fail("expected end of input");
  }

  std::string identifier(const char* what) {
    if (cur().kind != Tok::Ident || kKeywords.count(cur().text) || cur().text == kSeqBinder)
      fail(std::string("expected ") + what);
    return toks_[pos_++].text;
  }

  Type type() {
    Modifier mod = Modifier::mut();
    Loc loc = cur().loc;
    bool explicit_mod = false;
    if (cur().kind == Tok::Ident && is_mod_word(cur().text)) {
      mod = *Modifier::parse(cur().text);
      explicit_mod = true;
      ++pos_;
    }
    if (peek_ident("int")) {
      if (explicit_mod) throw Error(codes::Parse, "primitive types take no modifier", loc);
      ++pos_;
      return Type::integer();
    }
    return Type::cls(identifier("type"), mod);
  }

  Coeffect coeffect() {
    expect("{");
    Coeffect c;
    if (!peek("}")) {
      do {
        if (peek_ident("res")) {
          ++pos_;
          c.insert(Link::res());
        } else {
          c.insert(Link::named(identifier("link")));
        }
      } while (accept(","));
    }
    expect("}");
    return c;
  }

  ClassDecl class_decl() {
    ClassDecl c;
    c.loc = cur().loc;
    ++pos_;  // class
    c.name = identifier("class name");
    expect("{");
    while (!peek("}")) {
      Loc loc = cur().loc;
      bool has_mod = cur().kind == Tok::Ident && is_mod_word(cur().text);
      std::string mod_word = has_mod ? cur().text : "";
      Type t = type();
      std::string name = identifier("member name");
      if (accept(";")) {
        if (has_mod && mod_word != "mut" && mod_word != "imm")
          throw Error(codes::Parse, "fields may only be declared mut or imm", loc);
        if (!c.methods.empty()) throw Error(codes::Parse, "fields must precede methods", loc);
        c.fields.push_back({t, name, loc});
        continue;
      }
      c.methods.push_back(method_rest(t, name, loc));
    }
    expect("}");
    return c;
  }

  MethodDecl method_rest(Type ret, std::string name, Loc loc) {
    MethodDecl m;
    m.name = std::move(name);
    m.ret = std::move(ret);
    m.loc = loc;
    m.receiver_mod = Modifier::mut();
    if (accept("[")) {
      if (cur().kind == Tok::Ident && is_mod_word(cur().text)) {
        m.receiver_mod = *Modifier::parse(cur().text);
        ++pos_;
      }
      if (accept("^")) m.receiver_coeffect = coeffect();
      expect("]");
    }
    expect("(");
    if (!peek(")")) {
      do {
        Param p;
        p.type = type();
        if (accept("^")) p.coeffect = coeffect();
        p.name = identifier("parameter name");
        m.params.push_back(std::move(p));
      } while (accept(","));
    }
    expect(")");
    for (const auto& p : m.params)
      if (p.coeffect.has_value() != m.receiver_coeffect.has_value())
        throw Error(codes::Parse,
                    "method " + m.name + ": receiver and parameters must be either all annotated "
                    "with coeffects or none",
                    loc);
    expect("{");
    m.body = sequence(false);
    expect("}");
    return m;
  }

  bool at_declaration() const {
    const Token& t = cur();
    if (t.kind != Tok::Ident) return false;
    if (is_mod_word(t.text) || t.text == "int") return true;
    return !kKeywords.count(t.text) && ahead(1).kind == Tok::Ident;
  }

  ExprPtr sequence(bool top_level) {
    std::vector<SeqItem> items;
    while (true) {
      SeqItem item;
      item.loc = cur().loc;
      if (at_declaration()) {
        item.declared = type();
        item.var = identifier("variable name");
        expect("=");
      }
      item.expr = expression();
      items.push_back(std::move(item));
      if (!accept(";")) break;
      if (peek("}") || (top_level && cur().kind == Tok::End)) break;
    }
    if (items.back().declared) fail("declaration must be followed by an expression");
    ExprPtr acc = items.back().expr;
    for (std::size_t k = items.size() - 1; k-- > 0;) {
      auto& it = items[k];
      if (it.declared)
        acc = make_block(it.declared, it.var, it.expr, acc, it.loc);
      else
        acc = make_seq(it.expr, acc, it.loc);
    }
    return acc;
  }

  ExprPtr expression() {
    Loc loc = cur().loc;
    ExprPtr lhs = postfix();
    if (accept("=")) {
      auto fa = lhs->as<FieldAccess>();
      if (!fa) throw Error(codes::Parse, "left-hand side of assignment must be a field access", loc);
      ExprPtr rhs = expression();
      return make_field_assign(fa->target, fa->field, rhs, lhs->loc);
    }
    return lhs;
  }

  ExprPtr postfix() {
    ExprPtr e = primary();
    while (peek(".")) {
      ++pos_;
      Loc loc = cur().loc;
      std::string name = identifier("field or method name");
      if (peek("(")) {
        e = make_invoke(e, name, arguments(), loc);
      } else {
        e = make_field_access(e, name, loc);
      }
    }
    return e;
  }

  std::vector<ExprPtr> arguments() {
    expect("(");
    std::vector<ExprPtr> args;
    if (!peek(")")) {
      do args.push_back(expression());
      while (accept(","));
    }
    expect(")");
    return args;
  }

  ExprPtr primary() {
    const Token& t = cur();
    Loc loc = t.loc;
    if (t.kind == Tok::Int) {
      ++pos_;
      try {
        return make_const(std::stoll(t.text), loc);
      } catch (const std::out_of_range&) {
        throw Error(codes::Parse, "integer literal out of range", loc);
      }
    }
    if (peek_ident("new")) {
      ++pos_;
      std::string cls = identifier("class name");
      return make_new(cls, arguments(), loc);
    }
    if (accept("(")) {
      ExprPtr e = expression();
      expect(")");
      return e;
    }
    if (accept("{")) {
      ExprPtr e = sequence(false);
      expect("}");
      return e;
    }
    return make_var(identifier("expression"), loc);
  }

  void check_main_classes(const Program& p) {
    std::vector<const Expr*> stack{p.main.get()};
    while (!stack.empty()) {
      const Expr* e = stack.back();
      stack.pop_back();
      if (auto n = e->as<New>()) {
        if (!p.table.has_class(n->cls))
          throw Error(codes::UnknownClass, "unknown class '" + n->cls + "'", e->loc);
        for (const auto& a : n->args) stack.push_back(a.get());
      } else if (auto n = e->as<FieldAccess>()) {
        stack.push_back(n->target.get());
      } else if (auto n = e->as<FieldAssign>()) {
        stack.push_back(n->target.get());
        stack.push_back(n->value.get());
      } else if (auto n = e->as<Invoke>()) {
        stack.push_back(n->target.get());
        for (const auto& a : n->args) stack.push_back(a.get());
      } else if (auto n = e->as<Block>()) {
        if (n->declared && n->declared->is_class() && !p.table.has_class(n->declared->name))
          throw Error(codes::UnknownClass, "unknown class '" + n->declared->name + "'", e->loc);
        stack.push_back(n->init.get());
        stack.push_back(n->body.get());
      }
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

void print_items(const Expr& e, std::string& out);

void print_into(const Expr& e, std::string& out);

void print_receiver(const Expr& e, std::string& out) {
  if (e.as<FieldAssign>()) {
    out += "(";
    print_into(e, out);
    out += ")";
  } else {
    print_into(e, out);
  }
}

void print_args(const std::vector<ExprPtr>& args, std::string& out) {
  out += "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    print_into(*args[i], out);
  }
  out += ")";
}

void print_into(const Expr& e, std::string& out) {
  if (auto n = e.as<Var>()) {
    out += n->name;
  } else if (auto n = e.as<Const>()) {
    out += std::to_string(n->value);
  } else if (auto n = e.as<FieldAccess>()) {
    print_receiver(*n->target, out);
    out += "." + n->field;
  } else if (auto n = e.as<FieldAssign>()) {
    print_receiver(*n->target, out);
    out += "." + n->field + " = ";
    print_into(*n->value, out);
  } else if (auto n = e.as<New>()) {
    out += "new " + n->cls;
    print_args(n->args, out);
  } else if (auto n = e.as<Invoke>()) {
    print_receiver(*n->target, out);
    out += "." + n->method;
    print_args(n->args, out);
  } else {
    out += "{";
    print_items(e, out);
    out += "}";
  }
}

void print_items(const Expr& e, std::string& out) {
  const Block* b = e.as<Block>();
  if (!b) {
    print_into(e, out);
    return;
  }
  if (b->declared) out += print_type(*b->declared) + " " + b->var + " = ";
  print_into(*b->init, out);
  out += "; ";
  print_items(*b->body, out);
}

}  // namespace

Program parse_program(std::string_view source) { return Parser(source).program(); }
ExprPtr parse_expr(std::string_view source) { return Parser(source).bare_sequence(); }
Type parse_type(std::string_view source) { return Parser(source).bare_type(); }

std::string print_type(const Type& t) { return t.to_string(); }

std::string print_coeffect(const Coeffect& c) {
  std::string out = "{";
  bool first = true;
  for (const auto& l : c) {
    if (!first) out += ", ";
    first = false;
    out += l.to_string();
  }
  return out + "}";
}

std::string print_expr(const Expr& e) {
  std::string out;
  print_items(e, out);
  return out;
}

std::string print_program(const Program& p) {
  std::string out;
  for (const auto& c : p.table.classes()) {
    out += "class " + c.name + " {\n";
    for (const auto& f : c.fields) out += "  " + print_type(f.type) + " " + f.name + ";\n";
    for (const auto& m : c.methods) {
      out += "  " + print_type(m.ret) + " " + m.name;
      bool show_mod = !m.receiver_mod.is(Modifier::Kind::Mut);
      if (show_mod || m.annotated()) {
        out += "[";
        if (show_mod) out += m.receiver_mod.to_string();
        if (m.annotated()) out += "^" + print_coeffect(*m.receiver_coeffect);
        out += "]";
      }
      out += "(";
      for (std::size_t i = 0; i < m.params.size(); ++i) {
        if (i) out += ", ";
        out += print_type(m.params[i].type);
        if (m.params[i].coeffect) out += "^" + print_coeffect(*m.params[i].coeffect);
        out += " " + m.params[i].name;
      }
      out += ") {" + print_expr(*m.body) + "}\n";
    }
    out += "}\n";
  }
  out += ";\n" + print_expr(*p.main) + "\n";
  return out;
}

}  // namespace coeffect
