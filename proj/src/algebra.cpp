#include "coeffect/algebra.hpp"

#include <numeric>
#include <stdexcept>
#include <vector>

namespace coeffect {

std::string UsageSemiring::to_string(Usage u) {
  switch (u) {
    case Usage::Zero: return "0";
    case Usage::One: return "1";
    case Usage::Many: return "w";
  }
  return "?";
}

Usage UsageSemiring::parse(std::string_view text) {
  if (text == "0") return Usage::Zero;
  if (text == "1") return Usage::One;
  if (text == "w" || text == "ω" || text == "omega") return Usage::Many;
  throw std::invalid_argument("not a usage grade: " + std::string(text));
}

std::uint64_t NatSemiring::parse(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty grade");
  std::uint64_t n = 0;
  for (char c : text) {
    if (c < '0' || c > '9') throw std::invalid_argument("not a natural grade: " + std::string(text));
    n = n * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return n;
}

std::string Link::to_string() const {
  switch (kind_) {
    case Kind::Result: return "res";
    case Kind::Named: return name_;
    case Kind::Fresh: return "_" + std::to_string(id_);
  }
  return "?";
}

std::string to_string(const Coeffect& c) {
  std::string out = "{";
  bool first = true;
  for (const auto& l : c) {
    if (!first) out += ",";
    first = false;
    out += l.to_string();
  }
  return out + "}";
}

Coeffect replace_res(const Coeffect& x, const Coeffect& y) {
  if (x.empty()) return {};
  if (!y.count(Link::res())) return y;
  Coeffect out = y;
  out.erase(Link::res());
  out.insert(x.begin(), x.end());
  return out;
}

Coeffect set_union(const Coeffect& a, const Coeffect& b) {
  Coeffect out = a;
  out.insert(b.begin(), b.end());
  return out;
}

bool is_subset(const Coeffect& a, const Coeffect& b) {
  for (const auto& l : a)
    if (!b.count(l)) return false;
  return true;
}

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;

  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

  std::size_t find(std::size_t i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

CoeffectCtx closure(const CoeffectCtx& ctx) {
  std::map<Link, std::size_t> index;
  for (const auto& [x, c] : ctx)
    for (const auto& l : c) index.emplace(l, index.size());

  UnionFind uf(index.size());
  for (const auto& [x, c] : ctx) {
    if (c.empty()) continue;
    std::size_t first = index.at(*c.begin());
    for (const auto& l : c) uf.unite(index.at(l), first);
  }

  std::map<std::size_t, Coeffect> component;
  for (const auto& [l, i] : index) component[uf.find(i)].insert(l);

  CoeffectCtx out;
  for (const auto& [x, c] : ctx) {
    if (c.empty()) {
      out.set(x, {});
      continue;
    }
    out.set(x, component.at(uf.find(index.at(*c.begin()))));
  }
  return out;
}

bool is_closed(const CoeffectCtx& ctx) {
  for (const auto& [x, a] : ctx)
    for (const auto& [y, b] : ctx) {
      if (a == b) continue;
      for (const auto& l : a)
        if (b.count(l)) return false;
    }
  return true;
}

CoeffectCtx ctx_sum(const CoeffectCtx& g, const CoeffectCtx& d) {
  return closed_link_module().add(g, d);
}

CoeffectCtx ctx_scale(const Coeffect& x, const CoeffectCtx& g) {
  return closed_link_module().scale(x, g);
}

}  // namespace coeffect
