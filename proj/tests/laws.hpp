#pragma once

// Randomised algebraic law checks shared by the unit tests and the acceptance
// runner. Each returns the number of violated instances.

#include <random>
#include <vector>

#include "coeffect/algebra.hpp"

namespace laws {

using namespace coeffect;

inline Coeffect random_links(std::mt19937_64& rng, double res_p = 0.3) {
  static const std::vector<Link> pool = {Link::named("a"), Link::named("b"), Link::named("c"),
                                         Link::fresh(0),   Link::fresh(1),   Link::fresh(2)};
  Coeffect c;
  std::bernoulli_distribution coin(0.25), r(res_p);
  for (const auto& l : pool)
    if (coin(rng)) c.insert(l);
  if (r(rng)) c.insert(Link::res());
  return c;
}

inline Usage random_usage(std::mt19937_64& rng) {
  return static_cast<Usage>(std::uniform_int_distribution<int>(0, 2)(rng));
}

inline std::uint64_t random_nat(std::mt19937_64& rng) {
  return std::uniform_int_distribution<std::uint64_t>(0, 1000)(rng);
}

inline CoeffectCtx random_ctx(std::mt19937_64& rng, int vars = 4) {
  static const char* names[] = {"x", "y", "z", "w", "v"};
  CoeffectCtx g;
  std::bernoulli_distribution present(0.8);
  for (int i = 0; i < vars; ++i)
    if (present(rng)) g.set(names[i], random_links(rng, 0.2));
  return g;
}

// ◁ written out from its definition.
inline Coeffect oracle_replace(const Coeffect& x, const Coeffect& y) {
  if (x.empty()) return {};
  if (!y.count(Link::res())) return y;
  Coeffect out;
  for (const auto& l : y)
    if (!l.is_res()) out.insert(l);
  out.insert(x.begin(), x.end());
  return out;
}

// Saturation by repeated pairwise merging until nothing changes.
inline CoeffectCtx oracle_closure(CoeffectCtx g) {
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<std::string> keys;
    for (const auto& [k, v] : g) keys.push_back(k);
    for (std::size_t i = 0; i < keys.size() && !changed; ++i)
      for (std::size_t j = 0; j < keys.size() && !changed; ++j) {
        Coeffect a = g.at(keys[i]), b = g.at(keys[j]);
        bool meet = false;
        for (const auto& l : a) meet = meet || b.count(l);
        if (meet && a != b) {
          a.insert(b.begin(), b.end());
          g.set(keys[i], a);
          g.set(keys[j], a);
          changed = true;
        }
      }
  }
  return g;
}

template <class S, class Gen>
std::size_t semiring_violations(Gen gen, std::mt19937_64& rng, int cases) {
  std::size_t bad = 0;
  for (int i = 0; i < cases; ++i) {
    auto a = gen(rng), b = gen(rng), c = gen(rng);
    bool ok = S::add(a, S::add(b, c)) == S::add(S::add(a, b), c) && S::add(a, b) == S::add(b, a) &&
              S::add(a, S::zero()) == a && S::mul(a, S::mul(b, c)) == S::mul(S::mul(a, b), c) &&
              S::mul(S::one(), a) == a && S::mul(a, S::one()) == a &&
              S::mul(a, S::add(b, c)) == S::add(S::mul(a, b), S::mul(a, c)) &&
              S::mul(S::add(a, b), c) == S::add(S::mul(a, c), S::mul(b, c)) && S::mul(S::zero(), a) == S::zero() &&
              S::mul(a, S::zero()) == S::zero() && S::leq(a, a);
    if (S::leq(a, b) && S::leq(b, c)) ok = ok && S::leq(a, c);
    if (S::leq(a, b))
      ok = ok && S::leq(S::add(a, c), S::add(b, c)) && S::leq(S::mul(a, c), S::mul(b, c)) &&
           S::leq(S::mul(c, a), S::mul(c, b));
    auto j = S::join(a, b);
    ok = ok && S::leq(a, j) && S::leq(b, j);
    if (!ok) ++bad;
  }
  return bad;
}

template <class S, class Gen>
std::size_t pointwise_module_violations(Gen scalar, std::mt19937_64& rng, int cases) {
  PointwiseModule<S> m;
  static const char* names[] = {"x", "y", "z"};
  auto vec = [&] {
    GradedMap<S> g;
    std::bernoulli_distribution present(0.7);
    for (auto n : names)
      if (present(rng)) g.set(n, scalar(rng));
    return g;
  };
  std::size_t bad = 0;
  for (int i = 0; i < cases; ++i) {
    auto r = scalar(rng), s = scalar(rng);
    auto a = vec(), b = vec(), c = vec();
    bool ok = m.add(a, m.add(b, c)) == m.add(m.add(a, b), c) && m.add(a, b) == m.add(b, a) &&
              m.add(a, m.zero()) == a && m.scale(S::add(r, s), a) == m.add(m.scale(r, a), m.scale(s, a)) &&
              m.scale(r, m.add(a, b)) == m.add(m.scale(r, a), m.scale(r, b)) &&
              m.scale(S::mul(r, s), a) == m.scale(r, m.scale(s, a)) && m.scale(S::one(), a) == a &&
              m.scale(S::zero(), a) == m.zero() && m.scale(r, m.zero()) == m.zero();
    if (S::leq(r, s)) ok = ok && m.leq(m.scale(r, a), m.scale(s, a));
    if (!ok) ++bad;
  }
  return bad;
}

inline std::size_t closed_module_violations(std::mt19937_64& rng, int cases) {
  ClosedLinkModule m = closed_link_module();
  std::size_t bad = 0;
  for (int i = 0; i < cases; ++i) {
    CoeffectCtx a = oracle_closure(random_ctx(rng)), b = oracle_closure(random_ctx(rng)),
                c = oracle_closure(random_ctx(rng));
    Coeffect r = random_links(rng), s = random_links(rng);
    bool ok = m.is_fixpoint(a) && m.add(a, m.add(b, c)) == m.add(m.add(a, b), c) && m.add(a, b) == m.add(b, a) &&
              m.add(a, m.zero()) == a && m.scale(set_union(r, s), a) == m.add(m.scale(r, a), m.scale(s, a)) &&
              m.scale(r, m.add(a, b)) == m.add(m.scale(r, a), m.scale(r, b)) &&
              m.scale(oracle_replace(r, s), a) == m.scale(r, m.scale(s, a)) &&
              m.scale(LinkSemiring::one(), a) == a && m.scale({}, a) == m.zero() && m.is_fixpoint(m.add(a, b)) &&
              m.is_fixpoint(m.scale(r, a)) && m.add(a, b) == ctx_sum(a, b) && m.scale(r, a) == ctx_scale(r, a) &&
              m.add(a, b) == oracle_closure(PointwiseModule<LinkSemiring>{}.add(a, b));
    if (!ok) ++bad;
  }
  return bad;
}

}  // namespace laws
