#include <doctest.h>

#include <random>

#include "coeffect/algebra.hpp"
#include "laws.hpp"

using namespace coeffect;

using namespace laws;

namespace {
constexpr int kCases = 10000;
}  // namespace

TEST_SUITE("algebra") {
  TEST_CASE("usage semiring tables") {
    using U = UsageSemiring;
    const Usage z = Usage::Zero, o = Usage::One, w = Usage::Many;
    CHECK(U::add(o, o) == w);
    CHECK(U::add(z, o) == o);
    CHECK(U::add(w, z) == w);
    CHECK(U::mul(o, w) == w);
    CHECK(U::mul(w, w) == w);
    CHECK(U::mul(z, w) == z);
    CHECK(U::leq(z, w));
    CHECK(U::leq(o, w));
    CHECK_FALSE(U::leq(z, o));
    CHECK_FALSE(U::leq(o, z));
    CHECK_FALSE(U::leq(w, o));
    CHECK(U::join(z, o) == w);
    CHECK(U::to_string(w) == "w");
    CHECK(U::parse("ω") == w);
    CHECK(U::parse("1") == o);
  }

  TEST_CASE("usage semiring laws") {
    std::mt19937_64 rng(1);
    CHECK(semiring_violations<UsageSemiring>(random_usage, rng, kCases) == 0);
  }

  TEST_CASE("nat semiring laws") {
    std::mt19937_64 rng(2);
    CHECK(semiring_violations<NatSemiring>(random_nat, rng, kCases) == 0);
  }

  TEST_CASE("link semiring laws") {
    std::mt19937_64 rng(3);
    CHECK(semiring_violations<LinkSemiring>([](std::mt19937_64& r) { return random_links(r); }, rng, kCases) == 0);
  }

  TEST_CASE("replacement agrees with its definition") {
    std::mt19937_64 rng(4);
    for (int i = 0; i < kCases; ++i) {
      Coeffect x = random_links(rng), y = random_links(rng, 0.5);
      CHECK(replace_res(x, y) == oracle_replace(x, y));
    }
    Coeffect l{Link::named("l")}, l2{Link::named("l2")};
    CHECK(replace_res(l, {Link::named("l2"), Link::res()}) == Coeffect{Link::named("l"), Link::named("l2")});
    CHECK(replace_res({}, {Link::res(), Link::named("l")}).empty());
    CHECK(replace_res(l, l2) == l2);
  }

  TEST_CASE("link printing") {
    CHECK(Link::res().to_string() == "res");
    CHECK(Link::named("l").to_string() == "l");
    CHECK(Link::fresh(3).to_string() == "_3");
  }

  TEST_CASE("closure examples") {
    Link l = Link::named("l"), l1 = Link::named("l1");
    CoeffectCtx g{{"x", {l}}, {"y", {l, l1}}, {"z", {l1}}};
    CoeffectCtx c = closure(g);
    for (auto v : {"x", "y", "z"}) CHECK(c.at(v) == Coeffect{l, l1});
    CHECK_FALSE(is_closed(g));
    CHECK(is_closed(c));
    CHECK(is_closed(CoeffectCtx{}));
  }

  TEST_CASE("closure matches the saturation oracle") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < kCases; ++i) {
      CoeffectCtx g = random_ctx(rng);
      CoeffectCtx c = closure(g);
      CHECK(c == oracle_closure(g));
      CHECK(closure(c) == c);
      CHECK(StructuralLinkModule{}.leq(g, c));
      CHECK(is_closed(c));
    }
  }

  TEST_CASE("closed context operations") {
    Link l = Link::named("l"), l1 = Link::named("l1"), l2 = Link::named("l2");
    CoeffectCtx g{{"x", {l, Link::res()}}, {"y", {l1}}};
    CHECK(ctx_scale({l2}, g) == CoeffectCtx{{"x", {l, l2}}, {"y", {l1}}});
    CoeffectCtx h{{"x", {l, Link::res()}}, {"y", {l2}}};
    CHECK(ctx_scale({l2}, h) == CoeffectCtx{{"x", {l, l2}}, {"y", {l, l2}}});
    CoeffectCtx a{{"x", {l}}}, b{{"x", {l1}}, {"y", {l1}}};
    CHECK(ctx_sum(a, b) == CoeffectCtx{{"x", {l, l1}}, {"y", {l, l1}}});
    CoeffectCtx e = ctx_scale({}, g);
    CHECK(e.size() == 2);
    CHECK(e.at("x").empty());
  }

  TEST_CASE("structural module laws") {
    std::mt19937_64 rng(6);
    CHECK(pointwise_module_violations<UsageSemiring>(random_usage, rng, kCases) == 0);
    CHECK(pointwise_module_violations<NatSemiring>(random_nat, rng, kCases) == 0);
    CHECK(pointwise_module_violations<LinkSemiring>([](std::mt19937_64& r) { return random_links(r); }, rng, kCases) ==
          0);
  }

  TEST_CASE("closed-context module laws") {
    std::mt19937_64 rng(7);
    CHECK(closed_module_violations(rng, kCases) == 0);
  }

  TEST_CASE("fixpoint construction over the identity is the base module") {
    auto id = [](const GradedMap<NatSemiring>& g) { return g; };
    FixpointModule<PointwiseModule<NatSemiring>, decltype(id)> m(PointwiseModule<NatSemiring>{}, id);
    GradedMap<NatSemiring> a{{"x", 2}}, b{{"x", 3}, {"y", 1}};
    CHECK(m.add(a, b) == GradedMap<NatSemiring>{{"x", 5}, {"y", 1}});
    CHECK(m.scale(4, b) == GradedMap<NatSemiring>{{"x", 12}, {"y", 4}});
  }

  TEST_CASE("usage context examples") {
    using G = GradedMap<UsageSemiring>;
    G a{{"x", Usage::One}}, b{{"x", Usage::One}, {"y", Usage::Zero}};
    CHECK(a + b == G{{"x", Usage::Many}, {"y", Usage::Zero}});
    G c{{"x", Usage::One}, {"y", Usage::Many}};
    CHECK(Usage::Zero * c == G{{"x", Usage::Zero}, {"y", Usage::Zero}});
  }
}
