#pragma once

// Preordered semirings, modules over them, and the sharing (link-set) instance.
//
// A semiring is described by a stateless policy type exposing `value_type`,
// `zero()`, `one()`, `add`, `mul` and `leq`. Modules are small value objects
// exposing `zero()`, `add`, `scale` and `leq`; the pointwise module over any
// semiring is provided, together with the fixpoint construction that turns an
// idempotent homomorphism into a new module on its fixpoints.

#include <concepts>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>

namespace coeffect {

template <class S>
concept PreorderedSemiring = requires(const typename S::value_type& a,
                                      const typename S::value_type& b) {
  typename S::value_type;
  { S::zero() } -> std::convertible_to<typename S::value_type>;
  { S::one() } -> std::convertible_to<typename S::value_type>;
  { S::add(a, b) } -> std::convertible_to<typename S::value_type>;
  { S::mul(a, b) } -> std::convertible_to<typename S::value_type>;
  { S::leq(a, b) } -> std::convertible_to<bool>;
};

template <class S>
concept JoinSemiring = PreorderedSemiring<S> && requires(const typename S::value_type& a,
                                                         const typename S::value_type& b) {
  { S::join(a, b) } -> std::convertible_to<typename S::value_type>;
};

// ---------------------------------------------------------------------------
// {0, 1, ω}: not used, used linearly, used without restriction.

enum class Usage : std::uint8_t { Zero, One, Many };

struct UsageSemiring {
  using value_type = Usage;

  static Usage zero() { return Usage::Zero; }
  static Usage one() { return Usage::One; }
  static Usage add(Usage a, Usage b) {
    if (a == Usage::Zero) return b;
    if (b == Usage::Zero) return a;
    return Usage::Many;
  }
  static Usage mul(Usage a, Usage b) {
    if (a == Usage::Zero || b == Usage::Zero) return Usage::Zero;
    if (a == Usage::One) return b;
    if (b == Usage::One) return a;
    return Usage::Many;
  }
  // 0 ⪯ ω and 1 ⪯ ω; 0 and 1 are incomparable.
  static bool leq(Usage a, Usage b) { return a == b || b == Usage::Many; }
  static Usage join(Usage a, Usage b) { return a == b ? a : Usage::Many; }

  static std::string to_string(Usage u);
  static Usage parse(std::string_view text);
};

// Natural numbers with the usual order: counts exact uses.
struct NatSemiring {
  using value_type = std::uint64_t;

  static std::uint64_t zero() { return 0; }
  static std::uint64_t one() { return 1; }
  static std::uint64_t add(std::uint64_t a, std::uint64_t b) { return a + b; }
  static std::uint64_t mul(std::uint64_t a, std::uint64_t b) { return a * b; }
  static bool leq(std::uint64_t a, std::uint64_t b) { return a <= b; }
  static std::uint64_t join(std::uint64_t a, std::uint64_t b) { return a < b ? b : a; }

  static std::string to_string(std::uint64_t n) { return std::to_string(n); }
  static std::uint64_t parse(std::string_view text);
};

// ---------------------------------------------------------------------------
// Links. Three disjoint namespaces: the distinguished result link, names
// written in source annotations, and ids handed out by a LinkSupply.

class Link {
 public:
  enum class Kind : std::uint8_t { Result, Named, Fresh };

  static Link res() { return Link(Kind::Result, 0, {}); }
  static Link named(std::string name) { return Link(Kind::Named, 0, std::move(name)); }
  static Link fresh(std::uint64_t id) { return Link(Kind::Fresh, id, {}); }

  Kind kind() const { return kind_; }
  bool is_res() const { return kind_ == Kind::Result; }
  const std::string& name() const { return name_; }
  std::uint64_t id() const { return id_; }

  // "res", the source name, or "_<id>" (never a valid source identifier).
  std::string to_string() const;

  auto operator<=>(const Link&) const = default;
  bool operator==(const Link&) const = default;

 private:
  Link(Kind kind, std::uint64_t id, std::string name)
      : kind_(kind), id_(id), name_(std::move(name)) {}

  Kind kind_;
  std::uint64_t id_;
  std::string name_;
};

using Coeffect = std::set<Link>;

std::string to_string(const Coeffect& c);

// Monotonic source of fresh links. Each inference run owns one.
class LinkSupply {
 public:
  explicit LinkSupply(std::uint64_t start = 0) : next_(start) {}
  Link fresh() { return Link::fresh(next_++); }
  std::uint64_t peek() const { return next_; }

 private:
  std::uint64_t next_;
};

// X ◁ Y: replaces res in Y by X; annihilated by an empty X.
Coeffect replace_res(const Coeffect& x, const Coeffect& y);
Coeffect set_union(const Coeffect& a, const Coeffect& b);
bool is_subset(const Coeffect& a, const Coeffect& b);

// The sharing semiring ⟨finite link sets, ⊆, ∪, ◁, ∅, {res}⟩.
struct LinkSemiring {
  using value_type = Coeffect;

  static Coeffect zero() { return {}; }
  static Coeffect one() { return {Link::res()}; }
  static Coeffect add(const Coeffect& a, const Coeffect& b) { return set_union(a, b); }
  static Coeffect mul(const Coeffect& a, const Coeffect& b) { return replace_res(a, b); }
  static bool leq(const Coeffect& a, const Coeffect& b) { return is_subset(a, b); }
  static Coeffect join(const Coeffect& a, const Coeffect& b) { return set_union(a, b); }
};

static_assert(JoinSemiring<UsageSemiring>);
static_assert(JoinSemiring<NatSemiring>);
static_assert(JoinSemiring<LinkSemiring>);

// ---------------------------------------------------------------------------
// Finite-support maps Key → S. Explicit entries are kept (so a context keeps
// its domain even where the grade is zero), but equality is equality of the
// underlying functions: a missing key reads as zero.

template <PreorderedSemiring S, class Key = std::string>
class GradedMap {
 public:
  using scalar_type = typename S::value_type;
  using key_type = Key;
  using storage = std::map<Key, scalar_type>;

  GradedMap() = default;
  GradedMap(std::initializer_list<std::pair<const Key, scalar_type>> init) : entries_(init) {}
  explicit GradedMap(storage entries) : entries_(std::move(entries)) {}

  scalar_type at(const Key& k) const {
    auto it = entries_.find(k);
    return it == entries_.end() ? S::zero() : it->second;
  }
  bool contains(const Key& k) const { return entries_.count(k) != 0; }
  void set(const Key& k, scalar_type v) { entries_[k] = std::move(v); }
  void erase(const Key& k) { entries_.erase(k); }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const storage& entries() const { return entries_; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  friend bool operator==(const GradedMap& a, const GradedMap& b) {
    for (const auto& [k, v] : a.entries_)
      if (!(v == b.at(k))) return false;
    for (const auto& [k, v] : b.entries_)
      if (!(v == a.at(k))) return false;
    return true;
  }

 private:
  storage entries_;
};

// The structural module R^X: every operation is pointwise.
template <PreorderedSemiring S, class Key = std::string>
struct PointwiseModule {
  using scalar_type = typename S::value_type;
  using element_type = GradedMap<S, Key>;

  element_type zero() const { return {}; }

  element_type add(const element_type& a, const element_type& b) const {
    element_type out = a;
    for (const auto& [k, v] : b) out.set(k, S::add(a.at(k), v));
    return out;
  }

  element_type scale(const scalar_type& r, const element_type& a) const {
    element_type out;
    for (const auto& [k, v] : a) out.set(k, S::mul(r, v));
    return out;
  }

  bool leq(const element_type& a, const element_type& b) const {
    for (const auto& [k, v] : a)
      if (!S::leq(v, b.at(k))) return false;
    for (const auto& [k, v] : b)
      if (!S::leq(a.at(k), v)) return false;
    return true;
  }
};

template <PreorderedSemiring S, class Key>
GradedMap<S, Key> operator+(const GradedMap<S, Key>& a, const GradedMap<S, Key>& b) {
  return PointwiseModule<S, Key>{}.add(a, b);
}

template <PreorderedSemiring S, class Key>
GradedMap<S, Key> operator*(const typename S::value_type& r, const GradedMap<S, Key>& a) {
  return PointwiseModule<S, Key>{}.scale(r, a);
}

// Module structure induced on the fixpoints of an idempotent homomorphism h:
// a +ʰ b = h(a + b), r ·ʰ a = h(r · a), 0ʰ = h(0).
template <class Base, class Hom>
class FixpointModule {
 public:
  using scalar_type = typename Base::scalar_type;
  using element_type = typename Base::element_type;

  FixpointModule(Base base, Hom hom) : base_(std::move(base)), hom_(std::move(hom)) {}

  element_type zero() const { return hom_(base_.zero()); }
  element_type add(const element_type& a, const element_type& b) const {
    return hom_(base_.add(a, b));
  }
  element_type scale(const scalar_type& r, const element_type& a) const {
    return hom_(base_.scale(r, a));
  }
  bool leq(const element_type& a, const element_type& b) const { return base_.leq(a, b); }
  bool is_fixpoint(const element_type& a) const { return hom_(a) == a; }
  element_type project(const element_type& a) const { return hom_(a); }

 private:
  Base base_;
  Hom hom_;
};

// ---------------------------------------------------------------------------
// Sharing coeffect contexts.

using CoeffectCtx = GradedMap<LinkSemiring, std::string>;

// Least closed context pointwise above `ctx`: links that co-occur in some
// variable's coeffect are merged, so any two coeffects end up equal or disjoint.
CoeffectCtx closure(const CoeffectCtx& ctx);
bool is_closed(const CoeffectCtx& ctx);

struct Closure {
  CoeffectCtx operator()(const CoeffectCtx& ctx) const { return closure(ctx); }
};

using StructuralLinkModule = PointwiseModule<LinkSemiring, std::string>;
using ClosedLinkModule = FixpointModule<StructuralLinkModule, Closure>;

inline ClosedLinkModule closed_link_module() { return {StructuralLinkModule{}, Closure{}}; }

// Γ + Δ = closure(Γ ∪̂ Δ) and X × Γ = closure(X ◁̂ Γ) on closed contexts.
CoeffectCtx ctx_sum(const CoeffectCtx& g, const CoeffectCtx& d);
CoeffectCtx ctx_scale(const Coeffect& x, const CoeffectCtx& g);

}  // namespace coeffect
