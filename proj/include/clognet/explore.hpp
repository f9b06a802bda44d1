#pragma once

#include <functional>

#include "clognet/net.hpp"

namespace clognet {

// ---------------------------------------------------------------------------
// Data-aware coverability properties

/// [p >= c] or [p(x1,...,xn) >= c]: place p holds at least c tokens
/// (carrying the given tuple, when args are present).
struct PlaceAtom {
  std::string place;
  std::vector<Term> args;  // empty for the bare [p >= c] form
  std::uint64_t min_count = 1;

  std::string str() const;
  auto operator<=>(const PlaceAtom&) const = default;
};

struct PropExpr {
  enum class Kind { True, Place, Rel, Eq, Not, And };
  Kind kind = Kind::True;
  PlaceAtom place_atom;             // Place
  RelAtom rel_atom;                 // Rel
  Term lhs, rhs;                    // Eq
  std::vector<PropExpr> children;   // Not (1), And (2+)

  static PropExpr place(PlaceAtom a);
  static PropExpr rel(RelAtom a);
  static PropExpr eq(Term a, Term b);
  static PropExpr neg(PropExpr e);
  static PropExpr conj(PropExpr a, PropExpr b);

  void collect_vars(std::set<std::string>& out) const;
  void collect_constants(std::set<Value>& out) const;

  auto operator<=>(const PropExpr&) const = default;
};

/// ∃ vars . body — an unsafety property over a net.
struct Property {
  std::string name;
  std::vector<Term> vars;  // existential variables (types filled by checking)
  PropExpr body;
  std::optional<SourceSpan> span;

  bool operator==(const Property& o) const {
    return name == o.name && vars == o.vars && body == o.body;
  }
};

struct TypedProperty {
  Property property;
  std::map<std::string, std::string> var_types;
};

/// Checks atom arities and types against the net and schema, and that every
/// variable occurs in some place atom with arguments.
std::optional<TypedProperty> typecheck_property(const Net& net,
                                                const Property& prop,
                                                ValidationReport& report);

/// Searches for an assignment of the property variables (over values in m
/// plus Val(Cat)) that makes the body true.
std::optional<Substitution> eval_property(const TypedProperty& prop,
                                          const Marking& m,
                                          const CatalogInstance& cat);

// ---------------------------------------------------------------------------
// Transition-system construction

struct ExplorationLimits {
  std::uint64_t max_states = 100000;
  std::uint64_t max_depth = 1000000;
  std::optional<std::uint64_t> place_bound;  // optional per-place token bound
  std::int64_t fresh_pool_cap = 1024;        // usable pool indices per type

  // Exploration strategy. Canonical with symmetry reduction is the default;
  // the enumerate policy without canonicalization exists for cross-checks.
  FreshPolicy::Kind fresh_kind = FreshPolicy::Kind::Canonical;
  int fresh_candidates = 1;
  bool canonicalize = true;
};

struct TransitionSystem {
  struct Parent {
    std::size_t state = 0;
    std::string transition;
    Binding binding;
  };
  struct Edge {
    std::size_t from = 0;
    std::string transition;
    std::string binding_digest;
    std::size_t to = 0;
  };

  // Parallel per-state arrays; state 0 is the initial state.
  std::vector<Marking> concrete;      // as first reached (replayable)
  std::vector<Marking> canonical;     // canonical form (dedup identity)
  std::vector<std::uint64_t> depth;
  std::vector<std::optional<Parent>> parent;

  std::vector<Edge> edges;
  bool frontier_exhausted = true;
  bool fresh_cap_hit = false;

  std::size_t state_count() const { return concrete.size(); }
};

/// BFS over canonicalized markings: for each state, successors for every
/// transition and every canonical enabled binding, in declaration then
/// binding-lexicographic order. Limits cut exploration and clear
/// frontier_exhausted; they never fail.
TransitionSystem explore(const Net& net, const Marking& m0,
                         const CatalogInstance& cat,
                         const ExplorationLimits& limits);

/// Shared BFS core. The visitor sees every discovered state (including the
/// initial one) in BFS order; returning false stops the search.
TransitionSystem explore_visit(
    const Net& net, const NetAnalysis& analysis, const Marking& m0,
    const CatalogInstance& cat, const ExplorationLimits& limits,
    const std::set<Value>& extra_protected,
    const std::function<bool(std::size_t, const TransitionSystem&)>& visitor);

// ---------------------------------------------------------------------------
// Safety verdicts

struct WitnessStep {
  std::string transition;
  Binding binding;
  Marking after;
};

struct Witness {
  Marking initial;
  std::vector<WitnessStep> steps;
  Substitution assignment;   // satisfying assignment for the property
  CatalogInstance catalog;
};

struct Verdict {
  enum class Kind { Safe, Unsafe };
  Kind kind = Kind::Safe;
  std::uint64_t states_visited = 0;
  bool frontier_exhausted = true;
  bool fresh_cap_hit = false;
  std::optional<Witness> witness;

  bool unsafe() const { return kind == Kind::Unsafe; }
};

/// UNSAFE with a replayable witness iff some explored state satisfies the
/// property; otherwise SAFE up to the exploration limits. Every UNSAFE
/// verdict is re-played step by step before being returned.
Verdict check_safety(const Net& net, const Marking& m0,
                     const CatalogInstance& cat, const TypedProperty& prop,
                     const ExplorationLimits& limits);

// ---------------------------------------------------------------------------
// Catalog enumeration (small-scope parameterised checking)

/// All catalog instances with at most max_facts facts per relation over the
/// given per-type value pools, up to renaming of pool values (canonical
/// representatives only, deterministic order). Values in `protect` are never
/// renamed when canonicalizing.
std::vector<CatalogInstance> enumerate_catalogs(
    std::shared_ptr<const CatalogSchema> schema, std::uint32_t max_facts,
    const std::map<std::string, std::vector<Value>>& pools,
    const std::set<Value>& protect = {});

/// Convenience form: anonymous pools of the given size per type.
std::vector<CatalogInstance> enumerate_catalogs(
    std::shared_ptr<const CatalogSchema> schema, std::uint32_t max_facts,
    std::uint32_t pool_size);

struct CatalogBounds {
  std::uint32_t max_facts_per_relation = 1;
  std::uint32_t fresh_values_per_type = 1;
};

/// Runs check_safety for every enumerated catalog; the first UNSAFE wins and
/// carries its catalog in the witness. Pools are seeded with the constants
/// the net, marking and property can distinguish, plus fresh canonical
/// values per the bounds.
Verdict parameterised_check(const Net& net, const Marking& m0,
                            const TypedProperty& prop,
                            const CatalogBounds& bounds,
                            const ExplorationLimits& limits);

// ---------------------------------------------------------------------------
// Boundedness

struct BoundedCheck {
  bool bounded = true;
  std::uint64_t states_visited = 0;
  bool frontier_exhausted = true;
  std::optional<std::pair<std::string, Marking>> violation;
};

/// Reports the first reached marking where some place holds more than
/// `bound` tokens.
BoundedCheck check_bounded(const Net& net, const Marking& m0,
                           const CatalogInstance& cat, std::uint64_t bound,
                           const ExplorationLimits& limits);

// ---------------------------------------------------------------------------
// Conservative nets

struct NuOccurrence {
  std::string transition;
  std::string place;
  std::size_t position = 0;  // 1-based component index
  std::string variable;
};

struct ConservativeReport {
  bool conservative = true;
  std::vector<NuOccurrence> occurrences;
};

/// True iff no output inscription contains a fresh variable.
ConservativeReport classify_conservative(const Net& net);

enum class ConservativizeMode { Catalog, Provision };

struct ConservativizeResult {
  Net net;
  Marking m0;
  std::vector<RelationSchema> added_relations;
  std::vector<std::string> added_places;
};

/// Rewrites ν-variables away. Catalog mode replaces each ν of type D by a
/// normal variable constrained by a new unary relation Created_D. Provision
/// mode adds a place pre-seeded with `provision` distinct values per type and
/// lets former ν-outputs consume from it.
ConservativizeResult conservativize(const Net& net, const Marking& m0,
                                    ConservativizeMode mode,
                                    std::uint64_t provision = 0);

}  // namespace clognet
