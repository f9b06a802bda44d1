#pragma once

#include "clognet/query.hpp"

namespace clognet {

// ---------------------------------------------------------------------------
// Net structure

/// One component of an arc inscription: a normal variable, a fresh
/// (ν) variable, or a constant. Fresh variables and constants are only legal
/// on output arcs.
struct InsTerm {
  enum class Kind { Var, Fresh, Const };
  Kind kind = Kind::Var;
  std::string var;
  Value value;

  static InsTerm make_var(std::string name) {
    InsTerm t;
    t.kind = Kind::Var;
    t.var = std::move(name);
    return t;
  }
  static InsTerm make_fresh(std::string name) {
    InsTerm t;
    t.kind = Kind::Fresh;
    t.var = std::move(name);
    return t;
  }
  static InsTerm make_const(Value v) {
    InsTerm t;
    t.kind = Kind::Const;
    t.value = std::move(v);
    return t;
  }

  bool is_var() const { return kind != Kind::Const; }
  std::string str() const;

  auto operator<=>(const InsTerm&) const = default;
};

/// Arc inscription k·ω: k copies of one tuple of terms.
struct Inscription {
  std::uint64_t multiplicity = 1;
  std::vector<InsTerm> tuple;

  std::string str() const;
  auto operator<=>(const Inscription&) const = default;
};

struct Place {
  std::string name;
  std::vector<std::string> color;  // component type names
  std::optional<SourceSpan> span;

  bool operator==(const Place& o) const {
    return name == o.name && color == o.color;
  }
};

struct Arc {
  std::string place;
  Inscription inscription;
  std::optional<SourceSpan> span;

  bool operator==(const Arc& o) const {
    return place == o.place && inscription == o.inscription;
  }
};

struct Transition {
  std::string name;
  std::vector<Arc> inputs;
  std::vector<Arc> outputs;
  std::optional<UnionQuery> guard_query;
  Condition guard_condition;  // defaults to ⊤
  std::optional<SourceSpan> span;

  bool has_guard() const {
    return guard_query.has_value() || !guard_condition.is_true();
  }
  const Arc* input_to(const std::string& place) const;
  const Arc* output_to(const std::string& place) const;

  bool operator==(const Transition& o) const {
    return name == o.name && inputs == o.inputs && outputs == o.outputs &&
           guard_query == o.guard_query && guard_condition == o.guard_condition;
  }
};

struct Net {
  TypeDomain types;
  std::shared_ptr<const CatalogSchema> schema;
  std::vector<Place> places;
  std::vector<Transition> transitions;

  const Place* find_place(const std::string& name) const;
  const Transition* find_transition(const std::string& name) const;

  bool operator==(const Net& o) const {
    return types == o.types && places == o.places &&
           transitions == o.transitions &&
           ((schema == nullptr) == (o.schema == nullptr)) &&
           (schema == nullptr || *schema == *o.schema);
  }
};

// ---------------------------------------------------------------------------
// Markings and bindings

struct Marking {
  std::map<std::string, Multiset<Tuple>> places;

  const Multiset<Tuple>& tokens(const std::string& place) const;
  void add(const std::string& place, Tuple token, std::uint64_t k = 1);
  /// Drops empty multisets so equal markings compare equal.
  void normalize();
  std::set<Value> values() const;  // Val(m)
  std::uint64_t total_tokens() const;
  std::uint64_t tokens_in(const std::string& place) const {
    return tokens(place).size();
  }
  std::string str() const;

  auto operator<=>(const Marking&) const = default;
};

using Binding = std::map<std::string, Value>;

std::string binding_str(const Binding& b);

// ---------------------------------------------------------------------------
// Static analysis

/// Per-transition variable roles and the type-checked guard query.
struct TransitionAnalysis {
  std::map<std::string, std::string> in_vars;    // name -> type
  std::map<std::string, std::string> out_vars;   // name -> type (incl. fresh)
  std::map<std::string, std::string> all_vars;
  std::set<std::string> fresh_vars;
  std::optional<TypedQuery> guard;               // typed guard query, if any
};

struct NetAnalysis {
  std::map<std::string, TransitionAnalysis> transitions;
};

/// Structural validation of Def. 1 side conditions plus executability checks:
/// flow typing on both sides, guard conditions (a) and (b), ν-variables only
/// on output arcs, no dangling output variables.
ValidationReport validate_net(const Net& net);

/// Checks a marking against the net's places and colors.
ValidationReport validate_marking(const Net& net, const Marking& m);

ValidationReport typecheck_net(const Net& net, NetAnalysis& out);

/// Throwing convenience: analysis of a net that must already be valid.
NetAnalysis analyze_net(const Net& net);

/// Constants mentioned by guards and output inscriptions.
std::set<Value> net_constant_values(const Net& net);

// ---------------------------------------------------------------------------
// Semantics

struct FreshPolicy {
  enum class Kind { Canonical, Enumerate };
  Kind kind = Kind::Canonical;
  int candidates = 1;                       // for Enumerate
  std::int64_t pool_cap = 1'000'000'000;    // max usable pool index (exclusive)

  static FreshPolicy canonical() { return {}; }
  static FreshPolicy enumerate(int n) {
    FreshPolicy p;
    p.kind = Kind::Enumerate;
    p.candidates = n;
    return p;
  }
};

/// All bindings enabling t in marking m with catalog cat (Def. 2).
/// Fresh variables are bound per `policy`: canonical picks the least unused
/// pool value per ν-variable; enumerate(n) offers the n least ones.
/// `extra_protected` widens the value set fresh choices must avoid (on top of
/// Val(m) ∪ Val(Cat) ∪ net constants); `cap_hit` is set when the pool cap
/// suppressed at least one fresh choice.
std::vector<Binding> enabled_bindings(
    const Net& net, const NetAnalysis& analysis, const Marking& m,
    const CatalogInstance& cat, const Transition& t, const FreshPolicy& policy,
    const std::set<Value>* extra_protected = nullptr, bool* cap_hit = nullptr);

std::vector<Binding> enabled_bindings(const Net& net, const Marking& m,
                                      const CatalogInstance& cat,
                                      const Transition& t,
                                      const FreshPolicy& policy);

/// Fires t under binding σ (Def. 3):
/// m'(p) = m(p) − σ(F_in(p,t)) + σ(F_out(t,p)).
/// With verify set, throws clognet::error unless σ satisfies Def. 2.
Marking fire(const Net& net, const NetAnalysis& analysis, const Marking& m,
             const CatalogInstance& cat, const Transition& t,
             const Binding& binding, bool verify = true);

Marking fire(const Net& net, const Marking& m, const CatalogInstance& cat,
             const Transition& t, const Binding& binding, bool verify = true);

/// Applies σ to every variable occurrence of the inscription; constants and
/// multiplicities are preserved. Throws on unbound variables.
Multiset<Tuple> apply_substitution(const Binding& binding,
                                   const Inscription& inscription);

/// Renames pool values outside `protect` to the least available pool indices
/// of their type, in first-occurrence order under the (place, token) order.
/// Protected values and named symbols are never touched.
Marking canonicalize_marking(const Marking& m, const std::set<Value>& protect);

}  // namespace clognet
