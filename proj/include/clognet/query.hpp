#pragma once

#include <optional>

#include "clognet/core.hpp"

namespace clognet {

// ---------------------------------------------------------------------------
// Terms

/// A query/inscription term: a typed variable or a constant value.
/// Variable types start out empty when coming from the surface syntax and are
/// resolved by type checking.
struct Term {
  enum class Kind { Var, Const };
  Kind kind = Kind::Var;
  std::string var;        // variable name
  std::string var_type;   // resolved variable type ("" = not yet known)
  Value value;            // constant payload

  static Term make_var(std::string name, std::string type = "") {
    Term t;
    t.kind = Kind::Var;
    t.var = std::move(name);
    t.var_type = std::move(type);
    return t;
  }
  static Term make_const(Value v) {
    Term t;
    t.kind = Kind::Const;
    t.value = std::move(v);
    return t;
  }

  bool is_var() const { return kind == Kind::Var; }
  std::string type() const { return is_var() ? var_type : value.type; }
  std::string str() const { return is_var() ? var : value.str(); }

  auto operator<=>(const Term&) const = default;
};

// ---------------------------------------------------------------------------
// Conditions: boolean combinations of typed equalities

struct Condition {
  enum class Kind { True, Eq, Not, And };
  Kind kind = Kind::True;
  Term lhs, rhs;                    // Eq
  std::vector<Condition> children;  // Not (1), And (2+)

  static Condition truth() { return {}; }
  static Condition eq(Term a, Term b) {
    Condition c;
    c.kind = Kind::Eq;
    c.lhs = std::move(a);
    c.rhs = std::move(b);
    return c;
  }
  static Condition neg(Condition inner) {
    Condition c;
    c.kind = Kind::Not;
    c.children.push_back(std::move(inner));
    return c;
  }
  static Condition conj(Condition a, Condition b) {
    Condition c;
    c.kind = Kind::And;
    c.children.push_back(std::move(a));
    c.children.push_back(std::move(b));
    return c;
  }
  static Condition neq(Term a, Term b) {
    return neg(eq(std::move(a), std::move(b)));
  }

  bool is_true() const { return kind == Kind::True; }
  void collect_vars(std::set<std::string>& out) const;
  void collect_constants(std::set<Value>& out) const;

  auto operator<=>(const Condition&) const = default;
};

using Substitution = std::map<std::string, Value>;

/// Standard boolean evaluation of a condition under a total substitution.
/// Throws clognet::error on unbound variables.
bool evaluate_condition(const Condition& cond, const Substitution& sub);

// ---------------------------------------------------------------------------
// Conjunctive queries with atomic negation and unions thereof

struct RelAtom {
  std::string relation;
  std::vector<Term> args;
  bool negated = false;

  std::string str() const;
  auto operator<=>(const RelAtom&) const = default;
};

struct ConjunctiveQuery {
  std::vector<Term> exist_vars;  // quantifier prefix, Kind::Var each
  std::vector<RelAtom> atoms;
  Condition condition;

  auto operator<=>(const ConjunctiveQuery&) const = default;
};

struct UnionQuery {
  std::vector<ConjunctiveQuery> disjuncts;

  static UnionQuery single(ConjunctiveQuery q) {
    UnionQuery u;
    u.disjuncts.push_back(std::move(q));
    return u;
  }

  std::set<std::string> all_vars() const;   // including quantified
  std::set<Value> all_constants() const;

  auto operator<=>(const UnionQuery&) const = default;
};

/// A union query whose variables all carry resolved types; free_vars maps
/// each free variable to its type.
struct TypedQuery {
  UnionQuery query;
  std::map<std::string, std::string> free_vars;
};

/// Type-checks q against the schema. Variables may arrive untyped; types are
/// inferred from attribute positions and equalities. `bound` pre-binds types
/// of externally scoped variables (e.g. net inscription variables).
/// All arity/type mismatches are collected in the report; on success the
/// returned query carries resolved types everywhere.
std::optional<TypedQuery> typecheck_query(
    const TypeDomain& types, const CatalogSchema& schema, const UnionQuery& q,
    const std::map<std::string, std::string>& bound, ValidationReport& report);

/// Exact evaluation: the set of substitutions θ : free(q) -> Val(Cat) with
/// Cat ⊨ qθ. Quantifiers and negation range over the type-restricted active
/// domain. A boolean query answers {⟨⟩} (true) or ∅ (false).
std::set<Substitution> evaluate_query(const TypedQuery& q,
                                      const CatalogInstance& cat);

/// Substitutes values for a subset of the free variables, turning them into
/// constants; the result's free variables are the remaining ones.
TypedQuery substitute_free(const TypedQuery& q, const Substitution& sub);

}  // namespace clognet
