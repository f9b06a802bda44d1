#pragma once

// Brute-force oracles, independent of the library's evaluation and
// enablement code paths. They re-derive the definitions from first
// principles by plain enumeration.

#include "clognet/explore.hpp"
#include "clognet/net.hpp"
#include "clognet/query.hpp"

namespace testing_support {

using namespace clognet;

inline const Value& oracle_term_value(const Term& t, const Substitution& s) {
  if (!t.is_var()) return t.value;
  return s.at(t.var);
}

inline bool oracle_condition(const Condition& c, const Substitution& s) {
  switch (c.kind) {
    case Condition::Kind::True:
      return true;
    case Condition::Kind::Eq:
      return oracle_term_value(c.lhs, s) == oracle_term_value(c.rhs, s);
    case Condition::Kind::Not:
      return !oracle_condition(c.children.at(0), s);
    case Condition::Kind::And:
      for (const auto& ch : c.children)
        if (!oracle_condition(ch, s)) return false;
      return true;
  }
  return false;
}

/// Cat ⊨ body θ for a fully instantiated conjunctive-query body, evaluating
/// the quantifier prefix by recursion over the active domain.
inline bool oracle_entails(const ConjunctiveQuery& cq,
                           const CatalogInstance& cat, Substitution theta,
                           std::size_t quantifier) {
  if (quantifier < cq.exist_vars.size()) {
    const Term& v = cq.exist_vars[quantifier];
    auto dom = active_domain(cat);
    for (const Value& candidate : dom[v.var_type]) {
      Substitution extended = theta;
      extended[v.var] = candidate;
      if (oracle_entails(cq, cat, std::move(extended), quantifier + 1))
        return true;
    }
    return false;
  }
  for (const RelAtom& atom : cq.atoms) {
    Tuple ground;
    for (const Term& t : atom.args)
      ground.push_back(oracle_term_value(t, theta));
    bool present = cat.has_fact(atom.relation, ground);
    if (present == atom.negated) return false;
  }
  return oracle_condition(cq.condition, theta);
}

/// ans(Q, Cat) by enumerating every substitution free(Q) -> Val(Cat).
inline std::set<Substitution> oracle_answers(const TypedQuery& q,
                                             const CatalogInstance& cat) {
  std::set<Substitution> result;
  auto dom = active_domain(cat);
  std::vector<std::pair<std::string, std::string>> frees(
      q.free_vars.begin(), q.free_vars.end());

  std::function<void(std::size_t, Substitution&)> enumerate =
      [&](std::size_t i, Substitution& theta) {
        if (i == frees.size()) {
          for (const ConjunctiveQuery& d : q.query.disjuncts)
            if (oracle_entails(d, cat, theta, 0)) {
              result.insert(theta);
              return;
            }
          return;
        }
        for (const Value& v : dom[frees[i].second]) {
          theta[frees[i].first] = v;
          enumerate(i + 1, theta);
        }
        theta.erase(frees[i].first);
      };
  Substitution theta;
  enumerate(0, theta);
  return result;
}

/// Def. 2 filtering over the full candidate space: input variables range
/// over token component values, propagated query variables over Val(Cat),
/// and ν-variables over the n least admissible pool values.
inline std::vector<Binding> oracle_enabled(
    const Net& net, const NetAnalysis& analysis, const Marking& m,
    const CatalogInstance& cat, const Transition& t, int fresh_candidates) {
  const TransitionAnalysis& ta = analysis.transitions.at(t.name);

  std::set<Value> marking_values = m.values();
  std::set<Value> cat_values = catalog_values(cat);

  // candidate values per variable
  std::map<std::string, std::vector<Value>> candidates;
  for (const auto& [var, type] : ta.in_vars) {
    std::set<Value> vals;
    for (const Value& v : marking_values)
      if (v.type == type) vals.insert(v);
    candidates[var] = {vals.begin(), vals.end()};
  }
  for (const auto& [var, type] : ta.out_vars) {
    if (ta.in_vars.count(var)) continue;
    if (ta.fresh_vars.count(var)) {
      std::set<Value> avoid = marking_values;
      avoid.insert(cat_values.begin(), cat_values.end());
      for (const Value& v : net_constant_values(net)) avoid.insert(v);
      std::vector<Value> pool;
      std::int64_t idx = 0;
      while (static_cast<int>(pool.size()) < fresh_candidates) {
        Value v = Value::pool_value(type, idx++);
        if (!avoid.count(v)) pool.push_back(v);
      }
      candidates[var] = std::move(pool);
      continue;
    }
    std::set<Value> vals;  // propagated: values from the catalog
    for (const Value& v : cat_values)
      if (v.type == type) vals.insert(v);
    candidates[var] = {vals.begin(), vals.end()};
  }

  std::vector<std::string> vars;
  for (const auto& [var, _] : candidates) vars.push_back(var);

  std::vector<Binding> found;
  Binding sigma;
  std::function<void(std::size_t)> enumerate = [&](std::size_t i) {
    if (i < vars.size()) {
      for (const Value& v : candidates[vars[i]]) {
        sigma[vars[i]] = v;
        enumerate(i + 1);
      }
      sigma.erase(vars[i]);
      return;
    }
    // Def. 2 (i): σ(F_in(p,t)) ⊆ m(p)
    for (const Arc& arc : t.inputs) {
      Tuple ground;
      for (const InsTerm& term : arc.inscription.tuple) {
        if (term.kind == InsTerm::Kind::Const) {
          ground.push_back(term.value);
        } else {
          ground.push_back(sigma.at(term.var));
        }
      }
      if (m.tokens(arc.place).count(ground) < arc.inscription.multiplicity)
        return;
    }
    // Def. 2 (ii): the condition φ holds
    if (!oracle_condition(t.guard_condition, sigma)) return;
    // Def. 2 (ii)+(iv): σ restricted to free(Q), with input-bound values
    // substituted, extends to an answer of Q
    if (ta.guard) {
      Substitution input_part, propagated;
      for (const auto& [var, type] : ta.guard->free_vars) {
        (void)type;
        if (ta.in_vars.count(var))
          input_part[var] = sigma.at(var);
        else
          propagated[var] = sigma.at(var);
      }
      TypedQuery grounded = substitute_free(*ta.guard, input_part);
      if (!oracle_answers(grounded, cat).count(propagated)) return;
    }
    // Def. 2 (iii): fresh values avoid Val(m) ∪ Val(Cat), pairwise distinct
    std::set<Value> used;
    for (const auto& var : ta.fresh_vars) {
      const Value& v = sigma.at(var);
      if (marking_values.count(v) || cat_values.count(v)) return;
      if (!used.insert(v).second) return;
    }
    found.push_back(sigma);
  };
  enumerate(0);
  std::sort(found.begin(), found.end());
  found.erase(std::unique(found.begin(), found.end()), found.end());
  return found;
}

}  // namespace testing_support
