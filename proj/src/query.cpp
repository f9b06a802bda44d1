#include "clognet/query.hpp"

#include <algorithm>

namespace clognet {

void Condition::collect_vars(std::set<std::string>& out) const {
  switch (kind) {
    case Kind::True:
      return;
    case Kind::Eq:
      if (lhs.is_var()) out.insert(lhs.var);
      if (rhs.is_var()) out.insert(rhs.var);
      return;
    case Kind::Not:
    case Kind::And:
      for (const auto& c : children) c.collect_vars(out);
      return;
  }
}

void Condition::collect_constants(std::set<Value>& out) const {
  switch (kind) {
    case Kind::True:
      return;
    case Kind::Eq:
      if (!lhs.is_var()) out.insert(lhs.value);
      if (!rhs.is_var()) out.insert(rhs.value);
      return;
    case Kind::Not:
    case Kind::And:
      for (const auto& c : children) c.collect_constants(out);
      return;
  }
}

bool evaluate_condition(const Condition& cond, const Substitution& sub) {
  auto resolve = [&](const Term& t) -> const Value& {
    if (!t.is_var()) return t.value;
    auto it = sub.find(t.var);
    if (it == sub.end())
      throw error("unbound variable '" + t.var + "' in condition");
    return it->second;
  };
  switch (cond.kind) {
    case Condition::Kind::True:
      return true;
    case Condition::Kind::Eq:
      return resolve(cond.lhs) == resolve(cond.rhs);
    case Condition::Kind::Not:
      return !evaluate_condition(cond.children.at(0), sub);
    case Condition::Kind::And:
      return std::all_of(cond.children.begin(), cond.children.end(),
                         [&](const Condition& c) {
                           return evaluate_condition(c, sub);
                         });
  }
  return false;
}

std::string RelAtom::str() const {
  std::string s = negated ? "not " : "";
  s += relation + "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) s += ", ";
    s += args[i].str();
  }
  return s + ")";
}

std::set<std::string> UnionQuery::all_vars() const {
  std::set<std::string> vars;
  for (const auto& d : disjuncts) {
    for (const auto& v : d.exist_vars) vars.insert(v.var);
    for (const auto& a : d.atoms)
      for (const auto& t : a.args)
        if (t.is_var()) vars.insert(t.var);
    d.condition.collect_vars(vars);
  }
  return vars;
}

std::set<Value> UnionQuery::all_constants() const {
  std::set<Value> out;
  for (const auto& d : disjuncts) {
    for (const auto& a : d.atoms)
      for (const auto& t : a.args)
        if (!t.is_var()) out.insert(t.value);
    d.condition.collect_constants(out);
  }
  return out;
}

namespace {

// Type-inference environment for one disjunct.
struct Inference {
  std::map<std::string, std::string> types;
  bool assign(const std::string& var, const std::string& type,
              ValidationReport& report, const std::string& where) {
    auto [it, inserted] = types.emplace(var, type);
    if (!inserted && it->second != type) {
      report.add("type-mismatch", "variable '" + var + "' used as '" +
                     it->second + "' and as '" + type + "' in " + where);
      return false;
    }
    return true;
  }
};

void check_condition_types(const Condition& cond, Inference& inf,
                           ValidationReport& report, bool& progress,
                           bool final_pass) {
  switch (cond.kind) {
    case Condition::Kind::True:
      return;
    case Condition::Kind::Eq: {
      const Term& a = cond.lhs;
      const Term& b = cond.rhs;
      auto type_of = [&](const Term& t) -> std::string {
        if (!t.is_var()) return t.value.type;
        auto it = inf.types.find(t.var);
        return it == inf.types.end() ? "" : it->second;
      };
      std::string ta = type_of(a), tb = type_of(b);
      if (!ta.empty() && !tb.empty()) {
        if (ta != tb)
          report.add("type-mismatch", "equality '" + a.str() + " = " +
                         b.str() + "' relates type '" + ta + "' to '" + tb +
                         "'");
      } else if (!ta.empty() && b.is_var()) {
        inf.assign(b.var, ta, report, "condition");
        progress = true;
      } else if (!tb.empty() && a.is_var()) {
        inf.assign(a.var, tb, report, "condition");
        progress = true;
      } else if (final_pass) {
        report.add("type-unknown", "cannot infer the type of '" + a.str() +
                       " = " + b.str() + "'");
      }
      return;
    }
    case Condition::Kind::Not:
    case Condition::Kind::And:
      for (const auto& c : cond.children)
        check_condition_types(c, inf, report, progress, final_pass);
      return;
  }
}

Condition annotate_condition(const Condition& cond, const Inference& inf) {
  Condition out = cond;
  auto fix = [&](Term& t) {
    if (t.is_var()) {
      auto it = inf.types.find(t.var);
      if (it != inf.types.end()) t.var_type = it->second;
    }
  };
  if (out.kind == Condition::Kind::Eq) {
    fix(out.lhs);
    fix(out.rhs);
  }
  for (std::size_t i = 0; i < out.children.size(); ++i)
    out.children[i] = annotate_condition(cond.children[i], inf);
  return out;
}

}  // namespace

std::optional<TypedQuery> typecheck_query(
    const TypeDomain& types, const CatalogSchema& schema, const UnionQuery& q,
    const std::map<std::string, std::string>& bound,
    ValidationReport& report) {
  if (q.disjuncts.empty()) {
    report.add("empty-union", "union query has no disjuncts");
    return std::nullopt;
  }
  std::size_t before = report.entries().size();

  UnionQuery annotated;
  std::optional<std::map<std::string, std::string>> free_sig;

  for (const auto& disjunct : q.disjuncts) {
    Inference inf;
    std::set<std::string> quantified;
    for (const auto& v : disjunct.exist_vars) {
      if (!quantified.insert(v.var).second)
        report.add("duplicate-quantifier",
                   "variable '" + v.var + "' is quantified twice");
      if (bound.count(v.var))
        report.add("quantifier-shadowing",
                   "quantified variable '" + v.var +
                       "' shadows an inscription variable of the same name");
      if (!v.var_type.empty()) inf.assign(v.var, v.var_type, report, "prefix");
    }
    for (const auto& [var, type] : bound)
      if (!quantified.count(var)) inf.types[var] = type;

    // Relation atoms pin types positionally.
    for (const auto& atom : disjunct.atoms) {
      const RelationSchema* rel = schema.find(atom.relation);
      if (!rel) {
        report.add("unknown-relation",
                   "query atom uses unknown relation '" + atom.relation + "'");
        continue;
      }
      if (atom.args.size() != rel->arity()) {
        report.add("atom-arity", "atom " + atom.str() + " has arity " +
                       std::to_string(atom.args.size()) + ", relation '" +
                       atom.relation + "' expects " +
                       std::to_string(rel->arity()));
        continue;
      }
      for (std::size_t i = 0; i < atom.args.size(); ++i) {
        const std::string& expected = rel->attributes[i].type;
        const Term& t = atom.args[i];
        if (t.is_var())
          inf.assign(t.var, expected, report, "atom " + atom.str());
        else if (t.value.type != expected)
          report.add("type-mismatch", "atom " + atom.str() + " position " +
                         std::to_string(i + 1) + " has constant of type '" +
                         t.value.type + "', expected '" + expected + "'");
      }
    }

    // Conditions: propagate through equalities until a fixpoint.
    bool progress = true;
    while (progress) {
      progress = false;
      check_condition_types(disjunct.condition, inf, report, progress, false);
    }
    bool dummy = false;
    check_condition_types(disjunct.condition, inf, report, dummy, true);

    // Every variable needs a resolved, known type.
    std::set<std::string> body_vars;
    for (const auto& a : disjunct.atoms)
      for (const auto& t : a.args)
        if (t.is_var()) body_vars.insert(t.var);
    disjunct.condition.collect_vars(body_vars);

    for (const auto& v : disjunct.exist_vars)
      if (!body_vars.count(v.var))
        report.add("unused-quantifier", "quantified variable '" + v.var +
                       "' does not occur in the query body");
    for (const auto& var : body_vars) {
      auto it = inf.types.find(var);
      if (it == inf.types.end())
        report.add("type-unknown",
                   "cannot infer the type of variable '" + var + "'");
      else if (!types.has(it->second))
        report.add("unknown-type", "variable '" + var +
                       "' has unknown type '" + it->second + "'");
    }

    // Free-variable signature must line up across disjuncts.
    std::map<std::string, std::string> sig;
    for (const auto& var : body_vars)
      if (!quantified.count(var) && inf.types.count(var))
        sig[var] = inf.types[var];
    if (!free_sig)
      free_sig = sig;
    else if (*free_sig != sig)
      report.add("union-signature",
                 "disjuncts of a union query have different free variables");

    // Annotate a copy of the disjunct with the resolved types.
    ConjunctiveQuery out = disjunct;
    for (auto& v : out.exist_vars)
      if (inf.types.count(v.var)) v.var_type = inf.types[v.var];
    for (auto& a : out.atoms)
      for (auto& t : a.args)
        if (t.is_var() && inf.types.count(t.var))
          t.var_type = inf.types[t.var];
    out.condition = annotate_condition(disjunct.condition, inf);
    annotated.disjuncts.push_back(std::move(out));
  }

  if (report.entries().size() != before) return std::nullopt;
  TypedQuery tq;
  tq.query = std::move(annotated);
  tq.free_vars = std::move(*free_sig);
  return tq;
}

namespace {

bool unify_fact(const RelAtom& atom, const Tuple& fact, Substitution& sub) {
  for (std::size_t i = 0; i < atom.args.size(); ++i) {
    const Term& t = atom.args[i];
    if (!t.is_var()) {
      if (t.value != fact[i]) return false;
      continue;
    }
    auto it = sub.find(t.var);
    if (it == sub.end())
      sub.emplace(t.var, fact[i]);
    else if (it->second != fact[i])
      return false;
  }
  return true;
}

bool atom_ground(const RelAtom& atom, const Substitution& sub) {
  for (const Term& t : atom.args)
    if (t.is_var() && !sub.count(t.var)) return false;
  return true;
}

Tuple ground_atom(const RelAtom& atom, const Substitution& sub) {
  Tuple t;
  t.reserve(atom.args.size());
  for (const Term& a : atom.args)
    t.push_back(a.is_var() ? sub.at(a.var) : a.value);
  return t;
}

}  // namespace

std::set<Substitution> evaluate_query(const TypedQuery& q,
                                      const CatalogInstance& cat) {
  std::set<Substitution> answers;
  auto dom = active_domain(cat);

  for (const auto& disjunct : q.query.disjuncts) {
    std::vector<const RelAtom*> positive, negative;
    for (const auto& a : disjunct.atoms)
      (a.negated ? negative : positive).push_back(&a);
    std::stable_sort(positive.begin(), positive.end(),
                     [&](const RelAtom* a, const RelAtom* b) {
                       return cat.facts_of(a->relation).size() <
                              cat.facts_of(b->relation).size();
                     });

    std::vector<Substitution> partials{Substitution{}};
    auto filter_negatives = [&](std::vector<Substitution>& subs) {
      std::erase_if(subs, [&](const Substitution& s) {
        for (const RelAtom* n : negative)
          if (atom_ground(*n, s) &&
              cat.has_fact(n->relation, ground_atom(*n, s)))
            return true;
        return false;
      });
    };

    for (const RelAtom* atom : positive) {
      std::vector<Substitution> next;
      const auto& facts = cat.facts_of(atom->relation);
      for (const auto& partial : partials)
        for (const Tuple& fact : facts) {
          if (fact.size() != atom->args.size()) continue;
          Substitution s = partial;
          if (unify_fact(*atom, fact, s)) next.push_back(std::move(s));
        }
      partials = std::move(next);
      filter_negatives(partials);
      if (partials.empty()) break;
    }

    // Variables not covered by a positive atom range over the active domain
    // of their type.
    std::set<std::string> vars;
    std::map<std::string, std::string> var_types;
    for (const auto& a : disjunct.atoms)
      for (const auto& t : a.args)
        if (t.is_var()) {
          vars.insert(t.var);
          var_types[t.var] = t.var_type;
        }
    {
      std::set<std::string> cond_vars;
      disjunct.condition.collect_vars(cond_vars);
      for (const auto& v : cond_vars) vars.insert(v);
    }
    for (const auto& v : disjunct.exist_vars)
      if (!v.var_type.empty()) var_types[v.var] = v.var_type;
    // condition variable types from annotated terms
    std::function<void(const Condition&)> record = [&](const Condition& c) {
      if (c.kind == Condition::Kind::Eq) {
        if (c.lhs.is_var() && !c.lhs.var_type.empty())
          var_types[c.lhs.var] = c.lhs.var_type;
        if (c.rhs.is_var() && !c.rhs.var_type.empty())
          var_types[c.rhs.var] = c.rhs.var_type;
      }
      for (const auto& ch : c.children) record(ch);
    };
    record(disjunct.condition);

    for (const auto& var : vars) {
      std::vector<Substitution> next;
      for (const auto& partial : partials) {
        if (partial.count(var)) {
          next.push_back(partial);
          continue;
        }
        auto ty = var_types.find(var);
        if (ty == var_types.end())
          throw error("untyped variable '" + var + "' during evaluation");
        const auto& candidates = dom[ty->second];
        for (const Value& v : candidates) {
          Substitution s = partial;
          s.emplace(var, v);
          next.push_back(std::move(s));
        }
      }
      partials = std::move(next);
      filter_negatives(partials);
      if (partials.empty()) break;
    }

    for (const auto& sub : partials) {
      bool keep = true;
      for (const RelAtom* n : negative)
        if (cat.has_fact(n->relation, ground_atom(*n, sub))) {
          keep = false;
          break;
        }
      if (keep && !evaluate_condition(disjunct.condition, sub)) keep = false;
      if (!keep) continue;
      Substitution projected;
      for (const auto& [var, type] : q.free_vars) {
        auto it = sub.find(var);
        if (it != sub.end()) projected.emplace(var, it->second);
      }
      answers.insert(std::move(projected));
    }
  }
  return answers;
}

TypedQuery substitute_free(const TypedQuery& q, const Substitution& sub) {
  TypedQuery out;
  out.query = q.query;
  for (const auto& [var, type] : q.free_vars) {
    auto it = sub.find(var);
    if (it == sub.end()) {
      out.free_vars.emplace(var, type);
      continue;
    }
    if (it->second.type != type)
      throw error("substitution for '" + var + "' has type '" +
                  it->second.type + "', expected '" + type + "'");
  }
  auto fix_term = [&](Term& t) {
    if (!t.is_var()) return;
    auto it = sub.find(t.var);
    if (it != sub.end()) t = Term::make_const(it->second);
  };
  std::function<void(Condition&)> fix_cond = [&](Condition& c) {
    if (c.kind == Condition::Kind::Eq) {
      fix_term(c.lhs);
      fix_term(c.rhs);
    }
    for (auto& ch : c.children) fix_cond(ch);
  };
  for (auto& d : out.query.disjuncts) {
    for (auto& a : d.atoms)
      for (auto& t : a.args) fix_term(t);
    fix_cond(d.condition);
  }
  return out;
}

}  // namespace clognet
