#pragma once

// Random corpora shared between the unit suites and the acceptance suite.

#include "helpers.hpp"
#include "oracle.hpp"

namespace testing_support {

using namespace clognet;

// ---------------------------------------------------------------------------
// Query corpus: a small two-relation schema plus random catalogs and queries.

struct QueryCorpus {
  TypeDomain types;
  std::shared_ptr<CatalogSchema> schema;
  std::vector<Value> a_values;  // type A (keys of R)
  std::vector<Value> b_values;  // type B (keys of S)

  QueryCorpus() {
    types.add({"A", {}});
    types.add({"B", {}});
    schema = std::make_shared<CatalogSchema>();
    RelationSchema r;
    r.name = "R";
    r.attributes = {{"a", "A"}, {"b", "B"}};
    schema->relations.push_back(r);
    RelationSchema s;
    s.name = "S";
    s.attributes = {{"s", "B"}};
    schema->relations.push_back(s);
    for (int i = 0; i < 2; ++i) a_values.push_back(Value::pool_value("A", i));
    for (int i = 0; i < 2; ++i) b_values.push_back(Value::pool_value("B", i));
  }

  CatalogInstance random_catalog(Rng& rng) const {
    CatalogInstance cat;
    cat.schema = schema;
    std::set<Value> used_keys;
    for (int i = 0; i < 2; ++i) {
      Value key = a_values[rng.below(a_values.size())];
      if (rng.chance(0.7) && used_keys.insert(key).second)
        cat.add_fact("R", {key, b_values[rng.below(b_values.size())]});
    }
    for (int i = 0; i < 2; ++i)
      if (rng.chance(0.6))
        cat.add_fact("S", {b_values[rng.below(b_values.size())]});
    return cat;
  }

  // A random union query, well-typed by construction. All disjuncts share
  // the same free variables f0.. (with fixed types), per the union contract.
  UnionQuery random_query(Rng& rng) const {
    std::vector<std::pair<std::string, std::string>> frees;
    int n_free = 1 + static_cast<int>(rng.below(2));
    for (int i = 0; i < n_free; ++i)
      frees.push_back({"f" + std::to_string(i), rng.chance(0.5) ? "A" : "B"});

    UnionQuery q;
    int n_disjuncts = rng.chance(0.25) ? 2 : 1;
    for (int d = 0; d < n_disjuncts; ++d)
      q.disjuncts.push_back(random_disjunct(rng, frees, d));
    return q;
  }

 private:
  Term var(const std::string& name, const std::string& type) const {
    return Term::make_var(name, type);
  }

  ConjunctiveQuery random_disjunct(
      Rng& rng, const std::vector<std::pair<std::string, std::string>>& frees,
      int salt) const {
    ConjunctiveQuery cq;
    std::vector<std::pair<std::string, std::string>> vars = frees;
    int n_bound = static_cast<int>(rng.below(2));
    for (int i = 0; i < n_bound; ++i) {
      std::string name = "e" + std::to_string(salt) + std::to_string(i);
      std::string type = rng.chance(0.5) ? "A" : "B";
      cq.exist_vars.push_back(var(name, type));
      vars.push_back({name, type});
    }

    auto term_of_type = [&](const std::string& type) -> Term {
      std::vector<Term> options;
      for (const auto& [name, t] : vars)
        if (t == type) options.push_back(var(name, t));
      if (options.empty() || rng.chance(0.2)) {
        const auto& pool = type == "A" ? a_values : b_values;
        return Term::make_const(pool[rng.below(pool.size())]);
      }
      return options[rng.below(options.size())];
    };

    // cover every variable with at least one atom so types are inferable
    // and every variable occurs in the body
    std::set<std::string> covered;
    auto emit_atom = [&](bool negated_ok) {
      RelAtom atom;
      if (rng.chance(0.55)) {
        atom.relation = "R";
        atom.args = {term_of_type("A"), term_of_type("B")};
      } else {
        atom.relation = "S";
        atom.args = {term_of_type("B")};
      }
      atom.negated = negated_ok && rng.chance(0.3);
      for (const Term& t : atom.args)
        if (t.is_var()) covered.insert(t.var);
      cq.atoms.push_back(std::move(atom));
    };
    int n_atoms = 1 + static_cast<int>(rng.below(3));
    for (int i = 0; i < n_atoms; ++i) emit_atom(true);
    for (const auto& [name, type] : vars) {
      if (covered.count(name)) continue;
      RelAtom atom;  // positive covering atom pins the variable's type
      if (type == "A") {
        atom.relation = "R";
        atom.args = {var(name, type), term_of_type("B")};
      } else {
        atom.relation = "S";
        atom.args = {var(name, type)};
      }
      for (const Term& t : atom.args)
        if (t.is_var()) covered.insert(t.var);
      cq.atoms.push_back(std::move(atom));
    }

    // optional equality / negated-equality condition, depth <= 3
    if (rng.chance(0.5)) {
      std::string type = rng.chance(0.5) ? "A" : "B";
      Condition eq = Condition::eq(term_of_type(type), term_of_type(type));
      cq.condition = rng.chance(0.5) ? Condition::neg(std::move(eq)) : eq;
      if (rng.chance(0.3)) {
        std::string t2 = rng.chance(0.5) ? "A" : "B";
        cq.condition = Condition::conj(
            cq.condition, Condition::eq(term_of_type(t2), term_of_type(t2)));
        if (rng.chance(0.3)) cq.condition = Condition::neg(cq.condition);
      }
    }
    return cq;
  }
};

// ---------------------------------------------------------------------------
// Net corpus: random small nets over a tiny catalog schema.

struct NetCorpus {
  std::shared_ptr<CatalogSchema> schema;

  NetCorpus() {
    schema = std::make_shared<CatalogSchema>();
    RelationSchema r;
    r.name = "Res";
    r.attributes = {{"id", "D1"}, {"val", "D2"}};
    schema->relations.push_back(r);
  }

  Net random_net(Rng& rng) const {
    Net net;
    net.types.add({"D1", {}});
    net.types.add({"D2", {}});
    net.schema = schema;

    int n_places = 2 + static_cast<int>(rng.below(3));  // <= 4
    std::vector<std::string> type_names{"D1", "D2"};
    for (int i = 0; i < n_places; ++i) {
      Place p;
      p.name = "p" + std::to_string(i);
      int arity = 1 + static_cast<int>(rng.below(2));
      for (int k = 0; k < arity; ++k)
        p.color.push_back(type_names[rng.below(2)]);
      net.places.push_back(std::move(p));
    }

    int n_transitions = 1 + static_cast<int>(rng.below(3));  // <= 3
    bool nu_used = false;
    for (int ti = 0; ti < n_transitions; ++ti) {
      Transition t;
      t.name = "t" + std::to_string(ti);

      std::map<std::string, std::string> in_vars;  // name -> type
      int n_inputs = static_cast<int>(rng.below(3));
      std::set<std::size_t> used_places;
      for (int i = 0; i < n_inputs; ++i) {
        std::size_t pi = rng.below(net.places.size());
        if (!used_places.insert(pi).second) continue;
        const Place& p = net.places[pi];
        Arc arc;
        arc.place = p.name;
        if (rng.chance(0.15)) arc.inscription.multiplicity = 2;
        for (std::size_t k = 0; k < p.color.size(); ++k) {
          // reuse an existing variable of the same type sometimes (joins)
          std::string name;
          if (rng.chance(0.3)) {
            for (const auto& [v, type] : in_vars)
              if (type == p.color[k]) {
                name = v;
                break;
              }
          }
          if (name.empty())
            name = "v" + std::to_string(ti) + "_" + std::to_string(pi) + "_" +
                   std::to_string(k);
          in_vars.emplace(name, p.color[k]);
          arc.inscription.tuple.push_back(InsTerm::make_var(name));
        }
        t.inputs.push_back(std::move(arc));
      }

      // guard: sometimes query the catalog, propagating one variable
      std::string propagated, propagated_type;
      if (rng.chance(0.5)) {
        ConjunctiveQuery cq;
        RelAtom atom;
        atom.relation = "Res";
        propagated = "q" + std::to_string(ti);
        propagated_type = rng.chance(0.5) ? "D1" : "D2";
        if (propagated_type == "D1") {
          atom.args = {Term::make_var(propagated, "D1"),
                       Term::make_var("w" + std::to_string(ti), "D2")};
          cq.exist_vars.push_back(
              Term::make_var("w" + std::to_string(ti), "D2"));
        } else {
          atom.args = {Term::make_var("w" + std::to_string(ti), "D1"),
                       Term::make_var(propagated, "D2")};
          cq.exist_vars.push_back(
              Term::make_var("w" + std::to_string(ti), "D1"));
        }
        cq.atoms.push_back(std::move(atom));
        t.guard_query = UnionQuery::single(std::move(cq));
      }

      std::string fresh_name;
      if (!nu_used && rng.chance(0.4)) {  // <= 1 ν-variable per net
        fresh_name = "nu" + std::to_string(ti);
        nu_used = true;
      }

      int n_outputs = static_cast<int>(rng.below(3));
      if (n_outputs == 0 && t.inputs.empty()) n_outputs = 1;
      std::set<std::size_t> used_out;
      bool fresh_placed = false, propagated_placed = false;
      for (int i = 0; i < n_outputs; ++i) {
        std::size_t pi = rng.below(net.places.size());
        if (!used_out.insert(pi).second) continue;
        const Place& p = net.places[pi];
        Arc arc;
        arc.place = p.name;
        for (std::size_t k = 0; k < p.color.size(); ++k) {
          const std::string& type = p.color[k];
          if (!fresh_placed && !fresh_name.empty() && rng.chance(0.5)) {
            arc.inscription.tuple.push_back(InsTerm::make_fresh(fresh_name));
            fresh_placed = true;
            continue;
          }
          if (!propagated.empty() && type == propagated_type &&
              rng.chance(0.6)) {
            arc.inscription.tuple.push_back(InsTerm::make_var(propagated));
            propagated_placed = true;
            continue;
          }
          std::string reuse;
          for (const auto& [v, vtype] : in_vars)
            if (vtype == type) {
              reuse = v;
              break;
            }
          if (!reuse.empty() && rng.chance(0.8)) {
            arc.inscription.tuple.push_back(InsTerm::make_var(reuse));
          } else {
            arc.inscription.tuple.push_back(
                InsTerm::make_const(Value::pool_value(type, 7)));
          }
        }
        t.outputs.push_back(std::move(arc));
      }

      // a propagated guard variable must reach an output; otherwise drop
      // the query (condition b would also fail if all vars are input-bound,
      // but our query always has a quantified variable)
      if (!propagated.empty() && !propagated_placed) {
        Place* target = nullptr;
        std::size_t pos = 0;
        for (auto& p : net.places) {
          for (std::size_t k = 0; k < p.color.size(); ++k)
            if (p.color[k] == propagated_type && !target) {
              target = &p;
              pos = k;
            }
        }
        if (target && !std::any_of(t.outputs.begin(), t.outputs.end(),
                                   [&](const Arc& a) {
                                     return a.place == target->name;
                                   })) {
          Arc arc;
          arc.place = target->name;
          for (std::size_t k = 0; k < target->color.size(); ++k)
            arc.inscription.tuple.push_back(
                k == pos ? InsTerm::make_var(propagated)
                         : InsTerm::make_const(
                               Value::pool_value(target->color[k], 7)));
          t.outputs.push_back(std::move(arc));
        } else {
          t.guard_query.reset();
        }
      }
      if (fresh_name.size() && !fresh_placed) nu_used = false;

      t.inputs.erase(
          std::remove_if(t.inputs.begin(), t.inputs.end(),
                         [](const Arc& a) { return a.inscription.tuple.empty(); }),
          t.inputs.end());
      net.transitions.push_back(std::move(t));
    }
    return net;
  }

  CatalogInstance random_catalog(Rng& rng) const {
    CatalogInstance cat;
    cat.schema = schema;
    std::set<Value> keys;
    for (int i = 0; i < 2; ++i) {
      Value key = Value::pool_value("D1", 100 + rng.below(2));
      if (rng.chance(0.7) && keys.insert(key).second)
        cat.add_fact("Res", {key, Value::pool_value("D2", 100 + rng.below(2))});
    }
    return cat;
  }

  Marking random_marking(const Net& net, Rng& rng) const {
    Marking m;
    for (const Place& p : net.places) {
      int n_tokens = static_cast<int>(rng.below(3));
      for (int i = 0; i < n_tokens; ++i) {
        Tuple token;
        for (const std::string& type : p.color)
          token.push_back(Value::pool_value(type, 200 + rng.below(3)));
        m.add(p.name, std::move(token), rng.chance(0.2) ? 2 : 1);
      }
    }
    m.normalize();
    return m;
  }
};

}  // namespace testing_support
