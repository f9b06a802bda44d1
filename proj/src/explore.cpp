#include "clognet/explore.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace clognet {

// ---------------------------------------------------------------------------
// Properties

std::string PlaceAtom::str() const {
  std::string s = "[" + place;
  if (!args.empty()) {
    s += "(";
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) s += ", ";
      s += args[i].str();
    }
    s += ")";
  }
  return s + " >= " + std::to_string(min_count) + "]";
}

PropExpr PropExpr::place(PlaceAtom a) {
  PropExpr e;
  e.kind = Kind::Place;
  e.place_atom = std::move(a);
  return e;
}
PropExpr PropExpr::rel(RelAtom a) {
  PropExpr e;
  e.kind = Kind::Rel;
  e.rel_atom = std::move(a);
  return e;
}
PropExpr PropExpr::eq(Term a, Term b) {
  PropExpr e;
  e.kind = Kind::Eq;
  e.lhs = std::move(a);
  e.rhs = std::move(b);
  return e;
}
PropExpr PropExpr::neg(PropExpr inner) {
  PropExpr e;
  e.kind = Kind::Not;
  e.children.push_back(std::move(inner));
  return e;
}
PropExpr PropExpr::conj(PropExpr a, PropExpr b) {
  PropExpr e;
  e.kind = Kind::And;
  e.children.push_back(std::move(a));
  e.children.push_back(std::move(b));
  return e;
}

void PropExpr::collect_vars(std::set<std::string>& out) const {
  switch (kind) {
    case Kind::True:
      return;
    case Kind::Place:
      for (const Term& t : place_atom.args)
        if (t.is_var()) out.insert(t.var);
      return;
    case Kind::Rel:
      for (const Term& t : rel_atom.args)
        if (t.is_var()) out.insert(t.var);
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

void PropExpr::collect_constants(std::set<Value>& out) const {
  switch (kind) {
    case Kind::True:
      return;
    case Kind::Place:
      for (const Term& t : place_atom.args)
        if (!t.is_var()) out.insert(t.value);
      return;
    case Kind::Rel:
      for (const Term& t : rel_atom.args)
        if (!t.is_var()) out.insert(t.value);
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

namespace {

struct PropInference {
  std::map<std::string, std::string> types;
  std::set<std::string> in_place_atom;
};

void check_prop_expr(const Net& net, const PropExpr& expr, PropInference& inf,
                     ValidationReport& report) {
  auto assign = [&](const std::string& var, const std::string& type,
                    const std::string& where) {
    auto [it, inserted] = inf.types.emplace(var, type);
    if (!inserted && it->second != type)
      report.add("type-mismatch", "property variable '" + var +
                     "' used as '" + it->second + "' and as '" + type +
                     "' in " + where);
  };
  switch (expr.kind) {
    case PropExpr::Kind::True:
      return;
    case PropExpr::Kind::Place: {
      const PlaceAtom& atom = expr.place_atom;
      const Place* place = net.find_place(atom.place);
      if (!place) {
        report.add("unknown-place",
                   "property atom " + atom.str() + " names unknown place '" +
                       atom.place + "'");
        return;
      }
      if (atom.min_count < 1)
        report.add("bad-count",
                   "property atom " + atom.str() + " needs a count >= 1");
      if (atom.args.empty()) return;
      if (atom.args.size() != place->color.size()) {
        report.add("atom-arity", "property atom " + atom.str() +
                       " has arity " + std::to_string(atom.args.size()) +
                       ", place '" + atom.place + "' has color arity " +
                       std::to_string(place->color.size()));
        return;
      }
      for (std::size_t i = 0; i < atom.args.size(); ++i) {
        const Term& t = atom.args[i];
        if (t.is_var()) {
          assign(t.var, place->color[i], "atom " + atom.str());
          inf.in_place_atom.insert(t.var);
        } else if (t.value.type != place->color[i]) {
          report.add("type-mismatch", "property atom " + atom.str() +
                         " position " + std::to_string(i + 1) +
                         " has constant of type '" + t.value.type +
                         "', expected '" + place->color[i] + "'");
        }
      }
      return;
    }
    case PropExpr::Kind::Rel: {
      const RelAtom& atom = expr.rel_atom;
      const RelationSchema* rel =
          net.schema ? net.schema->find(atom.relation) : nullptr;
      if (!rel) {
        report.add("unknown-relation", "property atom " + atom.str() +
                       " names unknown relation '" + atom.relation + "'");
        return;
      }
      if (atom.args.size() != rel->arity()) {
        report.add("atom-arity", "property atom " + atom.str() +
                       " has arity " + std::to_string(atom.args.size()) +
                       ", relation expects " + std::to_string(rel->arity()));
        return;
      }
      for (std::size_t i = 0; i < atom.args.size(); ++i) {
        const Term& t = atom.args[i];
        if (t.is_var())
          assign(t.var, rel->attributes[i].type, "atom " + atom.str());
        else if (t.value.type != rel->attributes[i].type)
          report.add("type-mismatch", "property atom " + atom.str() +
                         " position " + std::to_string(i + 1) +
                         " has constant of type '" + t.value.type +
                         "', expected '" + rel->attributes[i].type + "'");
      }
      return;
    }
    case PropExpr::Kind::Eq: {
      auto type_of = [&](const Term& t) -> std::string {
        if (!t.is_var()) return t.value.type;
        auto it = inf.types.find(t.var);
        return it == inf.types.end() ? "" : it->second;
      };
      std::string ta = type_of(expr.lhs), tb = type_of(expr.rhs);
      if (!ta.empty() && !tb.empty() && ta != tb)
        report.add("type-mismatch", "property equality relates type '" + ta +
                       "' to '" + tb + "'");
      else if (!ta.empty() && expr.rhs.is_var())
        assign(expr.rhs.var, ta, "equality");
      else if (!tb.empty() && expr.lhs.is_var())
        assign(expr.lhs.var, tb, "equality");
      return;
    }
    case PropExpr::Kind::Not:
    case PropExpr::Kind::And:
      for (const auto& c : expr.children)
        check_prop_expr(net, c, inf, report);
      return;
  }
}

}  // namespace

std::optional<TypedProperty> typecheck_property(const Net& net,
                                                const Property& prop,
                                                ValidationReport& report) {
  std::size_t before = report.entries().size();
  PropInference inf;
  // two passes so equalities can pick up types discovered later
  check_prop_expr(net, prop.body, inf, report);
  {
    ValidationReport second;
    check_prop_expr(net, prop.body, inf, second);
  }

  std::set<std::string> declared;
  for (const Term& v : prop.vars)
    if (!declared.insert(v.var).second)
      report.add("duplicate-variable",
                 "property variable '" + v.var + "' declared twice");

  std::set<std::string> used;
  prop.body.collect_vars(used);
  for (const auto& var : used)
    if (!declared.count(var))
      report.add("undeclared-variable", "property '" + prop.name +
                     "' uses undeclared variable '" + var + "'");
  for (const auto& var : declared) {
    if (!inf.in_place_atom.count(var))
      report.add("var-not-in-place-atom",
                 "property variable '" + var +
                     "' must occur in a place atom [p(...) >= c]");
    if (!inf.types.count(var))
      report.add("type-unknown",
                 "cannot infer the type of property variable '" + var + "'");
  }

  if (report.entries().size() != before) return std::nullopt;
  TypedProperty out;
  out.property = prop;
  for (auto& v : out.property.vars) v.var_type = inf.types[v.var];
  out.var_types = inf.types;
  return out;
}

namespace {

const Value& resolve_term(const Term& t, const Substitution& assign) {
  if (!t.is_var()) return t.value;
  auto it = assign.find(t.var);
  if (it == assign.end())
    throw error("unbound property variable '" + t.var + "'");
  return it->second;
}

bool eval_prop_expr(const PropExpr& expr, const Marking& m,
                    const CatalogInstance& cat, const Substitution& assign) {
  switch (expr.kind) {
    case PropExpr::Kind::True:
      return true;
    case PropExpr::Kind::Place: {
      const PlaceAtom& atom = expr.place_atom;
      const auto& tokens = m.tokens(atom.place);
      if (atom.args.empty()) return tokens.size() >= atom.min_count;
      std::uint64_t count = 0;
      for (const auto& [tuple, k] : tokens) {
        if (tuple.size() != atom.args.size()) continue;
        bool match = true;
        for (std::size_t i = 0; i < tuple.size() && match; ++i)
          match = resolve_term(atom.args[i], assign) == tuple[i];
        if (match) count += k;
      }
      return count >= atom.min_count;
    }
    case PropExpr::Kind::Rel: {
      Tuple ground;
      ground.reserve(expr.rel_atom.args.size());
      for (const Term& t : expr.rel_atom.args)
        ground.push_back(resolve_term(t, assign));
      bool present = cat.has_fact(expr.rel_atom.relation, ground);
      return expr.rel_atom.negated ? !present : present;
    }
    case PropExpr::Kind::Eq:
      return resolve_term(expr.lhs, assign) == resolve_term(expr.rhs, assign);
    case PropExpr::Kind::Not:
      return !eval_prop_expr(expr.children.at(0), m, cat, assign);
    case PropExpr::Kind::And:
      return std::all_of(
          expr.children.begin(), expr.children.end(),
          [&](const PropExpr& c) { return eval_prop_expr(c, m, cat, assign); });
  }
  return false;
}

}  // namespace

std::optional<Substitution> eval_property(const TypedProperty& prop,
                                          const Marking& m,
                                          const CatalogInstance& cat) {
  // Candidate values per variable: values occurring in m plus Val(Cat),
  // restricted by type.
  std::set<Value> universe = m.values();
  {
    auto cv = catalog_values(cat);
    universe.insert(cv.begin(), cv.end());
  }
  std::map<std::string, std::vector<Value>> candidates;
  for (const auto& [var, type] : prop.var_types) {
    auto& list = candidates[var];
    for (const Value& v : universe)
      if (v.type == type) list.push_back(v);
  }

  std::vector<std::string> order;
  for (const Term& v : prop.property.vars) order.push_back(v.var);

  Substitution assign;
  std::function<std::optional<Substitution>(std::size_t)> search =
      [&](std::size_t i) -> std::optional<Substitution> {
    if (i == order.size()) {
      if (eval_prop_expr(prop.property.body, m, cat, assign)) return assign;
      return std::nullopt;
    }
    for (const Value& v : candidates[order[i]]) {
      assign[order[i]] = v;
      if (auto hit = search(i + 1)) return hit;
    }
    assign.erase(order[i]);
    return std::nullopt;
  };
  return search(0);
}

// ---------------------------------------------------------------------------
// Exploration

namespace {

std::string canonical_key(const Marking& m) {
  std::ostringstream os;
  for (const auto& [place, tokens] : m.places) {
    if (tokens.empty()) continue;
    os << place << '{';
    for (const auto& [tuple, count] : tokens) {
      for (const Value& v : tuple) {
        os << v.type << ':';
        if (v.is_pool())
          os << '#' << v.pool;
        else
          os << '$' << v.sym;
        os << ',';
      }
      os << 'x' << count << ';';
    }
    os << '}';
  }
  return os.str();
}

std::set<Value> protected_values(const Net& net, const Marking& m0,
                                 const CatalogInstance& cat,
                                 const std::set<Value>& extra) {
  std::set<Value> prot = net_constant_values(net);
  auto mv = m0.values();
  prot.insert(mv.begin(), mv.end());
  auto cv = catalog_values(cat);
  prot.insert(cv.begin(), cv.end());
  prot.insert(extra.begin(), extra.end());
  return prot;
}

}  // namespace

TransitionSystem explore_visit(
    const Net& net, const NetAnalysis& analysis, const Marking& m0,
    const CatalogInstance& cat, const ExplorationLimits& limits,
    const std::set<Value>& extra_protected,
    const std::function<bool(std::size_t, const TransitionSystem&)>& visitor) {
  TransitionSystem ts;
  std::set<Value> prot = protected_values(net, m0, cat, extra_protected);

  FreshPolicy policy;
  policy.kind = limits.fresh_kind;
  policy.candidates = limits.fresh_candidates;
  policy.pool_cap = limits.fresh_pool_cap;

  auto canonical_of = [&](const Marking& m) {
    if (!limits.canonicalize) {
      Marking copy = m;
      copy.normalize();
      return copy;
    }
    return canonicalize_marking(m, prot);
  };

  Marking root = m0;
  root.normalize();
  Marking root_canonical = canonical_of(root);

  std::map<std::string, std::size_t> index;
  ts.concrete.push_back(root);
  ts.canonical.push_back(root_canonical);
  ts.depth.push_back(0);
  ts.parent.push_back(std::nullopt);
  index.emplace(canonical_key(root_canonical), 0);

  if (visitor && !visitor(0, ts)) return ts;

  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    std::size_t id = queue.front();
    queue.pop_front();

    if (ts.depth[id] >= limits.max_depth) {
      ts.frontier_exhausted = false;
      continue;
    }

    // The stored concrete marking is the expansion source; canonical forms
    // only provide the dedup identity.
    for (const Transition& t : net.transitions) {
      bool cap_hit = false;
      std::vector<Binding> bindings = enabled_bindings(
          net, analysis, ts.concrete[id], cat, t, policy, &prot, &cap_hit);
      if (cap_hit) {
        ts.fresh_cap_hit = true;
        ts.frontier_exhausted = false;
      }
      for (const Binding& binding : bindings) {
        Marking next =
            fire(net, analysis, ts.concrete[id], cat, t, binding, false);
        Marking next_canonical = canonical_of(next);
        std::string key = canonical_key(next_canonical);
        auto it = index.find(key);
        std::size_t target;
        if (it != index.end()) {
          target = it->second;
        } else {
          if (ts.state_count() >= limits.max_states) {
            ts.frontier_exhausted = false;
            continue;
          }
          target = ts.state_count();
          index.emplace(std::move(key), target);
          ts.concrete.push_back(std::move(next));
          ts.canonical.push_back(std::move(next_canonical));
          ts.depth.push_back(ts.depth[id] + 1);
          ts.parent.push_back(
              TransitionSystem::Parent{id, t.name, binding});
          queue.push_back(target);
          if (visitor && !visitor(target, ts)) return ts;
        }
        ts.edges.push_back(
            {id, t.name, binding_str(binding), target});
      }
    }
  }
  return ts;
}

TransitionSystem explore(const Net& net, const Marking& m0,
                         const CatalogInstance& cat,
                         const ExplorationLimits& limits) {
  NetAnalysis analysis = analyze_net(net);
  return explore_visit(net, analysis, m0, cat, limits, {}, nullptr);
}

// ---------------------------------------------------------------------------
// Safety

namespace {

Witness build_witness(const TransitionSystem& ts, std::size_t state,
                      Substitution assignment, const CatalogInstance& cat) {
  Witness w;
  w.assignment = std::move(assignment);
  w.catalog = cat;
  std::vector<std::size_t> path;
  for (std::size_t s = state; ts.parent[s]; s = ts.parent[s]->state)
    path.push_back(s);
  std::reverse(path.begin(), path.end());
  w.initial = ts.concrete[0];
  for (std::size_t s : path) {
    const auto& parent = *ts.parent[s];
    w.steps.push_back({parent.transition, parent.binding, ts.concrete[s]});
  }
  return w;
}

void replay_witness(const Net& net, const NetAnalysis& analysis,
                    const TypedProperty& prop, const Witness& w) {
  Marking m = w.initial;
  for (const WitnessStep& step : w.steps) {
    const Transition* t = net.find_transition(step.transition);
    if (!t) throw error("witness names unknown transition " + step.transition);
    m = fire(net, analysis, m, w.catalog, *t, step.binding, true);
    if (!(m == step.after))
      throw error("witness replay diverged after " + step.transition);
  }
  if (!eval_property(prop, m, w.catalog))
    throw error("witness replay does not satisfy the property");
}

}  // namespace

Verdict check_safety(const Net& net, const Marking& m0,
                     const CatalogInstance& cat, const TypedProperty& prop,
                     const ExplorationLimits& limits) {
  NetAnalysis analysis = analyze_net(net);
  std::set<Value> extra;
  prop.property.body.collect_constants(extra);

  std::optional<std::pair<std::size_t, Substitution>> found;
  TransitionSystem ts = explore_visit(
      net, analysis, m0, cat, limits, extra,
      [&](std::size_t id, const TransitionSystem& sys) {
        auto hit = eval_property(prop, sys.concrete[id], cat);
        if (hit) {
          found = {id, *hit};
          return false;
        }
        return true;
      });

  Verdict verdict;
  verdict.states_visited = ts.state_count();
  verdict.frontier_exhausted = ts.frontier_exhausted;
  verdict.fresh_cap_hit = ts.fresh_cap_hit;
  if (found) {
    verdict.kind = Verdict::Kind::Unsafe;
    verdict.frontier_exhausted = false;
    verdict.witness = build_witness(ts, found->first, found->second, cat);
    replay_witness(net, analysis, prop, *verdict.witness);
  }
  return verdict;
}

// ---------------------------------------------------------------------------
// Catalog enumeration

namespace {

std::string instance_key(const CatalogInstance& cat) {
  std::ostringstream os;
  for (const auto& [rel, tuples] : cat.facts) {
    os << rel << '{';
    for (const Tuple& t : tuples) {
      for (const Value& v : t) {
        os << v.type << ':';
        if (v.is_pool())
          os << '#' << v.pool;
        else
          os << '$' << v.sym;
        os << ',';
      }
      os << ';';
    }
    os << '}';
  }
  return os.str();
}

CatalogInstance canonicalize_instance(const CatalogInstance& cat,
                                      const std::set<Value>& protect) {
  std::map<Value, Value> rename;
  std::map<std::string, std::int64_t> next_index;
  auto target_for = [&](const std::string& type) {
    std::int64_t idx = next_index.count(type) ? next_index[type] : 0;
    while (true) {
      Value candidate = Value::pool_value(type, idx);
      if (!protect.count(candidate)) {
        next_index[type] = idx + 1;
        return candidate;
      }
      ++idx;
    }
  };
  for (const auto& [rel, tuples] : cat.facts) {
    (void)rel;
    for (const Tuple& t : tuples)
      for (const Value& v : t) {
        if (!v.is_pool() || protect.count(v) || rename.count(v)) continue;
        rename.emplace(v, target_for(v.type));
      }
  }
  if (rename.empty()) return cat;
  CatalogInstance out;
  out.schema = cat.schema;
  for (const auto& [rel, tuples] : cat.facts)
    for (const Tuple& t : tuples) {
      Tuple renamed;
      renamed.reserve(t.size());
      for (const Value& v : t) {
        auto it = rename.find(v);
        renamed.push_back(it == rename.end() ? v : it->second);
      }
      out.add_fact(rel, std::move(renamed));
    }
  return out;
}

bool instance_constraints_ok(const CatalogInstance& cat) {
  if (!cat.schema) return false;
  for (const auto& rel : cat.schema->relations) {
    const auto& tuples = cat.facts_of(rel.name);
    std::set<Value> keys;
    for (const Tuple& t : tuples) {
      if (t.empty()) return false;
      if (!keys.insert(t[0]).second) return false;
    }
    for (const auto& fk : rel.fks) {
      if (fk.attr_index >= rel.arity()) return false;
      const auto& target = cat.facts_of(fk.target_relation);
      for (const Tuple& t : tuples) {
        bool found = false;
        for (const Tuple& tt : target)
          if (!tt.empty() && tt[0] == t[fk.attr_index]) {
            found = true;
            break;
          }
        if (!found) return false;
      }
    }
  }
  return true;
}

}  // namespace

std::vector<CatalogInstance> enumerate_catalogs(
    std::shared_ptr<const CatalogSchema> schema, std::uint32_t max_facts,
    const std::map<std::string, std::vector<Value>>& pools,
    const std::set<Value>& protect) {
  if (!schema) throw error("enumerate_catalogs: missing schema");

  // Candidate tuples per relation, in pool order.
  std::vector<std::vector<Tuple>> candidates;
  for (const auto& rel : schema->relations) {
    std::vector<Tuple> tuples{Tuple{}};
    for (const auto& attr : rel.attributes) {
      std::vector<Tuple> next;
      auto it = pools.find(attr.type);
      if (it == pools.end()) {
        tuples.clear();
        break;
      }
      for (const Tuple& prefix : tuples)
        for (const Value& v : it->second) {
          Tuple extended = prefix;
          extended.push_back(v);
          next.push_back(std::move(extended));
        }
      tuples = std::move(next);
    }
    candidates.push_back(std::move(tuples));
  }

  // All fact subsets (≤ max_facts, distinct keys) per relation.
  std::vector<std::vector<std::set<Tuple>>> choices(schema->relations.size());
  for (std::size_t r = 0; r < schema->relations.size(); ++r) {
    std::vector<std::pair<std::set<Tuple>, std::set<Value>>> partial;
    partial.push_back({{}, {}});
    std::vector<std::set<Tuple>> out{{}};
    // grow subsets fact by fact; candidate order keeps this deterministic
    for (std::uint32_t round = 0; round < max_facts; ++round) {
      std::vector<std::pair<std::set<Tuple>, std::set<Value>>> next;
      for (const auto& [facts, keys] : partial)
        for (const Tuple& cand : candidates[r]) {
          if (cand.empty()) continue;
          if (!facts.empty() && !(*facts.rbegin() < cand))
            continue;  // enforce ascending insertion: one order per subset
          if (keys.count(cand[0])) continue;
          auto nf = facts;
          nf.insert(cand);
          auto nk = keys;
          nk.insert(cand[0]);
          out.push_back(nf);
          next.push_back({std::move(nf), std::move(nk)});
        }
      partial = std::move(next);
      if (partial.empty()) break;
    }
    choices[r] = std::move(out);
  }

  std::map<std::string, CatalogInstance> dedup;
  std::vector<std::size_t> pick(schema->relations.size(), 0);
  while (true) {
    CatalogInstance cat;
    cat.schema = schema;
    for (std::size_t r = 0; r < schema->relations.size(); ++r)
      for (const Tuple& t : choices[r][pick[r]])
        cat.add_fact(schema->relations[r].name, t);
    if (instance_constraints_ok(cat)) {
      CatalogInstance canonical = canonicalize_instance(cat, protect);
      dedup.emplace(instance_key(canonical), std::move(canonical));
    }
    // advance the odometer
    std::size_t r = 0;
    for (; r < pick.size(); ++r) {
      if (++pick[r] < choices[r].size()) break;
      pick[r] = 0;
    }
    if (r == pick.size()) break;
    if (pick.empty()) break;
  }
  if (schema->relations.empty()) {
    CatalogInstance empty;
    empty.schema = schema;
    return {empty};
  }

  std::vector<CatalogInstance> out;
  out.reserve(dedup.size());
  for (auto& [_, cat] : dedup) out.push_back(std::move(cat));
  return out;
}

std::vector<CatalogInstance> enumerate_catalogs(
    std::shared_ptr<const CatalogSchema> schema, std::uint32_t max_facts,
    std::uint32_t pool_size) {
  std::map<std::string, std::vector<Value>> pools;
  if (schema)
    for (const auto& rel : schema->relations)
      for (const auto& attr : rel.attributes) {
        auto& pool = pools[attr.type];
        if (pool.empty())
          for (std::uint32_t i = 0; i < pool_size; ++i)
            pool.push_back(Value::pool_value(attr.type, i));
      }
  return enumerate_catalogs(std::move(schema), max_facts, pools);
}

Verdict parameterised_check(const Net& net, const Marking& m0,
                            const TypedProperty& prop,
                            const CatalogBounds& bounds,
                            const ExplorationLimits& limits) {
  if (!net.schema) throw error("parameterised_check: net has no schema");

  // Pools: the constants the net, initial marking and property can
  // distinguish, plus fresh canonical values per type.
  std::set<Value> seeds = net_constant_values(net);
  {
    auto mv = m0.values();
    seeds.insert(mv.begin(), mv.end());
    prop.property.body.collect_constants(seeds);
  }
  std::map<std::string, std::vector<Value>> pools;
  std::set<Value> protect;
  for (const auto& rel : net.schema->relations)
    for (const auto& attr : rel.attributes) {
      auto& pool = pools[attr.type];
      if (!pool.empty()) continue;
      std::int64_t max_seed_index = -1;
      for (const Value& v : seeds)
        if (v.type == attr.type) {
          pool.push_back(v);
          protect.insert(v);
          if (v.is_pool()) max_seed_index = std::max(max_seed_index, v.pool);
        }
      for (std::uint32_t i = 0; i < bounds.fresh_values_per_type; ++i)
        pool.push_back(
            Value::pool_value(attr.type, max_seed_index + 1 + i));
    }

  std::vector<CatalogInstance> catalogs = enumerate_catalogs(
      net.schema, bounds.max_facts_per_relation, pools, protect);

  Verdict aggregate;
  for (const CatalogInstance& cat : catalogs) {
    Verdict v = check_safety(net, m0, cat, prop, limits);
    aggregate.states_visited += v.states_visited;
    aggregate.frontier_exhausted =
        aggregate.frontier_exhausted && v.frontier_exhausted;
    aggregate.fresh_cap_hit = aggregate.fresh_cap_hit || v.fresh_cap_hit;
    if (v.unsafe()) {
      aggregate.kind = Verdict::Kind::Unsafe;
      aggregate.witness = std::move(v.witness);
      return aggregate;
    }
  }
  return aggregate;
}

// ---------------------------------------------------------------------------
// Boundedness

BoundedCheck check_bounded(const Net& net, const Marking& m0,
                           const CatalogInstance& cat, std::uint64_t bound,
                           const ExplorationLimits& limits) {
  NetAnalysis analysis = analyze_net(net);
  BoundedCheck result;
  TransitionSystem ts = explore_visit(
      net, analysis, m0, cat, limits, {},
      [&](std::size_t id, const TransitionSystem& sys) {
        for (const Place& p : net.places)
          if (sys.concrete[id].tokens_in(p.name) > bound) {
            result.bounded = false;
            result.violation = {p.name, sys.concrete[id]};
            return false;
          }
        return true;
      });
  result.states_visited = ts.state_count();
  result.frontier_exhausted = ts.frontier_exhausted;
  return result;
}

// ---------------------------------------------------------------------------
// Conservative nets

ConservativeReport classify_conservative(const Net& net) {
  ConservativeReport report;
  for (const Transition& t : net.transitions)
    for (const Arc& arc : t.outputs)
      for (std::size_t i = 0; i < arc.inscription.tuple.size(); ++i)
        if (arc.inscription.tuple[i].kind == InsTerm::Kind::Fresh) {
          report.conservative = false;
          report.occurrences.push_back(
              {t.name, arc.place, i + 1, arc.inscription.tuple[i].var});
        }
  return report;
}

ConservativizeResult conservativize(const Net& net, const Marking& m0,
                                    ConservativizeMode mode,
                                    std::uint64_t provision) {
  ConservativizeResult result;
  result.net = net;
  result.m0 = m0;

  ConservativeReport before = classify_conservative(net);
  if (before.conservative) return result;

  // fresh variable names per transition, with their types
  std::map<std::string, std::map<std::string, std::string>> fresh_by_tr;
  for (const auto& occ : before.occurrences) {
    const Transition* t = net.find_transition(occ.transition);
    const Place* p = net.find_place(occ.place);
    if (!t || !p) continue;
    fresh_by_tr[occ.transition][occ.variable] = p->color[occ.position - 1];
  }

  if (mode == ConservativizeMode::Catalog) {
    CatalogSchema schema = net.schema ? *net.schema : CatalogSchema{};
    std::set<std::string> nu_types;
    for (const auto& [tr, vars] : fresh_by_tr) {
      (void)tr;
      for (const auto& [var, type] : vars) {
        (void)var;
        nu_types.insert(type);
      }
    }
    for (const auto& type : nu_types) {
      std::string rel_name = "Created_" + type;
      if (schema.find(rel_name))
        throw error("conservativize: relation '" + rel_name +
                    "' already exists");
      for (const auto& rel : schema.relations)
        if (!rel.attributes.empty() && rel.attributes[0].type == type)
          throw error("conservativize: primary-key type '" + type +
                      "' is already used by relation '" + rel.name + "'");
      RelationSchema rel;
      rel.name = rel_name;
      rel.attributes.push_back({"id", type});
      schema.relations.push_back(rel);
      result.added_relations.push_back(std::move(rel));
    }
    result.net.schema = std::make_shared<CatalogSchema>(std::move(schema));

    for (Transition& t : result.net.transitions) {
      auto it = fresh_by_tr.find(t.name);
      if (it == fresh_by_tr.end()) continue;
      for (Arc& arc : t.outputs)
        for (InsTerm& term : arc.inscription.tuple)
          if (term.kind == InsTerm::Kind::Fresh)
            term.kind = InsTerm::Kind::Var;
      // conjoin Created_D(x) into every disjunct of the guard query
      UnionQuery query = t.guard_query
                             ? *t.guard_query
                             : UnionQuery::single(ConjunctiveQuery{});
      for (auto& disjunct : query.disjuncts)
        for (const auto& [var, type] : it->second) {
          RelAtom atom;
          atom.relation = "Created_" + type;
          atom.args.push_back(Term::make_var(var, type));
          disjunct.atoms.push_back(std::move(atom));
        }
      t.guard_query = std::move(query);
    }
    return result;
  }

  // Provision mode.
  if (provision < 1)
    throw error("conservativize: provision mode needs a bound >= 1");
  std::set<std::string> nu_types;
  for (const auto& [tr, vars] : fresh_by_tr) {
    (void)tr;
    for (const auto& [var, type] : vars) {
      (void)var;
      nu_types.insert(type);
    }
  }
  std::set<Value> used = net_constant_values(net);
  {
    auto mv = m0.values();
    used.insert(mv.begin(), mv.end());
  }
  for (const auto& type : nu_types) {
    std::string place_name = "provision_" + type;
    if (net.find_place(place_name))
      throw error("conservativize: place '" + place_name +
                  "' already exists");
    Place place;
    place.name = place_name;
    place.color = {type};
    result.net.places.push_back(place);
    result.added_places.push_back(place_name);

    std::int64_t idx = 0;
    for (std::uint64_t i = 0; i < provision; ++i) {
      while (used.count(Value::pool_value(type, idx))) ++idx;
      result.m0.add(place_name, {Value::pool_value(type, idx)});
      ++idx;
    }
  }
  for (Transition& t : result.net.transitions) {
    auto it = fresh_by_tr.find(t.name);
    if (it == fresh_by_tr.end()) continue;
    for (Arc& arc : t.outputs)
      for (InsTerm& term : arc.inscription.tuple)
        if (term.kind == InsTerm::Kind::Fresh)
          term.kind = InsTerm::Kind::Var;
    for (const auto& [var, type] : it->second) {
      Arc arc;
      arc.place = "provision_" + type;
      arc.inscription.tuple.push_back(InsTerm::make_var(var));
      t.inputs.push_back(std::move(arc));
    }
  }
  return result;
}

}  // namespace clognet
