#include "clognet/net.hpp"

#include <algorithm>
#include <sstream>

namespace clognet {

std::string InsTerm::str() const {
  switch (kind) {
    case Kind::Var:
      return var;
    case Kind::Fresh:
      return "nu " + var;
    case Kind::Const:
      return value.str();
  }
  return {};
}

std::string Inscription::str() const {
  std::string s;
  if (multiplicity != 1) s += std::to_string(multiplicity) + " * ";
  s += "(";
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    if (i) s += ", ";
    s += tuple[i].str();
  }
  return s + ")";
}

const Arc* Transition::input_to(const std::string& place) const {
  for (const auto& a : inputs)
    if (a.place == place) return &a;
  return nullptr;
}

const Arc* Transition::output_to(const std::string& place) const {
  for (const auto& a : outputs)
    if (a.place == place) return &a;
  return nullptr;
}

const Place* Net::find_place(const std::string& name) const {
  for (const auto& p : places)
    if (p.name == name) return &p;
  return nullptr;
}

const Transition* Net::find_transition(const std::string& name) const {
  for (const auto& t : transitions)
    if (t.name == name) return &t;
  return nullptr;
}

const Multiset<Tuple>& Marking::tokens(const std::string& place) const {
  static const Multiset<Tuple> kEmpty;
  auto it = places.find(place);
  return it == places.end() ? kEmpty : it->second;
}

void Marking::add(const std::string& place, Tuple token, std::uint64_t k) {
  places[place].add(std::move(token), k);
}

void Marking::normalize() {
  for (auto it = places.begin(); it != places.end();)
    it = it->second.empty() ? places.erase(it) : std::next(it);
}

std::set<Value> Marking::values() const {
  std::set<Value> vals;
  for (const auto& [_, tokens] : places)
    for (const auto& [tuple, __] : tokens)
      for (const Value& v : tuple) vals.insert(v);
  return vals;
}

std::uint64_t Marking::total_tokens() const {
  std::uint64_t n = 0;
  for (const auto& [_, tokens] : places) n += tokens.size();
  return n;
}

std::string Marking::str() const {
  std::ostringstream os;
  os << "{";
  bool first_place = true;
  for (const auto& [place, tokens] : places) {
    if (tokens.empty()) continue;
    if (!first_place) os << ", ";
    first_place = false;
    os << place << " -> [";
    bool first = true;
    for (const auto& [tuple, count] : tokens) {
      if (!first) os << ", ";
      first = false;
      if (tuple.size() == 1)
        os << tuple[0].str();
      else
        os << tuple_str(tuple);
      if (count > 1) os << "^" << count;
    }
    os << "]";
  }
  os << "}";
  return os.str();
}

std::string binding_str(const Binding& b) {
  std::string s = "{";
  bool first = true;
  for (const auto& [var, value] : b) {
    if (!first) s += ", ";
    first = false;
    s += var + " -> " + value.str();
  }
  return s + "}";
}

// ---------------------------------------------------------------------------
// Validation and analysis

namespace {

struct VarUse {
  std::string type;
  bool fresh = false;
};

// Collects variable types from one side's arcs; flags conflicts.
void scan_arcs(const Net& net, const Transition& t,
               const std::vector<Arc>& arcs, bool input_side,
               std::map<std::string, VarUse>& vars, ValidationReport& report) {
  std::set<std::string> seen_places;
  for (const Arc& arc : arcs) {
    const Place* place = net.find_place(arc.place);
    if (!place) {
      report.add("unknown-place", "transition '" + t.name +
                     "' has an arc to unknown place '" + arc.place + "'",
                 arc.span);
      continue;
    }
    if (!seen_places.insert(arc.place).second)
      report.add("duplicate-arc",
                 "transition '" + t.name + "' has two " +
                     (input_side ? "input" : "output") + " arcs for place '" +
                     arc.place + "'",
                 arc.span);
    if (arc.inscription.multiplicity < 1)
      report.add("bad-multiplicity", "inscription multiplicity must be >= 1",
                 arc.span);
    if (arc.inscription.tuple.size() != place->color.size()) {
      report.add("inscription-arity",
                 "transition '" + t.name + "' inscription " +
                     arc.inscription.str() + " has arity " +
                     std::to_string(arc.inscription.tuple.size()) +
                     ", place '" + place->name + "' has color arity " +
                     std::to_string(place->color.size()),
                 arc.span);
      continue;
    }
    for (std::size_t i = 0; i < arc.inscription.tuple.size(); ++i) {
      const InsTerm& term = arc.inscription.tuple[i];
      const std::string& expected = place->color[i];
      if (term.kind == InsTerm::Kind::Const) {
        if (input_side)
          report.add("input-constant",
                     "input inscriptions may only contain variables, found '" +
                         term.value.str() + "'",
                     arc.span);
        else if (term.value.type != expected)
          report.add("flow-typing",
                     "constant '" + term.value.str() + "' of type '" +
                         term.value.type + "' at position " +
                         std::to_string(i + 1) + " of place '" + place->name +
                         "' (expects '" + expected + "')",
                     arc.span);
        continue;
      }
      if (term.kind == InsTerm::Kind::Fresh && input_side)
        report.add("fresh-on-input", "fresh variable '" + term.var +
                       "' used in an input inscription of '" + t.name + "'",
                   arc.span);
      auto [it, inserted] = vars.emplace(term.var, VarUse{expected, false});
      if (!inserted && it->second.type != expected)
        report.add("flow-typing",
                   "variable '" + term.var + "' used as '" + it->second.type +
                       "' and as '" + expected + "' in transition '" + t.name +
                       "'",
                   arc.span);
      if (term.kind == InsTerm::Kind::Fresh) it->second.fresh = true;
    }
  }
}

}  // namespace

ValidationReport typecheck_net(const Net& net, NetAnalysis& out) {
  ValidationReport report;

  std::set<std::string> place_names;
  for (const auto& p : net.places) {
    if (!place_names.insert(p.name).second)
      report.add("duplicate-place", "place '" + p.name + "' declared twice",
                 p.span);
    if (p.color.empty())
      report.add("empty-color", "place '" + p.name + "' has an empty color",
                 p.span);
    for (const auto& type : p.color)
      if (!net.types.has(type))
        report.add("unknown-type", "place '" + p.name +
                       "' uses unknown type '" + type + "'",
                   p.span);
  }

  std::set<std::string> transition_names;
  for (const Transition& t : net.transitions) {
    if (!transition_names.insert(t.name).second)
      report.add("duplicate-transition",
                 "transition '" + t.name + "' declared twice", t.span);

    std::map<std::string, VarUse> in_use, out_use;
    scan_arcs(net, t, t.inputs, true, in_use, report);
    scan_arcs(net, t, t.outputs, false, out_use, report);

    TransitionAnalysis analysis;
    for (const auto& [var, use] : in_use) analysis.in_vars[var] = use.type;
    for (const auto& [var, use] : out_use) {
      analysis.out_vars[var] = use.type;
      if (use.fresh) analysis.fresh_vars.insert(var);
    }
    analysis.all_vars = analysis.in_vars;
    for (const auto& [var, type] : analysis.out_vars) {
      auto [it, inserted] = analysis.all_vars.emplace(var, type);
      if (!inserted && it->second != type)
        report.add("flow-typing", "variable '" + var + "' used as '" +
                       it->second + "' and as '" + type + "' in transition '" +
                       t.name + "'",
                   t.span);
    }

    for (const auto& var : analysis.fresh_vars) {
      if (analysis.in_vars.count(var))
        report.add("fresh-on-input",
                   "fresh variable '" + var +
                       "' also occurs in an input inscription of '" + t.name +
                       "'",
                   t.span);
      const DataType* dt = net.types.find(analysis.out_vars[var]);
      if (dt && !dt->unbounded())
        report.add("fresh-finite-type",
                   "fresh variable '" + var + "' has finite type '" +
                       dt->name + "'; fresh values need an unbounded domain",
                   t.span);
    }

    // Guard condition (a): vars(φ) ⊆ invars(t).
    std::set<std::string> cond_vars;
    t.guard_condition.collect_vars(cond_vars);
    for (const auto& var : cond_vars)
      if (!analysis.in_vars.count(var))
        report.add("guard-condition-a",
                   "guard condition of '" + t.name + "' mentions '" + var +
                       "', which is not an input-inscription variable",
                   t.span);

    // Guard query: typing plus condition (b).
    if (t.guard_query) {
      if (!net.schema) {
        report.add("no-schema",
                   "transition '" + t.name +
                       "' has a catalog query but the net has no schema",
                   t.span);
      } else {
        auto typed = typecheck_query(net.types, *net.schema, *t.guard_query,
                                     analysis.all_vars, report);
        if (typed) {
          for (const auto& [var, type] : typed->free_vars) {
            (void)type;
            if (!analysis.all_vars.count(var))
              report.add("guard-var-scope",
                         "guard query variable '" + var +
                             "' of transition '" + t.name +
                             "' does not occur in any arc inscription",
                         t.span);
            if (analysis.fresh_vars.count(var))
              report.add("guard-fresh-var",
                         "guard query of '" + t.name +
                             "' mentions fresh variable '" + var + "'",
                         t.span);
          }
          std::set<std::string> qvars = typed->query.all_vars();
          bool beyond_inputs = false;
          for (const auto& v : qvars)
            if (!analysis.in_vars.count(v)) beyond_inputs = true;
          if (!beyond_inputs)
            report.add(
                "guard-condition-b",
                "guard query of '" + t.name +
                    "' only uses input-bound variables; "
                    "(vars(Q) ∩ outvars(t)) \\ invars(t) ≠ ∅ is violated",
                t.span);
          analysis.guard = std::move(typed);
        }
      }
    }

    // Every output variable needs a value source: an input binding, the
    // guard query, or ν-freshness.
    for (const auto& [var, type] : analysis.out_vars) {
      (void)type;
      if (analysis.in_vars.count(var) || analysis.fresh_vars.count(var))
        continue;
      bool in_query =
          analysis.guard && analysis.guard->free_vars.count(var) > 0;
      if (!in_query)
        report.add("dangling-output-variable",
                   "output variable '" + var + "' of transition '" + t.name +
                       "' is not bound by inputs, guard query or ν-freshness",
                   t.span);
    }

    out.transitions[t.name] = std::move(analysis);
  }
  return report;
}

ValidationReport validate_net(const Net& net) {
  NetAnalysis ignored;
  return typecheck_net(net, ignored);
}

NetAnalysis analyze_net(const Net& net) {
  NetAnalysis analysis;
  ValidationReport report = typecheck_net(net, analysis);
  if (!report.ok())
    throw error("invalid net: " + report.entries().front().message);
  return analysis;
}

ValidationReport validate_marking(const Net& net, const Marking& m) {
  ValidationReport report;
  for (const auto& [place_name, tokens] : m.places) {
    const Place* place = net.find_place(place_name);
    if (!place) {
      report.add("unknown-place",
                 "marking mentions unknown place '" + place_name + "'");
      continue;
    }
    for (const auto& [tuple, _] : tokens) {
      if (tuple.size() != place->color.size()) {
        report.add("token-arity", "token " + tuple_str(tuple) + " in place '" +
                       place_name + "' has arity " +
                       std::to_string(tuple.size()) + ", color expects " +
                       std::to_string(place->color.size()));
        continue;
      }
      for (std::size_t i = 0; i < tuple.size(); ++i) {
        if (tuple[i].type != place->color[i])
          report.add("token-type", "token " + tuple_str(tuple) +
                         " position " + std::to_string(i + 1) +
                         " has type '" + tuple[i].type + "', place '" +
                         place_name + "' expects '" + place->color[i] + "'");
        const DataType* dt = net.types.find(tuple[i].type);
        if (dt && !dt->unbounded()) {
          if (tuple[i].is_pool())
            report.add("token-value", "pool value '" + tuple[i].str() +
                           "' used for finite type '" + dt->name + "'");
          else if (std::find(dt->enumeration.begin(), dt->enumeration.end(),
                             tuple[i].sym) == dt->enumeration.end())
            report.add("token-value", "value '" + tuple[i].str() +
                           "' is not in the enumeration of type '" + dt->name +
                           "'");
        }
      }
    }
  }
  return report;
}

std::set<Value> net_constant_values(const Net& net) {
  std::set<Value> out;
  for (const Transition& t : net.transitions) {
    if (t.guard_query) {
      auto qc = t.guard_query->all_constants();
      out.insert(qc.begin(), qc.end());
    }
    t.guard_condition.collect_constants(out);
    for (const Arc& arc : t.outputs)
      for (const InsTerm& term : arc.inscription.tuple)
        if (term.kind == InsTerm::Kind::Const) out.insert(term.value);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Semantics

Multiset<Tuple> apply_substitution(const Binding& binding,
                                   const Inscription& inscription) {
  Tuple ground;
  ground.reserve(inscription.tuple.size());
  for (const InsTerm& term : inscription.tuple) {
    if (term.kind == InsTerm::Kind::Const) {
      ground.push_back(term.value);
      continue;
    }
    auto it = binding.find(term.var);
    if (it == binding.end())
      throw error("unbound variable '" + term.var + "' in inscription");
    ground.push_back(it->second);
  }
  Multiset<Tuple> result;
  result.add(std::move(ground), inscription.multiplicity);
  return result;
}

namespace {

// Extends `binding` so the inscription matches `token`; false on clash.
bool unify_token(const Inscription& ins, const Tuple& token,
                 Binding& binding) {
  for (std::size_t i = 0; i < ins.tuple.size(); ++i) {
    const InsTerm& term = ins.tuple[i];
    if (term.kind == InsTerm::Kind::Const) {
      if (term.value != token[i]) return false;
      continue;
    }
    auto it = binding.find(term.var);
    if (it == binding.end())
      binding.emplace(term.var, token[i]);
    else if (it->second != token[i])
      return false;
  }
  return true;
}

std::int64_t least_free_pool_index(const std::string& type,
                                   const std::set<Value>& avoid,
                                   std::int64_t from) {
  std::int64_t idx = from;
  while (avoid.count(Value::pool_value(type, idx))) ++idx;
  return idx;
}

}  // namespace

std::vector<Binding> enabled_bindings(
    const Net& net, const NetAnalysis& analysis, const Marking& m,
    const CatalogInstance& cat, const Transition& t, const FreshPolicy& policy,
    const std::set<Value>* extra_protected, bool* cap_hit) {
  auto ta_it = analysis.transitions.find(t.name);
  if (ta_it == analysis.transitions.end())
    throw error("transition '" + t.name + "' missing from net analysis");
  const TransitionAnalysis& ta = ta_it->second;

  // (i) bind input variables by matching tokens against input inscriptions.
  std::vector<Binding> partials{Binding{}};
  for (const Arc& arc : t.inputs) {
    std::vector<Binding> next;
    const auto& tokens = m.tokens(arc.place);
    for (const Binding& partial : partials)
      for (const auto& [token, count] : tokens) {
        if (count < arc.inscription.multiplicity) continue;
        if (token.size() != arc.inscription.tuple.size()) continue;
        Binding extended = partial;
        if (unify_token(arc.inscription, token, extended))
          next.push_back(std::move(extended));
      }
    partials = std::move(next);
    if (partials.empty()) return {};
  }

  // (ii) condition φ.
  if (!t.guard_condition.is_true())
    std::erase_if(partials, [&](const Binding& b) {
      return !evaluate_condition(t.guard_condition, b);
    });
  if (partials.empty()) return {};

  // (ii)+(iv) guard query: substitute input-bound values, then each answer
  // binds the propagated variables.
  if (ta.guard) {
    std::vector<Binding> next;
    for (const Binding& partial : partials) {
      Substitution input_part;
      for (const auto& [var, type] : ta.guard->free_vars) {
        (void)type;
        auto it = partial.find(var);
        if (it != partial.end()) input_part.emplace(var, it->second);
      }
      TypedQuery grounded = substitute_free(*ta.guard, input_part);
      std::set<Substitution> answers = evaluate_query(grounded, cat);
      for (const Substitution& answer : answers) {
        Binding extended = partial;
        for (const auto& [var, value] : answer) extended[var] = value;
        next.push_back(std::move(extended));
      }
    }
    partials = std::move(next);
    if (partials.empty()) return {};
  }

  // (iii) fresh variables.
  if (!ta.fresh_vars.empty()) {
    std::set<Value> avoid = m.values();
    {
      auto cv = catalog_values(cat);
      avoid.insert(cv.begin(), cv.end());
      if (extra_protected)
        avoid.insert(extra_protected->begin(), extra_protected->end());
      else {
        auto nc = net_constant_values(net);
        avoid.insert(nc.begin(), nc.end());
      }
    }
    const bool canonical = policy.kind == FreshPolicy::Kind::Canonical;
    for (const std::string& var : ta.fresh_vars) {  // sorted by name
      const std::string& type = ta.out_vars.at(var);
      // enumerate offers the n least admissible values and filters clashing
      // combinations; canonical assigns sequentially past earlier choices
      std::vector<Value> options;
      if (!canonical) {
        std::int64_t idx = 0;
        while (static_cast<int>(options.size()) < policy.candidates) {
          idx = least_free_pool_index(type, avoid, idx);
          if (idx >= policy.pool_cap) {
            if (cap_hit) *cap_hit = true;
            break;
          }
          options.push_back(Value::pool_value(type, idx));
          ++idx;
        }
      }
      std::vector<Binding> next;
      for (const Binding& partial : partials) {
        std::set<Value> used;
        for (const auto& [v, val] : partial)
          if (ta.fresh_vars.count(v)) used.insert(val);  // ν ≠ ν'
        if (canonical) {
          std::set<Value> taken = avoid;
          taken.insert(used.begin(), used.end());
          std::int64_t idx = least_free_pool_index(type, taken, 0);
          if (idx >= policy.pool_cap) {
            if (cap_hit) *cap_hit = true;
            continue;
          }
          Binding extended = partial;
          extended[var] = Value::pool_value(type, idx);
          next.push_back(std::move(extended));
          continue;
        }
        for (const Value& v : options) {
          if (used.count(v)) continue;
          Binding extended = partial;
          extended[var] = v;
          next.push_back(std::move(extended));
        }
      }
      partials = std::move(next);
      if (partials.empty()) return {};
    }
  }

  std::set<Binding> dedup(partials.begin(), partials.end());
  return {dedup.begin(), dedup.end()};
}

std::vector<Binding> enabled_bindings(const Net& net, const Marking& m,
                                      const CatalogInstance& cat,
                                      const Transition& t,
                                      const FreshPolicy& policy) {
  NetAnalysis analysis = analyze_net(net);
  return enabled_bindings(net, analysis, m, cat, t, policy);
}

namespace {

void verify_enabled(const TransitionAnalysis& ta,
                    const Marking& m, const CatalogInstance& cat,
                    const Transition& t, const Binding& binding) {
  for (const auto& [var, type] : ta.all_vars) {
    auto it = binding.find(var);
    if (it == binding.end())
      throw error("binding for '" + t.name + "' misses variable '" + var +
                  "'");
    if (it->second.type != type)
      throw error("binding maps '" + var + "' to type '" + it->second.type +
                  "', expected '" + type + "'");
  }
  for (const Arc& arc : t.inputs) {
    Multiset<Tuple> needed = apply_substitution(binding, arc.inscription);
    if (!m.tokens(arc.place).includes(needed))
      throw error("transition '" + t.name + "' is not enabled: place '" +
                  arc.place + "' lacks " + arc.inscription.str());
  }
  if (!t.guard_condition.is_true() &&
      !evaluate_condition(t.guard_condition, binding))
    throw error("transition '" + t.name +
                "' is not enabled: guard condition is false");
  if (ta.guard) {
    Substitution input_part;
    Substitution propagated;
    for (const auto& [var, type] : ta.guard->free_vars) {
      (void)type;
      auto it = binding.find(var);
      if (it == binding.end())
        throw error("binding misses guard variable '" + var + "'");
      if (ta.in_vars.count(var))
        input_part.emplace(var, it->second);
      else
        propagated.emplace(var, it->second);
    }
    TypedQuery grounded = substitute_free(*ta.guard, input_part);
    std::set<Substitution> answers = evaluate_query(grounded, cat);
    if (!answers.count(propagated))
      throw error("transition '" + t.name +
                  "' is not enabled: guard query rejects the binding");
  }
  if (!ta.fresh_vars.empty()) {
    std::set<Value> forbidden = m.values();
    auto cv = catalog_values(cat);
    forbidden.insert(cv.begin(), cv.end());
    std::set<Value> used;
    for (const auto& var : ta.fresh_vars) {
      const Value& v = binding.at(var);
      if (forbidden.count(v))
        throw error("fresh value " + v.str() + " for '" + var +
                    "' occurs in the marking or catalog");
      if (!used.insert(v).second)
        throw error("distinct fresh variables share the value " + v.str());
    }
  }
}

}  // namespace

Marking fire(const Net& net, const NetAnalysis& analysis, const Marking& m,
             const CatalogInstance& cat, const Transition& t,
             const Binding& binding, bool verify) {
  auto ta_it = analysis.transitions.find(t.name);
  if (ta_it == analysis.transitions.end())
    throw error("transition '" + t.name + "' missing from net analysis");
  if (verify) verify_enabled(ta_it->second, m, cat, t, binding);

  Marking out = m;
  for (const Arc& arc : t.inputs)
    out.places[arc.place] -= apply_substitution(binding, arc.inscription);
  for (const Arc& arc : t.outputs)
    out.places[arc.place] += apply_substitution(binding, arc.inscription);
  out.normalize();
  return out;
}

Marking fire(const Net& net, const Marking& m, const CatalogInstance& cat,
             const Transition& t, const Binding& binding, bool verify) {
  NetAnalysis analysis = analyze_net(net);
  return fire(net, analysis, m, cat, t, binding, verify);
}

namespace {

// Canonicalization state: the value renaming built so far plus the next
// candidate pool index per type (skipping protected indices).
struct CanonEnv {
  const std::set<Value>* protect = nullptr;

  Value target_for(const std::string& type,
                   std::map<std::string, std::int64_t>& next_index) const {
    std::int64_t idx = next_index.count(type) ? next_index.at(type) : 0;
    while (true) {
      Value candidate = Value::pool_value(type, idx);
      if (!protect->count(candidate)) {
        next_index[type] = idx + 1;
        return candidate;
      }
      ++idx;
    }
  }

  bool renameable(const Value& v) const {
    return v.is_pool() && !protect->count(v);
  }
};

struct CanonEntry {
  std::size_t place = 0;
  Tuple tuple;
  std::uint64_t count = 0;

  auto operator<=>(const CanonEntry&) const = default;
};

// Renames one token under the partial assignment, extending it greedily for
// values not yet assigned (left to right).
Tuple greedy_rename(const CanonEnv& env, const Tuple& tuple,
                    std::map<Value, Value>& assignment,
                    std::map<std::string, std::int64_t>& next_index) {
  Tuple out;
  out.reserve(tuple.size());
  for (const Value& v : tuple) {
    if (!env.renameable(v)) {
      out.push_back(v);
      continue;
    }
    auto it = assignment.find(v);
    if (it == assignment.end())
      it = assignment.emplace(v, env.target_for(v.type, next_index)).first;
    out.push_back(it->second);
  }
  return out;
}

// The canonical form is the lexicographically least serialization over all
// type-respecting renamings of the non-protected pool values. Tokens are
// emitted place by place, choosing the token whose greedily renamed form is
// minimal; equal forms with equal counts force a backtracking tie.
void canonical_search(const CanonEnv& env,
                      std::vector<std::vector<std::pair<Tuple, std::uint64_t>>>&
                          remaining,
                      std::size_t place,
                      std::map<Value, Value> assignment,
                      std::map<std::string, std::int64_t> next_index,
                      std::vector<CanonEntry>& acc,
                      std::optional<std::vector<CanonEntry>>& best) {
  if (place == remaining.size()) {
    if (!best || acc < *best) best = acc;
    return;
  }
  if (remaining[place].empty()) {
    canonical_search(env, remaining, place + 1, std::move(assignment),
                     std::move(next_index), acc, best);
    return;
  }

  // find the candidates whose renamed (form, count) is minimal
  std::optional<std::pair<Tuple, std::uint64_t>> min_form;
  std::vector<std::size_t> ties;
  for (std::size_t i = 0; i < remaining[place].size(); ++i) {
    auto trial_assignment = assignment;
    auto trial_next = next_index;
    Tuple form = greedy_rename(env, remaining[place][i].first,
                               trial_assignment, trial_next);
    std::pair<Tuple, std::uint64_t> key{std::move(form),
                                        remaining[place][i].second};
    if (!min_form || key < *min_form) {
      min_form = std::move(key);
      ties = {i};
    } else if (key == *min_form) {
      ties.push_back(i);
    }
  }

  for (std::size_t choice : ties) {
    auto branch_assignment = assignment;
    auto branch_next = next_index;
    auto entry = remaining[place][choice];
    Tuple form =
        greedy_rename(env, entry.first, branch_assignment, branch_next);
    acc.push_back({place, std::move(form), entry.second});
    remaining[place].erase(remaining[place].begin() +
                           static_cast<std::ptrdiff_t>(choice));
    canonical_search(env, remaining, place, std::move(branch_assignment),
                     std::move(branch_next), acc, best);
    remaining[place].insert(remaining[place].begin() +
                                static_cast<std::ptrdiff_t>(choice),
                            entry);
    acc.pop_back();
    if (ties.size() == 1) break;
  }
}

}  // namespace

Marking canonicalize_marking(const Marking& m,
                             const std::set<Value>& protect) {
  CanonEnv env;
  env.protect = &protect;

  std::vector<std::string> place_names;
  std::vector<std::vector<std::pair<Tuple, std::uint64_t>>> remaining;
  bool any_renameable = false;
  for (const auto& [place, tokens] : m.places) {
    if (tokens.empty()) continue;
    place_names.push_back(place);
    remaining.emplace_back(tokens.entries().begin(), tokens.entries().end());
    for (const auto& [tuple, _] : tokens.entries())
      for (const Value& v : tuple)
        if (env.renameable(v)) any_renameable = true;
  }
  if (!any_renameable) {
    Marking out = m;
    out.normalize();
    return out;
  }

  std::vector<CanonEntry> acc;
  std::optional<std::vector<CanonEntry>> best;
  canonical_search(env, remaining, 0, {}, {}, acc, best);

  Marking out;
  for (const CanonEntry& entry : *best)
    out.add(place_names[entry.place], entry.tuple, entry.count);
  out.normalize();
  return out;
}

}  // namespace clognet
