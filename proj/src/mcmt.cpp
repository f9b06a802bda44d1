#include "clognet/mcmt.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace clognet::mcmt {

std::string Document::render() const {
  std::ostringstream os;
  bool first = true;
  for (const Statement& stmt : statements) {
    if (stmt.lines.empty()) continue;
    if (!first) os << "\n";
    first = false;
    for (const std::string& line : stmt.lines) os << line << "\n";
  }
  return os.str();
}

bool Document::has_warning(const std::string& code) const {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [&](const Diagnostic& d) { return d.code == code; });
}

namespace {

std::string sanitize(const std::string& name) {
  std::string out;
  out.reserve(name.size());
  for (char c : name)
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  if (out.empty()) out = "_";
  if (std::isdigit(static_cast<unsigned char>(out[0]))) out = "v_" + out;
  return out;
}

std::string lower(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

/// Case-insensitively collision-checked identifier table.
class Ident {
 public:
  std::string declare(const std::string& original) {
    auto memo = memo_.find(original);
    if (memo != memo_.end()) return memo->second;
    std::string id = sanitize(original);
    auto [it, inserted] = owner_.emplace(lower(id), original);
    if (!inserted && it->second != original)
      throw EncodeError("identifier collision after sanitization: '" +
                        original + "' clashes with '" + it->second + "'");
    memo_.emplace(original, id);
    return id;
  }

  std::string get(const std::string& original) const {
    auto it = memo_.find(original);
    if (it == memo_.end())
      throw EncodeError("identifier '" + original + "' was never declared");
    return it->second;
  }

  bool taken(const std::string& id) const {
    return owner_.count(lower(id)) > 0;
  }

 private:
  std::map<std::string, std::string> memo_;   // original -> sanitized
  std::map<std::string, std::string> owner_;  // lower(sanitized) -> original
};

struct ArrayInfo {
  std::string place;       // original place name
  std::size_t component;   // 0-based
  std::string name;        // sanitized array identifier, e.g. working_1
  std::string type;        // original component type
};

struct NegChoice {
  std::size_t atom = 0;    // index into disjunct atoms
  std::size_t choice = 0;  // 0 = key is NULL, i >= 1 = attribute i differs
};

struct CondLiteral {
  Term lhs, rhs;
  bool negated = false;
};

// negation normal form -> list of conjunctive clauses (DNF)
std::vector<std::vector<CondLiteral>> condition_dnf(const Condition& cond,
                                                    bool positive) {
  using Clauses = std::vector<std::vector<CondLiteral>>;
  switch (cond.kind) {
    case Condition::Kind::True:
      if (positive) return {{}};
      return {};  // ¬⊤: no satisfiable clause
    case Condition::Kind::Eq:
      return {{CondLiteral{cond.lhs, cond.rhs, !positive}}};
    case Condition::Kind::Not:
      return condition_dnf(cond.children.at(0), !positive);
    case Condition::Kind::And: {
      if (positive) {
        Clauses acc = {{}};
        for (const Condition& child : cond.children) {
          Clauses child_clauses = condition_dnf(child, true);
          Clauses next;
          for (const auto& a : acc)
            for (const auto& b : child_clauses) {
              auto merged = a;
              merged.insert(merged.end(), b.begin(), b.end());
              next.push_back(std::move(merged));
            }
          acc = std::move(next);
        }
        return acc;
      }
      Clauses acc;  // ¬(a ∧ b) = ¬a ∨ ¬b
      for (const Condition& child : cond.children) {
        Clauses child_clauses = condition_dnf(child, false);
        acc.insert(acc.end(), child_clauses.begin(), child_clauses.end());
      }
      return acc;
    }
  }
  return {};
}

class Encoder {
 public:
  Encoder(const TypeDomain& types, const CatalogSchema* schema,
          const Net* net, const std::set<Value>& constants)
      : types_(types), schema_(schema), net_(net) {
    for (const char* reserved : {"BOOLE", "TRUE", "FALSE", "init_fl", "x",
                                 "j", "not"})
      ids_.declare(reserved);

    for (const DataType& t : types_.types()) {
      type_ids_[t.name] = ids_.declare(t.name);
      null_ids_[t.name] = ids_.declare("NULL_" + type_ids_[t.name]);
    }
    if (schema_)
      for (const RelationSchema& rel : schema_->relations) {
        if (rel.attributes.empty()) continue;
        std::string rel_id = sanitize(rel.name);
        if (rel.key_only()) {
          fn_ids_[rel.name][""] = ids_.declare(rel_id + "_mem");
        } else {
          for (std::size_t i = 1; i < rel.attributes.size(); ++i)
            fn_ids_[rel.name][rel.attributes[i].name] = ids_.declare(
                rel_id + "_" + sanitize(rel.attributes[i].name));
        }
      }
    for (const Value& v : constants)
      const_ids_[v] = ids_.declare(v.str());
    if (net_)
      for (const Place& place : net_->places) {
        std::string place_id = sanitize(place.name);
        for (std::size_t i = 0; i < place.color.size(); ++i) {
          std::string array_id =
              ids_.declare(place_id + "_" + std::to_string(i + 1));
          arrays_.push_back({place.name, i, array_id, place.color[i]});
        }
      }
  }

  const std::vector<ArrayInfo>& arrays() const { return arrays_; }

  std::string type_id(const std::string& t) const {
    auto it = type_ids_.find(t);
    if (it == type_ids_.end())
      throw EncodeError("unknown type '" + t + "' during encoding");
    return it->second;
  }
  std::string null_id(const std::string& t) const { return null_ids_.at(t); }
  std::string const_id(const Value& v) const {
    auto it = const_ids_.find(v);
    if (it == const_ids_.end())
      throw EncodeError("constant '" + v.str() + "' was not declared");
    return it->second;
  }
  std::string fn_id(const std::string& relation,
                    const std::string& attribute) const {
    return fn_ids_.at(relation).at(attribute);
  }

  std::vector<const ArrayInfo*> arrays_of(const std::string& place) const {
    std::vector<const ArrayInfo*> out;
    for (const ArrayInfo& a : arrays_)
      if (a.place == place) out.push_back(&a);
    return out;
  }

  std::string local_name(const std::string& original,
                         std::set<std::string>& locals) const {
    std::string id = sanitize(original);
    if (ids_.taken(id))
      throw EncodeError("statement-local identifier '" + original +
                        "' collides with a declared identifier");
    if (!locals.insert(lower(id)).second)
      throw EncodeError("statement-local identifier '" + original +
                        "' declared twice");
    return id;
  }

  std::string index_name(const std::string& id,
                         std::set<std::string>& locals) const {
    if (ids_.taken(id) || !locals.insert(lower(id)).second)
      throw EncodeError("index variable '" + id +
                        "' collides with another identifier");
    return id;
  }

  // ---- schema ----

  std::vector<Statement> schema_statements(
      const std::set<Value>& constants, std::vector<Diagnostic>* diags) const {
    std::vector<Statement> out;
    Statement types_stmt;
    for (const DataType& t : types_.types())
      types_stmt.lines.push_back(":smt (define_type " + type_id(t.name) +
                                 ")");
    out.push_back(std::move(types_stmt));

    Statement fn_stmt;
    std::vector<std::string> fn_names;
    if (schema_)
      for (const RelationSchema& rel : schema_->relations) {
        if (rel.attributes.empty()) continue;
        const std::string key_type = type_id(rel.attributes[0].type);
        if (rel.key_only()) {
          std::string fn = fn_id(rel.name, "");
          fn_stmt.lines.push_back(":smt (define " + fn + " ::(-> " +
                                  key_type + " BOOLE))");
          fn_names.push_back(fn);
          if (diags)
            diags->push_back(
                {Diagnostic::Severity::Warning, "key-only-relation",
                 "relation '" + rel.name +
                     "' has no non-key attributes; membership is encoded "
                     "via characteristic function '" +
                     fn + "'"});
        } else {
          for (std::size_t i = 1; i < rel.attributes.size(); ++i) {
            std::string fn = fn_id(rel.name, rel.attributes[i].name);
            fn_stmt.lines.push_back(":smt (define " + fn + " ::(-> " +
                                    key_type + " " +
                                    type_id(rel.attributes[i].type) + "))");
            fn_names.push_back(fn);
          }
        }
      }
    if (!fn_stmt.lines.empty()) out.push_back(std::move(fn_stmt));

    Statement const_stmt;
    std::vector<std::string> const_names;
    for (const Value& v : constants) {
      const_stmt.lines.push_back(":smt (define " + const_id(v) + " ::" +
                                 type_id(v.type) + ")");
      const_names.push_back(const_id(v));
    }
    if (!const_stmt.lines.empty()) out.push_back(std::move(const_stmt));

    Statement db;
    db.lines.push_back(":db_driven");
    std::string sorts;
    for (const DataType& t : types_.types()) {
      if (!sorts.empty()) sorts += ",";
      sorts += type_id(t.name);
    }
    db.lines.push_back(":db_sorts " + sorts);
    if (!fn_names.empty()) {
      std::string fns;
      for (const std::string& f : fn_names) {
        if (!fns.empty()) fns += ",";
        fns += f;
      }
      db.lines.push_back(":db_functions " + fns);
    }
    if (!const_names.empty()) {
      std::string cs;
      for (const std::string& c : const_names) {
        if (!cs.empty()) cs += ",";
        cs += c;
      }
      db.lines.push_back(":db_constants " + cs);
    }
    out.push_back(std::move(db));
    return out;
  }

  // ---- places ----

  std::vector<Statement> places_statements() const {
    if (arrays_.empty())
      throw EncodeError(
          "net has no places; the :initial block would be vacuous");
    std::vector<Statement> out;
    Statement locals;
    for (const ArrayInfo& a : arrays_)
      locals.lines.push_back(":local " + a.name + " " + type_id(a.type));
    out.push_back(std::move(locals));

    Statement init;
    init.lines.push_back(":initial");
    init.lines.push_back(":var x");
    std::string cnj;
    for (const ArrayInfo& a : arrays_) {
      if (!cnj.empty()) cnj += " ";
      cnj += "(= " + a.name + "[x] " + null_id(a.type) + ")";
    }
    init.lines.push_back(":cnj " + cnj);
    out.push_back(std::move(init));
    return out;
  }

  // ---- initial marking ----

  std::vector<Statement> initmarking_statements(const Marking& m0) const {
    std::vector<Statement> out;
    Statement decls;
    decls.lines.push_back(":smt (define TRUE ::BOOLE)");
    decls.lines.push_back(":smt (define FALSE ::BOOLE)");
    decls.lines.push_back(":global init_fl BOOLE");
    out.push_back(std::move(decls));

    // one index variable per token of the initial marking
    struct TokenCase {
      std::string place;
      Tuple token;
    };
    std::vector<TokenCase> tokens;
    for (const auto& [place, bag] : m0.places)
      for (const auto& [tuple, count] : bag.entries())
        for (std::uint64_t i = 0; i < count; ++i)
          tokens.push_back({place, tuple});

    Statement tr;
    tr.lines.push_back(":transition");
    if (!tokens.empty()) {
      std::string vars;
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        std::string v = "i" + std::to_string(i + 1);
        if (ids_.taken(v))
          throw EncodeError("index variable '" + v +
                            "' collides with a declared identifier");
        if (!vars.empty()) vars += ",";
        vars += v;
      }
      tr.lines.push_back(":var " + vars);
    }
    tr.lines.push_back(":var j");
    tr.lines.push_back(":guard (= init_fl TRUE)");
    tr.lines.push_back(":numcases " + std::to_string(tokens.size() + 1));
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      tr.lines.push_back(":case (= j i" + std::to_string(i + 1) + ")");
      for (const ArrayInfo& a : arrays_) {
        if (a.place == tokens[i].place)
          tr.lines.push_back(":val " + const_id(tokens[i].token[a.component]));
        else
          tr.lines.push_back(":val " + a.name + "[j]");
      }
      tr.lines.push_back(":val FALSE");
    }
    tr.lines.push_back(":case");
    for (const ArrayInfo& a : arrays_)
      tr.lines.push_back(":val " + a.name + "[j]");
    tr.lines.push_back(":val FALSE");
    out.push_back(std::move(tr));
    return out;
  }

  // ---- transitions ----

  std::vector<Statement> transition_statements(
      const Transition& t, const TransitionAnalysis& ta, IndexBudget* budget,
      std::vector<Diagnostic>* diags) const {
    // Index variables per input/output arc, expanded by multiplicity.
    struct Slot {
      const Arc* arc = nullptr;
      std::vector<const ArrayInfo*> arrays;
      std::vector<std::string> indexes;
    };
    std::vector<Slot> in_slots, out_slots;
    int next_x = 1, next_y = 1;
    for (const Arc& arc : t.inputs) {
      Slot slot;
      slot.arc = &arc;
      slot.arrays = arrays_of(arc.place);
      for (std::uint64_t k = 0; k < arc.inscription.multiplicity; ++k)
        slot.indexes.push_back("x" + std::to_string(next_x++));
      in_slots.push_back(std::move(slot));
    }
    for (const Arc& arc : t.outputs) {
      Slot slot;
      slot.arc = &arc;
      slot.arrays = arrays_of(arc.place);
      for (std::uint64_t k = 0; k < arc.inscription.multiplicity; ++k)
        slot.indexes.push_back("y" + std::to_string(next_y++));
      out_slots.push_back(std::move(slot));
    }
    const int existential = (next_x - 1) + (next_y - 1);
    const int universal = ta.fresh_vars.empty() ? 0 : 1;
    if (budget) *budget = {existential, universal};
    if (diags && (existential > 2 || universal > 1))
      diags->push_back(
          {Diagnostic::Severity::Warning, "index-budget",
           "transition '" + t.name + "' needs " +
               std::to_string(existential) + " existentially and " +
               std::to_string(universal) +
               " universally quantified index variables; the current MCMT "
               "implementation supports two existentially quantified and one "
               "universally quantified"});

    // Representative cell per input-bound variable.
    std::map<std::string, std::string> rep_cell;
    for (const Slot& slot : in_slots)
      for (std::size_t l = 0; l < slot.arc->inscription.tuple.size(); ++l) {
        const InsTerm& term = slot.arc->inscription.tuple[l];
        if (term.kind != InsTerm::Kind::Var) continue;
        std::string cell = slot.arrays[l]->name + "[" + slot.indexes[0] + "]";
        rep_cell.emplace(term.var, cell);
      }

    // The guard query in disjuncts; a missing guard contributes one empty
    // disjunct.
    std::vector<const ConjunctiveQuery*> disjuncts;
    static const ConjunctiveQuery kEmptyQuery;
    if (ta.guard)
      for (const auto& d : ta.guard->query.disjuncts) disjuncts.push_back(&d);
    else
      disjuncts.push_back(&kEmptyQuery);

    std::vector<std::vector<CondLiteral>> cond_clauses =
        condition_dnf(t.guard_condition, true);

    std::vector<Statement> out;
    for (const ConjunctiveQuery* disjunct : disjuncts) {
      // eevar set: every query variable, then fresh variables
      std::set<std::string> locals;
      std::vector<std::pair<std::string, std::string>> eevars;  // id, type
      std::map<std::string, std::string> eevar_id;
      auto add_eevar = [&](const std::string& var, const std::string& type) {
        if (eevar_id.count(var)) return;
        std::string id = local_name(var, locals);
        eevar_id[var] = id;
        eevars.push_back({id, type_id(type)});
      };
      std::map<std::string, std::string> var_types;
      for (const auto& a : disjunct->atoms)
        for (const Term& arg : a.args)
          if (arg.is_var()) var_types[arg.var] = arg.var_type;
      for (const auto& ev : disjunct->exist_vars)
        var_types[ev.var] = ev.var_type;
      std::function<void(const Condition&)> collect_cond_vars =
          [&](const Condition& c) {
            if (c.kind == Condition::Kind::Eq) {
              if (c.lhs.is_var()) var_types[c.lhs.var] = c.lhs.var_type;
              if (c.rhs.is_var()) var_types[c.rhs.var] = c.rhs.var_type;
            }
            for (const auto& ch : c.children) collect_cond_vars(ch);
          };
      collect_cond_vars(disjunct->condition);
      for (const auto& [var, type] : var_types) add_eevar(var, type);
      for (const std::string& var : ta.fresh_vars)
        add_eevar(var, ta.out_vars.at(var));

      // index variables must not collide with eevars or globals
      std::vector<std::string> index_vars;
      for (const Slot& s : in_slots)
        for (const std::string& x : s.indexes)
          index_vars.push_back(index_name(x, locals));
      for (const Slot& s : out_slots)
        for (const std::string& y : s.indexes)
          index_vars.push_back(index_name(y, locals));

      const auto render_term = [&](const Term& term) -> std::string {
        if (!term.is_var()) return const_id(term.value);
        auto it = eevar_id.find(term.var);
        if (it == eevar_id.end())
          throw EncodeError("query variable '" + term.var +
                            "' has no eevar in transition '" + t.name + "'");
        return it->second;
      };

      // Negated-atom expansion choices (cartesian product).
      std::vector<std::size_t> negated_atoms;
      for (std::size_t i = 0; i < disjunct->atoms.size(); ++i)
        if (disjunct->atoms[i].negated) negated_atoms.push_back(i);
      std::vector<std::vector<NegChoice>> neg_products{{}};
      for (std::size_t atom_idx : negated_atoms) {
        const RelAtom& atom = disjunct->atoms[atom_idx];
        std::size_t options = std::max<std::size_t>(atom.args.size(), 2);
        std::vector<std::vector<NegChoice>> next;
        for (const auto& partial : neg_products)
          for (std::size_t c = 0; c < options; ++c) {
            auto extended = partial;
            extended.push_back({atom_idx, c});
            next.push_back(std::move(extended));
          }
        neg_products = std::move(next);
      }

      std::vector<std::vector<CondLiteral>> query_cond_clauses =
          condition_dnf(disjunct->condition, true);

      for (const auto& neg_choice : neg_products)
        for (const auto& cond_clause : cond_clauses)
        for (const auto& query_cond_clause : query_cond_clauses) {
          std::vector<std::string> guard;
          auto conjoin = [&](const std::string& lit) {
            if (std::find(guard.begin(), guard.end(), lit) == guard.end())
              guard.push_back(lit);
          };

          conjoin("(= init_fl FALSE)");

          // ψ_pin: enough matching tokens per input place
          for (const Slot& slot : in_slots) {
            const auto& idx = slot.indexes;
            for (std::size_t a = 0; a < idx.size(); ++a)
              for (std::size_t b = a + 1; b < idx.size(); ++b)
                conjoin("(not (= " + idx[a] + " " + idx[b] + "))");
            for (std::size_t a = 0; a < idx.size(); ++a)
              for (std::size_t b = a + 1; b < idx.size(); ++b)
                for (const ArrayInfo* arr : slot.arrays)
                  conjoin("(= " + arr->name + "[" + idx[a] + "] " +
                          arr->name + "[" + idx[b] + "])");
            for (std::size_t l = 0; l < slot.arrays.size(); ++l)
              conjoin("(not (= " + slot.arrays[l]->name + "[" + idx[0] +
                      "] " + null_id(slot.arrays[l]->type) + "))");
            // repeated variables induce cross-cell equalities
            for (std::size_t l = 0; l < slot.arc->inscription.tuple.size();
                 ++l) {
              const InsTerm& term = slot.arc->inscription.tuple[l];
              if (term.kind != InsTerm::Kind::Var) continue;
              std::string cell =
                  slot.arrays[l]->name + "[" + idx[0] + "]";
              const std::string& rep = rep_cell.at(term.var);
              if (rep != cell) conjoin("(= " + cell + " " + rep + ")");
            }
          }

          // ψ_pout: all arrays of all places are null at every output index
          for (const Slot& slot : out_slots)
            for (const std::string& y : slot.indexes)
              for (const ArrayInfo& arr : arrays_)
                conjoin("(= " + arr.name + "[" + y + "] " +
                        null_id(arr.type) + ")");
          {
            std::vector<std::string> ys;
            for (const Slot& slot : out_slots)
              for (const std::string& y : slot.indexes) ys.push_back(y);
            for (std::size_t a = 0; a < ys.size(); ++a)
              for (std::size_t b = a + 1; b < ys.size(); ++b)
                conjoin("(not (= " + ys[a] + " " + ys[b] + "))");
          }

          // ψ_R: joins between input cells and catalog functions
          for (const RelAtom& atom : disjunct->atoms) {
            if (atom.negated || atom.args.empty()) continue;
            std::string key = render_term(atom.args[0]);
            const RelationSchema* rel = schema_->find(atom.relation);
            for (std::size_t i = 1; i < atom.args.size(); ++i) {
              const Term& arg = atom.args[i];
              if (!arg.is_var()) continue;
              auto cell = rep_cell.find(arg.var);
              if (cell == rep_cell.end()) continue;
              conjoin("(= (" + fn_id(atom.relation,
                                     rel->attributes[i].name) +
                      " " + key + ") " + cell->second + ")");
            }
          }

          // extended guard: eevar bindings, then the functional atoms
          for (const auto& [var, id] : eevar_id) {
            if (ta.fresh_vars.count(var)) continue;
            auto cell = rep_cell.find(var);
            if (cell != rep_cell.end()) {
              conjoin("(= " + id + " " + cell->second + ")");
            } else if (ta.out_vars.count(var)) {
              conjoin("(not (= " + id + " " +
                      null_id(var_types.at(var)) + "))");
            }
          }
          for (std::size_t atom_idx = 0; atom_idx < disjunct->atoms.size();
               ++atom_idx) {
            const RelAtom& atom = disjunct->atoms[atom_idx];
            const RelationSchema* rel = schema_->find(atom.relation);
            std::string key = render_term(atom.args[0]);
            std::string key_null = null_id(rel->attributes[0].type);
            if (!atom.negated) {
              conjoin("(not (= " + key + " " + key_null + "))");
              if (rel->key_only()) {
                conjoin("(= (" + fn_id(atom.relation, "") + " " + key +
                        ") TRUE)");
              } else {
                for (std::size_t i = 1; i < atom.args.size(); ++i)
                  conjoin("(= (" + fn_id(atom.relation,
                                         rel->attributes[i].name) +
                          " " + key + ") " + render_term(atom.args[i]) + ")");
              }
              continue;
            }
            // negated atom: one disjunct of the expansion per statement
            auto choice_it =
                std::find_if(neg_choice.begin(), neg_choice.end(),
                             [&](const NegChoice& c) {
                               return c.atom == atom_idx;
                             });
            const std::size_t choice = choice_it->choice;
            if (choice == 0) {
              conjoin("(= " + key + " " + key_null + ")");
            } else if (rel->key_only()) {
              conjoin("(not (= (" + fn_id(atom.relation, "") + " " + key +
                      ") TRUE))");
            } else {
              conjoin("(not (= (" + fn_id(atom.relation,
                                          rel->attributes[choice].name) +
                      " " + key + ") " + render_term(atom.args[choice]) +
                      "))");
            }
          }

          // φ: condition literals over input cells
          const auto render_cond_term = [&](const Term& term) -> std::string {
            if (!term.is_var()) return const_id(term.value);
            auto cell = rep_cell.find(term.var);
            if (cell == rep_cell.end())
              throw EncodeError("condition variable '" + term.var +
                                "' is not input-bound in '" + t.name + "'");
            return cell->second;
          };
          for (const CondLiteral& lit : cond_clause) {
            std::string eq = "(= " + render_cond_term(lit.lhs) + " " +
                             render_cond_term(lit.rhs) + ")";
            conjoin(lit.negated ? "(not " + eq + ")" : eq);
          }
          // conditions inside the query use the eevar rendering
          for (const CondLiteral& lit : query_cond_clause) {
            std::string eq = "(= " + render_term(lit.lhs) + " " +
                             render_term(lit.rhs) + ")";
            conjoin(lit.negated ? "(not " + eq + ")" : eq);
          }

          // distinct fresh values for distinct ν-variables of one type
          {
            std::vector<std::string> fresh(ta.fresh_vars.begin(),
                                           ta.fresh_vars.end());
            for (std::size_t a = 0; a < fresh.size(); ++a)
              for (std::size_t b = a + 1; b < fresh.size(); ++b)
                if (ta.out_vars.at(fresh[a]) == ta.out_vars.at(fresh[b]))
                  conjoin("(not (= " + eevar_id.at(fresh[a]) + " " +
                          eevar_id.at(fresh[b]) + "))");
          }

          Statement stmt;
          stmt.lines.push_back(":transition");
          if (!index_vars.empty()) {
            std::string vars;
            for (const std::string& v : index_vars) {
              if (!vars.empty()) vars += ",";
              vars += v;
            }
            stmt.lines.push_back(":var " + vars);
          }
          stmt.lines.push_back(":var j");
          for (const auto& [id, type] : eevars)
            stmt.lines.push_back(":eevar " + id + " " + type);
          {
            std::string g;
            for (const std::string& c : guard) {
              if (!g.empty()) g += " ";
              g += c;
            }
            stmt.lines.push_back(":guard " + g);
          }
          // :uguard — local freshness for each ν-variable
          for (const std::string& var : ta.fresh_vars) {
            const std::string& type = ta.out_vars.at(var);
            std::string u;
            for (const ArrayInfo& arr : arrays_) {
              if (arr.type != type) continue;
              if (!u.empty()) u += " ";
              u += "(not (= " + eevar_id.at(var) + " " + arr.name + "[j]))";
            }
            if (!u.empty()) stmt.lines.push_back(":uguard " + u);
          }

          // update: consumed tokens are nullified, produced tokens written
          std::size_t cases = 1;
          for (const Slot& s : in_slots) cases += s.indexes.size();
          for (const Slot& s : out_slots) cases += s.indexes.size();
          stmt.lines.push_back(":numcases " + std::to_string(cases));
          for (const Slot& slot : in_slots)
            for (const std::string& x : slot.indexes) {
              stmt.lines.push_back(":case (= j " + x + ")");
              for (const ArrayInfo& arr : arrays_) {
                if (arr.place == slot.arc->place)
                  stmt.lines.push_back(":val " + null_id(arr.type));
                else
                  stmt.lines.push_back(":val " + arr.name + "[j]");
              }
              stmt.lines.push_back(":val init_fl");
            }
          for (const Slot& slot : out_slots)
            for (const std::string& y : slot.indexes) {
              stmt.lines.push_back(":case (= j " + y + ")");
              for (const ArrayInfo& arr : arrays_) {
                if (arr.place != slot.arc->place) {
                  stmt.lines.push_back(":val " + arr.name + "[j]");
                  continue;
                }
                const InsTerm& term =
                    slot.arc->inscription.tuple[arr.component];
                std::string value;
                switch (term.kind) {
                  case InsTerm::Kind::Const:
                    value = const_id(term.value);
                    break;
                  case InsTerm::Kind::Fresh:
                    value = eevar_id.at(term.var);
                    break;
                  case InsTerm::Kind::Var: {
                    auto cell = rep_cell.find(term.var);
                    value = cell != rep_cell.end() ? cell->second
                                                   : eevar_id.at(term.var);
                    break;
                  }
                }
                stmt.lines.push_back(":val " + value);
              }
              stmt.lines.push_back(":val init_fl");
            }
          stmt.lines.push_back(":case");
          for (const ArrayInfo& arr : arrays_)
            stmt.lines.push_back(":val " + arr.name + "[j]");
          stmt.lines.push_back(":val init_fl");

          out.push_back(std::move(stmt));
        }
    }
    return out;
  }

  // ---- properties ----

  Statement property_statement(const TypedProperty& prop) const {
    // normalize the body into positive place atoms, positive relation atoms
    // and equality literals
    std::vector<const PlaceAtom*> place_atoms;
    std::vector<const RelAtom*> rel_atoms;
    std::vector<CondLiteral> literals;
    std::function<void(const PropExpr&, bool)> walk = [&](const PropExpr& e,
                                                          bool positive) {
      switch (e.kind) {
        case PropExpr::Kind::True:
          if (!positive)
            throw EncodeError("property encoding: negated ⊤ is unsatisfiable");
          return;
        case PropExpr::Kind::Place:
          if (!positive)
            throw EncodeError(
                "property encoding does not support negated place atom " +
                e.place_atom.str());
          place_atoms.push_back(&e.place_atom);
          return;
        case PropExpr::Kind::Rel:
          if (!positive || e.rel_atom.negated)
            throw EncodeError(
                "property encoding does not support negated relation atom " +
                e.rel_atom.str());
          rel_atoms.push_back(&e.rel_atom);
          return;
        case PropExpr::Kind::Eq:
          literals.push_back({e.lhs, e.rhs, !positive});
          return;
        case PropExpr::Kind::Not:
          walk(e.children.at(0), !positive);
          return;
        case PropExpr::Kind::And:
          if (!positive)
            throw EncodeError(
                "property encoding does not support disjunctive bodies");
          for (const auto& c : e.children) walk(c, positive);
          return;
      }
    };
    walk(prop.property.body, true);

    std::vector<std::string> conjuncts;
    auto conjoin = [&](const std::string& lit) {
      if (std::find(conjuncts.begin(), conjuncts.end(), lit) ==
          conjuncts.end())
        conjuncts.push_back(lit);
    };

    std::map<std::string, std::string> rep_cell;
    std::vector<std::string> index_vars;
    int next_z = 1;
    for (const PlaceAtom* atom : place_atoms) {
      auto arrays = arrays_of(atom->place);
      std::vector<std::string> indexes;
      for (std::uint64_t c = 0; c < atom->min_count; ++c) {
        std::string v = "z" + std::to_string(next_z++);
        if (ids_.taken(v))
          throw EncodeError("index variable '" + v +
                            "' collides with a declared identifier");
        indexes.push_back(std::move(v));
      }
      index_vars.insert(index_vars.end(), indexes.begin(), indexes.end());
      for (std::size_t a = 0; a < indexes.size(); ++a)
        for (std::size_t b = a + 1; b < indexes.size(); ++b)
          conjoin("(not (= " + indexes[a] + " " + indexes[b] + "))");
      for (const std::string& z : indexes) {
        for (const ArrayInfo* arr : arrays)
          conjoin("(not (= " + arr->name + "[" + z + "] " +
                  null_id(arr->type) + "))");
        for (std::size_t l = 0; l < atom->args.size(); ++l) {
          const Term& term = atom->args[l];
          std::string cell = arrays[l]->name + "[" + z + "]";
          if (!term.is_var()) {
            conjoin("(= " + cell + " " + const_id(term.value) + ")");
            continue;
          }
          auto [it, inserted] = rep_cell.emplace(term.var, cell);
          if (!inserted && it->second != cell)
            conjoin("(= " + cell + " " + it->second + ")");
        }
      }
    }

    const auto render = [&](const Term& term) -> std::string {
      if (!term.is_var()) return const_id(term.value);
      auto it = rep_cell.find(term.var);
      if (it == rep_cell.end())
        throw EncodeError("property variable '" + term.var +
                          "' does not occur in a place atom");
      return it->second;
    };
    for (const RelAtom* atom : rel_atoms) {
      const RelationSchema* rel = schema_ ? schema_->find(atom->relation)
                                          : nullptr;
      if (!rel)
        throw EncodeError("property atom uses unknown relation '" +
                          atom->relation + "'");
      std::string key = render(atom->args[0]);
      conjoin("(not (= " + key + " " + null_id(rel->attributes[0].type) +
              "))");
      if (rel->key_only()) {
        conjoin("(= (" + fn_id(atom->relation, "") + " " + key + ") TRUE)");
      } else {
        for (std::size_t i = 1; i < atom->args.size(); ++i)
          conjoin("(= (" + fn_id(atom->relation, rel->attributes[i].name) +
                  " " + key + ") " + render(atom->args[i]) + ")");
      }
    }
    for (const CondLiteral& lit : literals) {
      std::string eq =
          "(= " + render(lit.lhs) + " " + render(lit.rhs) + ")";
      conjoin(lit.negated ? "(not " + eq + ")" : eq);
    }

    Statement stmt;
    stmt.lines.push_back(":unsafe");
    if (!index_vars.empty()) {
      std::string vars;
      for (const std::string& v : index_vars) {
        if (!vars.empty()) vars += ",";
        vars += v;
      }
      stmt.lines.push_back(":var " + vars);
    }
    std::string body;
    for (const std::string& c : conjuncts) {
      if (!body.empty()) body += " ";
      body += c;
    }
    stmt.lines.push_back(":cnj " + body);
    return stmt;
  }

 private:
  const TypeDomain& types_;
  const CatalogSchema* schema_;
  const Net* net_;
  Ident ids_;
  std::map<std::string, std::string> type_ids_;
  std::map<std::string, std::string> null_ids_;
  std::map<std::string, std::map<std::string, std::string>> fn_ids_;
  std::map<Value, std::string> const_ids_;
  std::vector<ArrayInfo> arrays_;
};

std::set<Value> document_constants(const Net& net, const Marking& m0,
                                   const TypedProperty* prop) {
  std::set<Value> constants = net_constant_values(net);
  auto mv = m0.values();
  constants.insert(mv.begin(), mv.end());
  if (prop) prop->property.body.collect_constants(constants);
  return constants;
}

}  // namespace

Document encode(const Net& net, const Marking& m0, const TypedProperty& prop) {
  NetAnalysis analysis;
  {
    ValidationReport report = typecheck_net(net, analysis);
    if (!report.ok())
      throw EncodeError("cannot encode invalid net: " +
                        report.entries().front().message);
    ValidationReport marking_report = validate_marking(net, m0);
    if (!marking_report.ok())
      throw EncodeError("cannot encode invalid marking: " +
                        marking_report.entries().front().message);
  }

  static const CatalogSchema kEmptySchema;
  const CatalogSchema* schema = net.schema ? net.schema.get() : &kEmptySchema;
  std::set<Value> constants = document_constants(net, m0, &prop);

  Document doc;
  Encoder enc(net.types, schema, &net, constants);
  for (auto& s : enc.schema_statements(constants, &doc.diagnostics))
    doc.statements.push_back(std::move(s));
  for (auto& s : enc.places_statements()) doc.statements.push_back(std::move(s));
  for (auto& s : enc.initmarking_statements(m0))
    doc.statements.push_back(std::move(s));
  for (const Transition& t : net.transitions) {
    IndexBudget budget;
    auto stmts = enc.transition_statements(t, analysis.transitions.at(t.name),
                                           &budget, &doc.diagnostics);
    doc.budgets[t.name] = budget;
    for (auto& s : stmts) doc.statements.push_back(std::move(s));
  }
  doc.statements.push_back(enc.property_statement(prop));
  return doc;
}

std::vector<Statement> encode_schema(const TypeDomain& types,
                                     const CatalogSchema& schema,
                                     const std::set<Value>& constants,
                                     std::vector<Diagnostic>* diags) {
  Encoder enc(types, &schema, nullptr, constants);
  return enc.schema_statements(constants, diags);
}

std::vector<Statement> encode_places(const Net& net) {
  static const CatalogSchema kEmptySchema;
  Encoder enc(net.types, net.schema ? net.schema.get() : &kEmptySchema, &net,
              {});
  return enc.places_statements();
}

std::vector<Statement> encode_initial_marking(const Net& net,
                                              const Marking& m0) {
  static const CatalogSchema kEmptySchema;
  Encoder enc(net.types, net.schema ? net.schema.get() : &kEmptySchema, &net,
              document_constants(net, m0, nullptr));
  return enc.initmarking_statements(m0);
}

std::vector<Statement> encode_transition(const Net& net, const Transition& t,
                                         IndexBudget* budget,
                                         std::vector<Diagnostic>* diags) {
  NetAnalysis analysis;
  ValidationReport report = typecheck_net(net, analysis);
  if (!report.ok())
    throw EncodeError("cannot encode invalid net: " +
                      report.entries().front().message);
  static const CatalogSchema kEmptySchema;
  Encoder enc(net.types, net.schema ? net.schema.get() : &kEmptySchema, &net,
              net_constant_values(net));
  return enc.transition_statements(t, analysis.transitions.at(t.name), budget,
                                   diags);
}

Statement encode_property(const Net& net, const TypedProperty& prop) {
  static const CatalogSchema kEmptySchema;
  std::set<Value> constants;
  prop.property.body.collect_constants(constants);
  Encoder enc(net.types, net.schema ? net.schema.get() : &kEmptySchema, &net,
              constants);
  return enc.property_statement(prop);
}

// ---------------------------------------------------------------------------
// Structural check: declaration before use

namespace {

std::vector<std::string> tokenize_identifiers(const std::string& line) {
  std::vector<std::string> out;
  std::string current;
  for (char c : line) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      current.push_back(c);
      continue;
    }
    if (!current.empty()) {
      out.push_back(current);
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(current);
  return out;
}

bool is_number(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isdigit(c);
  });
}

}  // namespace

bool declaration_before_use(const Document& doc, std::string* offender) {
  std::set<std::string> global{"BOOLE", "not"};
  std::set<std::string> local;

  auto keyword = [](const std::string& line) -> std::string {
    auto space = line.find(' ');
    return line.substr(0, space == std::string::npos ? line.size() : space);
  };
  auto known = [&](const std::string& id) {
    return is_number(id) || global.count(id) || local.count(id);
  };
  auto check_uses = [&](const std::string& rest) -> const char* {
    for (const std::string& id : tokenize_identifiers(rest))
      if (!known(id)) return "unknown";
    return nullptr;
  };

  for (const Statement& stmt : doc.statements) {
    local.clear();
    for (const std::string& line : stmt.lines) {
      std::string kw = keyword(line);
      std::string rest = line.size() > kw.size() ? line.substr(kw.size() + 1)
                                                 : "";
      auto ids = tokenize_identifiers(rest);
      if (kw == ":smt") {
        // (define_type T) declares T and NULL_T; (define N ::T) declares N
        if (!ids.empty() && ids[0] == "define_type" && ids.size() >= 2) {
          global.insert(ids[1]);
          global.insert("NULL_" + ids[1]);
          continue;
        }
        if (!ids.empty() && ids[0] == "define" && ids.size() >= 2) {
          for (std::size_t i = 2; i < ids.size(); ++i)
            if (!known(ids[i])) {
              if (offender) *offender = ids[i] + " in '" + line + "'";
              return false;
            }
          global.insert(ids[1]);
          continue;
        }
      } else if (kw == ":local" || kw == ":global") {
        if (ids.size() >= 2 && !known(ids[1])) {
          if (offender) *offender = ids[1] + " in '" + line + "'";
          return false;
        }
        if (!ids.empty()) global.insert(ids[0]);
        continue;
      } else if (kw == ":var") {
        for (const std::string& id : ids) local.insert(id);
        continue;
      } else if (kw == ":eevar") {
        if (ids.size() >= 2 && !known(ids[1])) {
          if (offender) *offender = ids[1] + " in '" + line + "'";
          return false;
        }
        if (!ids.empty()) local.insert(ids[0]);
        continue;
      } else if (kw == ":db_driven" || kw == ":initial" ||
                 kw == ":transition" || kw == ":unsafe" || kw == ":numcases" ||
                 kw == ":comment") {
        continue;
      }
      if (check_uses(rest)) {
        for (const std::string& id : tokenize_identifiers(rest))
          if (!known(id)) {
            if (offender) *offender = id + " in '" + line + "'";
            return false;
          }
      }
    }
  }
  return true;
}

}  // namespace clognet::mcmt
