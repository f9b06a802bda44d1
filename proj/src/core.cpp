#include "clognet/core.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace clognet {

std::string SourceSpan::str() const {
  if (!known()) return file.empty() ? "<unknown>" : file;
  std::ostringstream os;
  os << file << ":" << line << ":" << column;
  return os.str();
}

void TypeDomain::add(DataType t) {
  if (has(t.name)) throw error("duplicate type: " + t.name);
  types_.push_back(std::move(t));
}

const DataType* TypeDomain::find(const std::string& name) const {
  for (const auto& t : types_)
    if (t.name == name) return &t;
  return nullptr;
}

Value Value::symbol(std::string type, std::string name) {
  Value v;
  v.type = std::move(type);
  v.sym = std::move(name);
  return v;
}

Value Value::pool_value(std::string type, std::int64_t index) {
  if (index < 0) throw error("negative pool index");
  Value v;
  v.type = std::move(type);
  v.pool = index;
  return v;
}

std::string Value::str() const {
  if (is_pool()) return type + "#" + std::to_string(pool);
  return sym;
}

std::string tuple_str(const Tuple& t) {
  std::string s = "(";
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) s += ", ";
    s += t[i].str();
  }
  return s + ")";
}

const RelationSchema* CatalogSchema::find(const std::string& name) const {
  for (const auto& r : relations)
    if (r.name == name) return &r;
  return nullptr;
}

const std::set<Tuple>& CatalogInstance::facts_of(
    const std::string& relation) const {
  static const std::set<Tuple> kEmpty;
  auto it = facts.find(relation);
  return it == facts.end() ? kEmpty : it->second;
}

bool CatalogInstance::has_fact(const std::string& relation,
                               const Tuple& t) const {
  return facts_of(relation).count(t) > 0;
}

std::uint64_t CatalogInstance::total_facts() const {
  std::uint64_t n = 0;
  for (auto& [_, fs] : facts) n += fs.size();
  return n;
}

bool ValidationReport::has_code(const std::string& code) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const ValidationEntry& e) { return e.code == code; });
}

ValidationReport validate_schema(const TypeDomain& types,
                                 const CatalogSchema& schema) {
  ValidationReport report;
  std::map<std::string, std::string> pk_type_owner;  // pk type -> relation
  std::set<std::string> seen;

  for (const auto& rel : schema.relations) {
    if (!seen.insert(rel.name).second)
      report.add("duplicate-relation", "relation '" + rel.name +
                     "' is declared more than once", rel.span);
    if (rel.attributes.empty()) {
      report.add("empty-relation",
                 "relation '" + rel.name + "' has no attributes", rel.span);
      continue;
    }
    for (const auto& attr : rel.attributes)
      if (!types.has(attr.type))
        report.add("unknown-type", "relation '" + rel.name + "' attribute '" +
                       attr.name + "' uses unknown type '" + attr.type + "'",
                   rel.span);
    if (rel.pk_index != 0)
      report.add("pk-not-first",
                 "relation '" + rel.name + "' marks attribute '" +
                     rel.attributes[std::min(rel.pk_index,
                                             rel.attributes.size() - 1)]
                         .name +
                     "' as key; the first attribute must be the primary key",
                 rel.span);

    const std::string& pk_type = rel.attributes[0].type;
    auto [it, inserted] = pk_type_owner.emplace(pk_type, rel.name);
    if (!inserted)
      report.add("pk-type-clash",
                 "relations '" + it->second + "' and '" + rel.name +
                     "' both use primary-key type '" + pk_type + "'",
                 rel.span);

    for (const auto& fk : rel.fks) {
      if (fk.attr_index == 0) {
        report.add("fk-on-key", "relation '" + rel.name +
                       "' declares a foreign key on its own primary key",
                   rel.span);
        continue;
      }
      if (fk.attr_index >= rel.attributes.size()) {
        report.add("fk-bad-index", "relation '" + rel.name +
                       "' has a foreign key on a nonexistent attribute",
                   rel.span);
        continue;
      }
      const RelationSchema* target = schema.find(fk.target_relation);
      if (!target) {
        report.add("fk-dangling-target",
                   "relation '" + rel.name + "' has a foreign key to unknown "
                       "relation '" + fk.target_relation + "'",
                   rel.span);
        continue;
      }
      if (target->attributes.empty()) continue;  // reported above
      if (rel.attributes[fk.attr_index].type != target->attributes[0].type)
        report.add("fk-type-mismatch",
                   "foreign key " + rel.name + "." +
                       rel.attributes[fk.attr_index].name + " -> " +
                       fk.target_relation + " relates type '" +
                       rel.attributes[fk.attr_index].type +
                       "' to key type '" + target->attributes[0].type + "'",
                   rel.span);
    }
  }
  return report;
}

ValidationReport validate_instance(const TypeDomain& types,
                                   const CatalogInstance& cat) {
  ValidationReport report;
  if (!cat.schema) {
    report.add("no-schema", "catalog instance has no schema");
    return report;
  }
  for (const auto& [rel_name, tuples] : cat.facts) {
    const RelationSchema* rel = cat.schema->find(rel_name);
    if (!rel) {
      report.add("unknown-relation",
                 "facts given for unknown relation '" + rel_name + "'");
      continue;
    }
    std::set<Value> keys;
    for (const Tuple& t : tuples) {
      if (t.size() != rel->arity()) {
        report.add("fact-arity",
                   "fact " + rel_name + tuple_str(t) + " has arity " +
                       std::to_string(t.size()) + ", schema expects " +
                       std::to_string(rel->arity()));
        continue;
      }
      bool typed = true;
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i].type != rel->attributes[i].type) {
          report.add("fact-type",
                     "fact " + rel_name + tuple_str(t) + " position " +
                         std::to_string(i + 1) + " has type '" + t[i].type +
                         "', schema expects '" + rel->attributes[i].type +
                         "'");
          typed = false;
          continue;
        }
        const DataType* dt = types.find(t[i].type);
        if (dt && !dt->unbounded() && !t[i].is_pool() &&
            std::find(dt->enumeration.begin(), dt->enumeration.end(),
                      t[i].sym) == dt->enumeration.end())
          report.add("fact-value", "value '" + t[i].str() +
                         "' is not in the enumeration of type '" + t[i].type +
                         "'");
        if (dt && !dt->unbounded() && t[i].is_pool())
          report.add("fact-value", "pool value '" + t[i].str() +
                         "' used for finite type '" + t[i].type + "'");
      }
      if (!typed || t.empty()) continue;
      if (!keys.insert(t[0]).second)
        report.add("pk-duplicate", "relation '" + rel_name +
                       "' has two facts with key " + t[0].str());
    }

    for (const auto& fk : rel->fks) {
      if (fk.attr_index >= rel->arity()) continue;
      const auto& target_facts = cat.facts_of(fk.target_relation);
      for (const Tuple& t : tuples) {
        if (t.size() != rel->arity()) continue;
        const Value& v = t[fk.attr_index];
        bool found = false;
        for (const Tuple& tt : target_facts)
          if (!tt.empty() && tt[0] == v) {
            found = true;
            break;
          }
        if (!found)
          report.add("fk-dangling",
                     "fact " + rel_name + tuple_str(t) + " references " +
                         fk.target_relation + " key " + v.str() +
                         ", which does not exist");
      }
    }
  }
  return report;
}

std::map<std::string, std::set<Value>> active_domain(
    const CatalogInstance& cat) {
  std::map<std::string, std::set<Value>> dom;
  if (cat.schema)
    for (const auto& rel : cat.schema->relations)
      for (const auto& attr : rel.attributes) dom[attr.type];  // ensure keys
  for (const auto& [_, tuples] : cat.facts)
    for (const Tuple& t : tuples)
      for (const Value& v : t) dom[v.type].insert(v);
  return dom;
}

std::set<Value> catalog_values(const CatalogInstance& cat) {
  std::set<Value> vals;
  for (const auto& [_, tuples] : cat.facts)
    for (const Tuple& t : tuples)
      for (const Value& v : t) vals.insert(v);
  return vals;
}

bool fk_acyclic(const CatalogSchema& schema, std::vector<std::string>* cycle) {
  // colors: 0 unvisited, 1 on stack, 2 done
  std::map<std::string, int> color;
  std::vector<std::string> stack;

  std::function<bool(const std::string&)> visit =
      [&](const std::string& name) -> bool {
    color[name] = 1;
    stack.push_back(name);
    const RelationSchema* rel = schema.find(name);
    if (rel)
      for (const auto& fk : rel->fks) {
        int c = color.count(fk.target_relation) ? color[fk.target_relation]
                                                : 0;
        if (c == 1) {
          if (cycle) {
            auto it = std::find(stack.begin(), stack.end(),
                                fk.target_relation);
            cycle->assign(it, stack.end());
            cycle->push_back(fk.target_relation);
          }
          return false;
        }
        if (c == 0 && !visit(fk.target_relation)) return false;
      }
    stack.pop_back();
    color[name] = 2;
    return true;
  };

  for (const auto& rel : schema.relations)
    if (!color.count(rel.name) || color[rel.name] == 0)
      if (!visit(rel.name)) return false;
  return true;
}

}  // namespace clognet
