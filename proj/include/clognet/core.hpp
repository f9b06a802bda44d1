#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace clognet {

/// Base error type for contract violations (unbound variables, firing a
/// disabled transition, ...). Expected user-level problems are reported
/// through ValidationReport instead.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Source locations

struct SourceSpan {
  std::string file;
  int line = 0;       // 1-based; 0 = unknown
  int column = 0;     // 1-based
  int end_line = 0;
  int end_column = 0;

  bool known() const { return line > 0; }
  std::string str() const;

  auto operator<=>(const SourceSpan&) const = default;
};

// ---------------------------------------------------------------------------
// Type domain

/// A data type: a name plus a value-domain descriptor. An empty enumeration
/// means the domain is an unbounded pool ("T#0", "T#1", ...) extended with
/// named constants; a non-empty enumeration lists the only legal symbols.
struct DataType {
  std::string name;
  std::vector<std::string> enumeration;

  bool unbounded() const { return enumeration.empty(); }
  auto operator<=>(const DataType&) const = default;
};

class TypeDomain {
 public:
  void add(DataType t);
  bool has(const std::string& name) const { return find(name) != nullptr; }
  const DataType* find(const std::string& name) const;
  const std::vector<DataType>& types() const { return types_; }

  auto operator<=>(const TypeDomain&) const = default;

 private:
  std::vector<DataType> types_;  // declaration order
};

// ---------------------------------------------------------------------------
// Values

/// A typed value: either a named symbol or an indexed pool value of an
/// unbounded domain. Two values are equal iff type and payload are equal;
/// symbols and pool values never collide.
struct Value {
  std::string type;
  std::string sym;          // set iff pool < 0
  std::int64_t pool = -1;   // >= 0 for pool values

  static Value symbol(std::string type, std::string name);
  static Value pool_value(std::string type, std::int64_t index);

  bool is_pool() const { return pool >= 0; }
  std::string str() const;  // "veg" or "Order#0"

  auto operator<=>(const Value&) const = default;
};

using Tuple = std::vector<Value>;

std::string tuple_str(const Tuple& t);

// ---------------------------------------------------------------------------
// Multisets

/// Finite multiset with the usual +, -, inclusion and scaling operations.
/// Zero counts are never stored.
template <typename T>
class Multiset {
 public:
  using Map = std::map<T, std::uint64_t>;

  Multiset() = default;
  Multiset(std::initializer_list<T> xs) {
    for (const T& x : xs) add(x);
  }

  void add(const T& x, std::uint64_t k = 1) {
    if (k == 0) return;
    entries_[x] += k;
  }

  std::uint64_t count(const T& x) const {
    auto it = entries_.find(x);
    return it == entries_.end() ? 0 : it->second;
  }

  std::uint64_t size() const {
    std::uint64_t n = 0;
    for (auto& [_, k] : entries_) n += k;
    return n;
  }

  bool empty() const { return entries_.empty(); }

  /// true iff other ⊆ this.
  bool includes(const Multiset& other) const {
    for (auto& [x, k] : other.entries_)
      if (count(x) < k) return false;
    return true;
  }

  Multiset& operator+=(const Multiset& other) {
    for (auto& [x, k] : other.entries_) entries_[x] += k;
    return *this;
  }

  /// Requires other ⊆ this.
  Multiset& operator-=(const Multiset& other) {
    for (auto& [x, k] : other.entries_) {
      auto it = entries_.find(x);
      if (it == entries_.end() || it->second < k)
        throw error("multiset subtraction underflow");
      it->second -= k;
      if (it->second == 0) entries_.erase(it);
    }
    return *this;
  }

  friend Multiset operator+(Multiset a, const Multiset& b) { return a += b; }
  friend Multiset operator-(Multiset a, const Multiset& b) { return a -= b; }

  Multiset scaled(std::uint64_t k) const {
    Multiset r;
    if (k == 0) return r;
    for (auto& [x, n] : entries_) r.entries_[x] = n * k;
    return r;
  }

  const Map& entries() const { return entries_; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  auto operator<=>(const Multiset&) const = default;
  bool operator==(const Multiset&) const = default;

 private:
  Map entries_;
};

// ---------------------------------------------------------------------------
// Catalog schema

struct Attribute {
  std::string name;
  std::string type;
  auto operator<=>(const Attribute&) const = default;
};

struct ForeignKey {
  std::size_t attr_index = 0;
  std::string target_relation;
  auto operator<=>(const ForeignKey&) const = default;
};

/// Relation schema; the first attribute is expected to be the primary key.
/// pk_index records what a source file actually marked so validation can
/// flag non-first keys.
struct RelationSchema {
  std::string name;
  std::vector<Attribute> attributes;
  std::size_t pk_index = 0;
  std::vector<ForeignKey> fks;
  std::optional<SourceSpan> span;

  std::size_t arity() const { return attributes.size(); }
  bool key_only() const { return attributes.size() == 1; }

  bool operator==(const RelationSchema& o) const {
    return name == o.name && attributes == o.attributes &&
           pk_index == o.pk_index && fks == o.fks;
  }
};

struct CatalogSchema {
  std::vector<RelationSchema> relations;

  const RelationSchema* find(const std::string& name) const;
  bool operator==(const CatalogSchema&) const = default;
};

// ---------------------------------------------------------------------------
// Catalog instance

/// Read-only catalog instance: per relation, a set of typed tuples.
/// Sets deduplicate; iteration order is deterministic.
struct CatalogInstance {
  std::shared_ptr<const CatalogSchema> schema;
  std::map<std::string, std::set<Tuple>> facts;

  void add_fact(const std::string& relation, Tuple t) {
    facts[relation].insert(std::move(t));
  }
  const std::set<Tuple>& facts_of(const std::string& relation) const;
  bool has_fact(const std::string& relation, const Tuple& t) const;
  std::uint64_t total_facts() const;

  bool operator==(const CatalogInstance& o) const { return facts == o.facts; }
};

// ---------------------------------------------------------------------------
// Validation

struct ValidationEntry {
  std::string code;
  std::string message;
  std::optional<SourceSpan> span;
};

class ValidationReport {
 public:
  void add(std::string code, std::string message,
           std::optional<SourceSpan> span = std::nullopt) {
    entries_.push_back({std::move(code), std::move(message), std::move(span)});
  }
  void merge(const ValidationReport& other) {
    entries_.insert(entries_.end(), other.entries_.begin(),
                    other.entries_.end());
  }
  bool ok() const { return entries_.empty(); }
  const std::vector<ValidationEntry>& entries() const { return entries_; }
  bool has_code(const std::string& code) const;

 private:
  std::vector<ValidationEntry> entries_;
};

/// Checks the catalog constraints: first attribute is the key, key types are
/// pairwise distinct across relations, foreign keys are well-typed and point
/// at existing relations. Violations are collected, never thrown.
ValidationReport validate_schema(const TypeDomain& types,
                                 const CatalogSchema& schema);

/// Checks facts against an already well-formed schema: arity, value types,
/// key uniqueness, referential integrity.
ValidationReport validate_instance(const TypeDomain& types,
                                   const CatalogInstance& cat);

/// Per-type sets of values occurring in any fact; the union is Val(Cat).
std::map<std::string, std::set<Value>> active_domain(
    const CatalogInstance& cat);

/// Flat view of active_domain.
std::set<Value> catalog_values(const CatalogInstance& cat);

/// True iff the foreign-key graph over relations has no cycle; the optional
/// receives one offending cycle as a relation-name path.
bool fk_acyclic(const CatalogSchema& schema,
                std::vector<std::string>* cycle = nullptr);

}  // namespace clognet
