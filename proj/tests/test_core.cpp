#include <doctest.h>

#include "clognet/core.hpp"
#include "helpers.hpp"

using namespace clognet;
using namespace testing_support;

namespace {

TypeDomain otd_types() {
  TypeDomain types;
  types.add({"CId", {}});
  types.add({"ProdType", {}});
  types.add({"TruckType", {}});
  return types;
}

RelationSchema rel(const std::string& name,
                   std::vector<Attribute> attrs,
                   std::vector<ForeignKey> fks = {}) {
  RelationSchema r;
  r.name = name;
  r.attributes = std::move(attrs);
  r.fks = std::move(fks);
  return r;
}

Value sym(const std::string& type, const std::string& name) {
  return Value::symbol(type, name);
}

}  // namespace

TEST_CASE("multiset laws hold on random multisets") {
  Rng rng(1);
  for (int round = 0; round < 200; ++round) {
    Multiset<int> s1, s2;
    for (int i = 0; i < 8; ++i) {
      if (rng.chance(0.6)) s1.add(static_cast<int>(rng.below(5)), rng.below(3) + 1);
      if (rng.chance(0.6)) s2.add(static_cast<int>(rng.below(5)), rng.below(3) + 1);
    }
    CHECK((s1 + s2) - s1 == s2);
    std::uint64_t k = rng.below(4);
    CHECK(s1.scaled(k).size() == k * s1.size());
    CHECK((s1 + s2).includes(s1));
  }
}

TEST_CASE("multiset subtraction underflow throws") {
  Multiset<int> a{1}, b{1, 1};
  CHECK_THROWS_AS(a -= b, error);
}

TEST_CASE("validate_schema accepts the order-to-delivery catalog schema") {
  CatalogSchema schema;
  schema.relations.push_back(rel("ProdCat", {{"p", "ProdType"}}));
  schema.relations.push_back(
      rel("Comp", {{"c", "CId"}, {"p", "ProdType"}, {"t", "TruckType"}}));
  CHECK(validate_schema(otd_types(), schema).ok());
}

TEST_CASE("validate_schema flags primary-key type clashes") {
  CatalogSchema schema;
  schema.relations.push_back(rel("R", {{"a", "CId"}}));
  schema.relations.push_back(rel("S", {{"b", "CId"}, {"p", "ProdType"}}));
  auto report = validate_schema(otd_types(), schema);
  CHECK(report.has_code("pk-type-clash"));
}

TEST_CASE("validate_schema flags foreign-key type mismatches") {
  CatalogSchema schema;
  schema.relations.push_back(rel("ProdCat", {{"p", "ProdType"}}));
  schema.relations.push_back(
      rel("Comp", {{"c", "CId"}, {"t", "TruckType"}}, {{1, "ProdCat"}}));
  auto report = validate_schema(otd_types(), schema);
  CHECK(report.has_code("fk-type-mismatch"));
}

TEST_CASE("validate_schema flags non-first keys and dangling fk targets") {
  CatalogSchema schema;
  RelationSchema r = rel("R", {{"a", "CId"}, {"b", "ProdType"}},
                         {{1, "Nowhere"}});
  r.pk_index = 1;
  schema.relations.push_back(std::move(r));
  auto report = validate_schema(otd_types(), schema);
  CHECK(report.has_code("pk-not-first"));
  CHECK(report.has_code("fk-dangling-target"));
}

TEST_CASE("validate_instance accepts legal catalogs and deduplicates") {
  auto schema = std::make_shared<CatalogSchema>();
  schema->relations.push_back(rel("ProdCat", {{"p", "ProdType"}}));
  CatalogInstance cat;
  cat.schema = schema;
  cat.add_fact("ProdCat", {sym("ProdType", "veg")});
  cat.add_fact("ProdCat", {sym("ProdType", "fur")});
  cat.add_fact("ProdCat", {sym("ProdType", "veg")});  // sets deduplicate
  CHECK(validate_instance(otd_types(), cat).ok());
  CHECK(cat.facts_of("ProdCat").size() == 2);
}

TEST_CASE("validate_instance flags dangling foreign keys") {
  auto schema = std::make_shared<CatalogSchema>();
  schema->relations.push_back(rel("ProdCat", {{"p", "ProdType"}}));
  schema->relations.push_back(
      rel("Comp", {{"c", "CId"}, {"p", "ProdType"}, {"t", "TruckType"}},
          {{1, "ProdCat"}}));
  CatalogInstance cat;
  cat.schema = schema;
  cat.add_fact("Comp", {sym("CId", "c1"), sym("ProdType", "meat"),
                        sym("TruckType", "fridge")});
  auto report = validate_instance(otd_types(), cat);
  CHECK(report.has_code("fk-dangling"));
}

TEST_CASE("validate_instance flags duplicate keys, arity and type errors") {
  auto schema = std::make_shared<CatalogSchema>();
  schema->relations.push_back(
      rel("Comp", {{"c", "CId"}, {"p", "ProdType"}, {"t", "TruckType"}}));
  CatalogInstance cat;
  cat.schema = schema;
  cat.add_fact("Comp", {sym("CId", "c1"), sym("ProdType", "veg"),
                        sym("TruckType", "fridge")});
  cat.add_fact("Comp", {sym("CId", "c1"), sym("ProdType", "fur"),
                        sym("TruckType", "flat")});
  cat.add_fact("Comp", {sym("CId", "c2"), sym("ProdType", "veg")});
  cat.add_fact("Comp", {sym("CId", "c3"), sym("TruckType", "flat"),
                        sym("TruckType", "flat")});
  auto report = validate_instance(otd_types(), cat);
  CHECK(report.has_code("pk-duplicate"));
  CHECK(report.has_code("fact-arity"));
  CHECK(report.has_code("fact-type"));
}

TEST_CASE("validate_instance agrees with a first-principles checker") {
  auto schema = std::make_shared<CatalogSchema>();
  schema->relations.push_back(rel("R", {{"a", "ProdType"}}));
  schema->relations.push_back(
      rel("S", {{"b", "CId"}, {"r", "ProdType"}}, {{1, "R"}}));
  std::vector<Value> prod{sym("ProdType", "v0"), sym("ProdType", "v1")};
  std::vector<Value> cid{sym("CId", "k0"), sym("CId", "k1")};

  Rng rng(2);
  TypeDomain types = otd_types();
  for (int round = 0; round < 300; ++round) {
    CatalogInstance cat;
    cat.schema = schema;
    for (int i = 0; i < 2; ++i)
      if (rng.chance(0.5)) cat.add_fact("R", {rng.pick(prod)});
    for (int i = 0; i < 2; ++i)
      if (rng.chance(0.5)) cat.add_fact("S", {rng.pick(cid), rng.pick(prod)});

    // first principles: keys unique per relation (sets already deduplicate
    // whole tuples, so scan first components), every S.r occurs as an R key
    bool ok = true;
    std::set<Value> r_keys, s_keys;
    for (const auto& t : cat.facts_of("R"))
      if (!r_keys.insert(t[0]).second) ok = false;
    for (const auto& t : cat.facts_of("S"))
      if (!s_keys.insert(t[0]).second) ok = false;
    for (const auto& t : cat.facts_of("S"))
      if (!r_keys.count(t[1])) ok = false;

    CHECK(validate_instance(types, cat).ok() == ok);
  }
}

TEST_CASE("active_domain collects exactly the values in facts") {
  auto schema = std::make_shared<CatalogSchema>();
  schema->relations.push_back(rel("ProdCat", {{"p", "ProdType"}}));
  schema->relations.push_back(
      rel("Comp", {{"c", "CId"}, {"p", "ProdType"}, {"t", "TruckType"}}));

  CatalogInstance empty;
  empty.schema = schema;
  for (const auto& [type, values] : active_domain(empty))
    CHECK(values.empty());

  CatalogInstance one;
  one.schema = schema;
  one.add_fact("ProdCat", {sym("ProdType", "veg")});
  auto dom = active_domain(one);
  CHECK(dom["ProdType"] == std::set<Value>{sym("ProdType", "veg")});
  CHECK(dom["CId"].empty());

  CatalogInstance comp;
  comp.schema = schema;
  comp.add_fact("Comp", {sym("CId", "c1"), sym("ProdType", "veg"),
                         sym("TruckType", "fridge")});
  dom = active_domain(comp);
  CHECK(dom["CId"] == std::set<Value>{sym("CId", "c1")});
  CHECK(dom["ProdType"] == std::set<Value>{sym("ProdType", "veg")});
  CHECK(dom["TruckType"] == std::set<Value>{sym("TruckType", "fridge")});

  // minimal closure: equals a one-line fold over all fact positions
  std::set<Value> flat;
  for (const auto& [_, facts] : comp.facts)
    for (const auto& t : facts) flat.insert(t.begin(), t.end());
  CHECK(catalog_values(comp) == flat);
}

TEST_CASE("fk_acyclic detects referential cycles") {
  CatalogSchema acyclic;
  acyclic.relations.push_back(rel("R", {{"a", "ProdType"}}));
  acyclic.relations.push_back(
      rel("S", {{"b", "CId"}, {"r", "ProdType"}}, {{1, "R"}}));
  CHECK(fk_acyclic(acyclic));

  CatalogSchema cyclic;
  cyclic.relations.push_back(
      rel("A", {{"a", "CId"}, {"b", "ProdType"}}, {{1, "B"}}));
  cyclic.relations.push_back(
      rel("B", {{"b", "ProdType"}, {"a", "CId"}}, {{1, "A"}}));
  std::vector<std::string> cycle;
  CHECK_FALSE(fk_acyclic(cyclic, &cycle));
  CHECK(cycle.size() >= 2);
}

TEST_CASE("values order and print deterministically") {
  Value a = Value::symbol("T", "a");
  Value p0 = Value::pool_value("T", 0);
  Value p7 = Value::pool_value("T", 7);
  CHECK(a.str() == "a");
  CHECK(p7.str() == "T#7");
  CHECK(p0 < p7);
  CHECK_FALSE(a == p0);
  CHECK_THROWS_AS(Value::pool_value("T", -1), error);
}
