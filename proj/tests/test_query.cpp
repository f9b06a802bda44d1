#include <doctest.h>

#include "clognet/query.hpp"
#include "generators.hpp"
#include "helpers.hpp"
#include "oracle.hpp"

using namespace clognet;
using namespace testing_support;

namespace {

// Example 1 shape: ProdCat(p: ProdType), Comp(c: CId, p: ProdType, t: TruckType)
struct OtdQueries {
  TypeDomain types;
  std::shared_ptr<CatalogSchema> schema;

  OtdQueries() {
    types.add({"CId", {}});
    types.add({"ProdType", {}});
    types.add({"TruckType", {}});
    types.add({"Plate", {}});
    schema = std::make_shared<CatalogSchema>();
    RelationSchema prodcat;
    prodcat.name = "ProdCat";
    prodcat.attributes = {{"p", "ProdType"}};
    schema->relations.push_back(prodcat);
    RelationSchema comp;
    comp.name = "Comp";
    comp.attributes = {{"c", "CId"}, {"p", "ProdType"}, {"t", "TruckType"}};
    schema->relations.push_back(comp);
  }

  CatalogInstance catalog(std::initializer_list<const char*> prods,
                          std::initializer_list<std::array<const char*, 3>>
                              comps = {}) const {
    CatalogInstance cat;
    cat.schema = schema;
    for (const char* p : prods)
      cat.add_fact("ProdCat", {Value::symbol("ProdType", p)});
    for (const auto& [c, p, t] : comps)
      cat.add_fact("Comp", {Value::symbol("CId", c),
                            Value::symbol("ProdType", p),
                            Value::symbol("TruckType", t)});
    return cat;
  }
};

Substitution sub(std::initializer_list<std::pair<const char*, Value>> xs) {
  Substitution s;
  for (const auto& [k, v] : xs) s.emplace(k, v);
  return s;
}

}  // namespace

TEST_CASE("typecheck resolves free variables from attribute positions") {
  OtdQueries env;
  ConjunctiveQuery cq;
  cq.atoms.push_back({"ProdCat", {Term::make_var("p")}, false});
  ValidationReport report;
  auto typed = typecheck_query(env.types, *env.schema,
                               UnionQuery::single(cq), {}, report);
  REQUIRE(typed.has_value());
  CHECK(typed->free_vars ==
        std::map<std::string, std::string>{{"p", "ProdType"}});
}

TEST_CASE("typecheck of exists c. Comp(c, v, t)") {
  OtdQueries env;
  ConjunctiveQuery cq;
  cq.exist_vars.push_back(Term::make_var("c"));
  cq.atoms.push_back({"Comp",
                      {Term::make_var("c"), Term::make_var("v"),
                       Term::make_var("t")},
                      false});
  ValidationReport report;
  auto typed = typecheck_query(env.types, *env.schema,
                               UnionQuery::single(cq), {}, report);
  REQUIRE(typed.has_value());
  CHECK(typed->free_vars ==
        std::map<std::string, std::string>{{"v", "ProdType"},
                                           {"t", "TruckType"}});
}

TEST_CASE("typecheck flags a variable whose bound type mismatches the atom") {
  OtdQueries env;
  ConjunctiveQuery cq;
  cq.atoms.push_back({"ProdCat", {Term::make_var("m")}, false});
  ValidationReport report;
  auto typed = typecheck_query(env.types, *env.schema,
                               UnionQuery::single(cq), {{"m", "Plate"}},
                               report);
  CHECK_FALSE(typed.has_value());
  CHECK(report.has_code("type-mismatch"));
}

TEST_CASE("typecheck flags arity errors, unknown relations, unused exists") {
  OtdQueries env;
  ConjunctiveQuery cq;
  cq.exist_vars.push_back(Term::make_var("z"));
  cq.atoms.push_back({"ProdCat",
                      {Term::make_var("p"), Term::make_var("q")},
                      false});
  cq.atoms.push_back({"Nope", {Term::make_var("p")}, false});
  ValidationReport report;
  auto typed = typecheck_query(env.types, *env.schema,
                               UnionQuery::single(cq), {}, report);
  CHECK_FALSE(typed.has_value());
  CHECK(report.has_code("atom-arity"));
  CHECK(report.has_code("unknown-relation"));
  CHECK(report.has_code("unused-quantifier"));
}

TEST_CASE("evaluate ProdCat(p) over a two-product catalog") {
  OtdQueries env;
  auto cat = env.catalog({"veg", "fur"});
  ConjunctiveQuery cq;
  cq.atoms.push_back({"ProdCat", {Term::make_var("p")}, false});
  ValidationReport report;
  auto typed = typecheck_query(env.types, *env.schema,
                               UnionQuery::single(cq), {}, report);
  REQUIRE(typed.has_value());
  auto answers = evaluate_query(*typed, cat);
  std::set<Substitution> expected{
      sub({{"p", Value::symbol("ProdType", "veg")}}),
      sub({{"p", Value::symbol("ProdType", "fur")}})};
  CHECK(answers == expected);
  CHECK(answers == oracle_answers(*typed, cat));
}

TEST_CASE("evaluate exists c. Comp(c, veg, t)") {
  OtdQueries env;
  auto cat = env.catalog({}, {{{"c1", "veg", "fridge"}},
                              {{"c2", "fur", "flat"}}});
  ConjunctiveQuery cq;
  cq.exist_vars.push_back(Term::make_var("c"));
  cq.atoms.push_back({"Comp",
                      {Term::make_var("c"),
                       Term::make_const(Value::symbol("ProdType", "veg")),
                       Term::make_var("t")},
                      false});
  ValidationReport report;
  auto typed = typecheck_query(env.types, *env.schema,
                               UnionQuery::single(cq), {}, report);
  REQUIRE(typed.has_value());
  auto answers = evaluate_query(*typed, cat);
  std::set<Substitution> expected{
      sub({{"t", Value::symbol("TruckType", "fridge")}})};
  CHECK(answers == expected);
  CHECK(answers == oracle_answers(*typed, cat));
}

TEST_CASE("negated atoms range over the active domain") {
  OtdQueries env;
  auto cat = env.catalog({"veg"}, {{{"c1", "veg", "fridge"}}});
  ConjunctiveQuery cq;
  cq.atoms.push_back({"ProdCat", {Term::make_var("p")}, true});
  ValidationReport report;
  auto typed = typecheck_query(env.types, *env.schema,
                               UnionQuery::single(cq), {}, report);
  REQUIRE(typed.has_value());
  // the only ProdType value in Val(Cat) is veg, which is in ProdCat
  CHECK(evaluate_query(*typed, cat).empty());
  CHECK(oracle_answers(*typed, cat).empty());
}

TEST_CASE("boolean queries answer true/false as {()} or {}") {
  OtdQueries env;
  auto cat = env.catalog({"veg"});
  ConjunctiveQuery cq;
  cq.exist_vars.push_back(Term::make_var("p"));
  cq.atoms.push_back({"ProdCat", {Term::make_var("p")}, false});
  ValidationReport report;
  auto typed = typecheck_query(env.types, *env.schema,
                               UnionQuery::single(cq), {}, report);
  REQUIRE(typed.has_value());
  CHECK(evaluate_query(*typed, cat) == std::set<Substitution>{{}});
  CHECK(evaluate_query(*typed, env.catalog({})).empty());
}

TEST_CASE("evaluate_condition on the spec examples") {
  CHECK(evaluate_condition(Condition::truth(), {}));
  Value a = Value::symbol("T", "a");
  Condition x_eq_a =
      Condition::eq(Term::make_var("x", "T"),
                    Term::make_const(a));
  CHECK(evaluate_condition(x_eq_a, sub({{"x", a}})));
  Condition x_neq_y = Condition::neq(Term::make_var("x", "T"),
                                     Term::make_var("y", "T"));
  CHECK_FALSE(evaluate_condition(x_neq_y, sub({{"x", a}, {"y", a}})));
  CHECK_THROWS_AS(evaluate_condition(x_eq_a, {}), error);
}

TEST_CASE("generated queries match the brute-force oracle") {
  QueryCorpus corpus;
  Rng rng(3);
  for (int round = 0; round < 300; ++round) {
    CatalogInstance cat = corpus.random_catalog(rng);
    UnionQuery q = corpus.random_query(rng);
    ValidationReport report;
    auto typed = typecheck_query(corpus.types, *corpus.schema, q, {}, report);
    REQUIRE_MESSAGE(typed.has_value(), "generator produced an untypable query");
    auto fast = evaluate_query(*typed, cat);
    auto slow = oracle_answers(*typed, cat);
    REQUIRE_MESSAGE(fast == slow, "mismatch at round " << round);
    // answers only mention values from Val(Cat)
    auto domain = catalog_values(cat);
    for (const auto& answer : fast)
      for (const auto& [var, value] : answer) CHECK(domain.count(value));
  }
}

TEST_CASE("positive queries are monotone under fact addition") {
  QueryCorpus corpus;
  Rng rng(4);
  for (int round = 0; round < 150; ++round) {
    CatalogInstance cat = corpus.random_catalog(rng);
    UnionQuery q = corpus.random_query(rng);
    bool positive = true;
    for (auto& d : q.disjuncts) {
      for (auto& a : d.atoms) a.negated = false;
      d.condition = Condition::truth();
      (void)d;
    }
    ValidationReport report;
    auto typed = typecheck_query(corpus.types, *corpus.schema, q, {}, report);
    REQUIRE(typed.has_value());
    auto before = evaluate_query(*typed, cat);

    CatalogInstance larger = cat;
    larger.add_fact("S", {corpus.b_values[rng.below(2)]});
    Value new_key = Value::pool_value("A", 5);
    larger.add_fact("R", {new_key, corpus.b_values[rng.below(2)]});
    auto after = evaluate_query(*typed, larger);
    if (positive)
      for (const auto& answer : before) CHECK(after.count(answer));
  }
}

TEST_CASE("substitute_free narrows the free variables") {
  OtdQueries env;
  ConjunctiveQuery cq;
  cq.exist_vars.push_back(Term::make_var("c"));
  cq.atoms.push_back({"Comp",
                      {Term::make_var("c"), Term::make_var("v"),
                       Term::make_var("t")},
                      false});
  ValidationReport report;
  auto typed = typecheck_query(env.types, *env.schema,
                               UnionQuery::single(cq), {}, report);
  REQUIRE(typed.has_value());
  auto grounded = substitute_free(
      *typed, sub({{"v", Value::symbol("ProdType", "veg")}}));
  CHECK(grounded.free_vars ==
        std::map<std::string, std::string>{{"t", "TruckType"}});
  auto cat = env.catalog({}, {{{"c1", "veg", "fridge"}}});
  CHECK(evaluate_query(grounded, cat) ==
        std::set<Substitution>{
            sub({{"t", Value::symbol("TruckType", "fridge")}})});
}
