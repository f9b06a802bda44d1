#include <doctest.h>

#include "clognet/dsl.hpp"
#include "clognet/net.hpp"
#include "generators.hpp"
#include "helpers.hpp"
#include "oracle.hpp"

using namespace clognet;
using namespace testing_support;

namespace {

dsl::ProjectFile otd() {
  return load_fixture({"otd_catalog_small.clog", "order_to_delivery.clog"});
}

dsl::ProjectFile appendix() { return load_fixture({"appendix_net.clog"}); }

Value sym(const std::string& type, const std::string& name) {
  return Value::symbol(type, name);
}

}  // namespace

TEST_CASE("apply_substitution substitutes every variable occurrence") {
  // σ = {x -> T#1, y -> a} applied to {(x,y)^2, (x,b)}
  Binding sigma{{"x", Value::pool_value("T", 1)}, {"y", sym("U", "a")}};
  Inscription xy;
  xy.multiplicity = 2;
  xy.tuple = {InsTerm::make_var("x"), InsTerm::make_var("y")};
  Inscription xb;
  xb.tuple = {InsTerm::make_var("x"), InsTerm::make_const(sym("U", "b"))};

  Multiset<Tuple> result = apply_substitution(sigma, xy);
  result += apply_substitution(sigma, xb);

  Multiset<Tuple> expected;
  expected.add({Value::pool_value("T", 1), sym("U", "a")}, 2);
  expected.add({Value::pool_value("T", 1), sym("U", "b")}, 1);
  CHECK(result == expected);
}

TEST_CASE("apply_substitution keeps ground inscriptions and repeats values") {
  Inscription ground;
  ground.tuple = {InsTerm::make_const(sym("T", "a"))};
  CHECK(apply_substitution({}, ground) ==
        Multiset<Tuple>{Tuple{sym("T", "a")}});

  Inscription xx;
  xx.tuple = {InsTerm::make_var("x"), InsTerm::make_var("x")};
  Binding sigma{{"x", Value::pool_value("T", 1)}};
  Multiset<Tuple> expected;
  expected.add({Value::pool_value("T", 1), Value::pool_value("T", 1)});
  CHECK(apply_substitution(sigma, xx) == expected);

  CHECK_THROWS_AS(apply_substitution({}, xx), error);
}

TEST_CASE("the order-to-delivery net validates cleanly") {
  auto project = otd();
  CHECK(validate_net(project.net).ok());
  CHECK(validate_marking(project.net, project.initial_marking).ok());
}

TEST_CASE("guard condition (a): condition variables must be input-bound") {
  auto project = otd();
  Net net = project.net;
  Transition* move = nullptr;
  for (auto& t : net.transitions)
    if (t.name == "move") move = &t;
  REQUIRE(move);
  move->guard_condition = Condition::neq(Term::make_var("m", "Plate"),
                                         Term::make_var("ghost", "Plate"));
  auto report = validate_net(net);
  CHECK(report.has_code("guard-condition-a"));
}

TEST_CASE("guard condition (b): query must reach beyond input variables") {
  auto project = otd();
  Net net = project.net;
  for (auto& t : net.transitions)
    if (t.name == "pay") {
      // ProdCat(p) with p input-bound only
      ConjunctiveQuery cq;
      cq.atoms.push_back({"ProdCat", {Term::make_var("p")}, false});
      t.guard_query = UnionQuery::single(std::move(cq));
    }
  auto report = validate_net(net);
  CHECK(report.has_code("guard-condition-b"));
}

TEST_CASE("fresh variables are rejected on input arcs and finite types") {
  Net net;
  net.types.add({"T", {}});
  net.types.add({"F", {"one", "two"}});
  net.places.push_back({"p", {"T"}, {}});
  net.places.push_back({"q", {"F"}, {}});
  Transition t;
  t.name = "bad";
  Arc in;
  in.place = "p";
  in.inscription.tuple = {InsTerm::make_fresh("x")};
  t.inputs.push_back(in);
  Arc out;
  out.place = "q";
  out.inscription.tuple = {InsTerm::make_fresh("y")};
  t.outputs.push_back(out);
  net.transitions.push_back(t);
  auto report = validate_net(net);
  CHECK(report.has_code("fresh-on-input"));
  CHECK(report.has_code("fresh-finite-type"));
}

TEST_CASE("flow typing catches arity conflicts and dangling outputs") {
  Net net;
  net.types.add({"T", {}});
  net.types.add({"U", {}});
  net.places.push_back({"p", {"T"}, {}});
  net.places.push_back({"q", {"U"}, {}});
  Transition t;
  t.name = "bad";
  Arc in;
  in.place = "p";
  in.inscription.tuple = {InsTerm::make_var("x"), InsTerm::make_var("y")};
  t.inputs.push_back(in);
  Arc out;
  out.place = "q";
  out.inscription.tuple = {InsTerm::make_var("z")};
  t.outputs.push_back(out);
  net.transitions.push_back(t);
  auto report = validate_net(net);
  CHECK(report.has_code("inscription-arity"));
  CHECK(report.has_code("dangling-output-variable"));

  Net net2;
  net2.types.add({"T", {}});
  net2.types.add({"U", {}});
  net2.places.push_back({"p", {"T"}, {}});
  net2.places.push_back({"q", {"U"}, {}});
  Transition t2;
  t2.name = "conflict";
  Arc in1;
  in1.place = "p";
  in1.inscription.tuple = {InsTerm::make_var("x")};
  Arc in2;
  in2.place = "q";
  in2.inscription.tuple = {InsTerm::make_var("x")};
  t2.inputs = {in1, in2};
  net2.transitions.push_back(t2);
  CHECK(validate_net(net2).has_code("flow-typing"));
}

TEST_CASE("appendix net: exactly one canonical binding") {
  auto project = appendix();
  const Transition* t = project.net.find_transition("t");
  REQUIRE(t);
  auto bindings =
      enabled_bindings(project.net, project.initial_marking,
                       project.instance, *t, FreshPolicy::canonical());
  REQUIRE(bindings.size() == 1);
  Binding expected{{"x", sym("String", "a")},
                   {"y", Value::pool_value("String", 0)}};
  CHECK(bindings[0] == expected);
}

TEST_CASE("load is disabled when the order is not paid") {
  auto project = otd();
  Marking m;
  m.add("ready", {sym("ProdType", "veg"), Value::pool_value("Order", 0)});
  m.add("in_house", {sym("Plate", "pl1"), sym("TruckType", "fridge")});
  // order Order#0 is not in place paid
  const Transition* load = project.net.find_transition("load");
  REQUIRE(load);
  CHECK(enabled_bindings(project.net, m, project.instance, *load,
                         FreshPolicy::canonical())
            .empty());

  m.add("paid", {Value::pool_value("Order", 0)});
  auto bindings = enabled_bindings(project.net, m, project.instance, *load,
                                   FreshPolicy::canonical());
  REQUIRE(bindings.size() == 1);
  CHECK(bindings[0].at("t") == sym("TruckType", "fridge"));
}

TEST_CASE("add_item propagates the product type from the catalog") {
  auto project = otd();
  CatalogInstance cat;
  cat.schema = project.schema;
  cat.add_fact("ProdCat", {sym("ProdType", "veg")});
  Marking m;
  m.add("working", {Value::pool_value("Order", 0)});
  const Transition* add_item = project.net.find_transition("add_item");
  REQUIRE(add_item);
  auto bindings =
      enabled_bindings(project.net, m, cat, *add_item,
                       FreshPolicy::canonical());
  REQUIRE(bindings.size() == 1);
  Binding expected{{"o", Value::pool_value("Order", 0)},
                   {"p", sym("ProdType", "veg")}};
  CHECK(bindings[0] == expected);
}

TEST_CASE("firing the appendix net replaces the token") {
  auto project = appendix();
  const Transition* t = project.net.find_transition("t");
  Binding sigma{{"x", sym("String", "a")},
                {"y", Value::pool_value("String", 0)}};
  Marking after = fire(project.net, project.initial_marking, project.instance,
                       *t, sigma);
  Marking expected;
  expected.add("p", {Value::pool_value("String", 0)});
  CHECK(after == expected);

  // a binding with a non-fresh value must be rejected
  Binding stale{{"x", sym("String", "a")}, {"y", sym("String", "a")}};
  CHECK_THROWS_AS(fire(project.net, project.initial_marking, project.instance,
                       *t, stale),
                  error);
}

TEST_CASE("identity arcs cancel out") {
  Net net;
  net.types.add({"T", {}});
  net.places.push_back({"p", {"T"}, {}});
  Transition t;
  t.name = "noop";
  Arc arc;
  arc.place = "p";
  arc.inscription.tuple = {InsTerm::make_var("x")};
  t.inputs.push_back(arc);
  t.outputs.push_back(arc);
  net.transitions.push_back(t);
  Marking m;
  m.add("p", {Value::pool_value("T", 3)});
  CatalogInstance cat;
  cat.schema = std::make_shared<CatalogSchema>();
  Binding sigma{{"x", Value::pool_value("T", 3)}};
  CHECK(fire(net, m, cat, net.transitions[0], sigma) == m);
}

TEST_CASE("new_order adds exactly one fresh working token") {
  auto project = otd();
  const Transition* new_order = project.net.find_transition("new_order");
  auto bindings =
      enabled_bindings(project.net, project.initial_marking, project.instance,
                       *new_order, FreshPolicy::canonical());
  REQUIRE(bindings.size() == 1);
  CHECK(bindings[0].at("o") == Value::pool_value("Order", 0));
  Marking after = fire(project.net, project.initial_marking, project.instance,
                       *new_order, bindings[0]);
  Marking expected = project.initial_marking;
  expected.normalize();
  expected.add("working", {Value::pool_value("Order", 0)});
  CHECK(after == expected);
}

TEST_CASE("canonicalize_marking renames unprotected pool values") {
  Marking m;
  m.add("p", {Value::pool_value("String", 7)});
  Marking canonical = canonicalize_marking(m, {});
  Marking expected;
  expected.add("p", {Value::pool_value("String", 0)});
  CHECK(canonical == expected);

  // protected values (e.g. catalog values) stay put
  Marking m2;
  m2.add("p", {sym("String", "a")});
  m2.add("p", {Value::pool_value("String", 4)});
  std::set<Value> prot{Value::pool_value("String", 4)};
  Marking c2 = canonicalize_marking(m2, prot);
  Marking expected2;
  expected2.add("p", {sym("String", "a")});
  expected2.add("p", {Value::pool_value("String", 4)});
  CHECK(c2 == expected2);

  // renaming skips protected indices
  Marking m3;
  m3.add("p", {Value::pool_value("String", 9)});
  std::set<Value> prot3{Value::pool_value("String", 0)};
  Marking c3 = canonicalize_marking(m3, prot3);
  Marking expected3;
  expected3.add("p", {Value::pool_value("String", 1)});
  CHECK(c3 == expected3);
}

TEST_CASE("canonical forms are permutation-invariant and idempotent") {
  Rng rng(5);
  for (int round = 0; round < 200; ++round) {
    Marking m;
    int n = 1 + static_cast<int>(rng.below(4));
    for (int i = 0; i < n; ++i) {
      std::string place = rng.chance(0.5) ? "p" : "q";
      m.add(place, {Value::pool_value("T", rng.below(6)),
                    Value::pool_value("U", rng.below(4))});
    }
    std::set<Value> prot{Value::pool_value("T", 0)};

    // random type-respecting permutation of pool values fixing protected
    std::vector<int> perm_t{0, 1, 2, 3, 4, 5, 6, 7};
    std::vector<int> perm_u{0, 1, 2, 3, 4, 5, 6, 7};
    std::shuffle(perm_t.begin() + 1, perm_t.end(), rng.engine);  // fix T#0
    std::shuffle(perm_u.begin(), perm_u.end(), rng.engine);
    Marking permuted;
    for (const auto& [place, tokens] : m.places)
      for (const auto& [tuple, count] : tokens.entries())
        permuted.add(place,
                     {Value::pool_value("T", perm_t[tuple[0].pool]),
                      Value::pool_value("U", perm_u[tuple[1].pool])},
                     count);

    Marking c1 = canonicalize_marking(m, prot);
    Marking c2 = canonicalize_marking(permuted, prot);
    CHECK(c1 == c2);
    CHECK(canonicalize_marking(c1, prot) == c1);
  }
}

TEST_CASE("enabled_bindings under enumerate(3) equals brute force") {
  NetCorpus corpus;
  Rng rng(6);
  int checked = 0;
  for (int round = 0; round < 60; ++round) {
    Net net = corpus.random_net(rng);
    auto report = validate_net(net);
    REQUIRE_MESSAGE(report.ok(), "generator produced an invalid net: "
                                     << (report.entries().empty()
                                             ? ""
                                             : report.entries()[0].message));
    NetAnalysis analysis = analyze_net(net);
    CatalogInstance cat = corpus.random_catalog(rng);
    Marking m = corpus.random_marking(net, rng);
    for (const Transition& t : net.transitions) {
      auto fast = enabled_bindings(net, analysis, m, cat, t,
                                   FreshPolicy::enumerate(3));
      auto slow = oracle_enabled(net, analysis, m, cat, t, 3);
      REQUIRE_MESSAGE(fast == slow,
                      "transition " << t.name << " round " << round);
      ++checked;
      // firing arithmetic: |m'| - |m| = Σ out multiplicities - Σ in
      for (const Binding& sigma : fast) {
        Marking after = fire(net, analysis, m, cat, t, sigma, true);
        std::int64_t delta = 0;
        for (const Arc& a : t.outputs)
          delta += static_cast<std::int64_t>(a.inscription.multiplicity);
        for (const Arc& a : t.inputs)
          delta -= static_cast<std::int64_t>(a.inscription.multiplicity);
        CHECK(static_cast<std::int64_t>(after.total_tokens()) -
                  static_cast<std::int64_t>(m.total_tokens()) ==
              delta);
        // freshness: ν-values were absent from Val(m) ∪ Val(Cat)
        for (const auto& var :
             analysis.transitions.at(t.name).fresh_vars) {
          const Value& v = sigma.at(var);
          CHECK_FALSE(m.values().count(v));
          CHECK_FALSE(catalog_values(cat).count(v));
        }
      }
    }
  }
  CHECK(checked > 50);
}

TEST_CASE("input arcs demanding k copies need token multiplicity >= k") {
  Net net;
  net.types.add({"T", {}});
  net.places.push_back({"p", {"T"}, {}});
  net.places.push_back({"q", {"T"}, {}});
  Transition t;
  t.name = "pair";
  Arc in;
  in.place = "p";
  in.inscription.multiplicity = 2;
  in.inscription.tuple = {InsTerm::make_var("x")};
  t.inputs.push_back(in);
  Arc out;
  out.place = "q";
  out.inscription.tuple = {InsTerm::make_var("x")};
  t.outputs.push_back(out);
  net.transitions.push_back(t);
  CatalogInstance cat;
  cat.schema = std::make_shared<CatalogSchema>();

  Marking single;
  single.add("p", {Value::pool_value("T", 1)});
  CHECK(enabled_bindings(net, single, cat, net.transitions[0],
                         FreshPolicy::canonical())
            .empty());

  Marking twice;
  twice.add("p", {Value::pool_value("T", 1)}, 2);
  auto bindings = enabled_bindings(net, twice, cat, net.transitions[0],
                                   FreshPolicy::canonical());
  REQUIRE(bindings.size() == 1);
  Marking after = fire(net, twice, cat, net.transitions[0], bindings[0]);
  CHECK(after.tokens("p").empty());
  CHECK(after.tokens("q").size() == 1);
}
