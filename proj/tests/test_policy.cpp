/*
 * Copyright 2026 The StreamGate Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <random>
#include <thread>

#include "streamgate/errors.hpp"
#include "streamgate/policy.hpp"
#include "support/generators.hpp"

using namespace streamgate;

namespace {

Schema weather() {
  return Schema{"weather",
                {{"samplingtime", FieldType::Timestamp},
                 {"temperature", FieldType::Double},
                 {"humidity", FieldType::Double},
                 {"rainrate", FieldType::Double},
                 {"windspeed", FieldType::Double},
                 {"winddirection", FieldType::Int},
                 {"barometer", FieldType::Double}}};
}

// The NEA/LTA weather-sharing policy: visible attributes, window shape and
// the rain-rate trigger, expressed in the obligations block.
const char* kWeatherPolicy = R"(
<Policy PolicyId="nea-weather-lta" Effect="Permit">
  <Target>
    <Subjects>
      <Subject AttributeId="org" Value="LTA"/>
    </Subjects>
    <Resources>
      <Resource Value="weather"/>
    </Resources>
    <Actions>
      <Action Value="read"/>
    </Actions>
  </Target>
  <Obligations>
    <Obligation ObligationId="exacml:obligation:stream-filter" FulfillOn="Permit">
      <AttributeAssignment AttributeId="pCloud:obligation:stream-filter-condition-id"
        DataType="http://www.w3.org/2001/XMLSchema#string">rainrate &gt; 5</AttributeAssignment>
    </Obligation>
    <Obligation ObligationId="exacml:obligation:stream-map" FulfillOn="Permit">
      <AttributeAssignment AttributeId="pCloud:obligation:stream-map-attribute-id"
        DataType="http://www.w3.org/2001/XMLSchema#string">samplingtime</AttributeAssignment>
      <AttributeAssignment AttributeId="pCloud:obligation:stream-map-attribute-id"
        DataType="http://www.w3.org/2001/XMLSchema#string">rainrate</AttributeAssignment>
      <AttributeAssignment AttributeId="pCloud:obligation:stream-map-attribute-id"
        DataType="http://www.w3.org/2001/XMLSchema#string">windspeed</AttributeAssignment>
    </Obligation>
    <Obligation ObligationId="exacml:obligation:stream-window" FulfillOn="Permit">
      <AttributeAssignment AttributeId="pCloud:obligation:stream-window-step-id"
        DataType="http://www.w3.org/2001/XMLSchema#integer">2</AttributeAssignment>
      <AttributeAssignment AttributeId="pCloud:obligation:stream-window-size-id"
        DataType="http://www.w3.org/2001/XMLSchema#integer">5</AttributeAssignment>
      <AttributeAssignment AttributeId="pCloud:obligation:stream-window-type-id"
        DataType="http://www.w3.org/2001/XMLSchema#string">tuple</AttributeAssignment>
      <AttributeAssignment AttributeId="pCloud:obligation:stream-window-attr-id"
        DataType="http://www.w3.org/2001/XMLSchema#string">samplingtime:lastval</AttributeAssignment>
      <AttributeAssignment AttributeId="pCloud:obligation:stream-window-attr-id"
        DataType="http://www.w3.org/2001/XMLSchema#string">rainrate:avg</AttributeAssignment>
      <AttributeAssignment AttributeId="pCloud:obligation:stream-window-attr-id"
        DataType="http://www.w3.org/2001/XMLSchema#string">windspeed:max</AttributeAssignment>
    </Obligation>
  </Obligations>
</Policy>
)";

const char* kUserQuery = R"(
<UserQuery>
  <Stream name="weather"/>
  <Filter>
    <FilterCondition>RainRate &gt; 50</FilterCondition>
  </Filter>
  <Map>
    <Attribute>RainRate</Attribute>
  </Map>
  <Aggregation>
    <WindowType>tuple</WindowType>
    <WindowSize>10</WindowSize>
    <WindowStep>2</WindowStep>
    <Attribute>avg(RainRate)</Attribute>
  </Aggregation>
</UserQuery>
)";

AccessRequest lta_request() {
  AccessRequest r;
  r.credentials.attributes = {{"org", "LTA"}};
  r.resource = "weather";
  r.action = "read";
  return r;
}

PolicyStore make_store() {
  static Schema schema = weather();
  return PolicyStore([](const std::string& name) -> const Schema* {
    return name == "weather" ? &schema : nullptr;
  });
}

}  // namespace

// ---------------------------------------------------------------------------
// Documents
// ---------------------------------------------------------------------------

TEST_CASE("policy document parses with target, effect and obligations") {
  Policy p = parse_policy_document(kWeatherPolicy);
  CHECK(p.id == "nea-weather-lta");
  CHECK(p.effect == Effect::Permit);
  CHECK(p.target.resource == "weather");
  CHECK(p.target.action == "read");
  REQUIRE(p.target.subjects.size() == 1);
  CHECK(p.target.subjects[0] == SubjectAttribute{"org", "LTA"});
  REQUIRE(p.obligations.size() == 3);
  CHECK(p.obligations[0].kind == ObligationKind::Filter);
  CHECK(p.obligations[1].kind == ObligationKind::Map);
  CHECK(p.obligations[2].kind == ObligationKind::Window);
}

TEST_CASE("obligations compile to the documented graph") {
  Policy p = parse_policy_document(kWeatherPolicy);
  QueryGraph g = obligations_to_graph(p.obligations, weather());
  CHECK(to_string(g.filter->condition) == "rainrate > 5");
  CHECK(g.map->attributes == std::vector<std::string>{"rainrate", "samplingtime", "windspeed"});
  REQUIRE(g.window);
  CHECK(g.window->type == WindowType::Tuple);
  CHECK(g.window->size == 5);
  CHECK(g.window->step == 2);
  CHECK(g.window->aggs == std::vector<AggSpec>{{"samplingtime", AggFn::LastVal},
                                               {"rainrate", AggFn::Avg},
                                               {"windspeed", AggFn::Max}});
}

TEST_CASE("both obligation-id spellings are accepted") {
  std::string doc = kWeatherPolicy;
  auto replace = [&doc](const std::string& from, const std::string& to) {
    doc.replace(doc.find(from), from.size(), to);
  };
  replace("exacml:obligation:stream-filter\"", "exacml:obligation:stream-filtering\"");
  replace("exacml:obligation:stream-map\"", "exacml:obligation:stream-mapping\"");
  replace("exacml:obligation:stream-window\"", "exacml:obligation:stream-window-aggregation\"");
  Policy p = parse_policy_document(doc);
  REQUIRE(p.obligations.size() == 3);
  CHECK(p.obligations[0].kind == ObligationKind::Filter);
  CHECK(p.obligations[1].kind == ObligationKind::Map);
  CHECK(p.obligations[2].kind == ObligationKind::Window);
  // exacml: assignment prefixes work like the pCloud: ones.
  std::string doc2 = kWeatherPolicy;
  std::size_t pos = 0;
  while ((pos = doc2.find("pCloud:", pos)) != std::string::npos) doc2.replace(pos, 7, "exacml:");
  CHECK_NOTHROW(obligations_to_graph(parse_policy_document(doc2).obligations, weather()));
}

TEST_CASE("malformed documents are rejected") {
  CHECK_THROWS_AS(parse_policy_document("<Policy"), ParseError);
  CHECK_THROWS_AS(parse_policy_document("<NotAPolicy/>"), ParseError);
  CHECK_THROWS_AS(parse_policy_document("<Policy PolicyId=\"x\"><Target><Resources/>"
                                        "</Target></Policy>"),
                  ValidationError);
}

TEST_CASE("obligation validation errors") {
  // Window obligation missing its size assignment.
  const char* missing_size = R"(
<Policy PolicyId="p" Effect="Permit">
  <Target><Resources><Resource Value="weather"/></Resources>
    <Actions><Action Value="read"/></Actions></Target>
  <Obligations>
    <Obligation ObligationId="exacml:obligation:stream-window" FulfillOn="Permit">
      <AttributeAssignment AttributeId="pCloud:obligation:stream-window-step-id"
        DataType="http://www.w3.org/2001/XMLSchema#integer">2</AttributeAssignment>
      <AttributeAssignment AttributeId="pCloud:obligation:stream-window-type-id"
        DataType="http://www.w3.org/2001/XMLSchema#string">tuple</AttributeAssignment>
      <AttributeAssignment AttributeId="pCloud:obligation:stream-window-attr-id"
        DataType="http://www.w3.org/2001/XMLSchema#string">rainrate:avg</AttributeAssignment>
    </Obligation>
  </Obligations>
</Policy>)";
  Policy p = parse_policy_document(missing_size);
  CHECK_THROWS_WITH_AS(obligations_to_graph(p.obligations, weather()),
                       "window obligation missing size assignment", ValidationError);

  // Unknown aggregate function.
  Policy q = parse_policy_document(kWeatherPolicy);
  q.obligations[2].assignments.back().value = "windspeed:median";
  CHECK_THROWS_AS(obligations_to_graph(q.obligations, weather()), ValidationError);

  // Attribute outside the schema.
  Policy r = parse_policy_document(kWeatherPolicy);
  r.obligations[1].assignments[0].value = "pressure";
  CHECK_THROWS_AS(obligations_to_graph(r.obligations, weather()), ValidationError);
}

TEST_CASE("empty obligation list compiles to the identity graph") {
  QueryGraph g = obligations_to_graph({}, weather());
  CHECK(g.empty());
  CHECK(g.source == "weather");
}

TEST_CASE("user query document parses with case-insensitive attributes") {
  QueryGraph g = parse_user_query(kUserQuery, weather());
  CHECK(g.source == "weather");
  CHECK(to_string(g.filter->condition) == "rainrate > 50");
  CHECK(g.map->attributes == std::vector<std::string>{"rainrate"});
  REQUIRE(g.window);
  CHECK(g.window->size == 10);
  CHECK(g.window->step == 2);
  CHECK(g.window->aggs == std::vector<AggSpec>{{"rainrate", AggFn::Avg}});
}

TEST_CASE("stream-only user query is the identity graph") {
  QueryGraph g = parse_user_query("<UserQuery><Stream name=\"weather\"/></UserQuery>", weather());
  CHECK(g.empty());
}

TEST_CASE("user query validation failures") {
  CHECK_THROWS_AS(parse_user_query("<UserQuery/>", weather()), ParseError);
  CHECK_THROWS_AS(parse_user_query("<UserQuery><Stream name=\"other\"/></UserQuery>", weather()),
                  ValidationError);
  // WindowStep > WindowSize violates the operator invariant.
  const char* bad_step = R"(
<UserQuery><Stream name="weather"/>
  <Aggregation>
    <WindowType>tuple</WindowType>
    <WindowSize>2</WindowSize>
    <WindowStep>10</WindowStep>
    <Attribute>avg(rainrate)</Attribute>
  </Aggregation>
</UserQuery>)";
  CHECK_THROWS_AS(parse_user_query(bad_step, weather()), ValidationError);
  const char* bad_attr = R"(
<UserQuery><Stream name="weather"/>
  <Map><Attribute>pressure</Attribute></Map>
</UserQuery>)";
  CHECK_THROWS_AS(parse_user_query(bad_attr, weather()), ValidationError);
  const char* bad_agg = R"(
<UserQuery><Stream name="weather"/>
  <Aggregation>
    <WindowType>tuple</WindowType>
    <WindowSize>10</WindowSize>
    <WindowStep>2</WindowStep>
    <Attribute>rainrate</Attribute>
  </Aggregation>
</UserQuery>)";
  CHECK_THROWS_AS(parse_user_query(bad_agg, weather()), ValidationError);
}

TEST_CASE("access request document round trip") {
  AccessRequest r = lta_request();
  r.user_query = kUserQuery;
  AccessRequest back = parse_access_request(access_request_to_xml(r));
  CHECK(back.resource == "weather");
  CHECK(back.action == "read");
  CHECK(back.credentials.attributes == r.credentials.attributes);
  REQUIRE(back.user_query);
  // The embedded query survives structurally.
  QueryGraph g = parse_user_query(*back.user_query, weather());
  CHECK(g.window->size == 10);
}

TEST_CASE("credential fingerprints are order-insensitive") {
  CredentialSet a{{{"org", "LTA"}, {"role", "analyst"}}};
  CredentialSet b{{{"role", "analyst"}, {"org", "LTA"}}};
  CHECK(a.fingerprint() == b.fingerprint());
  CredentialSet c{{{"org", "NEA"}}};
  CHECK(a.fingerprint() != c.fingerprint());
}

// ---------------------------------------------------------------------------
// Store
// ---------------------------------------------------------------------------

TEST_CASE("evaluate matches targets first-applicable") {
  PolicyStore store = make_store();
  store.load_policy(kWeatherPolicy);

  Decision d = store.evaluate(lta_request());
  CHECK(d.verdict == DecisionVerdict::Permit);
  CHECK(d.obligations.size() == 3);
  CHECK(d.policy_id == "nea-weather-lta");

  AccessRequest wrong_resource = lta_request();
  wrong_resource.resource = "gpstrack";
  CHECK(store.evaluate(wrong_resource).verdict == DecisionVerdict::NotApplicable);

  AccessRequest wrong_subject = lta_request();
  wrong_subject.credentials.attributes = {{"org", "PUB"}};
  CHECK(store.evaluate(wrong_subject).verdict == DecisionVerdict::NotApplicable);

  // Extra credentials beyond the target's requirements still match.
  AccessRequest extra = lta_request();
  extra.credentials.attributes.push_back({"role", "analyst"});
  CHECK(store.evaluate(extra).verdict == DecisionVerdict::Permit);
}

TEST_CASE("first-applicable: insertion order decides between overlapping targets") {
  PolicyStore store = make_store();
  // A broader deny (no subject requirement) loaded after the permit: the
  // permit stays first-applicable; flipping the load order flips the result.
  std::string broad_deny = kWeatherPolicy;
  auto swap_out = [&broad_deny](const std::string& from, const std::string& to) {
    broad_deny.replace(broad_deny.find(from), from.size(), to);
  };
  swap_out("PolicyId=\"nea-weather-lta\"", "PolicyId=\"deny-all\"");
  swap_out("Effect=\"Permit\"", "Effect=\"Deny\"");
  std::size_t subjects = broad_deny.find("<Subjects>");
  broad_deny.erase(subjects, broad_deny.find("</Subjects>") + 11 - subjects);

  store.load_policy(kWeatherPolicy);
  store.load_policy(broad_deny);
  CHECK(store.evaluate(lta_request()).verdict == DecisionVerdict::Permit);

  PolicyStore flipped = make_store();
  flipped.load_policy(broad_deny);
  flipped.load_policy(kWeatherPolicy);
  CHECK(flipped.evaluate(lta_request()).verdict == DecisionVerdict::Deny);
}

TEST_CASE("deny policies propagate without obligations") {
  PolicyStore store = make_store();
  std::string deny = kWeatherPolicy;
  deny.replace(deny.find("Effect=\"Permit\""), 15, "Effect=\"Deny\"");
  store.load_policy(deny);
  Decision d = store.evaluate(lta_request());
  CHECK(d.verdict == DecisionVerdict::Deny);
  CHECK(d.obligations.empty());
}

TEST_CASE("loading rejects unknown streams") {
  PolicyStore store = make_store();
  std::string doc = kWeatherPolicy;
  doc.replace(doc.find("Value=\"weather\""), 15, "Value=\"nosuch\"");
  CHECK_THROWS_AS(store.load_policy(doc), ValidationError);
}

TEST_CASE("duplicate id replaces and notifies") {
  PolicyStore store = make_store();
  std::vector<std::string> changed;
  store.set_change_listener([&changed](const std::string& id) { changed.push_back(id); });
  store.load_policy(kWeatherPolicy);
  CHECK(changed.empty());
  store.load_policy(kWeatherPolicy);
  CHECK(changed == std::vector<std::string>{"nea-weather-lta"});
  CHECK(store.size() == 1);
}

TEST_CASE("removal makes the policy unmatchable") {
  PolicyStore store = make_store();
  store.load_policy(kWeatherPolicy);
  CHECK(store.remove_policy("nea-weather-lta"));
  CHECK(!store.remove_policy("nea-weather-lta"));
  CHECK(store.evaluate(lta_request()).verdict == DecisionVerdict::NotApplicable);
}

TEST_CASE("evaluation stays consistent under concurrent loads and removals") {
  PolicyStore store = make_store();
  store.load_policy(kWeatherPolicy);
  std::atomic<bool> stop{false};
  std::atomic<int> bad_decisions{0};

  std::vector<std::thread> readers;
  for (int i = 0; i < 4; ++i) {
    readers.emplace_back([&store, &stop, &bad_decisions] {
      while (!stop) {
        Decision d = store.evaluate(lta_request());
        // Any snapshot is either the loaded policy or an empty store.
        if (d.verdict == DecisionVerdict::Permit && d.obligations.size() != 3) ++bad_decisions;
        if (d.verdict == DecisionVerdict::Deny) ++bad_decisions;
        std::this_thread::yield();  // give the writer a chance at the lock
      }
    });
  }
  std::thread writer([&store] {
    for (int round = 0; round < 50; ++round) {
      store.remove_policy("nea-weather-lta");
      store.load_policy(kWeatherPolicy);
    }
  });
  writer.join();
  stop = true;
  for (std::thread& t : readers) t.join();
  CHECK(bad_decisions.load() == 0);
  CHECK(store.evaluate(lta_request()).verdict == DecisionVerdict::Permit);
}

// ---------------------------------------------------------------------------
// Round trip
// ---------------------------------------------------------------------------

TEST_CASE("graph -> obligations -> graph is the identity") {
  Policy p = parse_policy_document(kWeatherPolicy);
  QueryGraph g = obligations_to_graph(p.obligations, weather());
  CHECK(obligations_to_graph(graph_to_obligations(g), weather()) == g);

  // And the same through a full policy document.
  Policy synth;
  synth.id = "synth";
  synth.target.resource = "weather";
  synth.target.action = "read";
  synth.obligations = graph_to_obligations(g);
  Policy reparsed = parse_policy_document(policy_to_xml(synth));
  CHECK(obligations_to_graph(reparsed.obligations, weather()) == g);
}

TEST_CASE("random graphs survive the obligation round trip") {
  std::mt19937_64 rng(307);
  Schema schema = weather();
  for (int i = 0; i < 120; ++i) {
    QueryGraph g;
    g.source = "weather";
    if (rng() & 1) {
      g.filter = FilterOp{testsupport::random_predicate(rng, 4, 3, Origin::Policy)};
      // rename attributes into the schema
      // (random_predicate uses a/b/c; rebuild over real fields)
      std::vector<std::string> fields = {"rainrate", "windspeed", "humidity"};
      std::function<PredicatePtr(const PredicatePtr&)> rename =
          [&](const PredicatePtr& p) -> PredicatePtr {
        const auto& n = p->node();
        if (const auto* s = std::get_if<SimpleExpression>(&n)) {
          SimpleExpression copy = *s;
          copy.attribute = fields[static_cast<std::size_t>(copy.attribute[0] - 'a')];
          return leaf(copy);
        }
        if (const auto* x = std::get_if<NotNode>(&n)) return not_of(rename(x->child));
        if (const auto* a = std::get_if<AndNode>(&n)) return and_of(rename(a->lhs), rename(a->rhs));
        const auto& o = std::get<OrNode>(n);
        return or_of(rename(o.lhs), rename(o.rhs));
      };
      g.filter->condition = rename(g.filter->condition);
    }
    if (rng() & 1) g.map = MapOp::make({"samplingtime", "rainrate", "windspeed"});
    if (rng() & 1) {
      std::int64_t size = 2 + static_cast<std::int64_t>(rng() % 10);
      g.window = WindowAggOp::make(WindowType::Tuple, size, 1 + static_cast<std::int64_t>(rng() % size),
                                   {{"rainrate", AggFn::Sum}});
    }
    validate_graph(g, schema);
    CHECK(obligations_to_graph(graph_to_obligations(g), schema) == g);
  }
}

TEST_CASE("canonical user query form is stable across formatting") {
  std::string spaced = kUserQuery;
  std::string compact = "<UserQuery><Stream name=\"WEATHER\"/><Filter><FilterCondition>rainrate&gt;50"
                        "</FilterCondition></Filter><Map><Attribute>rainrate</Attribute></Map>"
                        "<Aggregation><WindowType>tuple</WindowType><WindowSize>10</WindowSize>"
                        "<WindowStep>2</WindowStep><Attribute>avg(rainrate)</Attribute>"
                        "</Aggregation></UserQuery>";
  CHECK(canonical_user_query(spaced) == canonical_user_query(compact));
}
