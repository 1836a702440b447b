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

#include "streamgate/proxy.hpp"

using namespace streamgate;

namespace {

Schema weather() {
  return Schema{"weather",
                {{"samplingtime", FieldType::Timestamp},
                 {"rainrate", FieldType::Double},
                 {"windspeed", FieldType::Double}}};
}

const char* kPolicy = R"(
<Policy PolicyId="p1" Effect="Permit">
  <Target>
    <Subjects><Subject AttributeId="org" Value="LTA"/></Subjects>
    <Resources><Resource Value="weather"/></Resources>
    <Actions><Action Value="read"/></Actions>
  </Target>
  <Obligations>
    <Obligation ObligationId="exacml:obligation:stream-filter" FulfillOn="Permit">
      <AttributeAssignment AttributeId="pCloud:obligation:stream-filter-condition-id"
        DataType="http://www.w3.org/2001/XMLSchema#string">rainrate &gt; 5</AttributeAssignment>
    </Obligation>
  </Obligations>
</Policy>
)";

struct Stack {
  StreamEngine engine;
  PolicyStore store;
  Gateway gateway;
  CachingProxy proxy;

  Stack()
      : store([this](const std::string& name) { return engine.find_stream(name); }),
        gateway(engine, store, {}),
        proxy(gateway) {
    engine.register_stream(weather());
    store.load_policy(kPolicy);
  }
};

AccessRequest request() {
  AccessRequest r;
  r.credentials.attributes = {{"org", "LTA"}};
  r.resource = "weather";
  r.action = "read";
  return r;
}

}  // namespace

TEST_CASE("repeat requests hit the cache and reuse the deployment") {
  Stack stack;
  auto first = stack.proxy.proxy_request(request());
  CHECK(!first.cache_hit);
  CHECK(first.outcome.status == RequestStatus::Granted);
  REQUIRE(first.outcome.handle);

  auto second = stack.proxy.proxy_request(request());
  CHECK(second.cache_hit);
  CHECK(second.outcome.status == first.outcome.status);
  CHECK(second.outcome.handle == first.outcome.handle);
  // Identical outcome content, hit flag aside.
  CHECK(second.outcome.detail == first.outcome.detail);
  CHECK(stack.gateway.active_count() == 1);
}

TEST_CASE("distinct requests use distinct entries") {
  Stack stack;
  auto a = stack.proxy.proxy_request(request());
  AccessRequest other = request();
  other.credentials.attributes.push_back({"dept", "ops"});
  auto b = stack.proxy.proxy_request(other);
  CHECK(!b.cache_hit);
  CHECK(a.outcome.handle != b.outcome.handle);
  CHECK(stack.proxy.size() == 2);
}

TEST_CASE("denied outcomes are not cached") {
  Stack stack;
  AccessRequest denied = request();
  denied.credentials.attributes = {{"org", "PUB"}};
  auto a = stack.proxy.proxy_request(denied);
  CHECK(a.outcome.status == RequestStatus::Denied);
  CHECK(stack.proxy.size() == 0);
  auto b = stack.proxy.proxy_request(denied);
  CHECK(!b.cache_hit);
}

TEST_CASE("withdrawn handles are never served") {
  Stack stack;
  auto first = stack.proxy.proxy_request(request());
  REQUIRE(first.outcome.handle);
  // Policy removal kills the deployment behind the cached handle.
  stack.store.remove_policy("p1");
  CHECK(!stack.engine.is_live(*first.outcome.handle));

  auto second = stack.proxy.proxy_request(request());
  CHECK(!second.cache_hit);
  CHECK(second.outcome.status == RequestStatus::Denied);  // policy is gone

  // Reload: a fresh deployment replaces the stale entry.
  stack.store.load_policy(kPolicy);
  auto third = stack.proxy.proxy_request(request());
  CHECK(!third.cache_hit);
  REQUIRE(third.outcome.handle);
  CHECK(third.outcome.handle != first.outcome.handle);
  CHECK(stack.engine.is_live(*third.outcome.handle));
}

TEST_CASE("invalidate evicts by key predicate") {
  Stack stack;
  stack.proxy.proxy_request(request());
  AccessRequest other = request();
  other.credentials.attributes.push_back({"dept", "ops"});
  stack.proxy.proxy_request(other);
  CHECK(stack.proxy.size() == 2);

  CHECK(stack.proxy.invalidate([](const std::string& key) {
    return key.find("dept=ops") != std::string::npos;
  }) == 1);
  CHECK(stack.proxy.size() == 1);

  CHECK(stack.proxy.invalidate([](const std::string&) { return true; }) == 1);
  CHECK(stack.proxy.invalidate([](const std::string&) { return true; }) == 0);

  // After invalidation the request is a miss again.
  auto again = stack.proxy.proxy_request(request());
  CHECK(!again.cache_hit);
}

TEST_CASE("hits return what a fresh call would, while the policy is unchanged") {
  Stack stack;
  auto miss = stack.proxy.proxy_request(request());

  // The same request straight at the gateway is busy (single-access rule);
  // the proxy's cached handle is the same deployment, so serving it keeps
  // the client working without a second deployment.
  RequestOutcome direct = stack.gateway.handle_request(request());
  CHECK(direct.status == RequestStatus::Busy);

  auto hit = stack.proxy.proxy_request(request());
  CHECK(hit.cache_hit);
  CHECK(hit.outcome.handle == miss.outcome.handle);
  CHECK(to_string(hit.outcome.status) == to_string(miss.outcome.status));
}

TEST_CASE("cache keys include the canonical user query") {
  Stack stack;
  AccessRequest with_query = request();
  with_query.user_query =
      "<UserQuery><Stream name=\"weather\"/>"
      "<Filter><FilterCondition>rainrate &gt; 50</FilterCondition></Filter></UserQuery>";
  auto a = stack.proxy.proxy_request(with_query);
  CHECK(a.outcome.status == RequestStatus::Granted);

  // Formatting and case differences map to the same key.
  AccessRequest reformatted = request();
  reformatted.user_query =
      "<UserQuery><Stream name=\"WEATHER\"/>"
      "<Filter><FilterCondition>RAINRATE&gt;50</FilterCondition></Filter></UserQuery>";
  auto b = stack.proxy.proxy_request(reformatted);
  CHECK(b.cache_hit);

  // A genuinely different query is a different entry.
  AccessRequest different = request();
  different.user_query =
      "<UserQuery><Stream name=\"weather\"/>"
      "<Filter><FilterCondition>rainrate &gt; 60</FilterCondition></Filter></UserQuery>";
  auto c = stack.proxy.proxy_request(different);
  CHECK(!c.cache_hit);
}
