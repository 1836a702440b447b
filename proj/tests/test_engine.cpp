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

#include "streamgate/engine.hpp"
#include "streamgate/errors.hpp"
#include "support/batch_oracle.hpp"
#include "support/generators.hpp"
#include "support/random_graphs.hpp"

using namespace streamgate;
namespace ts = streamgate::testsupport;

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

Schema numbers() {
  return Schema{"numbers", {{"v", FieldType::Int}}};
}

Tuple weather_tuple(std::int64_t ts, double rainrate) {
  return Tuple{{ts, 20.0, 50.0, rainrate, 10.0, std::int64_t{180}, 1013.0}};
}

QueryGraph merged_fig_graph() {
  QueryGraph g;
  g.source = "weather";
  g.filter = FilterOp{parse_predicate("rainrate > 50", Origin::Policy)};
  g.map = MapOp::make({"rainrate"});
  g.window = WindowAggOp::make(WindowType::Tuple, 10, 2, {{"rainrate", AggFn::Avg}});
  return g;
}

std::vector<Tuple> drain(Subscription& sub) {
  std::vector<Tuple> out;
  Tuple t;
  while (sub.try_next(t)) out.push_back(t);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Registration and deployment
// ---------------------------------------------------------------------------

TEST_CASE("stream registration") {
  StreamEngine engine;
  engine.register_stream(weather());
  CHECK(engine.find_stream("weather") != nullptr);
  CHECK_THROWS_AS(engine.register_stream(weather()), EngineError);
  CHECK_THROWS_AS(engine.register_stream(Schema{"empty", {}}), ValidationError);
}

TEST_CASE("deploy returns a handle and validates the graph") {
  StreamEngine engine;
  engine.register_stream(weather());
  StreamHandle h = engine.deploy(merged_fig_graph());
  CHECK(h.uri.rfind("stream://local/", 0) == 0);
  CHECK(engine.is_live(h));
  CHECK(graph_id_of(h) >= 1);

  QueryGraph unknown;
  unknown.source = "nosuch";
  CHECK_THROWS_AS(engine.deploy(unknown), EngineError);

  QueryGraph invalid;
  invalid.source = "weather";
  invalid.map = MapOp::make({"pressure"});
  CHECK_THROWS_AS(engine.deploy(invalid), ValidationError);
}

TEST_CASE("push validates schema conformance") {
  StreamEngine engine;
  engine.register_stream(weather());
  CHECK_THROWS_AS(engine.push("nosuch", weather_tuple(0, 1)), EngineError);
  CHECK_THROWS_AS(engine.push("weather", Tuple{{std::int64_t{1}, 2.0}}), EngineError);
  Tuple wrong_type = weather_tuple(0, 1);
  wrong_type.values[1] = std::string("warm");
  CHECK_THROWS_AS(engine.push("weather", wrong_type), EngineError);
  CHECK_NOTHROW(engine.push("weather", weather_tuple(0, 1)));
}

// ---------------------------------------------------------------------------
// Window aggregation
// ---------------------------------------------------------------------------

TEST_CASE("execute_window basics") {
  Schema s = numbers();
  WindowAggOp sum3 = WindowAggOp::make(WindowType::Tuple, 3, 2, {{"v", AggFn::Sum}});
  std::vector<Tuple> w1 = {Tuple{{std::int64_t{1}}}, Tuple{{std::int64_t{2}}},
                           Tuple{{std::int64_t{3}}}};
  CHECK(std::get<std::int64_t>(execute_window(sum3, w1, s).values[0]) == 6);
  std::vector<Tuple> w2 = {Tuple{{std::int64_t{3}}}, Tuple{{std::int64_t{4}}},
                           Tuple{{std::int64_t{5}}}};
  CHECK(std::get<std::int64_t>(execute_window(sum3, w2, s).values[0]) == 12);

  WindowAggOp last3 = WindowAggOp::make(WindowType::Tuple, 3, 1, {{"v", AggFn::LastVal}});
  CHECK(std::get<std::int64_t>(execute_window(last3, w2, s).values[0]) == 5);
  WindowAggOp first3 = WindowAggOp::make(WindowType::Tuple, 3, 1, {{"v", AggFn::FirstVal}});
  CHECK(std::get<std::int64_t>(execute_window(first3, w2, s).values[0]) == 3);
  WindowAggOp avg3 = WindowAggOp::make(WindowType::Tuple, 3, 1, {{"v", AggFn::Avg}});
  CHECK(std::get<double>(execute_window(avg3, w2, s).values[0]) == doctest::Approx(4.0));
  WindowAggOp count3 = WindowAggOp::make(WindowType::Tuple, 3, 1, {{"v", AggFn::Count}});
  CHECK(std::get<std::int64_t>(execute_window(count3, w2, s).values[0]) == 3);

  CHECK_THROWS_AS(execute_window(sum3, std::vector<Tuple>{w1[0]}, s), EngineError);
}

TEST_CASE("sliding sum windows over a short stream") {
  // size 3 step 2 over a0..a6: (a0+a1+a2), (a2+a3+a4), (a4+a5+a6)
  StreamEngine engine;
  engine.register_stream(numbers());
  QueryGraph g;
  g.source = "numbers";
  g.window = WindowAggOp::make(WindowType::Tuple, 3, 2, {{"v", AggFn::Sum}});
  StreamHandle h = engine.deploy(g);
  auto sub = engine.subscribe(h);
  std::int64_t a[] = {5, 8, 13, 21, 34, 55, 89};
  for (std::int64_t v : a) engine.push("numbers", Tuple{{v}});
  std::vector<Tuple> out = drain(*sub);
  REQUIRE(out.size() == 3);
  CHECK(std::get<std::int64_t>(out[0].values[0]) == a[0] + a[1] + a[2]);
  CHECK(std::get<std::int64_t>(out[1].values[0]) == a[2] + a[3] + a[4]);
  CHECK(std::get<std::int64_t>(out[2].values[0]) == a[4] + a[5] + a[6]);
}

TEST_CASE("merged pipeline emits at window boundaries") {
  StreamEngine engine;
  engine.register_stream(weather());
  StreamHandle h = engine.deploy(merged_fig_graph());
  auto sub = engine.subscribe(h);

  // Rain below the merged filter threshold is dropped before windowing.
  engine.push("weather", weather_tuple(0, 10));
  CHECK(drain(*sub).empty());

  // 12 qualifying tuples through window(10, 2): emissions at the 10th and
  // 12th qualifying arrivals.
  for (int i = 1; i <= 12; ++i) {
    engine.push("weather", weather_tuple(i, 50 + i));
  }
  std::vector<Tuple> out = drain(*sub);
  REQUIRE(out.size() == 2);
  // avg(51..60) and avg(53..62)
  CHECK(std::get<double>(out[0].values[0]) == doctest::Approx(55.5));
  CHECK(std::get<double>(out[1].values[0]) == doctest::Approx(57.5));
}

TEST_CASE("time windows align to the first tuple and close on arrival") {
  Schema s{"timed", {{"ts", FieldType::Timestamp}, {"v", FieldType::Int}}};
  StreamEngine engine;
  engine.register_stream(s);
  QueryGraph g;
  g.source = "timed";
  g.window = WindowAggOp::make(WindowType::Time, 10, 5, {{"v", AggFn::Sum}});
  auto sub = engine.subscribe(engine.deploy(g));
  // windows [100,110) [105,115) [110,120)...
  std::int64_t pts[][2] = {{100, 1}, {104, 2}, {109, 4}, {112, 8}, {121, 16}};
  for (auto& [t, v] : pts) engine.push("timed", Tuple{{t, v}});
  std::vector<Tuple> out = drain(*sub);
  REQUIRE(out.size() == 3);
  CHECK(std::get<std::int64_t>(out[0].values[0]) == 7);   // [100,110): 1+2+4
  CHECK(std::get<std::int64_t>(out[1].values[0]) == 12);  // [105,115): 4+8
  CHECK(std::get<std::int64_t>(out[2].values[0]) == 8);   // [110,120): 8
}

// ---------------------------------------------------------------------------
// Withdrawal and subscriptions
// ---------------------------------------------------------------------------

TEST_CASE("withdraw kills the handle and discards partial windows") {
  StreamEngine engine;
  engine.register_stream(numbers());
  QueryGraph g;
  g.source = "numbers";
  g.window = WindowAggOp::make(WindowType::Tuple, 3, 1, {{"v", AggFn::Sum}});
  StreamHandle h = engine.deploy(g);
  auto sub = engine.subscribe(h);

  engine.push("numbers", Tuple{{std::int64_t{1}}});
  engine.push("numbers", Tuple{{std::int64_t{2}}});  // one short of a window
  engine.withdraw(h);
  CHECK(!engine.is_live(h));
  engine.push("numbers", Tuple{{std::int64_t{3}}});
  CHECK(drain(*sub).empty());
  CHECK(sub->closed());
  CHECK(!sub->next().has_value());

  CHECK_THROWS_AS(engine.withdraw(h), EngineError);
  CHECK_THROWS_AS(engine.subscribe(h), EngineError);
}

TEST_CASE("identity graph streams raw tuples to every subscriber") {
  StreamEngine engine;
  engine.register_stream(numbers());
  QueryGraph g;
  g.source = "numbers";
  StreamHandle h = engine.deploy(g);
  auto sub1 = engine.subscribe(h);
  auto sub2 = engine.subscribe(h);
  for (std::int64_t v : {7, 9, 11}) engine.push("numbers", Tuple{{v}});
  std::vector<Tuple> out1 = drain(*sub1);
  std::vector<Tuple> out2 = drain(*sub2);
  CHECK(out1 == out2);
  REQUIRE(out1.size() == 3);
  CHECK(std::get<std::int64_t>(out1[2].values[0]) == 11);
}

TEST_CASE("push blocks on a full subscriber buffer until the consumer drains") {
  StreamEngine::Config config;
  config.subscriber_buffer = 2;
  StreamEngine engine(config);
  engine.register_stream(numbers());
  QueryGraph g;
  g.source = "numbers";
  auto sub = engine.subscribe(engine.deploy(g));

  std::atomic<int> pushed{0};
  std::thread producer([&engine, &pushed] {
    for (std::int64_t v = 0; v < 5; ++v) {
      engine.push("numbers", Tuple{{v}});
      ++pushed;
    }
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  CHECK(pushed.load() <= 3);  // buffer of 2: the third push parks

  std::vector<Tuple> all;
  while (all.size() < 5) {
    std::optional<Tuple> t = sub->next();
    REQUIRE(t.has_value());
    all.push_back(*t);
  }
  producer.join();
  CHECK(pushed.load() == 5);
}

TEST_CASE("blocking next wakes on delivery") {
  StreamEngine engine;
  engine.register_stream(numbers());
  QueryGraph g;
  g.source = "numbers";
  StreamHandle h = engine.deploy(g);
  auto sub = engine.subscribe(h);
  std::thread producer([&engine] {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    engine.push("numbers", Tuple{{std::int64_t{42}}});
  });
  std::optional<Tuple> t = sub->next();
  producer.join();
  REQUIRE(t.has_value());
  CHECK(std::get<std::int64_t>(t->values[0]) == 42);
}

// ---------------------------------------------------------------------------
// StreamSQL rendering
// ---------------------------------------------------------------------------

TEST_CASE("merged graph renders the documented script shape") {
  std::string sql = render_streamsql(merged_fig_graph(), weather());
  CHECK(sql.find("CREATE INPUT STREAM weather") != std::string::npos);
  CHECK(sql.find("samplingtime timestamp") != std::string::npos);
  CHECK(sql.find("SELECT * FROM weather WHERE rainrate > 50 INTO internal_0;") !=
        std::string::npos);
  CHECK(sql.find("SELECT internal_0.rainrate FROM internal_0 INTO internal_1;") !=
        std::string::npos);
  CHECK(sql.find("CREATE WINDOW _10tuple( SIZE 10 ADVANCE 2 TUPLES);") != std::string::npos);
  CHECK(sql.find("avg(rainrate) AS avgrainrate") != std::string::npos);
  CHECK(sql.find("FROM internal_1[_10tuple] INTO output;") != std::string::npos);
  CHECK(sql.find("CREATE OUTPUT STREAM output;") != std::string::npos);
}

TEST_CASE("identity and filter-only scripts") {
  QueryGraph identity;
  identity.source = "weather";
  std::string sql = render_streamsql(identity, weather());
  CHECK(sql.find("SELECT * FROM weather INTO output;") != std::string::npos);

  QueryGraph filter_only;
  filter_only.source = "weather";
  filter_only.filter = FilterOp{parse_predicate("rainrate > 5")};
  std::string fsql = render_streamsql(filter_only, weather());
  CHECK(fsql.find("SELECT * FROM weather WHERE rainrate > 5 INTO output;") != std::string::npos);
  // exactly one SELECT stage
  CHECK(fsql.find("internal_0") == std::string::npos);
}

// ---------------------------------------------------------------------------
// Wire format
// ---------------------------------------------------------------------------

TEST_CASE("record format round trips through text") {
  Schema s = weather();
  Tuple t = weather_tuple(12345, 61.5);
  std::string line = format_record(s, t);
  CHECK(line.find("samplingtime=12345") == 0);
  CHECK(line.find("rainrate=61.5") != std::string::npos);
  CHECK(parse_record(s, line) == t);
  CHECK_THROWS_AS(parse_record(s, "samplingtime=1"), EngineError);
}

// ---------------------------------------------------------------------------
// Engine vs batch oracle
// ---------------------------------------------------------------------------

TEST_CASE("engine matches the batch oracle on random graphs and inputs") {
  std::mt19937_64 rng(401);
  Schema schema = ts::oracle_schema();
  for (int round = 0; round < 200; ++round) {
    StreamEngine engine;
    engine.register_stream(schema);
    QueryGraph g = ts::random_oracle_graph(rng);
    StreamHandle h = engine.deploy(g);
    auto sub = engine.subscribe(h);

    std::size_t n = 20 + ts::rand_below(rng, 481);
    std::vector<Tuple> input = ts::random_oracle_input(rng, n);
    for (const Tuple& t : input) engine.push("o", t);

    std::vector<Tuple> streamed = drain(*sub);
    std::vector<Tuple> batch = ts::batch_execute(g, schema, input);
    CHECK(streamed == batch);

    if (g.window) {
      // floor((K - N) / M) + 1 completed windows once K >= N.
      std::vector<Tuple> survived;
      for (const Tuple& t : input) {
        if (!g.filter || ts::oracle_filter_passes(g.filter->condition, schema, t)) {
          survived.push_back(t);
        }
      }
      std::int64_t k = static_cast<std::int64_t>(survived.size());
      std::int64_t expected =
          k >= g.window->size ? (k - g.window->size) / g.window->step + 1 : 0;
      CHECK(static_cast<std::int64_t>(streamed.size()) == expected);
    }
  }
}

TEST_CASE("pushes to distinct streams proceed concurrently and stay ordered") {
  StreamEngine engine;
  engine.register_stream(Schema{"left", {{"v", FieldType::Int}}});
  engine.register_stream(Schema{"right", {{"v", FieldType::Int}}});
  QueryGraph gl, gr;
  gl.source = "left";
  gr.source = "right";
  auto sub_left = engine.subscribe(engine.deploy(gl));
  auto sub_right = engine.subscribe(engine.deploy(gr));

  auto pump = [&engine](const char* stream) {
    for (std::int64_t v = 0; v < 2000; ++v) engine.push(stream, Tuple{{v}});
  };
  std::thread t1(pump, "left");
  std::thread t2(pump, "right");
  t1.join();
  t2.join();

  for (auto& sub : {sub_left, sub_right}) {
    std::vector<Tuple> out = drain(*sub);
    REQUIRE(out.size() == 2000);
    bool ordered = true;
    for (std::int64_t v = 0; v < 2000; ++v) {
      if (std::get<std::int64_t>(out[static_cast<std::size_t>(v)].values[0]) != v) ordered = false;
    }
    CHECK(ordered);
  }
}

TEST_CASE("per-stream order is preserved through identity deployments") {
  StreamEngine engine;
  engine.register_stream(numbers());
  QueryGraph g;
  g.source = "numbers";
  auto sub = engine.subscribe(engine.deploy(g));
  for (std::int64_t v = 0; v < 1000; ++v) engine.push("numbers", Tuple{{v}});
  std::vector<Tuple> out = drain(*sub);
  REQUIRE(out.size() == 1000);
  for (std::int64_t v = 0; v < 1000; ++v) {
    CHECK(std::get<std::int64_t>(out[static_cast<std::size_t>(v)].values[0]) == v);
  }
}
