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

#include <cmath>
#include <set>

#include "streamgate/bench.hpp"
#include "streamgate/errors.hpp"

using namespace streamgate;

namespace {

WorkloadSpec small_spec() {
  WorkloadSpec spec;
  spec.n_direct_queries = 60;
  spec.n_policies = 40;
  spec.n_requests = 80;
  spec.max_rank = 20;
  spec.seed = 9001;
  return spec;
}

}  // namespace

TEST_CASE("zipf sampler matches the target distribution") {
  const double alpha = 0.223;
  const int max_rank = 300;
  ZipfSampler zipf(alpha, max_rank);
  std::mt19937_64 rng(188);
  const int draws = 100000;
  std::vector<int> counts(static_cast<std::size_t>(max_rank) + 1, 0);
  for (int i = 0; i < draws; ++i) {
    int rank = zipf.sample(rng);
    REQUIRE(rank >= 1);
    REQUIRE(rank <= max_rank);
    ++counts[static_cast<std::size_t>(rank)];
  }
  double norm = 0;
  for (int k = 1; k <= max_rank; ++k) norm += std::pow(k, -alpha);
  for (int k = 1; k <= 20; ++k) {
    double expected = draws * std::pow(k, -alpha) / norm;
    double got = counts[static_cast<std::size_t>(k)];
    CHECK(std::abs(got - expected) / expected < 0.05);
  }
}

TEST_CASE("workloads are deterministic under the seed") {
  Workload a = generate_workload(small_spec());
  Workload b = generate_workload(small_spec());
  REQUIRE(a.triples.size() == b.triples.size());
  for (std::size_t i = 0; i < a.triples.size(); ++i) {
    CHECK(a.triples[i].policy_doc == b.triples[i].policy_doc);
    CHECK(a.triples[i].request_doc == b.triples[i].request_doc);
    CHECK(a.triples[i].streamsql == b.triples[i].streamsql);
    CHECK(a.triples[i].graph == b.triples[i].graph);
  }
  CHECK(a.zipf_sequence == b.zipf_sequence);
  CHECK(a.unique_sequence == b.unique_sequence);

  WorkloadSpec other = small_spec();
  other.seed = 9002;
  Workload c = generate_workload(other);
  bool any_difference = false;
  for (std::size_t i = 0; i < a.triples.size(); ++i) {
    if (!(a.triples[i].graph == c.triples[i].graph)) any_difference = true;
  }
  CHECK(any_difference);
}

TEST_CASE("triples cover the operator combinations and validate") {
  Workload w = generate_workload(small_spec());
  REQUIRE(static_cast<int>(w.triples.size()) == 60);
  std::set<std::string> shapes;
  for (const QueryTriple& t : w.triples) {
    const Schema* schema = nullptr;
    for (const Schema& s : w.schemas) {
      if (s.stream_name == t.graph.source) schema = &s;
    }
    REQUIRE(schema != nullptr);
    CHECK_NOTHROW(validate_graph(t.graph, *schema));
    std::string shape;
    if (t.graph.filter) shape += 'F';
    if (t.graph.map) shape += 'M';
    if (t.graph.window) shape += 'A';
    shapes.insert(shape);
    CHECK(!t.streamsql.empty());
  }
  // All seven combinations appear in a 60-query draw.
  CHECK(shapes == std::set<std::string>{"F", "M", "A", "FM", "FA", "MA", "FMA"});
}

TEST_CASE("every generated request permits against its paired policy") {
  Workload w = generate_workload(small_spec());
  LocalBackend backend;
  for (int i = 0; i < w.spec.n_policies; ++i) {
    backend.load_policy(w.triples[static_cast<std::size_t>(i)].policy_doc);
  }
  for (int i = 0; i < w.spec.n_policies; ++i) {
    const QueryTriple& t = w.triples[static_cast<std::size_t>(i)];
    Decision d = backend.store().evaluate(t.request);
    CHECK(d.verdict == DecisionVerdict::Permit);
    CHECK(d.policy_id == t.policy_id);
  }
}

TEST_CASE("gateway-mode run answers every request and releases handles") {
  Workload w = generate_workload(small_spec());
  LocalBackend backend;
  BenchResult result = run_benchmark(w, BenchMode::Gateway, SequenceKind::Unique, backend);
  REQUIRE(result.records.size() == 80);
  for (const TimingRecord& r : result.records) {
    CHECK(r.status == "granted");
    CHECK(r.total_ns > 0);
    // Phases are measured inside the request; the wall total bounds them.
    CHECK(r.total_ns >= r.decision_ns + r.merge_ns + r.deploy_ns);
  }
  CHECK(backend.gateway().active_count() == 0);  // all released
  CHECK(result.summary.policies_loaded == 40);
  CHECK(result.summary.policy_load_mean_us > 0);
}

TEST_CASE("proxy-mode zipf run produces cache hits that are faster") {
  Workload w = generate_workload(small_spec());
  LocalBackend backend;
  BenchResult result = run_benchmark(w, BenchMode::GatewayProxy, SequenceKind::Zipf, backend);
  CHECK(result.summary.hit_rate > 0);
  CHECK(result.summary.hit_total.p50_us < result.summary.miss_total.p50_us);
  for (const TimingRecord& r : result.records) CHECK(r.status == "granted");
}

TEST_CASE("direct mode deploys and withdraws") {
  Workload w = generate_workload(small_spec());
  LocalBackend backend;
  BenchResult result = run_benchmark(w, BenchMode::Direct, SequenceKind::Unique, backend);
  REQUIRE(result.records.size() == 80);
  for (const TimingRecord& r : result.records) {
    CHECK(r.status == "deployed");
    CHECK(r.decision_ns == 0);
    CHECK(r.deploy_ns > 0);
  }
  CHECK(result.summary.policies_loaded == 0);
}

TEST_CASE("CSV round trips and is deterministic apart from timings") {
  Workload w = generate_workload(small_spec());
  LocalBackend b1, b2;
  BenchResult r1 = run_benchmark(w, BenchMode::GatewayProxy, SequenceKind::Zipf, b1);
  BenchResult r2 = run_benchmark(w, BenchMode::GatewayProxy, SequenceKind::Zipf, b2);

  std::string mode;
  std::vector<TimingRecord> parsed = records_from_csv(records_to_csv(r1), &mode);
  CHECK(mode == "gateway+proxy");
  REQUIRE(parsed.size() == r1.records.size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    CHECK(parsed[i].request_index == r1.records[i].request_index);
    CHECK(parsed[i].policy_index == r1.records[i].policy_index);
    CHECK(parsed[i].status == r1.records[i].status);
    CHECK(parsed[i].cache_hit == r1.records[i].cache_hit);
    // Identical run shape: everything but the timing columns matches.
    CHECK(r1.records[i].policy_index == r2.records[i].policy_index);
    CHECK(r1.records[i].status == r2.records[i].status);
    CHECK(r1.records[i].cache_hit == r2.records[i].cache_hit);
  }

  BenchSummary summary = summarize(parsed);
  CHECK(summary.requests == parsed.size());
  CHECK(!summary_to_text(summary).empty());
  CHECK(summary_to_aggregate_csv(summary).find("phase,mean_us") == 0);
}

TEST_CASE("workload spec validation") {
  WorkloadSpec bad = small_spec();
  bad.zipf_alpha = 0;
  CHECK_THROWS_AS(generate_workload(bad), ValidationError);
  WorkloadSpec bad2 = small_spec();
  bad2.direct_query_dist[3] = 0;
  CHECK_THROWS_AS(generate_workload(bad2), ValidationError);
}
