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

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "streamgate/gateway.hpp"
#include "streamgate/net.hpp"
#include "streamgate/proxy.hpp"

namespace streamgate {

// ---------------------------------------------------------------------------
// Workload generation and timing harness. Each generated continuous query
// yields a triple: a StreamSQL script (direct-query input), a policy whose
// obligations compile to exactly that graph, and a matching request that is
// guaranteed to Permit. Request sequences are either unique or Zipf-skewed
// over the policy population.
// ---------------------------------------------------------------------------

struct WorkloadSpec {
  int n_direct_queries = 1500;
  /// FB : MB : AB : FB+MB : FB+AB : MB+AB : FB+MB+AB
  std::array<int, 7> direct_query_dist = {160, 170, 130, 124, 254, 290, 372};
  int n_policies = 1000;
  int n_requests = 1500;
  double zipf_alpha = 0.223;
  int max_rank = 300;
  std::uint64_t seed = 42;
};

struct QueryTriple {
  QueryGraph graph;
  std::string streamsql;
  std::string policy_id;
  std::string policy_doc;
  AccessRequest request;
  std::string request_doc;
  std::string deploy_doc;  // direct-mode document for the same graph
};

struct Workload {
  WorkloadSpec spec;
  std::vector<Schema> schemas;
  std::vector<QueryTriple> triples;
  std::vector<int> unique_sequence;  // triple indices, one per request
  std::vector<int> zipf_sequence;
};

/// The synthetic stream catalog the workloads run over.
std::vector<Schema> builtin_schemas();

/// Deterministic under WorkloadSpec::seed.
Workload generate_workload(const WorkloadSpec& spec);

/// Rank-frequency sampler, P(rank k) proportional to k^-alpha, k = 1..max_rank.
class ZipfSampler {
 public:
  ZipfSampler(double alpha, int max_rank);
  int sample(std::mt19937_64& rng) const;

 private:
  std::vector<double> cdf_;
};

// ---------------------------------------------------------------------------
// Benchmark runner.
// ---------------------------------------------------------------------------

enum class BenchMode { Direct, Gateway, GatewayProxy };
enum class SequenceKind { Unique, Zipf };

std::string to_string(BenchMode mode);
std::string to_string(SequenceKind kind);

struct TimingRecord {
  int request_index = 0;
  int policy_index = 0;
  std::string status;
  bool cache_hit = false;
  std::int64_t decision_ns = 0;
  std::int64_t merge_ns = 0;
  std::int64_t deploy_ns = 0;
  std::int64_t total_ns = 0;
};

struct PhaseStats {
  double mean_us = 0;
  double stddev_us = 0;
  double p50_us = 0;
  double p90_us = 0;
  double p99_us = 0;
};

PhaseStats phase_stats(std::vector<double> samples_us);

struct BenchSummary {
  std::size_t requests = 0;
  double hit_rate = 0;
  PhaseStats decision, merge, deploy, total;
  PhaseStats hit_total, miss_total;  // populated in proxy mode
  double policy_load_mean_us = 0;
  double policy_load_stddev_us = 0;
  std::size_t policies_loaded = 0;
};

/// Where requests go: the in-process stack or a remote serve instance. The
/// caching proxy always lives on the client side of this boundary.
class BenchBackend {
 public:
  virtual ~BenchBackend() = default;
  virtual void load_policy(const std::string& doc) = 0;
  virtual RequestOutcome gateway_request(const AccessRequest& request) = 0;
  virtual CachingProxy::ProxyOutcome proxy_request(const AccessRequest& request) = 0;
  virtual void release(const StreamHandle& handle, const CredentialSet& credentials) = 0;
  virtual StreamHandle deploy_direct(const QueryTriple& triple) = 0;
  virtual void withdraw_direct(const StreamHandle& handle) = 0;
};

/// Owns a full engine/store/gateway/proxy stack with the builtin streams
/// registered.
class LocalBackend : public BenchBackend {
 public:
  explicit LocalBackend(GatewayConfig config = {});

  void load_policy(const std::string& doc) override;
  RequestOutcome gateway_request(const AccessRequest& request) override;
  CachingProxy::ProxyOutcome proxy_request(const AccessRequest& request) override;
  void release(const StreamHandle& handle, const CredentialSet& credentials) override;
  StreamHandle deploy_direct(const QueryTriple& triple) override;
  void withdraw_direct(const StreamHandle& handle) override;

  StreamEngine& engine() { return engine_; }
  PolicyStore& store() { return store_; }
  Gateway& gateway() { return gateway_; }

 private:
  StreamEngine engine_;
  PolicyStore store_;
  Gateway gateway_;
  CachingProxy proxy_;
};

/// Talks to a `streamgate serve` endpoint.
class RemoteBackend : public BenchBackend {
 public:
  RemoteBackend(const std::string& host, std::uint16_t port);

  void load_policy(const std::string& doc) override;
  RequestOutcome gateway_request(const AccessRequest& request) override;
  CachingProxy::ProxyOutcome proxy_request(const AccessRequest& request) override;
  void release(const StreamHandle& handle, const CredentialSet& credentials) override;
  StreamHandle deploy_direct(const QueryTriple& triple) override;
  void withdraw_direct(const StreamHandle& handle) override;

 private:
  GatewayClient client_;
  CachingProxy proxy_;
};

struct BenchResult {
  std::vector<TimingRecord> records;
  BenchSummary summary;
  BenchMode mode = BenchMode::Gateway;
  SequenceKind sequence = SequenceKind::Unique;
};

/// Issues the request sequence against the backend. Gateway mode releases
/// each granted handle after timing (the client disconnect); proxy mode keeps
/// handles alive so later hits can reuse them; direct mode withdraws its
/// deployments. Policies are loaded (and timed) first except in direct mode.
BenchResult run_benchmark(const Workload& workload, BenchMode mode, SequenceKind sequence,
                          BenchBackend& backend);

std::string records_to_csv(const BenchResult& result);
std::vector<TimingRecord> records_from_csv(const std::string& csv, std::string* mode_out);
BenchSummary summarize(const std::vector<TimingRecord>& records);
std::string summary_to_text(const BenchSummary& summary);
/// Plot-ready per-phase aggregate table (phase, mean, stddev, p50, p90, p99).
std::string summary_to_aggregate_csv(const BenchSummary& summary);

}  // namespace streamgate
