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

#include "streamgate/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "streamgate/errors.hpp"

namespace streamgate {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t ns_since(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
}

// Deterministic helpers over mt19937_64; std::uniform_int_distribution is
// implementation-defined, these are not.
std::uint64_t rand_below(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

std::int64_t rand_range(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(rand_below(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

double rand_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::vector<Schema> builtin_schemas() {
  return {
      Schema{"weather",
             {{"samplingtime", FieldType::Timestamp},
              {"temperature", FieldType::Double},
              {"humidity", FieldType::Double},
              {"rainrate", FieldType::Double},
              {"windspeed", FieldType::Double},
              {"winddirection", FieldType::Int},
              {"barometer", FieldType::Double}}},
      Schema{"gpstrack",
             {{"ts", FieldType::Timestamp},
              {"deviceid", FieldType::Int},
              {"lat", FieldType::Double},
              {"lon", FieldType::Double},
              {"speed", FieldType::Double},
              {"heading", FieldType::Int}}},
      Schema{"airquality",
             {{"ts", FieldType::Timestamp},
              {"pm25", FieldType::Double},
              {"pm10", FieldType::Double},
              {"co2", FieldType::Double},
              {"aqi", FieldType::Int}}},
  };
}

// ---------------------------------------------------------------------------
// Random graph generation
// ---------------------------------------------------------------------------

namespace {

std::vector<int> numeric_field_indices(const Schema& schema) {
  std::vector<int> out;
  for (std::size_t i = 0; i < schema.fields.size(); ++i) {
    FieldType t = schema.fields[i].type;
    if (t == FieldType::Double || t == FieldType::Int) out.push_back(static_cast<int>(i));
  }
  return out;
}

PredicatePtr random_filter_condition(std::mt19937_64& rng, const Schema& schema) {
  std::vector<int> numeric = numeric_field_indices(schema);
  int n_leaves = static_cast<int>(rand_range(rng, 1, 3));
  PredicatePtr out;
  for (int i = 0; i < n_leaves; ++i) {
    const Field& f = schema.fields[static_cast<std::size_t>(
        numeric[rand_below(rng, numeric.size())])];
    CmpOp op = static_cast<CmpOp>(rand_below(rng, 6));
    Literal lit{Decimal(rand_range(rng, 0, 100))};
    PredicatePtr l = leaf(SimpleExpression::make(f.name, op, lit, Origin::Policy));
    if (rand_unit(rng) < 0.15) l = not_of(std::move(l));
    if (!out) {
      out = std::move(l);
    } else if (rand_unit(rng) < 0.5) {
      out = and_of(std::move(out), std::move(l));
    } else {
      out = or_of(std::move(out), std::move(l));
    }
  }
  return out;
}

std::vector<AggFn> allowed_fns(FieldType t) {
  if (t == FieldType::String) {
    return {AggFn::Max, AggFn::Min, AggFn::Count, AggFn::LastVal, AggFn::FirstVal};
  }
  return {AggFn::Avg, AggFn::Max, AggFn::Min, AggFn::Count, AggFn::Sum, AggFn::LastVal,
          AggFn::FirstVal};
}

QueryGraph random_graph(std::mt19937_64& rng, const Schema& schema, bool with_filter,
                        bool with_map, bool with_window) {
  QueryGraph g;
  g.source = schema.stream_name;
  if (with_filter) g.filter = FilterOp{random_filter_condition(rng, schema)};

  std::vector<Field> visible = schema.fields;
  if (with_map) {
    std::vector<std::string> chosen;
    for (const Field& f : schema.fields) {
      if (rand_unit(rng) < 0.5) chosen.push_back(f.name);
    }
    if (chosen.empty()) {
      chosen.push_back(schema.fields[rand_below(rng, schema.fields.size())].name);
    }
    g.map = MapOp::make(chosen);
    visible.clear();
    for (const Field& f : schema.fields) {
      if (std::find(g.map->attributes.begin(), g.map->attributes.end(), f.name) !=
          g.map->attributes.end()) {
        visible.push_back(f);
      }
    }
  }
  if (with_window) {
    std::int64_t size = rand_range(rng, 2, 20);
    std::int64_t step = rand_range(rng, 1, size);
    int n_aggs = static_cast<int>(
        rand_range(rng, 1, std::min<std::int64_t>(3, static_cast<std::int64_t>(visible.size()))));
    std::vector<Field> pool = visible;
    std::vector<AggSpec> aggs;
    for (int i = 0; i < n_aggs; ++i) {
      std::size_t pick = rand_below(rng, pool.size());
      const Field f = pool[pick];
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
      std::vector<AggFn> fns = allowed_fns(f.type);
      aggs.push_back(AggSpec{f.name, fns[rand_below(rng, fns.size())]});
    }
    g.window = WindowAggOp::make(WindowType::Tuple, size, step, std::move(aggs));
  }
  return g;
}

}  // namespace

Workload generate_workload(const WorkloadSpec& spec) {
  if (spec.n_policies <= 0 || spec.n_requests < 0 || spec.zipf_alpha <= 0) {
    throw ValidationError("workload spec: counts must be positive and alpha > 0");
  }
  for (int share : spec.direct_query_dist) {
    if (share <= 0) throw ValidationError("workload spec: distribution ratios must be positive");
  }

  Workload workload;
  workload.spec = spec;
  workload.schemas = builtin_schemas();
  std::mt19937_64 rng(spec.seed);

  const int n_triples = std::max(spec.n_direct_queries, spec.n_policies);
  const double dist_total = static_cast<double>(
      std::accumulate(spec.direct_query_dist.begin(), spec.direct_query_dist.end(), 0));

  // Combination flags per distribution bucket: F, M, A, FM, FA, MA, FMA.
  constexpr std::array<std::array<bool, 3>, 7> kCombos = {{
      {true, false, false},
      {false, true, false},
      {false, false, true},
      {true, true, false},
      {true, false, true},
      {false, true, true},
      {true, true, true},
  }};

  for (int i = 0; i < n_triples; ++i) {
    double x = (static_cast<double>(i) + 0.5) / n_triples * dist_total;
    int bucket = 0;
    double acc = 0;
    for (int b = 0; b < 7; ++b) {
      acc += spec.direct_query_dist[static_cast<std::size_t>(b)];
      if (x < acc) {
        bucket = b;
        break;
      }
    }
    const Schema& schema = workload.schemas[static_cast<std::size_t>(i) % workload.schemas.size()];
    const auto& combo = kCombos[static_cast<std::size_t>(bucket)];

    QueryTriple triple;
    triple.graph = random_graph(rng, schema, combo[0], combo[1], combo[2]);
    validate_graph(triple.graph, schema);
    triple.streamsql = render_streamsql(triple.graph, schema);
    triple.deploy_doc = graph_to_query_doc(triple.graph, "Deploy");
    triple.policy_id = "wl-policy-" + std::to_string(i);

    Policy policy;
    policy.id = triple.policy_id;
    policy.target.subjects = {SubjectAttribute{"sg:subject:client-id", "client-" + std::to_string(i)}};
    policy.target.resource = schema.stream_name;
    policy.target.action = "read";
    policy.effect = Effect::Permit;
    policy.obligations = graph_to_obligations(triple.graph);
    triple.policy_doc = policy_to_xml(policy);

    triple.request.credentials.attributes = policy.target.subjects;
    triple.request.resource = schema.stream_name;
    triple.request.action = "read";
    triple.request_doc = access_request_to_xml(triple.request);

    workload.triples.push_back(std::move(triple));
  }

  for (int i = 0; i < spec.n_requests; ++i) {
    workload.unique_sequence.push_back(i % spec.n_policies);
  }
  int max_rank = std::min(spec.max_rank, spec.n_policies);
  ZipfSampler zipf(spec.zipf_alpha, max_rank);
  for (int i = 0; i < spec.n_requests; ++i) {
    workload.zipf_sequence.push_back(zipf.sample(rng) - 1);
  }
  return workload;
}

ZipfSampler::ZipfSampler(double alpha, int max_rank) {
  if (max_rank < 1) throw ValidationError("zipf max_rank must be >= 1");
  cdf_.reserve(static_cast<std::size_t>(max_rank));
  double total = 0;
  for (int k = 1; k <= max_rank; ++k) {
    total += std::pow(static_cast<double>(k), -alpha);
    cdf_.push_back(total);
  }
  for (double& v : cdf_) v /= total;
}

int ZipfSampler::sample(std::mt19937_64& rng) const {
  double u = rand_unit(rng);
  auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<int>(it - cdf_.begin()) + 1;
}

// ---------------------------------------------------------------------------
// Backends
// ---------------------------------------------------------------------------

LocalBackend::LocalBackend(GatewayConfig config)
    : engine_(),
      store_([this](const std::string& name) { return engine_.find_stream(name); }),
      gateway_(engine_, store_, config),
      proxy_(gateway_) {
  for (Schema& s : builtin_schemas()) engine_.register_stream(std::move(s));
}

void LocalBackend::load_policy(const std::string& doc) { store_.load_policy(doc); }
RequestOutcome LocalBackend::gateway_request(const AccessRequest& request) {
  return gateway_.handle_request(request);
}
CachingProxy::ProxyOutcome LocalBackend::proxy_request(const AccessRequest& request) {
  return proxy_.proxy_request(request);
}
void LocalBackend::release(const StreamHandle& handle, const CredentialSet& credentials) {
  gateway_.release(handle, credentials);
}
StreamHandle LocalBackend::deploy_direct(const QueryTriple& triple) {
  return engine_.deploy(triple.graph);
}
void LocalBackend::withdraw_direct(const StreamHandle& handle) { engine_.withdraw(handle); }

RemoteBackend::RemoteBackend(const std::string& host, std::uint16_t port)
    : client_(host, port), proxy_(client_) {}

void RemoteBackend::load_policy(const std::string& doc) { client_.load_policy(doc); }
RequestOutcome RemoteBackend::gateway_request(const AccessRequest& request) {
  return client_.handle_request(request);
}
CachingProxy::ProxyOutcome RemoteBackend::proxy_request(const AccessRequest& request) {
  return proxy_.proxy_request(request);
}
void RemoteBackend::release(const StreamHandle& handle, const CredentialSet& credentials) {
  client_.release(handle, credentials);
}
StreamHandle RemoteBackend::deploy_direct(const QueryTriple& triple) {
  return client_.deploy_direct(triple.deploy_doc);
}
void RemoteBackend::withdraw_direct(const StreamHandle& handle) {
  client_.withdraw_direct(handle);
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

std::string to_string(BenchMode mode) {
  switch (mode) {
    case BenchMode::Direct: return "direct";
    case BenchMode::Gateway: return "gateway";
    case BenchMode::GatewayProxy: return "gateway+proxy";
  }
  return "?";
}

std::string to_string(SequenceKind kind) {
  return kind == SequenceKind::Unique ? "unique" : "zipf";
}

PhaseStats phase_stats(std::vector<double> samples_us) {
  PhaseStats stats;
  if (samples_us.empty()) return stats;
  double sum = std::accumulate(samples_us.begin(), samples_us.end(), 0.0);
  stats.mean_us = sum / static_cast<double>(samples_us.size());
  double sq = 0;
  for (double v : samples_us) sq += (v - stats.mean_us) * (v - stats.mean_us);
  stats.stddev_us = std::sqrt(sq / static_cast<double>(samples_us.size()));
  std::sort(samples_us.begin(), samples_us.end());
  auto pct = [&samples_us](double p) {
    std::size_t idx = static_cast<std::size_t>(p * (static_cast<double>(samples_us.size()) - 1));
    return samples_us[idx];
  };
  stats.p50_us = pct(0.50);
  stats.p90_us = pct(0.90);
  stats.p99_us = pct(0.99);
  return stats;
}

BenchSummary summarize(const std::vector<TimingRecord>& records) {
  BenchSummary summary;
  summary.requests = records.size();
  std::vector<double> decision, merge, deploy, total, hit_total, miss_total;
  std::size_t hits = 0;
  for (const TimingRecord& r : records) {
    decision.push_back(static_cast<double>(r.decision_ns) / 1e3);
    merge.push_back(static_cast<double>(r.merge_ns) / 1e3);
    deploy.push_back(static_cast<double>(r.deploy_ns) / 1e3);
    total.push_back(static_cast<double>(r.total_ns) / 1e3);
    if (r.cache_hit) {
      ++hits;
      hit_total.push_back(static_cast<double>(r.total_ns) / 1e3);
    } else {
      miss_total.push_back(static_cast<double>(r.total_ns) / 1e3);
    }
  }
  summary.hit_rate = records.empty() ? 0 : static_cast<double>(hits) / records.size();
  summary.decision = phase_stats(std::move(decision));
  summary.merge = phase_stats(std::move(merge));
  summary.deploy = phase_stats(std::move(deploy));
  summary.total = phase_stats(std::move(total));
  summary.hit_total = phase_stats(std::move(hit_total));
  summary.miss_total = phase_stats(std::move(miss_total));
  return summary;
}

BenchResult run_benchmark(const Workload& workload, BenchMode mode, SequenceKind sequence,
                          BenchBackend& backend) {
  BenchResult result;
  result.mode = mode;
  result.sequence = sequence;

  std::vector<double> load_us;
  if (mode != BenchMode::Direct) {
    for (int i = 0; i < workload.spec.n_policies; ++i) {
      const QueryTriple& triple = workload.triples[static_cast<std::size_t>(i)];
      auto t0 = Clock::now();
      backend.load_policy(triple.policy_doc);
      load_us.push_back(static_cast<double>(ns_since(t0)) / 1e3);
    }
  }

  const std::vector<int>& seq =
      sequence == SequenceKind::Unique ? workload.unique_sequence : workload.zipf_sequence;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const QueryTriple& triple = workload.triples[static_cast<std::size_t>(seq[i])];
    TimingRecord record;
    record.request_index = static_cast<int>(i);
    record.policy_index = seq[i];

    auto t0 = Clock::now();
    switch (mode) {
      case BenchMode::Direct: {
        StreamHandle handle = backend.deploy_direct(triple);
        record.deploy_ns = ns_since(t0);
        record.total_ns = record.deploy_ns;
        record.status = "deployed";
        backend.withdraw_direct(handle);
        break;
      }
      case BenchMode::Gateway: {
        RequestOutcome outcome = backend.gateway_request(triple.request);
        record.total_ns = ns_since(t0);
        record.status = to_string(outcome.status);
        record.decision_ns = outcome.phases.decision_ns;
        record.merge_ns = outcome.phases.merge_ns;
        record.deploy_ns = outcome.phases.deploy_ns;
        if (outcome.handle) {
          backend.release(*outcome.handle, triple.request.credentials);
        }
        break;
      }
      case BenchMode::GatewayProxy: {
        CachingProxy::ProxyOutcome outcome = backend.proxy_request(triple.request);
        record.total_ns = ns_since(t0);
        record.status = to_string(outcome.outcome.status);
        record.cache_hit = outcome.cache_hit;
        record.decision_ns = outcome.outcome.phases.decision_ns;
        record.merge_ns = outcome.outcome.phases.merge_ns;
        record.deploy_ns = outcome.outcome.phases.deploy_ns;
        break;
      }
    }
    result.records.push_back(std::move(record));
  }

  result.summary = summarize(result.records);
  result.summary.policies_loaded = load_us.size();
  if (!load_us.empty()) {
    PhaseStats load_stats = phase_stats(load_us);
    result.summary.policy_load_mean_us = load_stats.mean_us;
    result.summary.policy_load_stddev_us = load_stats.stddev_us;
  }
  return result;
}

// ---------------------------------------------------------------------------
// CSV + reporting
// ---------------------------------------------------------------------------

std::string records_to_csv(const BenchResult& result) {
  std::ostringstream out;
  out << "index,policy,mode,sequence,status,cache_hit,decision_us,merge_us,deploy_us,total_us\n";
  for (const TimingRecord& r : result.records) {
    out << r.request_index << ',' << r.policy_index << ',' << to_string(result.mode) << ','
        << to_string(result.sequence) << ',' << r.status << ',' << (r.cache_hit ? 1 : 0) << ','
        << static_cast<double>(r.decision_ns) / 1e3 << ','
        << static_cast<double>(r.merge_ns) / 1e3 << ','
        << static_cast<double>(r.deploy_ns) / 1e3 << ','
        << static_cast<double>(r.total_ns) / 1e3 << '\n';
  }
  return out.str();
}

std::vector<TimingRecord> records_from_csv(const std::string& csv, std::string* mode_out) {
  std::vector<TimingRecord> records;
  std::istringstream in(csv);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::istringstream fields(line);
    std::string token;
    TimingRecord r;
    std::getline(fields, token, ',');
    r.request_index = std::stoi(token);
    std::getline(fields, token, ',');
    r.policy_index = std::stoi(token);
    std::getline(fields, token, ',');
    if (mode_out) *mode_out = token;
    std::getline(fields, token, ',');  // sequence
    std::getline(fields, r.status, ',');
    std::getline(fields, token, ',');
    r.cache_hit = token == "1";
    std::getline(fields, token, ',');
    r.decision_ns = static_cast<std::int64_t>(std::stod(token) * 1e3);
    std::getline(fields, token, ',');
    r.merge_ns = static_cast<std::int64_t>(std::stod(token) * 1e3);
    std::getline(fields, token, ',');
    r.deploy_ns = static_cast<std::int64_t>(std::stod(token) * 1e3);
    std::getline(fields, token, ',');
    r.total_ns = static_cast<std::int64_t>(std::stod(token) * 1e3);
    records.push_back(std::move(r));
  }
  return records;
}

namespace {

void print_phase(std::ostringstream& out, const char* name, const PhaseStats& stats) {
  out << "  " << name << ": mean " << stats.mean_us << " us, stddev " << stats.stddev_us
      << ", p50 " << stats.p50_us << ", p90 " << stats.p90_us << ", p99 " << stats.p99_us << "\n";
}

}  // namespace

std::string summary_to_text(const BenchSummary& summary) {
  std::ostringstream out;
  out << "requests: " << summary.requests << "\n";
  if (summary.policies_loaded > 0) {
    out << "policy loads: " << summary.policies_loaded << " (mean " << summary.policy_load_mean_us
        << " us, stddev " << summary.policy_load_stddev_us << ")\n";
  }
  print_phase(out, "decision", summary.decision);
  print_phase(out, "merge   ", summary.merge);
  print_phase(out, "deploy  ", summary.deploy);
  print_phase(out, "total   ", summary.total);
  out << "cache hit rate: " << summary.hit_rate << "\n";
  if (summary.hit_rate > 0) {
    print_phase(out, "hit total ", summary.hit_total);
    print_phase(out, "miss total", summary.miss_total);
  }
  return out.str();
}

std::string summary_to_aggregate_csv(const BenchSummary& summary) {
  std::ostringstream out;
  out << "phase,mean_us,stddev_us,p50_us,p90_us,p99_us\n";
  auto row = [&out](const char* name, const PhaseStats& s) {
    out << name << ',' << s.mean_us << ',' << s.stddev_us << ',' << s.p50_us << ',' << s.p90_us
        << ',' << s.p99_us << '\n';
  };
  row("decision", summary.decision);
  row("merge", summary.merge);
  row("deploy", summary.deploy);
  row("total", summary.total);
  row("hit_total", summary.hit_total);
  row("miss_total", summary.miss_total);
  return out.str();
}

}  // namespace streamgate
