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

#include "streamgate/gateway.hpp"

#include <algorithm>
#include <chrono>
#include <iostream>

#include "streamgate/errors.hpp"

namespace streamgate {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t ns_since(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
}

}  // namespace

std::string to_string(RequestStatus status) {
  switch (status) {
    case RequestStatus::Granted: return "granted";
    case RequestStatus::Denied: return "denied";
    case RequestStatus::RejectedEscalation: return "rejected-escalation";
    case RequestStatus::WarnedNr: return "warned-nr";
    case RequestStatus::WarnedPrGranted: return "warned-pr-granted";
    case RequestStatus::WarnedPrBlocked: return "warned-pr-blocked";
    case RequestStatus::Busy: return "busy";
  }
  return "?";
}

RequestStatus request_status_from_string(const std::string& s) {
  if (s == "granted") return RequestStatus::Granted;
  if (s == "denied") return RequestStatus::Denied;
  if (s == "rejected-escalation") return RequestStatus::RejectedEscalation;
  if (s == "warned-nr") return RequestStatus::WarnedNr;
  if (s == "warned-pr-granted") return RequestStatus::WarnedPrGranted;
  if (s == "warned-pr-blocked") return RequestStatus::WarnedPrBlocked;
  if (s == "busy") return RequestStatus::Busy;
  throw ValidationError("unknown request status '" + s + "'");
}

Gateway::Gateway(StreamEngine& engine, PolicyStore& store, GatewayConfig config)
    : engine_(engine), store_(store), config_(config) {
  store_.set_change_listener([this](const std::string& policy_id) { on_policy_change(policy_id); });
}

RequestOutcome Gateway::handle_request(const AccessRequest& request) {
  RequestOutcome outcome;

  // Step 1: convert the customized query, if any.
  auto merge_start = Clock::now();
  const Schema* schema = engine_.find_stream(request.resource);
  if (!schema) {
    outcome.status = RequestStatus::Denied;
    outcome.detail = "unknown stream '" + request.resource + "'";
    return outcome;
  }
  std::optional<QueryGraph> user_graph;
  if (request.user_query) {
    user_graph = parse_user_query(*request.user_query, *schema);
  }
  std::int64_t parse_ns = ns_since(merge_start);

  // Step 2: PDP decision.
  auto decision_start = Clock::now();
  Decision decision = store_.evaluate(request);
  outcome.phases.decision_ns = ns_since(decision_start);
  if (decision.verdict != DecisionVerdict::Permit) {
    // NotApplicable is reported exactly like Deny so policy existence does
    // not leak.
    outcome.status = RequestStatus::Denied;
    return outcome;
  }

  std::lock_guard lock(mutex_);

  // Step 3: single-access guard.
  std::pair<std::string, std::string> key{request.credentials.fingerprint(), request.resource};
  if (config_.single_access_guard && by_principal_.count(key)) {
    outcome.status = RequestStatus::Busy;
    outcome.detail = "a query is already active on this stream for these credentials";
    return outcome;
  }

  // Step 4: compile obligations, merge, collect warnings.
  merge_start = Clock::now();
  QueryGraph policy_graph = obligations_to_graph(decision.obligations, *schema);
  MergeResult merged;
  try {
    if (user_graph) {
      merged = merge_graphs(policy_graph, *user_graph, *schema, config_.dnf_cap);
    } else {
      merged.graph = policy_graph;
    }
  } catch (const EscalationError& e) {
    outcome.phases.merge_ns = parse_ns + ns_since(merge_start);
    outcome.status = RequestStatus::RejectedEscalation;
    outcome.detail = e.what();
    return outcome;
  }
  outcome.phases.merge_ns = parse_ns + ns_since(merge_start);
  if (merged.analysis_skipped) {
    std::clog << "streamgate: NR/PR analysis skipped (capacity): " << canonical_text(merged.graph)
              << '\n';
  }
  if (merged.warning.kind != WarnKind::None) outcome.warning = merged.warning;
  if (merged.warning.kind == WarnKind::NR) {
    outcome.status = RequestStatus::WarnedNr;
    return outcome;
  }
  if (merged.warning.kind == WarnKind::PR && config_.block_on_pr) {
    outcome.status = RequestStatus::WarnedPrBlocked;
    return outcome;
  }

  // Step 5: deploy and register. A deployment failure propagates and leaves
  // the registry untouched.
  auto deploy_start = Clock::now();
  StreamHandle handle = engine_.deploy(merged.graph);
  outcome.phases.deploy_ns = ns_since(deploy_start);
  std::uint64_t id = graph_id_of(handle);
  by_principal_[key] = id;
  by_policy_[decision.policy_id].insert(id);
  entries_[id] = ActiveEntry{id, key.first, request.resource, decision.policy_id};

  outcome.handle = handle;
  outcome.status = merged.warning.kind == WarnKind::PR ? RequestStatus::WarnedPrGranted
                                                       : RequestStatus::Granted;
  return outcome;
}

void Gateway::release(const StreamHandle& handle, const CredentialSet& credentials) {
  std::uint64_t id = graph_id_of(handle);
  {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(id);
    if (it == entries_.end()) throw EngineError("unknown handle '" + handle.uri + "'");
    if (it->second.fingerprint != credentials.fingerprint()) {
      throw AuthorizationError("handle '" + handle.uri + "' is owned by other credentials");
    }
    by_principal_.erase({it->second.fingerprint, it->second.stream});
    auto pol = by_policy_.find(it->second.policy_id);
    if (pol != by_policy_.end()) {
      pol->second.erase(id);
      if (pol->second.empty()) by_policy_.erase(pol);
    }
    entries_.erase(it);
  }
  engine_.withdraw(id);
}

bool Gateway::probe(const StreamHandle& handle) { return engine_.is_live(handle); }

std::size_t Gateway::on_policy_change(const std::string& policy_id) {
  std::vector<std::uint64_t> ids;
  {
    std::lock_guard lock(mutex_);
    auto it = by_policy_.find(policy_id);
    if (it == by_policy_.end()) return 0;
    ids.assign(it->second.begin(), it->second.end());
    for (std::uint64_t id : ids) {
      auto entry = entries_.find(id);
      if (entry != entries_.end()) {
        by_principal_.erase({entry->second.fingerprint, entry->second.stream});
        entries_.erase(entry);
      }
    }
    by_policy_.erase(it);
  }
  for (std::uint64_t id : ids) {
    try {
      engine_.withdraw(id);
    } catch (const EngineError&) {
      // already gone
    }
  }
  return ids.size();
}

std::size_t Gateway::active_count() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

// ---------------------------------------------------------------------------
// Reconstruction oracle
// ---------------------------------------------------------------------------

namespace {

template <typename Series>
void check_series_family(const std::vector<Series>& series) {
  if (series.size() < 2) {
    throw ValidationError("reconstruction needs at least two window series");
  }
  std::int64_t step = series.front().step;
  std::int64_t base = series.front().size;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i].step != step) {
      throw ValidationError("window series must share one advance step");
    }
    if (series[i].size != base + static_cast<std::int64_t>(i)) {
      throw ValidationError("window sizes must be consecutive N, N+1, ..., N+M");
    }
  }
  if (static_cast<std::int64_t>(series.size()) - 1 != step) {
    throw ValidationError("need sizes N..N+M for step M to cover every offset");
  }
  // Over one stream prefix a larger window can only complete fewer times.
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (series[i].length() > series[i - 1].length()) {
      throw ValidationError("inconsistent window sequence lengths");
    }
  }
}

}  // namespace

std::vector<std::int64_t> reconstruct_from_windows(const std::vector<WindowSumSeries>& series) {
  check_series_family(series);
  const std::int64_t step = series.front().step;

  // T_i[k] = S_i[k] - S_{i-1}[k] = a_{N + k*M + (i-1)}
  std::vector<std::vector<std::int64_t>> singles;
  for (std::size_t i = 1; i < series.size(); ++i) {
    std::size_t n = std::min(series[i].sums.size(), series[i - 1].sums.size());
    std::vector<std::int64_t> t(n);
    for (std::size_t k = 0; k < n; ++k) {
      t[k] = series[i].sums[k] - series[i - 1].sums[k];
    }
    singles.push_back(std::move(t));
  }

  std::vector<std::int64_t> out;
  for (std::size_t k = 0;; ++k) {
    for (std::int64_t offset = 0; offset < step; ++offset) {
      const auto& t = singles[static_cast<std::size_t>(offset)];
      if (k >= t.size()) return out;
      out.push_back(t[k]);
    }
  }
}

std::vector<double> reconstruct_from_avg_windows(const std::vector<WindowAvgSeries>& series) {
  check_series_family(series);
  const std::int64_t step = series.front().step;

  std::vector<std::vector<double>> singles;
  for (std::size_t i = 1; i < series.size(); ++i) {
    std::size_t n = std::min(series[i].avgs.size(), series[i - 1].avgs.size());
    std::vector<double> t(n);
    for (std::size_t k = 0; k < n; ++k) {
      double sum_hi = series[i].avgs[k] * static_cast<double>(series[i].size);
      double sum_lo = series[i - 1].avgs[k] * static_cast<double>(series[i - 1].size);
      t[k] = sum_hi - sum_lo;
    }
    singles.push_back(std::move(t));
  }

  std::vector<double> out;
  for (std::size_t k = 0;; ++k) {
    for (std::int64_t offset = 0; offset < step; ++offset) {
      const auto& t = singles[static_cast<std::size_t>(offset)];
      if (k >= t.size()) return out;
      out.push_back(t[k]);
    }
  }
}

}  // namespace streamgate
