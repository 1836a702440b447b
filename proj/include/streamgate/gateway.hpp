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

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "streamgate/engine.hpp"
#include "streamgate/merge.hpp"
#include "streamgate/policy.hpp"

namespace streamgate {

enum class RequestStatus {
  Granted,
  Denied,
  RejectedEscalation,
  WarnedNr,
  WarnedPrGranted,
  WarnedPrBlocked,  // strict mode only
  Busy,
};

std::string to_string(RequestStatus status);
RequestStatus request_status_from_string(const std::string& s);

struct PhaseTimes {
  std::int64_t decision_ns = 0;  // PDP evaluation
  std::int64_t merge_ns = 0;     // query parsing, obligation compilation, merge+analysis
  std::int64_t deploy_ns = 0;    // engine deployment
};

struct RequestOutcome {
  RequestStatus status = RequestStatus::Denied;
  std::optional<StreamHandle> handle;  // granted / warned-pr-granted only
  std::optional<Warning> warning;
  std::string detail;
  PhaseTimes phases;
};

/// Abstract request surface shared by the in-process gateway, the TCP client
/// and the caching proxy.
class GatewayApi {
 public:
  virtual ~GatewayApi() = default;
  virtual RequestOutcome handle_request(const AccessRequest& request) = 0;
  virtual void release(const StreamHandle& handle, const CredentialSet& credentials) = 0;
  /// Cheap handle-status query used by the proxy's liveness probe.
  virtual bool probe(const StreamHandle& handle) = 0;
};

struct GatewayConfig {
  /// Strict mode blocks deployment on PR warnings; by default PR is advisory
  /// and the request is granted with the warning attached.
  bool block_on_pr = false;
  /// Test hook: disables the one-active-query-per-(principal, stream) rule
  /// that prevents multi-window reconstruction.
  bool single_access_guard = true;
  std::size_t dnf_cap = kDefaultDnfCap;
};

// ---------------------------------------------------------------------------
// The enforcement point. Five-step request workflow: parse the user query,
// evaluate against the policy store, check the single-access guard, compile
// and merge the graphs (collecting NR/PR warnings), deploy and register.
// Policy removal or replacement withdraws every spawned graph.
// ---------------------------------------------------------------------------

class Gateway : public GatewayApi {
 public:
  Gateway(StreamEngine& engine, PolicyStore& store, GatewayConfig config = {});

  RequestOutcome handle_request(const AccessRequest& request) override;

  /// Withdraws the caller's deployment and vacates the registry slot.
  /// Throws AuthorizationError for a handle owned by other credentials and
  /// EngineError for an unknown one.
  void release(const StreamHandle& handle, const CredentialSet& credentials) override;

  bool probe(const StreamHandle& handle) override;

  /// Withdraws every graph spawned by the policy; returns how many.
  /// Removal and modification behave identically.
  std::size_t on_policy_change(const std::string& policy_id);

  std::size_t active_count() const;

 private:
  struct ActiveEntry {
    std::uint64_t graph_id;
    std::string fingerprint;
    std::string stream;
    std::string policy_id;
  };

  StreamEngine& engine_;
  PolicyStore& store_;
  GatewayConfig config_;
  mutable std::mutex mutex_;
  std::map<std::pair<std::string, std::string>, std::uint64_t> by_principal_;
  std::map<std::string, std::set<std::uint64_t>> by_policy_;
  std::map<std::uint64_t, ActiveEntry> entries_;
};

// ---------------------------------------------------------------------------
// Reconstruction oracle. Demonstrates why the single-access guard exists:
// sum-aggregated windows of sizes N..N+M over a common step M leak the raw
// stream from index N onward via pairwise differences.
// ---------------------------------------------------------------------------

struct WindowSumSeries {
  std::int64_t size = 0;
  std::int64_t step = 0;
  std::vector<std::int64_t> sums;
  std::size_t length() const { return sums.size(); }
};

/// Recovers original values a_N, a_N+1, ... from sum-aggregated window
/// streams with sizes N, N+1, ..., N+M and common step M. Differences
/// T_i = S_i - S_[i-1] are singleton subsequences; interleaving them yields
/// the suffix exactly. Throws ValidationError when the size family or the
/// sequence lengths are inconsistent.
std::vector<std::int64_t> reconstruct_from_windows(const std::vector<WindowSumSeries>& series);

struct WindowAvgSeries {
  std::int64_t size = 0;
  std::int64_t step = 0;
  std::vector<double> avgs;
  std::size_t length() const { return avgs.size(); }
};

/// Average-aggregation variant: with known window sizes each average scales
/// back to a sum, so the same differencing applies (up to floating-point
/// rounding).
std::vector<double> reconstruct_from_avg_windows(const std::vector<WindowAvgSeries>& series);

}  // namespace streamgate
