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

#include <chrono>
#include <functional>
#include <map>
#include <shared_mutex>
#include <string>

#include "streamgate/gateway.hpp"

namespace streamgate {

// ---------------------------------------------------------------------------
// Client-side caching proxy. What is cached is never data, only stream
// handles: a repeated request is served from the cache after a cheap
// handle-liveness probe, skipping the whole decision/merge/deploy path.
// ---------------------------------------------------------------------------

class CachingProxy {
 public:
  explicit CachingProxy(GatewayApi& backend) : backend_(backend) {}

  struct ProxyOutcome {
    RequestOutcome outcome;
    bool cache_hit = false;
  };

  /// Serves from cache on a key hit with a live handle; otherwise forwards
  /// to the gateway and caches handle-carrying outcomes.
  ProxyOutcome proxy_request(const AccessRequest& request);

  /// Removes entries whose key matches; returns the evicted count.
  std::size_t invalidate(const std::function<bool(const std::string& key)>& match);

  /// Canonical cache key: credential fingerprint, resource, action and the
  /// user query's canonical form.
  static std::string cache_key(const AccessRequest& request);

  std::size_t size() const;

 private:
  struct CacheEntry {
    RequestOutcome outcome;
    std::chrono::steady_clock::time_point inserted_at;
  };

  GatewayApi& backend_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, CacheEntry> entries_;
};

}  // namespace streamgate
