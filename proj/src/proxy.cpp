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

#include "streamgate/proxy.hpp"

namespace streamgate {

std::string CachingProxy::cache_key(const AccessRequest& request) {
  std::string key = request.credentials.fingerprint();
  key += '\x1f';
  key += request.resource;
  key += '\x1f';
  key += request.action;
  key += '\x1f';
  if (request.user_query) key += canonical_user_query(*request.user_query);
  return key;
}

CachingProxy::ProxyOutcome CachingProxy::proxy_request(const AccessRequest& request) {
  std::string key = cache_key(request);
  {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(key);
    if (it != entries_.end()) {
      // Never serve a withdrawn handle; the probe keeps the cache honest
      // across policy changes.
      if (it->second.outcome.handle && backend_.probe(*it->second.outcome.handle)) {
        return ProxyOutcome{it->second.outcome, true};
      }
    }
  }
  {
    // Dead or missing: drop any stale entry before refetching.
    std::unique_lock lock(mutex_);
    auto it = entries_.find(key);
    if (it != entries_.end() &&
        !(it->second.outcome.handle && backend_.probe(*it->second.outcome.handle))) {
      entries_.erase(it);
    }
  }
  RequestOutcome outcome = backend_.handle_request(request);
  if (outcome.handle) {
    std::unique_lock lock(mutex_);
    entries_[key] = CacheEntry{outcome, std::chrono::steady_clock::now()};
  }
  return ProxyOutcome{std::move(outcome), false};
}

std::size_t CachingProxy::invalidate(const std::function<bool(const std::string& key)>& match) {
  std::unique_lock lock(mutex_);
  std::size_t evicted = 0;
  for (auto it = entries_.begin(); it != entries_.end();) {
    if (match(it->first)) {
      it = entries_.erase(it);
      ++evicted;
    } else {
      ++it;
    }
  }
  return evicted;
}

std::size_t CachingProxy::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

}  // namespace streamgate
