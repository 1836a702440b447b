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

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "streamgate/gateway.hpp"
#include "streamgate/proxy.hpp"

namespace streamgate {

// ---------------------------------------------------------------------------
// Byte-stream protocol. Every message is a length-prefixed UTF-8 document:
// a 4-byte big-endian payload length followed by the payload.
//
// Requests are XML documents dispatched on the root element:
//   AccessRequest   access decision + deployment, returns outcome
//   Policy          load a policy document
//   RemovePolicy    remove by id (Id attribute)
//   HandleProbe     handle liveness (Uri attribute)
//   Release         vacate own deployment (Uri attribute + Credentials)
//   Deploy          direct engine deployment (same children as UserQuery)
//   Withdraw        direct engine withdrawal (Uri attribute)
//   Subscribe       switch the connection to record streaming (Uri attribute)
//
// Responses are text documents: a status line, then `key: value` lines.
// After an `ok` response to Subscribe the connection carries raw
// newline-delimited records (`field=value` pairs in schema order) and ends
// with the `.eos` sentinel line.
// ---------------------------------------------------------------------------

void write_frame(int fd, std::string_view payload);
/// nullopt on clean EOF before a frame starts.
std::optional<std::string> read_frame(int fd);

struct WireResponse {
  std::string status;
  std::map<std::string, std::string> fields;
};

std::string serialize_response(const WireResponse& response);
WireResponse parse_wire_response(const std::string& text);

WireResponse outcome_to_response(const RequestOutcome& outcome);
RequestOutcome outcome_from_response(const WireResponse& response);

/// Serves a gateway, its policy store and the engine's management surface on
/// one TCP port (loopback-friendly; the trusted-provider model assumes a
/// protected transport).
class GatewayServer {
 public:
  /// Binds immediately; port 0 picks an ephemeral port.
  GatewayServer(StreamEngine& engine, PolicyStore& store, Gateway& gateway,
                std::uint16_t port = 0);
  ~GatewayServer();

  std::uint16_t port() const { return port_; }
  void stop();

 private:
  void accept_loop();
  void serve_connection(int fd);
  WireResponse dispatch(int fd, const std::string& request, bool& streamed);
  void track_fd(int fd);
  void untrack_fd(int fd);

  StreamEngine& engine_;
  PolicyStore& store_;
  Gateway& gateway_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex conn_mutex_;
  std::vector<int> conn_fds_;
  std::vector<std::thread> conn_threads_;
  std::vector<std::weak_ptr<Subscription>> live_subscriptions_;
};

/// Blocking client; one connection per call, which keeps calls independent
/// and matches the request/response framing.
class GatewayClient : public GatewayApi {
 public:
  GatewayClient(std::string host, std::uint16_t port)
      : host_(std::move(host)), port_(port) {}

  RequestOutcome handle_request(const AccessRequest& request) override;
  void release(const StreamHandle& handle, const CredentialSet& credentials) override;
  bool probe(const StreamHandle& handle) override;

  std::string load_policy(const std::string& policy_xml);
  bool remove_policy(const std::string& policy_id);

  StreamHandle deploy_direct(const std::string& deploy_doc);
  void withdraw_direct(const StreamHandle& handle);

  /// Subscribes and collects records until `.eos` or `max_records`.
  std::vector<std::string> subscribe_collect(const StreamHandle& handle,
                                             std::size_t max_records);

 private:
  WireResponse round_trip(const std::string& request);
  int connect_fd() const;
  friend class ProxyServer;

  std::string host_;
  std::uint16_t port_;
};

/// Transparent caching interposition: speaks the same protocol as the
/// gateway server, answers AccessRequest documents from its handle cache
/// (adding a `cache: hit|miss` response field) and forwards everything else
/// verbatim to the upstream server, including subscription byte streams.
class ProxyServer {
 public:
  ProxyServer(std::string upstream_host, std::uint16_t upstream_port, std::uint16_t port = 0);
  ~ProxyServer();

  std::uint16_t port() const { return port_; }
  void stop();

 private:
  void accept_loop();
  void serve_connection(int fd);
  void track_fd(int fd);
  void untrack_fd(int fd);

  std::string upstream_host_;
  std::uint16_t upstream_port_;
  GatewayClient upstream_;
  CachingProxy cache_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex conn_mutex_;
  std::vector<int> conn_fds_;
  std::vector<std::thread> conn_threads_;
};

}  // namespace streamgate
