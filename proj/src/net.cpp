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

#include "streamgate/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <sstream>

#include "streamgate/errors.hpp"
#include "xmlutil.hpp"

namespace streamgate {

namespace {

constexpr std::size_t kMaxFrame = 16u << 20;

void write_all(int fd, const char* data, std::size_t len) {
  while (len > 0) {
    ssize_t n = ::send(fd, data, len, MSG_NOSIGNAL);
    if (n <= 0) throw NetError("socket write failed");
    data += n;
    len -= static_cast<std::size_t>(n);
  }
}

bool read_all(int fd, char* data, std::size_t len) {
  std::size_t got = 0;
  while (got < len) {
    ssize_t n = ::recv(fd, data + got, len - got, 0);
    if (n == 0) return false;
    if (n < 0) throw NetError("socket read failed");
    got += static_cast<std::size_t>(n);
  }
  return true;
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e)) return "parse";
  if (dynamic_cast<const ValidationError*>(&e)) return "validation";
  if (dynamic_cast<const AuthorizationError*>(&e)) return "authorization";
  if (dynamic_cast<const EscalationError*>(&e)) return "escalation";
  if (dynamic_cast<const EngineError*>(&e)) return "engine";
  return "internal";
}

[[noreturn]] void rethrow_error(const WireResponse& response) {
  auto kind = response.fields.count("kind") ? response.fields.at("kind") : "internal";
  auto message = response.fields.count("error") ? response.fields.at("error") : "remote error";
  if (kind == "parse") throw ParseError(message);
  if (kind == "validation") throw ValidationError(message);
  if (kind == "authorization") throw AuthorizationError(message);
  if (kind == "escalation") throw EscalationError(message);
  if (kind == "engine") throw EngineError(message);
  throw NetError(message);
}

}  // namespace

void write_frame(int fd, std::string_view payload) {
  if (payload.size() > kMaxFrame) throw NetError("frame too large");
  unsigned char header[4] = {
      static_cast<unsigned char>((payload.size() >> 24) & 0xff),
      static_cast<unsigned char>((payload.size() >> 16) & 0xff),
      static_cast<unsigned char>((payload.size() >> 8) & 0xff),
      static_cast<unsigned char>(payload.size() & 0xff),
  };
  write_all(fd, reinterpret_cast<const char*>(header), 4);
  write_all(fd, payload.data(), payload.size());
}

std::optional<std::string> read_frame(int fd) {
  unsigned char header[4];
  if (!read_all(fd, reinterpret_cast<char*>(header), 4)) return std::nullopt;
  std::size_t len = (static_cast<std::size_t>(header[0]) << 24) |
                    (static_cast<std::size_t>(header[1]) << 16) |
                    (static_cast<std::size_t>(header[2]) << 8) | header[3];
  if (len > kMaxFrame) throw NetError("oversized frame");
  std::string payload(len, '\0');
  if (!read_all(fd, payload.data(), len)) throw NetError("truncated frame");
  return payload;
}

std::string serialize_response(const WireResponse& response) {
  std::ostringstream out;
  out << response.status << '\n';
  for (const auto& [key, value] : response.fields) {
    std::string clean = value;
    for (char& c : clean) {
      if (c == '\n') c = ' ';
    }
    out << key << ": " << clean << '\n';
  }
  return out.str();
}

WireResponse parse_wire_response(const std::string& text) {
  WireResponse response;
  std::istringstream in(text);
  if (!std::getline(in, response.status)) throw NetError("empty response");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t colon = line.find(": ");
    if (colon == std::string::npos) continue;
    response.fields[line.substr(0, colon)] = line.substr(colon + 2);
  }
  return response;
}

WireResponse outcome_to_response(const RequestOutcome& outcome) {
  WireResponse response;
  response.status = to_string(outcome.status);
  if (outcome.handle) response.fields["handle"] = outcome.handle->uri;
  if (outcome.warning) {
    response.fields["warning"] = to_string(outcome.warning->kind);
    response.fields["explanation"] = outcome.warning->explanation;
  }
  if (!outcome.detail.empty()) response.fields["detail"] = outcome.detail;
  response.fields["decision_ns"] = std::to_string(outcome.phases.decision_ns);
  response.fields["merge_ns"] = std::to_string(outcome.phases.merge_ns);
  response.fields["deploy_ns"] = std::to_string(outcome.phases.deploy_ns);
  return response;
}

RequestOutcome outcome_from_response(const WireResponse& response) {
  RequestOutcome outcome;
  outcome.status = request_status_from_string(response.status);
  if (response.fields.count("handle")) {
    outcome.handle = StreamHandle{response.fields.at("handle")};
  }
  if (response.fields.count("warning")) {
    Warning w;
    const std::string& kind = response.fields.at("warning");
    w.kind = kind == "NR" ? WarnKind::NR : kind == "PR" ? WarnKind::PR : WarnKind::None;
    if (response.fields.count("explanation")) w.explanation = response.fields.at("explanation");
    outcome.warning = std::move(w);
  }
  if (response.fields.count("detail")) outcome.detail = response.fields.at("detail");
  auto phase = [&response](const char* key) -> std::int64_t {
    auto it = response.fields.find(key);
    return it == response.fields.end() ? 0 : std::stoll(it->second);
  };
  outcome.phases.decision_ns = phase("decision_ns");
  outcome.phases.merge_ns = phase("merge_ns");
  outcome.phases.deploy_ns = phase("deploy_ns");
  return outcome;
}

// ---------------------------------------------------------------------------
// Server
// ---------------------------------------------------------------------------

GatewayServer::GatewayServer(StreamEngine& engine, PolicyStore& store, Gateway& gateway,
                             std::uint16_t port)
    : engine_(engine), store_(store), gateway_(gateway) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw NetError("cannot create socket");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_ANY);
  addr.sin_port = htons(port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(listen_fd_);
    throw NetError("cannot bind port " + std::to_string(port));
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  if (::listen(listen_fd_, 64) != 0) {
    ::close(listen_fd_);
    throw NetError("cannot listen");
  }
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
}

GatewayServer::~GatewayServer() { stop(); }

void GatewayServer::stop() {
  bool expected = true;
  if (!running_.compare_exchange_strong(expected, false)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (acceptor_.joinable()) acceptor_.join();
  {
    std::lock_guard lock(conn_mutex_);
    for (int fd : conn_fds_) ::shutdown(fd, SHUT_RDWR);
    // Wake subscription threads parked on idle streams.
    for (const auto& weak : live_subscriptions_) {
      if (SubscriptionPtr sub = weak.lock()) sub->close();
    }
  }
  for (std::thread& t : conn_threads_) {
    if (t.joinable()) t.join();
  }
}

void GatewayServer::track_fd(int fd) {
  std::lock_guard lock(conn_mutex_);
  conn_fds_.push_back(fd);
}

void GatewayServer::untrack_fd(int fd) {
  std::lock_guard lock(conn_mutex_);
  conn_fds_.erase(std::remove(conn_fds_.begin(), conn_fds_.end(), fd), conn_fds_.end());
}

void GatewayServer::accept_loop() {
  while (running_) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) break;
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    std::lock_guard lock(conn_mutex_);
    conn_fds_.push_back(fd);
    conn_threads_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void GatewayServer::serve_connection(int fd) {
  try {
    while (running_) {
      std::optional<std::string> frame = read_frame(fd);
      if (!frame) break;
      bool streamed = false;
      WireResponse response = dispatch(fd, *frame, streamed);
      if (streamed) break;  // subscription connections are single-purpose
      write_frame(fd, serialize_response(response));
    }
  } catch (const std::exception&) {
    // connection dropped; nothing to clean beyond the fd
  }
  untrack_fd(fd);
  ::close(fd);
}

WireResponse GatewayServer::dispatch(int fd, const std::string& request, bool& streamed) {
  try {
    auto [root_name, root] = xml::parse_document(request);
    if (root_name == "AccessRequest") {
      return outcome_to_response(gateway_.handle_request(parse_access_request(request)));
    }
    if (root_name == "Policy") {
      std::string id = store_.load_policy(request);
      WireResponse ok{"ok", {}};
      ok.fields["id"] = id;
      return ok;
    }
    if (root_name == "RemovePolicy") {
      bool removed = store_.remove_policy(xml::attr(root, "Id"));
      WireResponse ok{"ok", {}};
      ok.fields["removed"] = removed ? "1" : "0";
      return ok;
    }
    if (root_name == "HandleProbe") {
      WireResponse ok{"ok", {}};
      ok.fields["live"] = engine_.is_live(StreamHandle{xml::attr(root, "Uri")}) ? "1" : "0";
      return ok;
    }
    if (root_name == "Release") {
      CredentialSet credentials;
      if (auto creds = root.get_child_optional("Credentials")) {
        for (const auto& [name, node] : *creds) {
          if (name != "Attribute") continue;
          credentials.attributes.push_back(
              SubjectAttribute{xml::attr(node, "AttributeId"), xml::attr(node, "Value")});
        }
      }
      gateway_.release(StreamHandle{xml::attr(root, "Uri")}, credentials);
      return WireResponse{"ok", {}};
    }
    if (root_name == "Deploy") {
      auto stream = root.get_child_optional("Stream");
      if (!stream) throw ParseError("Deploy document has no <Stream> element");
      std::string stream_name = xml::attr(*stream, "name");
      const Schema* schema = engine_.find_stream(stream_name);
      if (!schema) throw EngineError("unknown stream '" + stream_name + "'");
      // Deploy bodies reuse the user-query document shape.
      QueryGraph graph = parse_user_query(xml::serialize("UserQuery", root), *schema);
      StreamHandle handle = engine_.deploy(graph);
      WireResponse ok{"ok", {}};
      ok.fields["handle"] = handle.uri;
      return ok;
    }
    if (root_name == "Withdraw") {
      engine_.withdraw(StreamHandle{xml::attr(root, "Uri")});
      return WireResponse{"ok", {}};
    }
    if (root_name == "Subscribe") {
      StreamHandle handle{xml::attr(root, "Uri")};
      SubscriptionPtr sub = engine_.subscribe(handle);  // throws on dead handle
      Schema schema = engine_.output_schema(handle);
      {
        std::lock_guard lock(conn_mutex_);
        live_subscriptions_.push_back(sub);
      }
      write_frame(fd, serialize_response(WireResponse{"ok", {}}));
      streamed = true;
      try {
        while (true) {
          std::optional<Tuple> t = sub->next();
          if (!t) {
            std::string eos = std::string(kEndOfStream) + "\n";
            write_all(fd, eos.data(), eos.size());
            break;
          }
          std::string line = format_record(schema, *t) + "\n";
          write_all(fd, line.data(), line.size());
        }
      } catch (...) {
        // Client went away: cancel so pushes never park on this buffer.
        sub->close();
        throw;
      }
      sub->close();
      return WireResponse{"ok", {}};
    }
    throw ParseError("unknown request document <" + root_name + ">");
  } catch (const std::exception& e) {
    WireResponse err{"error", {}};
    err.fields["error"] = e.what();
    err.fields["kind"] = error_kind(e);
    return err;
  }
}

// ---------------------------------------------------------------------------
// Proxy server
// ---------------------------------------------------------------------------

ProxyServer::ProxyServer(std::string upstream_host, std::uint16_t upstream_port,
                         std::uint16_t port)
    : upstream_host_(std::move(upstream_host)),
      upstream_port_(upstream_port),
      upstream_(upstream_host_, upstream_port_),
      cache_(upstream_) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw NetError("cannot create socket");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_ANY);
  addr.sin_port = htons(port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(listen_fd_);
    throw NetError("cannot bind port " + std::to_string(port));
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  if (::listen(listen_fd_, 64) != 0) {
    ::close(listen_fd_);
    throw NetError("cannot listen");
  }
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
}

ProxyServer::~ProxyServer() { stop(); }

void ProxyServer::stop() {
  bool expected = true;
  if (!running_.compare_exchange_strong(expected, false)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (acceptor_.joinable()) acceptor_.join();
  {
    std::lock_guard lock(conn_mutex_);
    for (int fd : conn_fds_) ::shutdown(fd, SHUT_RDWR);
  }
  for (std::thread& t : conn_threads_) {
    if (t.joinable()) t.join();
  }
}

void ProxyServer::track_fd(int fd) {
  std::lock_guard lock(conn_mutex_);
  conn_fds_.push_back(fd);
}

void ProxyServer::untrack_fd(int fd) {
  std::lock_guard lock(conn_mutex_);
  conn_fds_.erase(std::remove(conn_fds_.begin(), conn_fds_.end(), fd), conn_fds_.end());
}

void ProxyServer::accept_loop() {
  while (running_) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) break;
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    std::lock_guard lock(conn_mutex_);
    conn_fds_.push_back(fd);
    conn_threads_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void ProxyServer::serve_connection(int fd) {
  try {
    while (running_) {
      std::optional<std::string> frame = read_frame(fd);
      if (!frame) break;

      std::string root_name;
      try {
        root_name = xml::parse_document(*frame).first;
      } catch (const ParseError& e) {
        WireResponse err{"error", {{"error", e.what()}, {"kind", "parse"}}};
        write_frame(fd, serialize_response(err));
        continue;
      }

      if (root_name == "AccessRequest") {
        WireResponse response;
        try {
          CachingProxy::ProxyOutcome outcome = cache_.proxy_request(parse_access_request(*frame));
          response = outcome_to_response(outcome.outcome);
          response.fields["cache"] = outcome.cache_hit ? "hit" : "miss";
        } catch (const std::exception& e) {
          response = WireResponse{"error", {{"error", e.what()}, {"kind", error_kind(e)}}};
        }
        write_frame(fd, serialize_response(response));
        continue;
      }

      // Everything else passes through verbatim; subscriptions keep relaying
      // raw bytes after the response frame until the upstream closes.
      int up = upstream_.connect_fd();
      track_fd(up);  // stop() must be able to break a parked relay
      try {
        write_frame(up, *frame);
        std::optional<std::string> reply = read_frame(up);
        if (!reply) throw NetError("upstream closed before response");
        write_frame(fd, *reply);  // verbatim relay
        if (root_name == "Subscribe" && parse_wire_response(*reply).status == "ok") {
          char buffer[4096];
          while (true) {
            ssize_t n = ::recv(up, buffer, sizeof(buffer), 0);
            if (n <= 0) break;
            write_all(fd, buffer, static_cast<std::size_t>(n));
          }
          untrack_fd(up);
          ::close(up);
          break;  // single-purpose connection, like the gateway server
        }
      } catch (...) {
        untrack_fd(up);
        ::close(up);
        throw;
      }
      untrack_fd(up);
      ::close(up);
    }
  } catch (const std::exception&) {
    // connection dropped
  }
  untrack_fd(fd);
  ::close(fd);
}

// ---------------------------------------------------------------------------
// Client
// ---------------------------------------------------------------------------

int GatewayClient::connect_fd() const {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* result = nullptr;
  if (::getaddrinfo(host_.c_str(), std::to_string(port_).c_str(), &hints, &result) != 0) {
    throw NetError("cannot resolve host '" + host_ + "'");
  }
  int fd = -1;
  for (addrinfo* it = result; it; it = it->ai_next) {
    fd = ::socket(it->ai_family, it->ai_socktype, it->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, it->ai_addr, it->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(result);
  if (fd < 0) throw NetError("cannot connect to " + host_ + ":" + std::to_string(port_));
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return fd;
}

WireResponse GatewayClient::round_trip(const std::string& request) {
  int fd = connect_fd();
  WireResponse response;
  try {
    write_frame(fd, request);
    std::optional<std::string> frame = read_frame(fd);
    if (!frame) throw NetError("connection closed before response");
    response = parse_wire_response(*frame);
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);
  if (response.status == "error") rethrow_error(response);
  return response;
}

RequestOutcome GatewayClient::handle_request(const AccessRequest& request) {
  return outcome_from_response(round_trip(access_request_to_xml(request)));
}

void GatewayClient::release(const StreamHandle& handle, const CredentialSet& credentials) {
  xml::Node root;
  root.put("<xmlattr>.Uri", handle.uri);
  xml::Node creds;
  for (const SubjectAttribute& a : credentials.attributes) {
    xml::Node node;
    node.put("<xmlattr>.AttributeId", a.id);
    node.put("<xmlattr>.Value", a.value);
    creds.add_child("Attribute", node);
  }
  root.add_child("Credentials", creds);
  round_trip(xml::serialize("Release", root));
}

bool GatewayClient::probe(const StreamHandle& handle) {
  xml::Node root;
  root.put("<xmlattr>.Uri", handle.uri);
  WireResponse response = round_trip(xml::serialize("HandleProbe", root));
  return response.fields.count("live") && response.fields.at("live") == "1";
}

std::string GatewayClient::load_policy(const std::string& policy_xml) {
  WireResponse response = round_trip(policy_xml);
  return response.fields.count("id") ? response.fields.at("id") : "";
}

bool GatewayClient::remove_policy(const std::string& policy_id) {
  xml::Node root;
  root.put("<xmlattr>.Id", policy_id);
  WireResponse response = round_trip(xml::serialize("RemovePolicy", root));
  return response.fields.count("removed") && response.fields.at("removed") == "1";
}

StreamHandle GatewayClient::deploy_direct(const std::string& deploy_doc) {
  WireResponse response = round_trip(deploy_doc);
  if (!response.fields.count("handle")) throw NetError("deploy response without handle");
  return StreamHandle{response.fields.at("handle")};
}

void GatewayClient::withdraw_direct(const StreamHandle& handle) {
  xml::Node root;
  root.put("<xmlattr>.Uri", handle.uri);
  round_trip(xml::serialize("Withdraw", root));
}

std::vector<std::string> GatewayClient::subscribe_collect(const StreamHandle& handle,
                                                          std::size_t max_records) {
  int fd = connect_fd();
  std::vector<std::string> records;
  try {
    xml::Node root;
    root.put("<xmlattr>.Uri", handle.uri);
    write_frame(fd, xml::serialize("Subscribe", root));
    std::optional<std::string> frame = read_frame(fd);
    if (!frame) throw NetError("connection closed before subscribe response");
    WireResponse response = parse_wire_response(*frame);
    if (response.status == "error") rethrow_error(response);

    std::string line;
    char c;
    while (records.size() < max_records) {
      ssize_t n = ::recv(fd, &c, 1, 0);
      if (n <= 0) break;
      if (c != '\n') {
        line += c;
        continue;
      }
      if (line == kEndOfStream) break;
      records.push_back(line);
      line.clear();
    }
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);
  return records;
}

}  // namespace streamgate
