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

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "streamgate/querygraph.hpp"

namespace streamgate {

/// URI naming a deployed output stream; the capability a client uses to
/// subscribe until withdrawal.
struct StreamHandle {
  std::string uri;  // stream://<host>/<graph_id>
  bool operator==(const StreamHandle&) const = default;
};

StreamHandle make_handle(const std::string& host, std::uint64_t graph_id);
/// Extracts the graph id; throws EngineError on a malformed URI.
std::uint64_t graph_id_of(const StreamHandle& handle);

/// One output tuple consumer. Bounded buffer; the engine blocks pushes when
/// it fills (default 10,000 tuples). After end-of-stream, next() drains the
/// remaining buffer and then returns nullopt.
class Subscription {
 public:
  explicit Subscription(std::size_t capacity) : capacity_(capacity) {}

  /// Blocks until a tuple or end-of-stream.
  std::optional<Tuple> next();
  /// Non-blocking variant; false when nothing is buffered right now.
  bool try_next(Tuple& out);
  bool closed() const;
  /// Consumer-side cancellation: later deliveries are dropped and a blocked
  /// producer is released. The engine also closes on withdrawal.
  void close();

 private:
  friend class StreamEngine;
  void deliver(const Tuple& t);

  mutable std::mutex mutex_;
  std::condition_variable readable_;
  std::condition_variable writable_;
  std::deque<Tuple> buffer_;
  std::size_t capacity_;
  bool closed_ = false;
};

using SubscriptionPtr = std::shared_ptr<Subscription>;

/// Aggregates one full window into a single output tuple. `window` holds the
/// operator's input tuples in arrival order; for tuple windows its length
/// must equal op.size.
Tuple execute_window(const WindowAggOp& op, std::span<const Tuple> window, const Schema& in);

/// Renders a deployable graph as a StreamSQL-like script: input declaration,
/// one SELECT stage per operator through internal_N streams, and a final
/// output stage with CREATE WINDOW for aggregation.
std::string render_streamsql(const QueryGraph& graph, const Schema& schema);

/// Newline-delimited subscription wire format: `field=value` pairs in schema
/// order, end-of-stream sentinel line `.eos`.
inline constexpr const char* kEndOfStream = ".eos";
std::string format_record(const Schema& schema, const Tuple& t);
Tuple parse_record(const Schema& schema, const std::string& line);

// ---------------------------------------------------------------------------
// Embedded continuous-query engine. Registered streams accept pushed tuples;
// deployed graphs process every tuple in deployment order and feed their
// subscribers. Pushes to distinct streams proceed concurrently; pushes to one
// stream are serialized, and deploy/withdraw are atomic with respect to them.
// ---------------------------------------------------------------------------

class StreamEngine {
 public:
  struct Config {
    std::string host = "local";
    std::size_t subscriber_buffer = 10000;
  };

  StreamEngine() : StreamEngine(Config{}) {}
  explicit StreamEngine(Config config) : config_(std::move(config)) {}

  void register_stream(Schema schema);
  const Schema* find_stream(const std::string& name) const;
  std::vector<std::string> stream_names() const;

  /// Validates and installs the graph; windows start from the next tuple.
  StreamHandle deploy(const QueryGraph& graph);

  /// Kills the deployment: subscribers get end-of-stream, buffered window
  /// state is discarded, partial windows are never emitted.
  void withdraw(const StreamHandle& handle);
  void withdraw(std::uint64_t graph_id);

  bool is_live(const StreamHandle& handle) const;

  void push(const std::string& stream, const Tuple& t);

  SubscriptionPtr subscribe(const StreamHandle& handle);

  /// Output schema of a live deployment.
  Schema output_schema(const StreamHandle& handle) const;

 private:
  struct OpenTimeWindow {
    std::int64_t start;
    std::vector<Tuple> tuples;
  };

  struct Deployment {
    std::uint64_t id = 0;
    QueryGraph graph;
    Schema source_schema;      // raw stream schema the filter runs against
    Schema pre_window_schema;  // schema feeding the window operator (or output)
    Schema out_schema;
    std::vector<int> map_indices;

    // Tuple-window state.
    std::deque<Tuple> buffer;
    std::uint64_t buffer_base = 0;  // arrival index of buffer.front()
    std::uint64_t arrived = 0;      // post-filter/map tuple count
    std::uint64_t next_start = 0;

    // Time-window state.
    bool have_origin = false;
    std::int64_t origin_ts = 0;
    std::int64_t next_window_index = 0;
    int ts_index = -1;
    std::vector<OpenTimeWindow> open_windows;

    std::vector<SubscriptionPtr> subscribers;
    bool live = true;
  };

  struct StreamState {
    Schema schema;
    // Serializes pushes and deployment changes for this stream.
    mutable std::mutex mutex;
    std::vector<std::shared_ptr<Deployment>> deployments;
  };

  void process(Deployment& d, const Tuple& t);
  void emit(Deployment& d, const Tuple& t);

  Config config_;
  mutable std::mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<StreamState>> streams_;
  std::map<std::uint64_t, std::pair<std::string, std::shared_ptr<Deployment>>> deployments_;
  std::uint64_t next_id_ = 1;
};

}  // namespace streamgate
