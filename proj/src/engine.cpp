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

#include "streamgate/engine.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "streamgate/errors.hpp"

namespace streamgate {

// ---------------------------------------------------------------------------
// Handles
// ---------------------------------------------------------------------------

StreamHandle make_handle(const std::string& host, std::uint64_t graph_id) {
  return StreamHandle{"stream://" + host + "/" + std::to_string(graph_id)};
}

std::uint64_t graph_id_of(const StreamHandle& handle) {
  const std::string& uri = handle.uri;
  if (uri.rfind("stream://", 0) != 0) throw EngineError("malformed handle '" + uri + "'");
  std::size_t slash = uri.find_last_of('/');
  std::uint64_t id = 0;
  auto [ptr, ec] = std::from_chars(uri.data() + slash + 1, uri.data() + uri.size(), id);
  if (ec != std::errc() || ptr != uri.data() + uri.size()) {
    throw EngineError("malformed handle '" + uri + "'");
  }
  return id;
}

// ---------------------------------------------------------------------------
// Subscription
// ---------------------------------------------------------------------------

std::optional<Tuple> Subscription::next() {
  std::unique_lock lock(mutex_);
  readable_.wait(lock, [this] { return !buffer_.empty() || closed_; });
  if (buffer_.empty()) return std::nullopt;
  Tuple t = std::move(buffer_.front());
  buffer_.pop_front();
  writable_.notify_one();
  return t;
}

bool Subscription::try_next(Tuple& out) {
  std::unique_lock lock(mutex_);
  if (buffer_.empty()) return false;
  out = std::move(buffer_.front());
  buffer_.pop_front();
  writable_.notify_one();
  return true;
}

bool Subscription::closed() const {
  std::unique_lock lock(mutex_);
  return closed_ && buffer_.empty();
}

void Subscription::deliver(const Tuple& t) {
  std::unique_lock lock(mutex_);
  writable_.wait(lock, [this] { return buffer_.size() < capacity_ || closed_; });
  if (closed_) return;
  buffer_.push_back(t);
  readable_.notify_one();
}

void Subscription::close() {
  std::unique_lock lock(mutex_);
  closed_ = true;
  readable_.notify_all();
  writable_.notify_all();
}

// ---------------------------------------------------------------------------
// Window aggregation
// ---------------------------------------------------------------------------

namespace {

double as_double(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  return std::get<double>(v);
}

}  // namespace

Tuple execute_window(const WindowAggOp& op, std::span<const Tuple> window, const Schema& in) {
  if (op.type == WindowType::Tuple && window.size() != static_cast<std::size_t>(op.size)) {
    throw EngineError("tuple window of size " + std::to_string(op.size) + " executed over " +
                      std::to_string(window.size()) + " tuples");
  }
  if (window.empty()) throw EngineError("cannot aggregate an empty window");

  Tuple out;
  out.values.reserve(op.aggs.size());
  for (const AggSpec& agg : op.aggs) {
    int idx = in.index_of(agg.attribute);
    if (idx < 0) throw EngineError("window attribute '" + agg.attribute + "' not in schema");
    const FieldType type = in.fields[static_cast<std::size_t>(idx)].type;
    auto cell = [&](std::size_t row) -> const Value& {
      return window[row].values[static_cast<std::size_t>(idx)];
    };
    switch (agg.fn) {
      case AggFn::Count:
        out.values.emplace_back(static_cast<std::int64_t>(window.size()));
        break;
      case AggFn::FirstVal:
        out.values.push_back(cell(0));
        break;
      case AggFn::LastVal:
        out.values.push_back(cell(window.size() - 1));
        break;
      case AggFn::Max:
      case AggFn::Min: {
        Value best = cell(0);
        for (std::size_t r = 1; r < window.size(); ++r) {
          const Value& v = cell(r);
          bool greater = v > best;  // variant ordering; types are uniform per field
          if ((agg.fn == AggFn::Max) == greater && !(v == best)) best = v;
        }
        out.values.push_back(best);
        break;
      }
      case AggFn::Sum: {
        if (type == FieldType::Double) {
          double total = 0;
          for (std::size_t r = 0; r < window.size(); ++r) total += as_double(cell(r));
          out.values.emplace_back(total);
        } else {
          std::int64_t total = 0;
          for (std::size_t r = 0; r < window.size(); ++r) {
            total += std::get<std::int64_t>(cell(r));
          }
          out.values.emplace_back(total);
        }
        break;
      }
      case AggFn::Avg: {
        double total = 0;
        for (std::size_t r = 0; r < window.size(); ++r) total += as_double(cell(r));
        out.values.emplace_back(total / static_cast<double>(window.size()));
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// StreamSQL rendering
// ---------------------------------------------------------------------------

std::string render_streamsql(const QueryGraph& graph, const Schema& schema) {
  std::ostringstream out;
  out << "CREATE INPUT STREAM " << schema.stream_name << " (\n";
  for (std::size_t i = 0; i < schema.fields.size(); ++i) {
    out << "  " << schema.fields[i].name << " " << to_string(schema.fields[i].type)
        << (i + 1 < schema.fields.size() ? " ,\n" : "\n");
  }
  out << ");\n";

  std::vector<char> stages;  // 'f', 'm', 'w'
  if (graph.filter) stages.push_back('f');
  if (graph.map) stages.push_back('m');
  if (graph.window) stages.push_back('w');

  if (stages.empty()) {
    out << "\nCREATE OUTPUT STREAM output;\n";
    out << "SELECT * FROM " << schema.stream_name << " INTO output;\n";
    return out.str();
  }

  std::string prev = schema.stream_name;
  int internal = 0;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    bool last = i + 1 == stages.size();
    std::string target = last ? "output" : "internal_" + std::to_string(internal++);
    out << "\n";
    out << (last ? "CREATE OUTPUT STREAM " : "CREATE STREAM ") << target << ";\n";
    switch (stages[i]) {
      case 'f':
        out << "SELECT * FROM " << prev << " WHERE " << to_string(graph.filter->condition)
            << " INTO " << target << ";\n";
        break;
      case 'm': {
        out << "SELECT ";
        for (std::size_t a = 0; a < graph.map->attributes.size(); ++a) {
          if (a) out << ",";
          out << prev << "." << graph.map->attributes[a];
        }
        out << " FROM " << prev << " INTO " << target << ";\n";
        break;
      }
      case 'w': {
        const WindowAggOp& w = *graph.window;
        std::string window_name = "_" + std::to_string(w.size) + to_string(w.type);
        out << "CREATE WINDOW " << window_name << "( SIZE " << w.size << " ADVANCE " << w.step
            << (w.type == WindowType::Tuple ? " TUPLES" : " SECONDS") << ");\n";
        out << "SELECT ";
        for (std::size_t a = 0; a < w.aggs.size(); ++a) {
          if (a) out << ",\n       ";
          out << to_string(w.aggs[a].fn) << "(" << w.aggs[a].attribute << ") AS "
              << agg_field_name(w.aggs[a]);
        }
        out << " FROM " << prev << "[" << window_name << "] INTO " << target << ";\n";
        break;
      }
    }
    prev = target;
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Wire format
// ---------------------------------------------------------------------------

std::string format_record(const Schema& schema, const Tuple& t) {
  std::ostringstream out;
  for (std::size_t i = 0; i < schema.fields.size(); ++i) {
    if (i) out << ' ';
    out << schema.fields[i].name << '=' << to_string(t.values[i]);
  }
  return out.str();
}

Tuple parse_record(const Schema& schema, const std::string& line) {
  Tuple t;
  std::istringstream in(line);
  std::string token;
  std::size_t i = 0;
  while (in >> token) {
    if (i >= schema.fields.size()) throw EngineError("record has too many fields: " + line);
    std::size_t eq = token.find('=');
    if (eq == std::string::npos) throw EngineError("malformed record token '" + token + "'");
    std::string name = token.substr(0, eq);
    std::string value = token.substr(eq + 1);
    if (name != schema.fields[i].name) {
      throw EngineError("record field '" + name + "' does not match schema field '" +
                        schema.fields[i].name + "'");
    }
    switch (schema.fields[i].type) {
      case FieldType::Timestamp:
      case FieldType::Int:
        t.values.emplace_back(static_cast<std::int64_t>(std::stoll(value)));
        break;
      case FieldType::Double:
        t.values.emplace_back(std::stod(value));
        break;
      case FieldType::String:
        t.values.emplace_back(value);
        break;
    }
    ++i;
  }
  if (i != schema.fields.size()) throw EngineError("record has too few fields: " + line);
  return t;
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

void StreamEngine::register_stream(Schema schema) {
  schema.validate();
  std::unique_lock lock(registry_mutex_);
  if (streams_.count(schema.stream_name)) {
    throw EngineError("stream '" + schema.stream_name + "' already registered");
  }
  auto state = std::make_shared<StreamState>();
  state->schema = std::move(schema);
  streams_.emplace(state->schema.stream_name, std::move(state));
}

const Schema* StreamEngine::find_stream(const std::string& name) const {
  std::unique_lock lock(registry_mutex_);
  auto it = streams_.find(name);
  return it == streams_.end() ? nullptr : &it->second->schema;
}

std::vector<std::string> StreamEngine::stream_names() const {
  std::unique_lock lock(registry_mutex_);
  std::vector<std::string> out;
  for (const auto& [name, state] : streams_) out.push_back(name);
  return out;
}

StreamHandle StreamEngine::deploy(const QueryGraph& graph) {
  std::shared_ptr<StreamState> state;
  {
    std::unique_lock lock(registry_mutex_);
    auto it = streams_.find(graph.source);
    if (it == streams_.end()) throw EngineError("unknown stream '" + graph.source + "'");
    state = it->second;
  }

  auto d = std::make_shared<Deployment>();
  d->graph = graph;
  d->source_schema = state->schema;
  Schema current = state->schema;
  if (graph.filter) current = output_schema_of(*graph.filter, current);
  if (graph.map) {
    current = output_schema_of(*graph.map, current);
    Schema pre_map = graph.filter ? output_schema_of(*graph.filter, state->schema) : state->schema;
    for (const Field& f : current.fields) {
      d->map_indices.push_back(pre_map.index_of(f.name));
    }
  }
  d->pre_window_schema = current;
  if (graph.window) {
    current = output_schema_of(*graph.window, current);
    d->ts_index = d->pre_window_schema.first_timestamp_index();
  }
  d->out_schema = current;

  std::unique_lock stream_lock(state->mutex);
  std::unique_lock registry_lock(registry_mutex_);
  d->id = next_id_++;
  state->deployments.push_back(d);
  deployments_[d->id] = {graph.source, d};
  return make_handle(config_.host, d->id);
}

void StreamEngine::withdraw(const StreamHandle& handle) { withdraw(graph_id_of(handle)); }

void StreamEngine::withdraw(std::uint64_t graph_id) {
  std::shared_ptr<Deployment> d;
  std::shared_ptr<StreamState> state;
  {
    std::unique_lock lock(registry_mutex_);
    auto it = deployments_.find(graph_id);
    if (it == deployments_.end()) {
      throw EngineError("unknown graph id " + std::to_string(graph_id));
    }
    state = streams_.at(it->second.first);
    d = it->second.second;
    deployments_.erase(it);
  }
  std::unique_lock stream_lock(state->mutex);
  d->live = false;
  d->buffer.clear();
  d->open_windows.clear();
  for (const SubscriptionPtr& sub : d->subscribers) sub->close();
  d->subscribers.clear();
  auto& vec = state->deployments;
  vec.erase(std::remove(vec.begin(), vec.end(), d), vec.end());
}

bool StreamEngine::is_live(const StreamHandle& handle) const {
  std::uint64_t id;
  try {
    id = graph_id_of(handle);
  } catch (const EngineError&) {
    return false;
  }
  std::unique_lock lock(registry_mutex_);
  return deployments_.count(id) > 0;
}

SubscriptionPtr StreamEngine::subscribe(const StreamHandle& handle) {
  std::uint64_t id = graph_id_of(handle);
  std::shared_ptr<Deployment> d;
  std::shared_ptr<StreamState> state;
  {
    std::unique_lock lock(registry_mutex_);
    auto it = deployments_.find(id);
    if (it == deployments_.end()) throw EngineError("dead handle '" + handle.uri + "'");
    state = streams_.at(it->second.first);
    d = it->second.second;
  }
  std::unique_lock stream_lock(state->mutex);
  if (!d->live) throw EngineError("dead handle '" + handle.uri + "'");
  auto sub = std::make_shared<Subscription>(config_.subscriber_buffer);
  d->subscribers.push_back(sub);
  return sub;
}

Schema StreamEngine::output_schema(const StreamHandle& handle) const {
  std::uint64_t id = graph_id_of(handle);
  std::unique_lock lock(registry_mutex_);
  auto it = deployments_.find(id);
  if (it == deployments_.end()) throw EngineError("dead handle '" + handle.uri + "'");
  return it->second.second->out_schema;
}

void StreamEngine::push(const std::string& stream, const Tuple& t) {
  std::shared_ptr<StreamState> state;
  {
    std::unique_lock lock(registry_mutex_);
    auto it = streams_.find(stream);
    if (it == streams_.end()) throw EngineError("unknown stream '" + stream + "'");
    state = it->second;
  }
  if (t.values.size() != state->schema.fields.size()) {
    throw EngineError("tuple arity " + std::to_string(t.values.size()) +
                      " does not match schema '" + stream + "'");
  }
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    if (!value_matches_type(t.values[i], state->schema.fields[i].type)) {
      throw EngineError("tuple value for field '" + state->schema.fields[i].name +
                        "' has the wrong type");
    }
  }
  std::unique_lock stream_lock(state->mutex);
  for (const auto& d : state->deployments) {
    if (d->live) process(*d, t);
  }
}

void StreamEngine::emit(Deployment& d, const Tuple& t) {
  for (const SubscriptionPtr& sub : d.subscribers) sub->deliver(t);
}

void StreamEngine::process(Deployment& d, const Tuple& t) {
  if (d.graph.filter && !tuple_satisfies(d.graph.filter->condition, d.source_schema, t)) {
    return;
  }
  Tuple current = t;
  if (d.graph.map) {
    Tuple projected;
    projected.values.reserve(d.map_indices.size());
    for (int idx : d.map_indices) {
      projected.values.push_back(current.values[static_cast<std::size_t>(idx)]);
    }
    current = std::move(projected);
  }
  if (!d.graph.window) {
    emit(d, current);
    return;
  }

  const WindowAggOp& w = *d.graph.window;
  if (w.type == WindowType::Tuple) {
    d.buffer.push_back(std::move(current));
    ++d.arrived;
    if (d.arrived >= d.next_start + static_cast<std::uint64_t>(w.size)) {
      auto offset = static_cast<std::ptrdiff_t>(d.next_start - d.buffer_base);
      std::vector<Tuple> window(d.buffer.begin() + offset,
                                d.buffer.begin() + offset + static_cast<std::ptrdiff_t>(w.size));
      emit(d, execute_window(w, window, d.pre_window_schema));
      d.next_start += static_cast<std::uint64_t>(w.step);
      while (d.buffer_base < d.next_start && !d.buffer.empty()) {
        d.buffer.pop_front();
        ++d.buffer_base;
      }
    }
    return;
  }

  // Time windows: aligned to the first tuple's timestamp; a window closes
  // when a tuple at or past its end arrives. Empty windows are skipped.
  std::int64_t ts = std::get<std::int64_t>(current.values[static_cast<std::size_t>(d.ts_index)]);
  if (!d.have_origin) {
    d.have_origin = true;
    d.origin_ts = ts;
  }
  while (d.origin_ts + d.next_window_index * w.step <= ts) {
    d.open_windows.push_back(OpenTimeWindow{d.origin_ts + d.next_window_index * w.step, {}});
    ++d.next_window_index;
  }
  std::vector<OpenTimeWindow> still_open;
  for (OpenTimeWindow& ow : d.open_windows) {
    if (ow.start + w.size <= ts) {
      if (!ow.tuples.empty()) emit(d, execute_window(w, ow.tuples, d.pre_window_schema));
    } else {
      still_open.push_back(std::move(ow));
    }
  }
  d.open_windows = std::move(still_open);
  for (OpenTimeWindow& ow : d.open_windows) {
    if (ow.start <= ts && ts < ow.start + w.size) ow.tuples.push_back(current);
  }
}

}  // namespace streamgate
