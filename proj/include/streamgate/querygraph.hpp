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
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "streamgate/predicate.hpp"

namespace streamgate {

// ---------------------------------------------------------------------------
// Operator IR shared by the policy compiler, the merge engine and the stream
// engine: a linear filter -> map -> window-aggregation pipeline over one
// named stream, each operator optional and appearing at most once.
// ---------------------------------------------------------------------------

enum class FieldType { Timestamp, Double, Int, String };

std::string to_string(FieldType t);
FieldType field_type_from_string(const std::string& name);

struct Field {
  std::string name;
  FieldType type;
  bool operator==(const Field&) const = default;
};

struct Schema {
  std::string stream_name;
  std::vector<Field> fields;

  /// Exact-name lookup; returns nullptr when absent.
  const Field* find(const std::string& name) const;
  /// Case-insensitive lookup used for user-query attribute resolution.
  const Field* find_ci(const std::string& name) const;
  int index_of(const std::string& name) const;  // -1 when absent
  /// Index of the first timestamp field, -1 when the schema has none.
  int first_timestamp_index() const;

  /// Throws ValidationError on empty/duplicate fields.
  void validate() const;

  bool operator==(const Schema&) const = default;
};

/// Runtime cell: timestamps ride as int64 seconds.
using Value = std::variant<std::int64_t, double, std::string>;

std::string to_string(const Value& v);
bool value_matches_type(const Value& v, FieldType t);

struct Tuple {
  std::vector<Value> values;
  bool operator==(const Tuple&) const = default;
};

struct FilterOp {
  PredicatePtr condition;
};
bool operator==(const FilterOp& a, const FilterOp& b);

struct MapOp {
  /// Sorted, deduplicated projection set.
  std::vector<std::string> attributes;

  static MapOp make(std::vector<std::string> attributes);
  bool operator==(const MapOp&) const = default;
};

enum class WindowType { Tuple, Time };
enum class AggFn { Avg, Max, Min, Count, Sum, LastVal, FirstVal };

std::string to_string(WindowType t);
std::string to_string(AggFn f);
AggFn agg_fn_from_string(const std::string& name);

struct AggSpec {
  std::string attribute;
  AggFn fn;
  bool operator==(const AggSpec&) const = default;
};

struct WindowAggOp {
  WindowType type = WindowType::Tuple;
  std::int64_t size = 0;  // tuples, or seconds for time windows
  std::int64_t step = 0;
  /// Declared order is preserved; at most one function per attribute.
  std::vector<AggSpec> aggs;

  /// Enforces size/step positivity, step <= size, non-empty aggs and the
  /// one-function-per-attribute rule.
  static WindowAggOp make(WindowType type, std::int64_t size, std::int64_t step,
                          std::vector<AggSpec> aggs);

  /// Order-insensitive agg comparison; two windows with the same agg multiset
  /// are the same operator.
  bool operator==(const WindowAggOp& other) const;
};

struct QueryGraph {
  std::string source;
  std::optional<FilterOp> filter;
  std::optional<MapOp> map;
  std::optional<WindowAggOp> window;

  bool operator==(const QueryGraph& other) const;
  bool empty() const { return !filter && !map && !window; }
};

// ---------------------------------------------------------------------------
// Schema derivation.
// ---------------------------------------------------------------------------

Schema output_schema_of(const FilterOp& op, const Schema& in);
Schema output_schema_of(const MapOp& op, const Schema& in);
Schema output_schema_of(const WindowAggOp& op, const Schema& in);

/// Validates the whole pipeline against the source schema and returns the
/// derived output schema. Throws ValidationError with the offending detail.
Schema validate_graph(const QueryGraph& g, const Schema& s);

/// Aggregate output field name, e.g. avg(rainrate) -> "avgrainrate".
std::string agg_field_name(const AggSpec& agg);

/// Canonical text used for cache keys and logs:
///   `stream | FILTER <pred> | MAP a,b | WINDOW <type> <size>/<step> f(a)`
/// with attributes sorted lexicographically inside MAP and WINDOW.
std::string canonical_text(const QueryGraph& g);

/// Filter-condition truth over a runtime tuple. Cross-type comparisons
/// follow the predicate-module convention (= false, != true, ordering false).
bool tuple_satisfies(const PredicatePtr& condition, const Schema& schema, const Tuple& t);

}  // namespace streamgate
