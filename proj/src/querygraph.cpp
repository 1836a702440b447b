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

#include "streamgate/querygraph.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "streamgate/errors.hpp"

namespace streamgate {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool ci_equal(const std::string& a, const std::string& b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
           return std::tolower(x) == std::tolower(y);
         });
}

bool numeric_field(FieldType t) {
  return t == FieldType::Double || t == FieldType::Int || t == FieldType::Timestamp;
}

}  // namespace

std::string to_string(FieldType t) {
  switch (t) {
    case FieldType::Timestamp: return "timestamp";
    case FieldType::Double: return "double";
    case FieldType::Int: return "int";
    case FieldType::String: return "string";
  }
  return "?";
}

FieldType field_type_from_string(const std::string& name) {
  std::string n = lower(name);
  if (n == "timestamp") return FieldType::Timestamp;
  if (n == "double") return FieldType::Double;
  if (n == "int") return FieldType::Int;
  if (n == "string") return FieldType::String;
  throw ValidationError("unknown field type '" + name + "'");
}

const Field* Schema::find(const std::string& name) const {
  for (const Field& f : fields) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

const Field* Schema::find_ci(const std::string& name) const {
  for (const Field& f : fields) {
    if (ci_equal(f.name, name)) return &f;
  }
  return nullptr;
}

int Schema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

int Schema::first_timestamp_index() const {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i].type == FieldType::Timestamp) return static_cast<int>(i);
  }
  return -1;
}

void Schema::validate() const {
  if (stream_name.empty()) throw ValidationError("schema has no stream name");
  if (fields.empty()) throw ValidationError("schema '" + stream_name + "' has no fields");
  std::set<std::string> seen;
  for (const Field& f : fields) {
    if (f.name.empty()) throw ValidationError("schema '" + stream_name + "' has an unnamed field");
    if (!seen.insert(f.name).second) {
      throw ValidationError("duplicate field '" + f.name + "' in schema '" + stream_name + "'");
    }
  }
}

std::string to_string(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&v)) {
    std::ostringstream out;
    out << *d;
    return out.str();
  }
  return std::get<std::string>(v);
}

bool value_matches_type(const Value& v, FieldType t) {
  switch (t) {
    case FieldType::Timestamp:
    case FieldType::Int: return std::holds_alternative<std::int64_t>(v);
    case FieldType::Double: return std::holds_alternative<double>(v);
    case FieldType::String: return std::holds_alternative<std::string>(v);
  }
  return false;
}

bool operator==(const FilterOp& a, const FilterOp& b) { return equal(a.condition, b.condition); }

MapOp MapOp::make(std::vector<std::string> attributes) {
  std::sort(attributes.begin(), attributes.end());
  attributes.erase(std::unique(attributes.begin(), attributes.end()), attributes.end());
  if (attributes.empty()) throw ValidationError("map operator with empty attribute set");
  return MapOp{std::move(attributes)};
}

std::string to_string(WindowType t) { return t == WindowType::Tuple ? "tuple" : "time"; }

std::string to_string(AggFn f) {
  switch (f) {
    case AggFn::Avg: return "avg";
    case AggFn::Max: return "max";
    case AggFn::Min: return "min";
    case AggFn::Count: return "count";
    case AggFn::Sum: return "sum";
    case AggFn::LastVal: return "lastval";
    case AggFn::FirstVal: return "firstval";
  }
  return "?";
}

AggFn agg_fn_from_string(const std::string& name) {
  std::string n = lower(name);
  if (n == "avg" || n == "average") return AggFn::Avg;
  if (n == "max" || n == "maximum") return AggFn::Max;
  if (n == "min" || n == "minimum") return AggFn::Min;
  if (n == "count") return AggFn::Count;
  if (n == "sum") return AggFn::Sum;
  if (n == "lastval" || n == "lastvalue") return AggFn::LastVal;
  if (n == "firstval" || n == "firstvalue") return AggFn::FirstVal;
  throw ValidationError("unknown aggregate function '" + name + "'");
}

WindowAggOp WindowAggOp::make(WindowType type, std::int64_t size, std::int64_t step,
                              std::vector<AggSpec> aggs) {
  if (size <= 0) throw ValidationError("window size must be positive");
  if (step <= 0) throw ValidationError("window step must be positive");
  if (step > size) throw ValidationError("window step exceeds window size");
  if (aggs.empty()) throw ValidationError("window operator needs at least one aggregate");
  std::set<std::string> seen;
  for (const AggSpec& a : aggs) {
    if (!seen.insert(a.attribute).second) {
      throw ValidationError("attribute '" + a.attribute +
                            "' aggregated more than once in one window");
    }
  }
  return WindowAggOp{type, size, step, std::move(aggs)};
}

bool WindowAggOp::operator==(const WindowAggOp& other) const {
  if (type != other.type || size != other.size || step != other.step) return false;
  auto sorted = [](std::vector<AggSpec> v) {
    std::sort(v.begin(), v.end(), [](const AggSpec& a, const AggSpec& b) {
      return a.attribute < b.attribute;
    });
    return v;
  };
  return sorted(aggs) == sorted(other.aggs);
}

bool QueryGraph::operator==(const QueryGraph& other) const {
  return source == other.source && filter == other.filter && map == other.map &&
         window == other.window;
}

// ---------------------------------------------------------------------------
// Schema derivation
// ---------------------------------------------------------------------------

Schema output_schema_of(const FilterOp& op, const Schema& in) {
  for (const std::string& attr : referenced_attributes(op.condition)) {
    const Field* f = in.find(attr);
    if (!f) throw ValidationError("filter references unknown attribute '" + attr + "'");
  }
  // Per-leaf type discipline: ordering needs a numeric field, equality needs
  // matching literal/field type classes.
  for_each_leaf(op.condition, [&](const SimpleExpression& s) {
    const Field* f = in.find(s.attribute);
    if (!f) return;
    bool lit_str = std::holds_alternative<std::string>(s.literal);
    bool field_str = f->type == FieldType::String;
    if (!lit_str && field_str && (s.op != CmpOp::Eq && s.op != CmpOp::Ne)) {
      throw ValidationError("ordering comparison on string field '" + s.attribute + "'");
    }
    if (lit_str && !field_str) {
      throw ValidationError("string literal compared against non-string field '" + s.attribute +
                            "'");
    }
  });
  return in;
}

Schema output_schema_of(const MapOp& op, const Schema& in) {
  if (op.attributes.empty()) throw ValidationError("map operator with empty attribute set");
  std::set<std::string> keep;
  for (const std::string& attr : op.attributes) {
    if (!in.find(attr)) throw ValidationError("map projects unknown attribute '" + attr + "'");
    keep.insert(attr);
  }
  Schema out;
  out.stream_name = in.stream_name;
  for (const Field& f : in.fields) {
    if (keep.count(f.name)) out.fields.push_back(f);
  }
  return out;
}

std::string agg_field_name(const AggSpec& agg) { return to_string(agg.fn) + agg.attribute; }

Schema output_schema_of(const WindowAggOp& op, const Schema& in) {
  if (op.type == WindowType::Time && in.first_timestamp_index() < 0) {
    throw ValidationError("time window over schema without a timestamp field");
  }
  Schema out;
  out.stream_name = in.stream_name;
  for (const AggSpec& agg : op.aggs) {
    const Field* f = in.find(agg.attribute);
    if (!f) {
      throw ValidationError("window aggregates unknown attribute '" + agg.attribute + "'");
    }
    FieldType result_type;
    switch (agg.fn) {
      case AggFn::Avg:
        if (!numeric_field(f->type)) {
          throw ValidationError("avg over non-numeric attribute '" + agg.attribute + "'");
        }
        result_type = FieldType::Double;
        break;
      case AggFn::Sum:
        if (!numeric_field(f->type)) {
          throw ValidationError("sum over non-numeric attribute '" + agg.attribute + "'");
        }
        result_type = f->type == FieldType::Double ? FieldType::Double : FieldType::Int;
        break;
      case AggFn::Count:
        result_type = FieldType::Int;
        break;
      default:
        result_type = f->type;
        break;
    }
    out.fields.push_back(Field{agg_field_name(agg), result_type});
  }
  return out;
}

Schema validate_graph(const QueryGraph& g, const Schema& s) {
  s.validate();
  if (g.source != s.stream_name) {
    throw ValidationError("graph source '" + g.source + "' does not match schema '" +
                          s.stream_name + "'");
  }
  Schema current = s;
  if (g.filter) current = output_schema_of(*g.filter, current);
  if (g.map) current = output_schema_of(*g.map, current);
  if (g.window) current = output_schema_of(*g.window, current);
  return current;
}

std::string canonical_text(const QueryGraph& g) {
  std::ostringstream out;
  out << g.source;
  if (g.filter) out << " | FILTER " << to_string(g.filter->condition);
  if (g.map) {
    out << " | MAP ";
    for (std::size_t i = 0; i < g.map->attributes.size(); ++i) {
      if (i) out << ",";
      out << g.map->attributes[i];
    }
  }
  if (g.window) {
    std::vector<AggSpec> aggs = g.window->aggs;
    std::sort(aggs.begin(), aggs.end(),
              [](const AggSpec& a, const AggSpec& b) { return a.attribute < b.attribute; });
    out << " | WINDOW " << to_string(g.window->type) << " " << g.window->size << "/"
        << g.window->step << " ";
    for (std::size_t i = 0; i < aggs.size(); ++i) {
      if (i) out << ",";
      out << to_string(aggs[i].fn) << "(" << aggs[i].attribute << ")";
    }
  }
  return out.str();
}

bool tuple_satisfies(const PredicatePtr& condition, const Schema& schema, const Tuple& t) {
  return evaluate_with(condition, [&](const SimpleExpression& s) {
    int idx = schema.index_of(s.attribute);
    if (idx < 0) throw ValidationError("filter attribute '" + s.attribute + "' not in schema");
    const Value& v = t.values[static_cast<std::size_t>(idx)];
    if (const auto* str = std::get_if<std::string>(&v)) {
      return leaf_holds(s, Literal{*str});
    }
    // Numeric runtime value against the literal.
    if (const auto* lit = std::get_if<Decimal>(&s.literal)) {
      double x = std::holds_alternative<std::int64_t>(v)
                     ? static_cast<double>(std::get<std::int64_t>(v))
                     : std::get<double>(v);
      double w = lit->to_double();
      switch (s.op) {
        case CmpOp::Lt: return x < w;
        case CmpOp::Gt: return x > w;
        case CmpOp::Le: return x <= w;
        case CmpOp::Ge: return x >= w;
        case CmpOp::Eq: return x == w;
        case CmpOp::Ne: return x != w;
      }
      return false;
    }
    return s.op == CmpOp::Ne;  // number against string literal
  });
}

}  // namespace streamgate
