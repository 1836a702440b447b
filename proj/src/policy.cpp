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

#include "streamgate/policy.hpp"

#include <algorithm>
#include <cctype>
#include <mutex>
#include <sstream>

#include "streamgate/errors.hpp"
#include "xmlutil.hpp"

namespace streamgate {

namespace {

constexpr const char* kXsString = "http://www.w3.org/2001/XMLSchema#string";
constexpr const char* kXsInteger = "http://www.w3.org/2001/XMLSchema#integer";

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

ObligationKind obligation_kind_from_id(const std::string& id) {
  std::string n = lower(id);
  // Both spellings occur in the wild: -filter/-filtering, -map/-mapping,
  // -window/-window-aggregation.
  if (n.find("stream-filter") != std::string::npos) return ObligationKind::Filter;
  if (n.find("stream-map") != std::string::npos) return ObligationKind::Map;
  if (n.find("stream-window") != std::string::npos) return ObligationKind::Window;
  throw ValidationError("unknown obligation id '" + id + "'");
}

AssignmentType data_type_from_uri(const std::string& uri) {
  std::string n = lower(uri);
  if (n == lower(kXsString) || n == "string") return AssignmentType::String;
  if (n == lower(kXsInteger) || n == "integer") return AssignmentType::Integer;
  throw ValidationError("unsupported assignment data type '" + uri + "'");
}

std::string data_type_uri(AssignmentType t) {
  return t == AssignmentType::String ? kXsString : kXsInteger;
}

enum class AssignmentRole { FilterCondition, MapAttribute, WindowType, WindowSize, WindowStep, WindowAttr };

AssignmentRole assignment_role(const std::string& attribute_id) {
  std::string n = lower(attribute_id);
  if (n.find("filter-condition") != std::string::npos) return AssignmentRole::FilterCondition;
  if (n.find("map-attribute") != std::string::npos) return AssignmentRole::MapAttribute;
  if (n.find("window-type") != std::string::npos) return AssignmentRole::WindowType;
  if (n.find("window-size") != std::string::npos) return AssignmentRole::WindowSize;
  if (n.find("window-step") != std::string::npos) return AssignmentRole::WindowStep;
  if (n.find("window-attr") != std::string::npos) return AssignmentRole::WindowAttr;
  throw ValidationError("unknown assignment attribute id '" + attribute_id + "'");
}

std::int64_t parse_int(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    std::int64_t v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("invalid integer for " + what + ": '" + text + "'");
  }
}

std::string resolve_attribute(const Schema& schema, const std::string& name) {
  const Field* f = schema.find_ci(name);
  if (!f) {
    throw ValidationError("attribute '" + name + "' not in stream '" + schema.stream_name + "'");
  }
  return f->name;
}

/// Rewrites every leaf attribute to the schema's canonical casing.
PredicatePtr resolve_predicate_attributes(const PredicatePtr& p, const Schema& schema) {
  const auto& n = p->node();
  if (const auto* s = std::get_if<SimpleExpression>(&n)) {
    SimpleExpression copy = *s;
    copy.attribute = resolve_attribute(schema, s->attribute);
    return leaf(std::move(copy));
  }
  if (const auto* x = std::get_if<NotNode>(&n)) {
    return not_of(resolve_predicate_attributes(x->child, schema));
  }
  if (const auto* a = std::get_if<AndNode>(&n)) {
    return and_of(resolve_predicate_attributes(a->lhs, schema),
                  resolve_predicate_attributes(a->rhs, schema));
  }
  const auto& o = std::get<OrNode>(n);
  return or_of(resolve_predicate_attributes(o.lhs, schema),
               resolve_predicate_attributes(o.rhs, schema));
}

}  // namespace

std::string CredentialSet::fingerprint() const {
  std::vector<SubjectAttribute> sorted = attributes;
  std::sort(sorted.begin(), sorted.end(), [](const SubjectAttribute& a, const SubjectAttribute& b) {
    return a.id != b.id ? a.id < b.id : a.value < b.value;
  });
  std::string out;
  for (const SubjectAttribute& a : sorted) {
    out += a.id;
    out += '=';
    out += a.value;
    out += ';';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Policy document
// ---------------------------------------------------------------------------

Policy parse_policy_document(const std::string& xml_text) {
  auto [root_name, root] = xml::parse_document(xml_text);
  if (root_name != "Policy") throw ParseError("expected <Policy> document, got <" + root_name + ">");

  Policy policy;
  policy.id = xml::attr(root, "PolicyId");
  std::string effect = xml::attr_opt(root, "Effect").value_or("Permit");
  if (effect == "Permit") {
    policy.effect = Effect::Permit;
  } else if (effect == "Deny") {
    policy.effect = Effect::Deny;
  } else {
    throw ValidationError("unknown policy effect '" + effect + "'");
  }

  const xml::Node* target = nullptr;
  if (auto t = root.get_child_optional("Target")) target = &*t;
  if (!target) throw ParseError("policy '" + policy.id + "' has no Target");
  if (auto subjects = target->get_child_optional("Subjects")) {
    for (const auto& [name, node] : *subjects) {
      if (name != "Subject") continue;
      policy.target.subjects.push_back(
          SubjectAttribute{xml::attr(node, "AttributeId"), xml::attr(node, "Value")});
    }
  }
  if (auto resources = target->get_child_optional("Resources")) {
    for (const auto& [name, node] : *resources) {
      if (name == "Resource") policy.target.resource = xml::attr(node, "Value");
    }
  }
  if (auto actions = target->get_child_optional("Actions")) {
    for (const auto& [name, node] : *actions) {
      if (name == "Action") policy.target.action = xml::attr(node, "Value");
    }
  }
  if (policy.target.resource.empty()) {
    throw ValidationError("policy '" + policy.id + "' targets no resource");
  }

  if (auto obligations = root.get_child_optional("Obligations")) {
    for (const auto& [name, node] : *obligations) {
      if (name != "Obligation") continue;
      Obligation ob;
      ob.kind = obligation_kind_from_id(xml::attr(node, "ObligationId"));
      std::string fulfill = xml::attr_opt(node, "FulfillOn").value_or("Permit");
      if (fulfill != "Permit") {
        throw ValidationError("stream obligations fulfil on Permit only, got '" + fulfill + "'");
      }
      for (const auto& [cname, cnode] : node) {
        if (cname != "AttributeAssignment") continue;
        AttributeAssignment assignment;
        assignment.attribute_id = xml::attr(cnode, "AttributeId");
        assignment.data_type = data_type_from_uri(xml::attr(cnode, "DataType"));
        assignment.value = xml::text_of(cnode);
        if (assignment.data_type == AssignmentType::Integer) {
          parse_int(assignment.value, assignment.attribute_id);  // invariant check
        }
        ob.assignments.push_back(std::move(assignment));
      }
      policy.obligations.push_back(std::move(ob));
    }
  }
  return policy;
}

std::string policy_to_xml(const Policy& policy) {
  xml::Node root;
  root.put("<xmlattr>.PolicyId", policy.id);
  root.put("<xmlattr>.Effect", policy.effect == Effect::Permit ? "Permit" : "Deny");
  xml::Node target;
  xml::Node subjects;
  for (const SubjectAttribute& s : policy.target.subjects) {
    xml::Node subject;
    subject.put("<xmlattr>.AttributeId", s.id);
    subject.put("<xmlattr>.Value", s.value);
    subjects.add_child("Subject", subject);
  }
  target.add_child("Subjects", subjects);
  xml::Node resources;
  xml::Node resource;
  resource.put("<xmlattr>.Value", policy.target.resource);
  resources.add_child("Resource", resource);
  target.add_child("Resources", resources);
  xml::Node actions;
  xml::Node action;
  action.put("<xmlattr>.Value", policy.target.action);
  actions.add_child("Action", action);
  target.add_child("Actions", actions);
  root.add_child("Target", target);

  xml::Node obligations;
  for (const Obligation& ob : policy.obligations) {
    xml::Node node;
    const char* id = ob.kind == ObligationKind::Filter   ? "exacml:obligation:stream-filter"
                     : ob.kind == ObligationKind::Map    ? "exacml:obligation:stream-map"
                                                         : "exacml:obligation:stream-window";
    node.put("<xmlattr>.ObligationId", id);
    node.put("<xmlattr>.FulfillOn", "Permit");
    for (const AttributeAssignment& a : ob.assignments) {
      xml::Node assign;
      assign.put("<xmlattr>.AttributeId", a.attribute_id);
      assign.put("<xmlattr>.DataType", data_type_uri(a.data_type));
      assign.put_value(a.value);
      node.add_child("AttributeAssignment", assign);
    }
    obligations.add_child("Obligation", node);
  }
  root.add_child("Obligations", obligations);
  return xml::serialize("Policy", root);
}

// ---------------------------------------------------------------------------
// Obligation compilation
// ---------------------------------------------------------------------------

QueryGraph obligations_to_graph(const std::vector<Obligation>& obligations,
                                const Schema& schema) {
  QueryGraph graph;
  graph.source = schema.stream_name;

  for (const Obligation& ob : obligations) {
    switch (ob.kind) {
      case ObligationKind::Filter: {
        if (graph.filter) throw ValidationError("duplicate filter obligation");
        std::string condition;
        for (const AttributeAssignment& a : ob.assignments) {
          if (assignment_role(a.attribute_id) == AssignmentRole::FilterCondition) {
            if (!condition.empty()) throw ValidationError("filter obligation with two conditions");
            condition = a.value;
          }
        }
        if (condition.empty()) throw ValidationError("filter obligation without a condition");
        PredicatePtr p = parse_predicate(condition, Origin::Policy);
        graph.filter = FilterOp{resolve_predicate_attributes(p, schema)};
        break;
      }
      case ObligationKind::Map: {
        if (graph.map) throw ValidationError("duplicate map obligation");
        std::vector<std::string> attrs;
        for (const AttributeAssignment& a : ob.assignments) {
          if (assignment_role(a.attribute_id) == AssignmentRole::MapAttribute) {
            attrs.push_back(resolve_attribute(schema, a.value));
          }
        }
        graph.map = MapOp::make(std::move(attrs));
        break;
      }
      case ObligationKind::Window: {
        if (graph.window) throw ValidationError("duplicate window obligation");
        std::optional<WindowType> type;
        std::optional<std::int64_t> size, step;
        std::vector<AggSpec> aggs;
        for (const AttributeAssignment& a : ob.assignments) {
          switch (assignment_role(a.attribute_id)) {
            case AssignmentRole::WindowType: {
              std::string t = lower(xml::trim(a.value));
              if (t == "tuple") {
                type = WindowType::Tuple;
              } else if (t == "time") {
                type = WindowType::Time;
              } else {
                throw ValidationError("unknown window type '" + a.value + "'");
              }
              break;
            }
            case AssignmentRole::WindowSize:
              size = parse_int(a.value, "window size");
              break;
            case AssignmentRole::WindowStep:
              step = parse_int(a.value, "window step");
              break;
            case AssignmentRole::WindowAttr: {
              std::string v = xml::trim(a.value);
              std::size_t colon = v.rfind(':');
              if (colon == std::string::npos || colon == 0 || colon + 1 >= v.size()) {
                throw ValidationError("window attribute must be 'attribute:function', got '" + v +
                                      "'");
              }
              aggs.push_back(AggSpec{resolve_attribute(schema, v.substr(0, colon)),
                                     agg_fn_from_string(v.substr(colon + 1))});
              break;
            }
            default:
              throw ValidationError("assignment '" + a.attribute_id +
                                    "' not valid in a window obligation");
          }
        }
        if (!type) throw ValidationError("window obligation missing type assignment");
        if (!size) throw ValidationError("window obligation missing size assignment");
        if (!step) throw ValidationError("window obligation missing step assignment");
        graph.window = WindowAggOp::make(*type, *size, *step, std::move(aggs));
        break;
      }
    }
  }
  validate_graph(graph, schema);
  return graph;
}

std::vector<Obligation> graph_to_obligations(const QueryGraph& graph) {
  std::vector<Obligation> out;
  if (graph.filter) {
    Obligation ob;
    ob.kind = ObligationKind::Filter;
    ob.assignments.push_back(AttributeAssignment{"pCloud:obligation:stream-filter-condition-id",
                                                 AssignmentType::String,
                                                 to_string(graph.filter->condition)});
    out.push_back(std::move(ob));
  }
  if (graph.map) {
    Obligation ob;
    ob.kind = ObligationKind::Map;
    for (const std::string& attr : graph.map->attributes) {
      ob.assignments.push_back(AttributeAssignment{"pCloud:obligation:stream-map-attribute-id",
                                                   AssignmentType::String, attr});
    }
    out.push_back(std::move(ob));
  }
  if (graph.window) {
    Obligation ob;
    ob.kind = ObligationKind::Window;
    ob.assignments.push_back(AttributeAssignment{"pCloud:obligation:stream-window-step-id",
                                                 AssignmentType::Integer,
                                                 std::to_string(graph.window->step)});
    ob.assignments.push_back(AttributeAssignment{"pCloud:obligation:stream-window-size-id",
                                                 AssignmentType::Integer,
                                                 std::to_string(graph.window->size)});
    ob.assignments.push_back(AttributeAssignment{"pCloud:obligation:stream-window-type-id",
                                                 AssignmentType::String,
                                                 to_string(graph.window->type)});
    for (const AggSpec& agg : graph.window->aggs) {
      ob.assignments.push_back(AttributeAssignment{"pCloud:obligation:stream-window-attr-id",
                                                   AssignmentType::String,
                                                   agg.attribute + ":" + to_string(agg.fn)});
    }
    out.push_back(std::move(ob));
  }
  return out;
}

// ---------------------------------------------------------------------------
// User query document
// ---------------------------------------------------------------------------

QueryGraph parse_user_query(const std::string& xml_text, const Schema& schema) {
  auto [root_name, root] = xml::parse_document(xml_text);
  if (root_name != "UserQuery") {
    throw ParseError("expected <UserQuery> document, got <" + root_name + ">");
  }

  QueryGraph graph;
  auto stream = root.get_child_optional("Stream");
  if (!stream) throw ParseError("user query has no <Stream> element");
  std::string requested = xml::attr(*stream, "name");
  std::string requested_lower = lower(requested);
  if (requested_lower != lower(schema.stream_name)) {
    throw ValidationError("user query targets stream '" + requested + "', expected '" +
                          schema.stream_name + "'");
  }
  graph.source = schema.stream_name;

  if (auto filter = root.get_child_optional("Filter")) {
    auto condition = filter->get_child_optional("FilterCondition");
    if (!condition) throw ParseError("Filter element without FilterCondition");
    PredicatePtr p = parse_predicate(xml::text_of(*condition), Origin::User);
    graph.filter = FilterOp{resolve_predicate_attributes(p, schema)};
  }

  if (auto map = root.get_child_optional("Map")) {
    std::vector<std::string> attrs;
    for (const auto& [name, node] : *map) {
      if (name == "Attribute") attrs.push_back(resolve_attribute(schema, xml::text_of(node)));
    }
    graph.map = MapOp::make(std::move(attrs));
  }

  if (auto agg = root.get_child_optional("Aggregation")) {
    std::string type_text = lower(xml::trim(agg->get<std::string>("WindowType", "")));
    WindowType type;
    if (type_text == "tuple") {
      type = WindowType::Tuple;
    } else if (type_text == "time") {
      type = WindowType::Time;
    } else {
      throw ValidationError("unknown window type '" + type_text + "'");
    }
    std::int64_t size = parse_int(xml::trim(agg->get<std::string>("WindowSize", "")), "WindowSize");
    std::int64_t step = parse_int(xml::trim(agg->get<std::string>("WindowStep", "")), "WindowStep");
    std::vector<AggSpec> aggs;
    for (const auto& [name, node] : *agg) {
      if (name != "Attribute") continue;
      std::string v = xml::text_of(node);
      std::size_t open = v.find('(');
      std::size_t close = v.rfind(')');
      if (open == std::string::npos || close == std::string::npos || close < open ||
          close + 1 != v.size()) {
        throw ValidationError("aggregation attribute must be 'func(attr)', got '" + v + "'");
      }
      aggs.push_back(AggSpec{resolve_attribute(schema, xml::trim(v.substr(open + 1, close - open - 1))),
                             agg_fn_from_string(xml::trim(v.substr(0, open)))});
    }
    graph.window = WindowAggOp::make(type, size, step, std::move(aggs));
  }

  validate_graph(graph, schema);
  return graph;
}

std::string graph_to_query_doc(const QueryGraph& graph, const std::string& root_name) {
  xml::Node root;
  xml::Node stream;
  stream.put("<xmlattr>.name", graph.source);
  root.add_child("Stream", stream);
  if (graph.filter) {
    xml::Node filter;
    filter.put("FilterCondition", to_string(graph.filter->condition));
    root.add_child("Filter", filter);
  }
  if (graph.map) {
    xml::Node map;
    for (const std::string& attr : graph.map->attributes) {
      xml::Node node;
      node.put_value(attr);
      map.add_child("Attribute", node);
    }
    root.add_child("Map", map);
  }
  if (graph.window) {
    xml::Node agg;
    agg.put("WindowType", to_string(graph.window->type));
    agg.put("WindowSize", std::to_string(graph.window->size));
    agg.put("WindowStep", std::to_string(graph.window->step));
    for (const AggSpec& spec : graph.window->aggs) {
      xml::Node node;
      node.put_value(to_string(spec.fn) + "(" + spec.attribute + ")");
      agg.add_child("Attribute", node);
    }
    root.add_child("Aggregation", agg);
  }
  return xml::serialize(root_name, root);
}

std::string canonical_user_query(const std::string& xml_text) {
  auto squeeze = [](const std::string& s) {
    std::string out;
    bool in_space = false;
    for (char c : s) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        in_space = true;
        continue;
      }
      if (in_space && !out.empty()) out += ' ';
      in_space = false;
      out += c;
    }
    return out;
  };
  try {
    auto [root_name, root] = xml::parse_document(xml_text);
    if (root_name != "UserQuery") return squeeze(xml_text);
    std::ostringstream key;
    if (auto stream = root.get_child_optional("Stream")) {
      key << "stream=" << lower(xml::attr(*stream, "name"));
    }
    if (auto filter = root.get_child_optional("Filter")) {
      std::string text = xml::trim(filter->get<std::string>("FilterCondition", ""));
      try {
        // Attribute matching is case-insensitive, so fold attribute names.
        std::function<PredicatePtr(const PredicatePtr&)> fold =
            [&fold](const PredicatePtr& p) -> PredicatePtr {
          const auto& n = p->node();
          if (const auto* s = std::get_if<SimpleExpression>(&n)) {
            SimpleExpression copy = *s;
            copy.attribute = lower(copy.attribute);
            return leaf(std::move(copy));
          }
          if (const auto* x = std::get_if<NotNode>(&n)) return not_of(fold(x->child));
          if (const auto* a = std::get_if<AndNode>(&n)) return and_of(fold(a->lhs), fold(a->rhs));
          const auto& o = std::get<OrNode>(n);
          return or_of(fold(o.lhs), fold(o.rhs));
        };
        key << "|filter=" << to_string(fold(parse_predicate(text)));
      } catch (const ParseError&) {
        key << "|filter=" << squeeze(text);
      }
    }
    if (auto map = root.get_child_optional("Map")) {
      std::vector<std::string> attrs;
      for (const auto& [name, node] : *map) {
        if (name == "Attribute") attrs.push_back(lower(xml::text_of(node)));
      }
      std::sort(attrs.begin(), attrs.end());
      key << "|map=";
      for (std::size_t i = 0; i < attrs.size(); ++i) key << (i ? "," : "") << attrs[i];
    }
    if (auto agg = root.get_child_optional("Aggregation")) {
      key << "|window=" << lower(xml::trim(agg->get<std::string>("WindowType", ""))) << ","
          << xml::trim(agg->get<std::string>("WindowSize", "")) << ","
          << xml::trim(agg->get<std::string>("WindowStep", ""));
      std::vector<std::string> attrs;
      for (const auto& [name, node] : *agg) {
        if (name == "Attribute") attrs.push_back(lower(xml::text_of(node)));
      }
      std::sort(attrs.begin(), attrs.end());
      for (const std::string& a : attrs) key << "," << a;
    }
    return key.str();
  } catch (const ParseError&) {
    return squeeze(xml_text);
  }
}

// ---------------------------------------------------------------------------
// Access request document
// ---------------------------------------------------------------------------

AccessRequest parse_access_request(const std::string& xml_text) {
  auto [root_name, root] = xml::parse_document(xml_text);
  if (root_name != "AccessRequest") {
    throw ParseError("expected <AccessRequest> document, got <" + root_name + ">");
  }
  AccessRequest request;
  request.resource = xml::attr(root, "Resource");
  request.action = xml::attr_opt(root, "Action").value_or("read");
  if (auto creds = root.get_child_optional("Credentials")) {
    for (const auto& [name, node] : *creds) {
      if (name != "Attribute") continue;
      request.credentials.attributes.push_back(
          SubjectAttribute{xml::attr(node, "AttributeId"), xml::attr(node, "Value")});
    }
  }
  if (auto query = root.get_child_optional("UserQuery")) {
    request.user_query = xml::serialize("UserQuery", *query);
  }
  return request;
}

std::string access_request_to_xml(const AccessRequest& request) {
  xml::Node root;
  root.put("<xmlattr>.Resource", request.resource);
  root.put("<xmlattr>.Action", request.action);
  xml::Node creds;
  for (const SubjectAttribute& a : request.credentials.attributes) {
    xml::Node node;
    node.put("<xmlattr>.AttributeId", a.id);
    node.put("<xmlattr>.Value", a.value);
    creds.add_child("Attribute", node);
  }
  root.add_child("Credentials", creds);
  if (request.user_query) {
    auto [name, query] = xml::parse_document(*request.user_query);
    root.add_child("UserQuery", query);
  }
  return xml::serialize("AccessRequest", root);
}

// ---------------------------------------------------------------------------
// Store
// ---------------------------------------------------------------------------

Policy PolicyStore::parse_and_validate(const std::string& xml_text) const {
  Policy policy = parse_policy_document(xml_text);
  const Schema* schema = resolver_(policy.target.resource);
  if (!schema) {
    throw ValidationError("policy '" + policy.id + "' targets unknown stream '" +
                          policy.target.resource + "'");
  }
  obligations_to_graph(policy.obligations, *schema);  // obligation validity
  return policy;
}

std::string PolicyStore::load_policy(const std::string& xml_text) {
  Policy policy = parse_and_validate(xml_text);
  std::string id = policy.id;
  bool replaced = false;
  {
    std::unique_lock lock(mutex_);
    for (auto& [resource, bucket] : by_resource_) {
      auto it = std::find_if(bucket.begin(), bucket.end(),
                             [&id](const Policy& p) { return p.id == id; });
      if (it != bucket.end()) {
        bucket.erase(it);
        replaced = true;
        break;
      }
    }
    by_resource_[policy.target.resource].push_back(std::move(policy));
  }
  if (replaced && listener_) listener_(id);
  return id;
}

bool PolicyStore::remove_policy(const std::string& id) {
  bool removed = false;
  {
    std::unique_lock lock(mutex_);
    for (auto& [resource, bucket] : by_resource_) {
      auto it = std::find_if(bucket.begin(), bucket.end(),
                             [&id](const Policy& p) { return p.id == id; });
      if (it != bucket.end()) {
        bucket.erase(it);
        removed = true;
        break;
      }
    }
  }
  if (removed && listener_) listener_(id);
  return removed;
}

Decision PolicyStore::evaluate(const AccessRequest& request) const {
  std::shared_lock lock(mutex_);
  auto bucket = by_resource_.find(request.resource);
  if (bucket == by_resource_.end()) return Decision{};
  for (const Policy& policy : bucket->second) {
    if (policy.target.action != request.action) continue;
    bool all_present = true;
    for (const SubjectAttribute& required : policy.target.subjects) {
      bool found = false;
      for (const SubjectAttribute& given : request.credentials.attributes) {
        if (given.id == required.id && given.value == required.value) {
          found = true;
          break;
        }
      }
      if (!found) {
        all_present = false;
        break;
      }
    }
    if (!all_present) continue;
    Decision decision;
    decision.policy_id = policy.id;
    if (policy.effect == Effect::Permit) {
      decision.verdict = DecisionVerdict::Permit;
      decision.obligations = policy.obligations;
    } else {
      decision.verdict = DecisionVerdict::Deny;
    }
    return decision;
  }
  return Decision{};
}

void PolicyStore::set_change_listener(ChangeListener listener) {
  std::unique_lock lock(mutex_);
  listener_ = std::move(listener);
}

std::size_t PolicyStore::size() const {
  std::shared_lock lock(mutex_);
  std::size_t n = 0;
  for (const auto& [resource, bucket] : by_resource_) n += bucket.size();
  return n;
}

}  // namespace streamgate
