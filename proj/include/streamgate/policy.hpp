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

#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "streamgate/querygraph.hpp"

namespace streamgate {

// ---------------------------------------------------------------------------
// Policy store and decision point. Policies carry a target (subject
// attributes, resource stream, action), an effect, and obligations that
// compile into the enforcement query graph.
// ---------------------------------------------------------------------------

enum class AssignmentType { String, Integer };

struct AttributeAssignment {
  std::string attribute_id;
  AssignmentType data_type = AssignmentType::String;
  std::string value;
  bool operator==(const AttributeAssignment&) const = default;
};

enum class ObligationKind { Filter, Map, Window };

/// One stream obligation; fulfilment is always on Permit.
struct Obligation {
  ObligationKind kind = ObligationKind::Filter;
  std::vector<AttributeAssignment> assignments;
};

struct SubjectAttribute {
  std::string id;
  std::string value;
  bool operator==(const SubjectAttribute&) const = default;
};

enum class Effect { Permit, Deny };

struct PolicyTarget {
  std::vector<SubjectAttribute> subjects;
  std::string resource;  // stream name
  std::string action;
};

struct Policy {
  std::string id;
  PolicyTarget target;
  Effect effect = Effect::Permit;
  std::vector<Obligation> obligations;
};

struct CredentialSet {
  std::vector<SubjectAttribute> attributes;

  /// Canonical sorted serialization; the identity used by the single-access
  /// guard and the proxy cache.
  std::string fingerprint() const;
};

struct AccessRequest {
  CredentialSet credentials;
  std::string resource;
  std::string action;
  std::optional<std::string> user_query;  // XML document text
};

enum class DecisionVerdict { Permit, Deny, NotApplicable };

struct Decision {
  DecisionVerdict verdict = DecisionVerdict::NotApplicable;
  std::vector<Obligation> obligations;  // empty unless Permit
  std::string policy_id;                // the policy that decided
};

// ---------------------------------------------------------------------------
// Document parsing / serialization.
// ---------------------------------------------------------------------------

/// Parses a policy XML document: Target (Subjects/Resources/Actions), Effect
/// and an Obligations block. Obligation ids accept both the -filter/-map/
/// -window and -filtering/-mapping/-window-aggregation spellings, and both
/// exacml: and pCloud: assignment-id prefixes.
Policy parse_policy_document(const std::string& xml_text);
std::string policy_to_xml(const Policy& policy);

/// Parses a user-query document (UserQuery/Stream@name, Filter, Map,
/// Aggregation). Attribute names resolve case-insensitively against the
/// schema. Aggregation attributes use the `func(attr)` form.
QueryGraph parse_user_query(const std::string& xml_text, const Schema& schema);

/// Schema-free normal form of a user-query document, for cache keys. Falls
/// back to whitespace-squeezed raw text when the document does not parse.
std::string canonical_user_query(const std::string& xml_text);

/// Serializes a graph in the user-query document shape under the given root
/// element name (`UserQuery`, or `Deploy` for direct engine deployment).
std::string graph_to_query_doc(const QueryGraph& graph, const std::string& root_name);

AccessRequest parse_access_request(const std::string& xml_text);
std::string access_request_to_xml(const AccessRequest& request);

// ---------------------------------------------------------------------------
// Obligation compilation.
// ---------------------------------------------------------------------------

/// Compiles obligations into a query graph over the stream's schema and
/// validates it. An empty obligation list yields the identity graph.
QueryGraph obligations_to_graph(const std::vector<Obligation>& obligations,
                                const Schema& schema);

/// Serializes a graph back into obligations (the form bench-generated
/// policies use); obligations_to_graph inverts it exactly.
std::vector<Obligation> graph_to_obligations(const QueryGraph& graph);

// ---------------------------------------------------------------------------
// Store.
// ---------------------------------------------------------------------------

class PolicyStore {
 public:
  using SchemaResolver = std::function<const Schema*(const std::string&)>;
  /// Fired after a policy is removed or replaced, outside the store lock.
  using ChangeListener = std::function<void(const std::string& policy_id)>;

  explicit PolicyStore(SchemaResolver resolver) : resolver_(std::move(resolver)) {}

  /// Validates and indexes a policy document; returns its id. A duplicate id
  /// replaces the prior version and fires the change listener.
  std::string load_policy(const std::string& xml_text);
  Policy parse_and_validate(const std::string& xml_text) const;

  /// Removes by id; fires the change listener when something was removed.
  bool remove_policy(const std::string& id);

  /// First-applicable match over the request's resource: action and resource
  /// equal, every target subject attribute present with an equal value.
  Decision evaluate(const AccessRequest& request) const;

  void set_change_listener(ChangeListener listener);

  std::size_t size() const;

 private:
  mutable std::shared_mutex mutex_;
  SchemaResolver resolver_;
  ChangeListener listener_;
  std::map<std::string, std::vector<Policy>> by_resource_;  // load order per bucket
};

}  // namespace streamgate
