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

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "streamgate/decimal.hpp"

namespace streamgate {

// ---------------------------------------------------------------------------
// Predicate algebra over simple comparisons.
//
// A filter condition is a boolean combination (NOT/AND/OR) of comparisons
// `attribute op literal`. Merge-time analysis eliminates NOT, converts the
// combined policy+user condition to DNF and checks simple-expression pairs
// within each conjunct to decide whether the merged filter can produce no
// tuples at all (NR) or silently withholds tuples the user asked for (PR).
// ---------------------------------------------------------------------------

enum class CmpOp { Lt, Gt, Le, Ge, Eq, Ne };

/// Whether a comparison came from the policy obligations or the user query.
/// The PR verdict is directional: only policy-side constraints narrowing the
/// user's requested tuple set count as a partial result.
enum class Origin { Policy, User };

/// String literals are only meaningful under = / !=.
using Literal = std::variant<Decimal, std::string>;

struct SimpleExpression {
  std::string attribute;
  CmpOp op = CmpOp::Eq;
  Literal literal;
  Origin origin = Origin::User;

  /// Validates the string-literal/op invariant. Throws ValidationError.
  static SimpleExpression make(std::string attribute, CmpOp op, Literal literal,
                               Origin origin = Origin::User);

  /// Structural identity. Origin is analysis metadata and deliberately
  /// excluded so policy- and user-side copies of one comparison compare equal.
  bool operator==(const SimpleExpression& other) const;
};

class Predicate;
using PredicatePtr = std::shared_ptr<const Predicate>;

struct NotNode {
  PredicatePtr child;
};
struct AndNode {
  PredicatePtr lhs, rhs;
};
struct OrNode {
  PredicatePtr lhs, rhs;
};

/// Immutable expression tree. Nodes are shared freely across threads.
class Predicate {
 public:
  using Node = std::variant<SimpleExpression, NotNode, AndNode, OrNode>;

  explicit Predicate(Node node) : node_(std::move(node)) {}
  const Node& node() const { return node_; }

 private:
  Node node_;
};

PredicatePtr leaf(SimpleExpression expr);
PredicatePtr not_of(PredicatePtr child);
PredicatePtr and_of(PredicatePtr lhs, PredicatePtr rhs);
PredicatePtr or_of(PredicatePtr lhs, PredicatePtr rhs);

bool equal(const PredicatePtr& a, const PredicatePtr& b);

/// Renders a predicate in the source grammar; parse(to_string(p)) == p.
std::string to_string(const PredicatePtr& p);
std::string to_string(const SimpleExpression& s);
std::string to_string(CmpOp op);

/// Copies the tree with every leaf stamped with `origin`.
PredicatePtr with_origin(const PredicatePtr& p, Origin origin);

/// Attributes referenced anywhere in the tree, first-occurrence order.
std::vector<std::string> referenced_attributes(const PredicatePtr& p);

/// Visits every leaf, left to right.
void for_each_leaf(const PredicatePtr& p,
                   const std::function<void(const SimpleExpression&)>& fn);

// ---------------------------------------------------------------------------
// Parsing. Grammar:
//   expr   := term ("OR" term)*
//   term   := factor ("AND" factor)*
//   factor := "NOT" factor | "(" expr ")" | ident op literal
//   op     := "<" | ">" | "<=" | ">=" | "=" | "!="
// Connectives are case-insensitive; AND binds tighter than OR, NOT tightest.
// ---------------------------------------------------------------------------

PredicatePtr parse_predicate(std::string_view text, Origin origin = Origin::User);

// ---------------------------------------------------------------------------
// NR/PR analysis pipeline.
// ---------------------------------------------------------------------------

/// Rewrites the tree so it contains no NOT nodes. De Morgan on AND/OR;
/// leaves flip their operator: NOT(x>v) -> x<=v, NOT(x<v) -> x>=v,
/// NOT(x>=v) -> x<v, NOT(x<=v) -> x>v, NOT(x=v) -> x!=v, NOT(x!=v) -> x=v.
PredicatePtr eliminate_not(const PredicatePtr& p);

/// One AND-branch of a DNF: a conjunction of simple expressions.
using Conjunct = std::vector<SimpleExpression>;

struct DnfPredicate {
  std::vector<Conjunct> disjuncts;
};

inline constexpr std::size_t kDefaultDnfCap = 4096;

/// Converts a NOT-free tree to DNF by postfix evaluation: AND distributes
/// over its operands' disjunct lists, OR concatenates them. Throws
/// AnalysisCapacityError when the disjunct count would exceed `max_disjuncts`
/// and std::logic_error if a NOT node is present.
DnfPredicate to_dnf(const PredicatePtr& p, std::size_t max_disjuncts = kDefaultDnfCap);

enum class WarnKind { NR, PR, None };

struct Warning {
  WarnKind kind = WarnKind::None;
  std::string explanation;
  /// Conflicting or narrowing pairs, in check order. Empty when kind==None.
  std::vector<std::pair<SimpleExpression, SimpleExpression>> witnesses;
};

std::string to_string(WarnKind kind);

/// Pairwise check of two simple expressions sharing a conjunct.
///
/// Attributes differ -> None. Otherwise, over the 6x6 operator grid and the
/// three literal orderings:
///   NR   s1 AND s2 is unsatisfiable (any origins);
///   PR   satisfiable, origins differ, and the policy-side expression
///        excludes values the user-side expression admits;
///   None otherwise. Same-origin satisfiable pairs are always None.
/// Incomparable literal types (number vs string) yield NR when either op
/// is =, None otherwise.
WarnKind check_two_simple(const SimpleExpression& s1, const SimpleExpression& s2);

/// Full merge-time analysis of filter conditions.
///
/// Forms policy AND user with leaves tagged by origin, eliminates NOT,
/// converts to DNF and marks each conjunct by its worst pairwise verdict.
/// Whole-predicate verdict: NR iff every conjunct is marked NR; PR iff every
/// conjunct carries a mark but not all are NR; None otherwise (an unmarked
/// conjunct can pass tuples unchanged). O(k*n^2) pair checks.
///
/// Throws AnalysisCapacityError when DNF conversion exceeds `max_disjuncts`.
Warning analyze_merge(const PredicatePtr& policy_pred, const PredicatePtr& user_pred,
                      std::size_t max_disjuncts = kDefaultDnfCap);

// ---------------------------------------------------------------------------
// Exact satisfiability oracle for the supported fragment.
// ---------------------------------------------------------------------------

struct SatResult {
  bool satisfiable = false;
  /// One value per referenced attribute when satisfiable.
  std::map<std::string, Literal> witness;
};

/// Decides satisfiability exactly by enumerating one candidate value per
/// truth-region of each attribute (every literal, each adjacent midpoint,
/// one value beyond each extreme, plus a fresh string). Leaf truth values
/// are constant inside a region, so the candidate grid covers all cases.
/// Evaluates the original tree directly; shares no code with the
/// eliminate_not/to_dnf/check_two_simple path it is used to validate.
SatResult sat_oracle(const PredicatePtr& p);

// ---------------------------------------------------------------------------
// Evaluation.
// ---------------------------------------------------------------------------

/// True when `value` makes the comparison hold. Cross-type comparisons
/// (number vs string): = is false, != is true, ordering ops are false.
bool leaf_holds(const SimpleExpression& expr, const Literal& value);

/// Evaluates a tree given per-leaf truth, used by both the literal-assignment
/// evaluator and the engine's tuple filter.
bool evaluate_with(const PredicatePtr& p,
                   const std::function<bool(const SimpleExpression&)>& leaf_fn);

/// Evaluates over a literal assignment; missing attributes throw.
bool evaluate(const PredicatePtr& p, const std::map<std::string, Literal>& assignment);
bool evaluate(const DnfPredicate& p, const std::map<std::string, Literal>& assignment);

bool literal_equal(const Literal& a, const Literal& b);
std::string to_string(const Literal& v);

}  // namespace streamgate
