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

#include "streamgate/merge.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "streamgate/errors.hpp"

namespace streamgate {

namespace {

bool conjunction_only(const PredicatePtr& p) {
  const auto& n = p->node();
  if (std::holds_alternative<SimpleExpression>(n)) return true;
  if (const auto* a = std::get_if<AndNode>(&n)) {
    return conjunction_only(a->lhs) && conjunction_only(a->rhs);
  }
  return false;
}

bool is_lower_bound(CmpOp op) { return op == CmpOp::Gt || op == CmpOp::Ge; }
bool is_upper_bound(CmpOp op) { return op == CmpOp::Lt || op == CmpOp::Le; }

// Tighter lower bound: larger value; on ties the strict one.
bool tighter_lower(const SimpleExpression& a, const SimpleExpression& b) {
  const Decimal& va = std::get<Decimal>(a.literal);
  const Decimal& vb = std::get<Decimal>(b.literal);
  if (!(va == vb)) return va > vb;
  return a.op == CmpOp::Gt && b.op == CmpOp::Ge;
}

bool tighter_upper(const SimpleExpression& a, const SimpleExpression& b) {
  const Decimal& va = std::get<Decimal>(a.literal);
  const Decimal& vb = std::get<Decimal>(b.literal);
  if (!(va == vb)) return va < vb;
  return a.op == CmpOp::Lt && b.op == CmpOp::Le;
}

PredicatePtr rebuild_conjunction(const std::vector<SimpleExpression>& leaves) {
  PredicatePtr out;
  for (const SimpleExpression& s : leaves) {
    PredicatePtr l = leaf(s);
    out = out ? and_of(std::move(out), std::move(l)) : std::move(l);
  }
  return out;
}

}  // namespace

FilterOp merge_filters(const FilterOp& policy, const FilterOp& user) {
  if (equal(policy.condition, user.condition)) return policy;

  if (!conjunction_only(policy.condition) || !conjunction_only(user.condition)) {
    return FilterOp{and_of(policy.condition, user.condition)};
  }

  std::vector<SimpleExpression> leaves;
  auto append = [&leaves](const SimpleExpression& s) {
    for (const SimpleExpression& have : leaves) {
      if (have == s) return;  // exact duplicate
    }
    leaves.push_back(s);
  };
  for_each_leaf(policy.condition, append);
  for_each_leaf(user.condition, append);

  // Collapse same-direction numeric bounds per attribute to the tighter one.
  std::vector<bool> drop(leaves.size(), false);
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    if (drop[i] || std::holds_alternative<std::string>(leaves[i].literal)) continue;
    for (std::size_t j = i + 1; j < leaves.size(); ++j) {
      if (drop[j] || leaves[j].attribute != leaves[i].attribute) continue;
      if (std::holds_alternative<std::string>(leaves[j].literal)) continue;
      if (is_lower_bound(leaves[i].op) && is_lower_bound(leaves[j].op)) {
        drop[tighter_lower(leaves[i], leaves[j]) ? j : i] = true;
      } else if (is_upper_bound(leaves[i].op) && is_upper_bound(leaves[j].op)) {
        drop[tighter_upper(leaves[i], leaves[j]) ? j : i] = true;
      }
      if (drop[i]) break;
    }
  }
  std::vector<SimpleExpression> kept;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    if (!drop[i]) kept.push_back(leaves[i]);
  }
  return FilterOp{rebuild_conjunction(kept)};
}

std::vector<std::string> merge_map_attributes(const MapOp& policy, const MapOp& user) {
  std::vector<std::string> out;
  std::set_intersection(policy.attributes.begin(), policy.attributes.end(),
                        user.attributes.begin(), user.attributes.end(),
                        std::back_inserter(out));
  return out;
}

WindowAggOp merge_windows(const WindowAggOp& policy, const WindowAggOp& user) {
  if (policy.type != user.type) {
    throw EscalationError("window type mismatch: policy " + to_string(policy.type) +
                          ", query " + to_string(user.type));
  }
  if (policy.size > user.size) {
    throw EscalationError("query window size " + std::to_string(user.size) +
                          " finer than policy size " + std::to_string(policy.size));
  }
  if (policy.step > user.step) {
    throw EscalationError("query window step " + std::to_string(user.step) +
                          " finer than policy step " + std::to_string(policy.step));
  }
  std::vector<AggSpec> intersection;
  for (const AggSpec& a : policy.aggs) {
    for (const AggSpec& b : user.aggs) {
      if (a.attribute == b.attribute && a.fn == b.fn) {
        intersection.push_back(a);
        break;
      }
    }
  }
  // An empty intersection means every shared attribute conflicts on its
  // function; merge_graphs reports NR and never deploys, so fall back to the
  // policy aggregates to keep the operator well-formed.
  if (intersection.empty()) intersection = policy.aggs;
  return WindowAggOp::make(policy.type, user.size, user.step, std::move(intersection));
}

MergeResult merge_graphs(const QueryGraph& policy, const QueryGraph& user, const Schema& schema,
                         std::size_t max_disjuncts) {
  if (policy.source != user.source) {
    throw ValidationError("cannot merge graphs over different streams ('" + policy.source +
                          "' vs '" + user.source + "')");
  }

  MergeResult result;
  result.graph.source = policy.source;
  WarnKind filter_kind = WarnKind::None;
  WarnKind map_kind = WarnKind::None;
  WarnKind window_kind = WarnKind::None;
  std::ostringstream explanation;

  if (policy.filter && user.filter) {
    try {
      Warning w = analyze_merge(policy.filter->condition, user.filter->condition, max_disjuncts);
      filter_kind = w.kind;
      result.warning.witnesses = std::move(w.witnesses);
      if (w.kind != WarnKind::None) explanation << "filter: " << w.explanation;
    } catch (const AnalysisCapacityError&) {
      result.analysis_skipped = true;
    }
    result.graph.filter = merge_filters(*policy.filter, *user.filter);
  } else if (policy.filter) {
    result.graph.filter = policy.filter;
  } else if (user.filter) {
    result.graph.filter = user.filter;
  }

  if (policy.map && user.map) {
    std::vector<std::string> shared = merge_map_attributes(*policy.map, *user.map);
    if (shared.empty()) {
      map_kind = WarnKind::NR;
      if (explanation.tellp() > 0) explanation << "; ";
      explanation << "map: no attribute of the query projection is permitted by the policy";
      result.graph.map = policy.map;
    } else {
      result.graph.map = MapOp{std::move(shared)};
      bool outside = false;
      for (const std::string& attr : user.map->attributes) {
        if (!std::binary_search(policy.map->attributes.begin(), policy.map->attributes.end(),
                                attr)) {
          outside = true;
          break;
        }
      }
      if (outside) {
        map_kind = WarnKind::PR;
        if (explanation.tellp() > 0) explanation << "; ";
        explanation << "map: some requested attributes are withheld by the policy projection";
      }
    }
  } else if (policy.map) {
    result.graph.map = policy.map;
  } else if (user.map) {
    result.graph.map = user.map;
  }

  // An adopted window (only one side has one) may reference attributes the
  // merged projection dropped; restrict it to what stays visible. An empty
  // rest means the projection and the window share nothing: NR.
  auto restrict_to_map = [&result, &explanation, &window_kind](const WindowAggOp& w) {
    if (!result.graph.map) {
      result.graph.window = w;
      return;
    }
    std::vector<AggSpec> kept;
    for (const AggSpec& agg : w.aggs) {
      if (std::binary_search(result.graph.map->attributes.begin(),
                             result.graph.map->attributes.end(), agg.attribute)) {
        kept.push_back(agg);
      }
    }
    if (kept.empty()) {
      window_kind = WarnKind::NR;
      if (explanation.tellp() > 0) explanation << "; ";
      explanation << "window: no aggregated attribute survives the merged projection";
      result.graph.window = w;  // placeholder; NR blocks deployment
      return;
    }
    if (kept.size() < w.aggs.size() && window_kind == WarnKind::None) {
      window_kind = WarnKind::PR;
      if (explanation.tellp() > 0) explanation << "; ";
      explanation << "window: some aggregates fall outside the merged projection";
    }
    result.graph.window = WindowAggOp::make(w.type, w.size, w.step, std::move(kept));
  };

  if (policy.window && user.window) {
    result.graph.window = merge_windows(*policy.window, *user.window);  // may throw
    bool fn_conflict = false;
    bool any_shared_pair = false;
    for (const AggSpec& a : policy.window->aggs) {
      for (const AggSpec& b : user.window->aggs) {
        if (a.attribute != b.attribute) continue;
        if (a.fn != b.fn) {
          fn_conflict = true;
        } else {
          any_shared_pair = true;
        }
      }
    }
    if (fn_conflict) {
      window_kind = WarnKind::NR;
      if (explanation.tellp() > 0) explanation << "; ";
      explanation << "window: conflicting aggregate functions on a shared attribute";
    } else if (!any_shared_pair) {
      // Nothing the user asked to aggregate is permitted: there are no
      // output columns to produce.
      window_kind = WarnKind::NR;
      if (explanation.tellp() > 0) explanation << "; ";
      explanation << "window: no requested aggregate is permitted by the policy";
    } else {
      bool all_present = true;
      for (const AggSpec& b : user.window->aggs) {
        bool found = false;
        for (const AggSpec& a : policy.window->aggs) {
          if (a.attribute == b.attribute && a.fn == b.fn) found = true;
        }
        if (!found) all_present = false;
      }
      if (!all_present) {
        window_kind = WarnKind::PR;
        if (explanation.tellp() > 0) explanation << "; ";
        explanation << "window: some requested aggregates are not permitted by the policy";
      }
    }
  } else if (policy.window) {
    restrict_to_map(*policy.window);
  } else if (user.window) {
    restrict_to_map(*user.window);
  }

  if (filter_kind == WarnKind::NR || map_kind == WarnKind::NR || window_kind == WarnKind::NR) {
    result.warning.kind = WarnKind::NR;
  } else if (filter_kind == WarnKind::PR || map_kind == WarnKind::PR ||
             window_kind == WarnKind::PR) {
    result.warning.kind = WarnKind::PR;
  } else {
    result.warning.kind = WarnKind::None;
    result.warning.witnesses.clear();
  }
  result.warning.explanation = explanation.str();
  if (result.analysis_skipped && result.warning.kind == WarnKind::None) {
    result.warning.explanation = "filter analysis skipped: disjunct budget exceeded";
  }

  // Anything that may be deployed must execute; a pipeline broken by the
  // merge itself (a time window whose clock fell out of the projection)
  // can never produce tuples.
  if (result.warning.kind != WarnKind::NR) {
    try {
      validate_graph(result.graph, schema);
    } catch (const ValidationError& e) {
      result.warning.kind = WarnKind::NR;
      result.warning.witnesses.clear();
      result.warning.explanation = std::string("merged pipeline cannot execute: ") + e.what();
    }
  }
  return result;
}

}  // namespace streamgate
