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

#include <optional>

#include "streamgate/querygraph.hpp"

namespace streamgate {

// ---------------------------------------------------------------------------
// Merging the policy-derived graph with the user-query graph into one
// enforceable graph. The merged graph must never be more permissive than the
// policy graph: no attribute outside the policy projection, no weaker filter,
// no finer window.
// ---------------------------------------------------------------------------

/// Conjoins both conditions and collapses same-direction bounds per attribute
/// when both sides are plain conjunctions (x > 5 AND x > 50 -> x > 50).
/// Identical conditions merge to themselves.
FilterOp merge_filters(const FilterOp& policy, const FilterOp& user);

/// Projection intersection. The result may be empty; the NR verdict that
/// blocks deployment is raised by merge_graphs, not here.
std::vector<std::string> merge_map_attributes(const MapOp& policy, const MapOp& user);

/// Window merge. Requires equal types, policy.size <= user.size and
/// policy.step <= user.step; anything finer on the user side would hand out
/// more detailed data than permitted and throws EscalationError. The result
/// takes the user's size/step and the (attribute, function) intersection.
WindowAggOp merge_windows(const WindowAggOp& policy, const WindowAggOp& user);

struct MergeResult {
  QueryGraph graph;
  Warning warning;
  /// True when the filter analysis hit the DNF cap and was skipped; the
  /// warning is then None and the caller may log the degradation.
  bool analysis_skipped = false;
};

/// Per-operator merge of two validated graphs over the same source stream.
/// A missing user operator adopts the policy operator (restricted to the
/// merged projection); a missing policy operator adopts the user operator
/// (the policy imposes no constraint of that kind). Component verdicts:
///   filter  analyze_merge over both conditions;
///   map     NR when the intersection is empty, PR when the user requested
///           attributes outside the policy set, else None;
///   window  NR on aggregate-function conflicts or an empty
///           (attribute, function) intersection, None when every user pair
///           appears in the policy, else PR.
/// Overall: NR if any component is NR, else PR if any is PR, else None.
/// Window size/step/type escalation throws EscalationError instead.
///
/// Any non-NR result is validated against the stream schema, so a merged
/// graph that cannot execute (for example a time window whose timestamp
/// field fell out of the merged projection) surfaces as NR here rather than
/// as a deployment failure.
MergeResult merge_graphs(const QueryGraph& policy, const QueryGraph& user, const Schema& schema,
                         std::size_t max_disjuncts = kDefaultDnfCap);

}  // namespace streamgate
