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

// Random graphs and integral inputs for engine-vs-oracle comparisons.

#pragma once

#include <random>

#include "streamgate/querygraph.hpp"
#include "support/generators.hpp"

namespace streamgate::testsupport {

inline Schema oracle_schema() {
  return Schema{"o",
                {{"ts", FieldType::Timestamp},
                 {"a", FieldType::Int},
                 {"b", FieldType::Int},
                 {"c", FieldType::Double}}};
}

inline QueryGraph random_oracle_graph(std::mt19937_64& rng) {
  QueryGraph g;
  g.source = "o";
  Schema schema = oracle_schema();
  if (rng() % 3 != 0) {
    static const char* attrs[] = {"a", "b", "c"};
    const char* attr = attrs[rand_below(rng, 3)];
    CmpOp op = static_cast<CmpOp>(rand_below(rng, 6));
    PredicatePtr cond = leaf(SimpleExpression::make(
        attr, op, Literal{Decimal(static_cast<std::int64_t>(rand_below(rng, 30)))}));
    if (rng() & 1) {
      const char* attr2 = attrs[rand_below(rng, 3)];
      CmpOp op2 = static_cast<CmpOp>(rand_below(rng, 6));
      PredicatePtr cond2 = leaf(SimpleExpression::make(
          attr2, op2, Literal{Decimal(static_cast<std::int64_t>(rand_below(rng, 30)))}));
      cond = (rng() & 1) ? and_of(cond, cond2) : or_of(cond, cond2);
    }
    g.filter = FilterOp{cond};
  }
  if (rng() & 1) {
    std::vector<std::string> chosen;
    for (const char* name : {"ts", "a", "b", "c"}) {
      if (rng() & 1) chosen.emplace_back(name);
    }
    if (chosen.empty()) chosen.emplace_back("a");
    g.map = MapOp::make(chosen);
  }
  if (rng() & 1) {
    Schema visible = g.map ? output_schema_of(*g.map, schema) : schema;
    std::int64_t size = 2 + static_cast<std::int64_t>(rand_below(rng, 9));
    std::int64_t step =
        1 + static_cast<std::int64_t>(rand_below(rng, static_cast<std::uint64_t>(size)));
    const Field& f = visible.fields[rand_below(rng, visible.fields.size())];
    static const AggFn fns[] = {AggFn::Avg, AggFn::Max, AggFn::Min,
                                AggFn::Count, AggFn::Sum, AggFn::LastVal, AggFn::FirstVal};
    g.window = WindowAggOp::make(WindowType::Tuple, size, step,
                                 {{f.name, fns[rand_below(rng, 7)]}});
  }
  validate_graph(g, schema);
  return g;
}

inline std::vector<Tuple> random_oracle_input(std::mt19937_64& rng, std::size_t n) {
  std::vector<Tuple> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(Tuple{{static_cast<std::int64_t>(i),
                         static_cast<std::int64_t>(rand_below(rng, 30)),
                         static_cast<std::int64_t>(rand_below(rng, 30)),
                         static_cast<double>(rand_below(rng, 30))}});
  }
  return out;
}

}  // namespace streamgate::testsupport
