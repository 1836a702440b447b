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

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace streamgate {

/// Exact base-10 scalar for literals written in policies and queries.
/// Comparisons between two decimals are exact, so `=` / `!=` analysis never
/// trips over binary floating point. Value = mantissa / 10^scale.
class Decimal {
 public:
  Decimal() : mantissa_(0), scale_(0) {}
  explicit Decimal(std::int64_t integer) : mantissa_(integer), scale_(0) { normalize(); }
  Decimal(std::int64_t mantissa, std::int32_t scale) : mantissa_(mantissa), scale_(scale) {
    normalize();
  }

  /// Parses "-12", "3.50", ".5" is rejected (digits required before the
  /// point). Throws ParseError on malformed or oversized input.
  static Decimal parse(std::string_view text);

  std::int64_t mantissa() const { return mantissa_; }
  std::int32_t scale() const { return scale_; }

  Decimal plus_int(std::int64_t delta) const;
  Decimal minus_int(std::int64_t delta) const { return plus_int(-delta); }

  /// Exact midpoint of two decimals; grows scale by one when needed.
  static Decimal midpoint(const Decimal& a, const Decimal& b);

  double to_double() const;
  std::string to_string() const;

  std::strong_ordering operator<=>(const Decimal& other) const;
  bool operator==(const Decimal& other) const { return (*this <=> other) == 0; }

 private:
  void normalize();

  std::int64_t mantissa_;
  std::int32_t scale_;  // count of fractional digits, >= 0
};

}  // namespace streamgate
