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

#include "streamgate/decimal.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "streamgate/errors.hpp"

namespace streamgate {

namespace {

using int128 = __int128;

constexpr int kMaxDigits = 18;  // keeps every aligned mantissa inside int64

std::int64_t pow10_i64(std::int32_t n) {
  std::int64_t v = 1;
  for (std::int32_t i = 0; i < n; ++i) v *= 10;
  return v;
}

std::int64_t narrow_or_throw(int128 v) {
  if (v > INT64_MAX || v < INT64_MIN) {
    throw ValidationError("decimal arithmetic overflow");
  }
  return static_cast<std::int64_t>(v);
}

}  // namespace

void Decimal::normalize() {
  while (scale_ > 0 && mantissa_ % 10 == 0) {
    mantissa_ /= 10;
    --scale_;
  }
  if (mantissa_ == 0) scale_ = 0;
}

Decimal Decimal::parse(std::string_view text) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
    negative = text[i] == '-';
    ++i;
  }
  std::int64_t mantissa = 0;
  std::int32_t scale = 0;
  int digits = 0;
  bool seen_point = false;
  bool seen_digit = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (c == '.') {
      if (seen_point || !seen_digit) throw ParseError("malformed decimal literal", i);
      seen_point = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw ParseError("malformed decimal literal", i);
    }
    seen_digit = true;
    if (++digits > kMaxDigits) throw ParseError("decimal literal too long", i);
    mantissa = mantissa * 10 + (c - '0');
    if (seen_point) ++scale;
  }
  if (!seen_digit) throw ParseError("empty decimal literal", 0);
  return Decimal(negative ? -mantissa : mantissa, scale);
}

Decimal Decimal::plus_int(std::int64_t delta) const {
  int128 m = static_cast<int128>(mantissa_) +
             static_cast<int128>(delta) * pow10_i64(scale_);
  return Decimal(narrow_or_throw(m), scale_);
}

Decimal Decimal::midpoint(const Decimal& a, const Decimal& b) {
  std::int32_t scale = std::max(a.scale_, b.scale_);
  int128 ma = static_cast<int128>(a.mantissa_) * pow10_i64(scale - a.scale_);
  int128 mb = static_cast<int128>(b.mantissa_) * pow10_i64(scale - b.scale_);
  int128 sum = ma + mb;
  if (sum % 2 == 0) return Decimal(narrow_or_throw(sum / 2), scale);
  return Decimal(narrow_or_throw(sum * 5), scale + 1);
}

double Decimal::to_double() const {
  return static_cast<double>(mantissa_) / std::pow(10.0, scale_);
}

std::string Decimal::to_string() const {
  if (scale_ == 0) return std::to_string(mantissa_);
  std::int64_t abs = mantissa_ < 0 ? -mantissa_ : mantissa_;
  std::int64_t div = pow10_i64(scale_);
  std::string frac = std::to_string(abs % div);
  frac.insert(frac.begin(), scale_ - static_cast<std::int32_t>(frac.size()), '0');
  std::string out = mantissa_ < 0 ? "-" : "";
  out += std::to_string(abs / div);
  out += '.';
  out += frac;
  return out;
}

std::strong_ordering Decimal::operator<=>(const Decimal& other) const {
  int128 lhs = static_cast<int128>(mantissa_) * pow10_i64(other.scale_);
  int128 rhs = static_cast<int128>(other.mantissa_) * pow10_i64(scale_);
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

}  // namespace streamgate
