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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "streamgate/decimal.hpp"
#include "streamgate/errors.hpp"

using namespace streamgate;

TEST_CASE("parse and render") {
  CHECK(Decimal::parse("5").to_string() == "5");
  CHECK(Decimal::parse("-12").to_string() == "-12");
  CHECK(Decimal::parse("3.50").to_string() == "3.5");
  CHECK(Decimal::parse("0.05").to_string() == "0.05");
  CHECK(Decimal::parse("40") == Decimal(40));
  CHECK_THROWS_AS(Decimal::parse(""), ParseError);
  CHECK_THROWS_AS(Decimal::parse("1.2.3"), ParseError);
  CHECK_THROWS_AS(Decimal::parse(".5"), ParseError);
  CHECK_THROWS_AS(Decimal::parse("abc"), ParseError);
  CHECK_THROWS_AS(Decimal::parse("12345678901234567890"), ParseError);  // over 18 digits
}

TEST_CASE("exact comparison across scales") {
  CHECK(Decimal::parse("0.5") < Decimal::parse("0.75"));
  CHECK(Decimal::parse("2.50") == Decimal::parse("2.5"));
  CHECK(Decimal::parse("10") > Decimal::parse("9.999"));
  CHECK(Decimal::parse("-0.1") < Decimal::parse("0"));
  // The classic binary-float trap: 0.1 + 0.2 style equality must be exact.
  CHECK(Decimal::parse("0.3") == Decimal(3, 1));
}

TEST_CASE("midpoint and offset arithmetic") {
  CHECK(Decimal::midpoint(Decimal(4), Decimal(5)) == Decimal::parse("4.5"));
  CHECK(Decimal::midpoint(Decimal(4), Decimal(6)) == Decimal(5));
  CHECK(Decimal::midpoint(Decimal::parse("0.1"), Decimal::parse("0.2")) == Decimal::parse("0.15"));
  CHECK(Decimal(7).plus_int(1) == Decimal(8));
  CHECK(Decimal::parse("2.5").minus_int(1) == Decimal::parse("1.5"));
}

TEST_CASE("round trip through text") {
  for (const char* text : {"0", "1", "-1", "12.25", "-3.125", "100000", "0.001"}) {
    Decimal d = Decimal::parse(text);
    CHECK(Decimal::parse(d.to_string()) == d);
  }
}
