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
#include <stdexcept>
#include <string>

namespace streamgate {

/// Malformed source text (predicate grammar, XML documents). Carries the
/// offset of the offending token where known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t position)
      : std::runtime_error(msg + " (at position " + std::to_string(position) + ")"),
        position_(position) {}
  explicit ParseError(const std::string& msg)
      : std::runtime_error(msg), position_(0) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// A structurally well-formed input that violates a semantic rule
/// (unknown attribute, step > size, empty projection, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Static NR/PR analysis exceeded its configured disjunct budget. The
/// analysis is advisory, so callers degrade to "no warning".
class AnalysisCapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A user query asks for finer-grained data than the policy window permits.
/// Unlike NR this is a hard denial, never deployed and never softened.
class EscalationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stream engine faults: unknown stream, duplicate registration, schema
/// mismatch on push, dead handles.
class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller is not entitled to the operation (releasing a foreign handle).
class AuthorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Socket-level failures in the client/server transport.
class NetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace streamgate
