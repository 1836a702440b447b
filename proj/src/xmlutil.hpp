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

// Internal helpers over Boost.PropertyTree's XML layer. Not installed.

#pragma once

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <optional>
#include <sstream>
#include <string>

#include "streamgate/errors.hpp"

namespace streamgate::xml {

using Node = boost::property_tree::ptree;

inline std::string trim(const std::string& s) {
  std::size_t begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  std::size_t end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

/// Parses a document and returns (root element name, tree). Throws ParseError.
inline std::pair<std::string, Node> parse_document(const std::string& text) {
  Node doc;
  try {
    std::istringstream in(text);
    boost::property_tree::read_xml(in, doc);
  } catch (const boost::property_tree::xml_parser_error& e) {
    throw ParseError(std::string("malformed XML: ") + e.message(), e.line());
  }
  for (const auto& [name, child] : doc) {
    if (name != "<xmlattr>" && name != "<xmlcomment>") return {name, child};
  }
  throw ParseError("XML document has no root element");
}

inline std::string serialize(const std::string& root_name, const Node& root) {
  Node doc;
  doc.add_child(root_name, root);
  std::ostringstream out;
  boost::property_tree::write_xml(
      out, doc,
      boost::property_tree::xml_writer_settings<std::string>(' ', 2));
  return out.str();
}

inline std::optional<std::string> attr_opt(const Node& node, const std::string& name) {
  if (auto attrs = node.get_child_optional("<xmlattr>")) {
    if (auto v = attrs->get_optional<std::string>(name)) return *v;
  }
  return std::nullopt;
}

inline std::string attr(const Node& node, const std::string& name) {
  if (auto v = attr_opt(node, name)) return *v;
  throw ParseError("missing XML attribute '" + name + "'");
}

inline std::string text_of(const Node& node) { return trim(node.get_value<std::string>()); }

}  // namespace streamgate::xml
