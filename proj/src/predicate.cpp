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

#include "streamgate/predicate.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "streamgate/errors.hpp"

namespace streamgate {

namespace {

bool is_string_literal(const Literal& v) { return std::holds_alternative<std::string>(v); }

bool is_ordering(CmpOp op) {
  return op == CmpOp::Lt || op == CmpOp::Gt || op == CmpOp::Le || op == CmpOp::Ge;
}

}  // namespace

SimpleExpression SimpleExpression::make(std::string attribute, CmpOp op, Literal literal,
                                        Origin origin) {
  if (attribute.empty()) throw ValidationError("empty attribute name in comparison");
  if (is_string_literal(literal) && is_ordering(op)) {
    throw ValidationError("string literal requires = or != (attribute '" + attribute + "')");
  }
  return SimpleExpression{std::move(attribute), op, std::move(literal), origin};
}

bool literal_equal(const Literal& a, const Literal& b) {
  if (a.index() != b.index()) return false;
  if (std::holds_alternative<Decimal>(a)) {
    return std::get<Decimal>(a) == std::get<Decimal>(b);
  }
  return std::get<std::string>(a) == std::get<std::string>(b);
}

bool SimpleExpression::operator==(const SimpleExpression& other) const {
  return attribute == other.attribute && op == other.op && literal_equal(literal, other.literal);
}

PredicatePtr leaf(SimpleExpression expr) {
  return std::make_shared<const Predicate>(Predicate::Node{std::move(expr)});
}
PredicatePtr not_of(PredicatePtr child) {
  return std::make_shared<const Predicate>(Predicate::Node{NotNode{std::move(child)}});
}
PredicatePtr and_of(PredicatePtr lhs, PredicatePtr rhs) {
  return std::make_shared<const Predicate>(Predicate::Node{AndNode{std::move(lhs), std::move(rhs)}});
}
PredicatePtr or_of(PredicatePtr lhs, PredicatePtr rhs) {
  return std::make_shared<const Predicate>(Predicate::Node{OrNode{std::move(lhs), std::move(rhs)}});
}

bool equal(const PredicatePtr& a, const PredicatePtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  const auto& na = a->node();
  const auto& nb = b->node();
  if (na.index() != nb.index()) return false;
  if (const auto* la = std::get_if<SimpleExpression>(&na)) {
    return *la == std::get<SimpleExpression>(nb);
  }
  if (const auto* xa = std::get_if<NotNode>(&na)) {
    return equal(xa->child, std::get<NotNode>(nb).child);
  }
  if (const auto* aa = std::get_if<AndNode>(&na)) {
    const auto& ab = std::get<AndNode>(nb);
    return equal(aa->lhs, ab.lhs) && equal(aa->rhs, ab.rhs);
  }
  const auto& oa = std::get<OrNode>(na);
  const auto& ob = std::get<OrNode>(nb);
  return equal(oa.lhs, ob.lhs) && equal(oa.rhs, ob.rhs);
}

std::string to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return "<";
    case CmpOp::Gt: return ">";
    case CmpOp::Le: return "<=";
    case CmpOp::Ge: return ">=";
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
  }
  return "?";
}

std::string to_string(const Literal& v) {
  if (const auto* d = std::get_if<Decimal>(&v)) return d->to_string();
  return "\"" + std::get<std::string>(v) + "\"";
}

std::string to_string(const SimpleExpression& s) {
  return s.attribute + " " + to_string(s.op) + " " + to_string(s.literal);
}

namespace {

// Parenthesize only where precedence demands it.
void render(const PredicatePtr& p, std::string& out, int parent_level) {
  const auto& n = p->node();
  if (const auto* s = std::get_if<SimpleExpression>(&n)) {
    out += to_string(*s);
    return;
  }
  if (const auto* x = std::get_if<NotNode>(&n)) {
    out += "NOT (";
    render(x->child, out, 0);
    out += ")";
    return;
  }
  int level = std::holds_alternative<AndNode>(n) ? 1 : 0;  // OR=0, AND=1
  bool need_parens = level < parent_level;
  if (need_parens) out += "(";
  if (const auto* a = std::get_if<AndNode>(&n)) {
    render(a->lhs, out, 1);
    out += " AND ";
    render(a->rhs, out, 2);
  } else {
    const auto& o = std::get<OrNode>(n);
    render(o.lhs, out, 0);
    out += " OR ";
    render(o.rhs, out, 1);
  }
  if (need_parens) out += ")";
}

}  // namespace

std::string to_string(const PredicatePtr& p) {
  std::string out;
  render(p, out, 0);
  return out;
}

PredicatePtr with_origin(const PredicatePtr& p, Origin origin) {
  const auto& n = p->node();
  if (const auto* s = std::get_if<SimpleExpression>(&n)) {
    SimpleExpression copy = *s;
    copy.origin = origin;
    return leaf(std::move(copy));
  }
  if (const auto* x = std::get_if<NotNode>(&n)) return not_of(with_origin(x->child, origin));
  if (const auto* a = std::get_if<AndNode>(&n)) {
    return and_of(with_origin(a->lhs, origin), with_origin(a->rhs, origin));
  }
  const auto& o = std::get<OrNode>(n);
  return or_of(with_origin(o.lhs, origin), with_origin(o.rhs, origin));
}

std::vector<std::string> referenced_attributes(const PredicatePtr& p) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::function<void(const PredicatePtr&)> walk = [&](const PredicatePtr& q) {
    const auto& n = q->node();
    if (const auto* s = std::get_if<SimpleExpression>(&n)) {
      if (seen.insert(s->attribute).second) out.push_back(s->attribute);
    } else if (const auto* x = std::get_if<NotNode>(&n)) {
      walk(x->child);
    } else if (const auto* a = std::get_if<AndNode>(&n)) {
      walk(a->lhs);
      walk(a->rhs);
    } else {
      const auto& o = std::get<OrNode>(n);
      walk(o.lhs);
      walk(o.rhs);
    }
  };
  walk(p);
  return out;
}

void for_each_leaf(const PredicatePtr& p,
                   const std::function<void(const SimpleExpression&)>& fn) {
  const auto& n = p->node();
  if (const auto* s = std::get_if<SimpleExpression>(&n)) {
    fn(*s);
  } else if (const auto* x = std::get_if<NotNode>(&n)) {
    for_each_leaf(x->child, fn);
  } else if (const auto* a = std::get_if<AndNode>(&n)) {
    for_each_leaf(a->lhs, fn);
    for_each_leaf(a->rhs, fn);
  } else {
    const auto& o = std::get<OrNode>(n);
    for_each_leaf(o.lhs, fn);
    for_each_leaf(o.rhs, fn);
  }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct Token {
  enum Kind { Ident, Number, String, Op, LParen, RParen, End } kind;
  std::string text;
  std::size_t pos;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    std::size_t start = pos_;
    if (pos_ >= text_.size()) return {Token::End, "", start};
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      return {Token::LParen, "(", start};
    }
    if (c == ')') {
      ++pos_;
      return {Token::RParen, ")", start};
    }
    if (c == '"') {
      ++pos_;
      std::string s;
      while (pos_ < text_.size() && text_[pos_] != '"') s += text_[pos_++];
      if (pos_ >= text_.size()) throw ParseError("unterminated string literal", start);
      ++pos_;
      return {Token::String, s, start};
    }
    if (c == '<' || c == '>' || c == '=' || c == '!') {
      ++pos_;
      std::string op(1, c);
      if ((c == '<' || c == '>' || c == '!') && pos_ < text_.size() && text_[pos_] == '=') {
        op += '=';
        ++pos_;
      }
      if (op == "!") throw ParseError("expected '=' after '!'", start);
      return {Token::Op, op, start};
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && pos_ + 1 < text_.size() &&
         std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
      std::string num(1, c);
      ++pos_;
      while (pos_ < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
        num += text_[pos_++];
      }
      return {Token::Number, num, start};
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string ident(1, c);
      ++pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ident += text_[pos_++];
      }
      return {Token::Ident, ident, start};
    }
    throw ParseError(std::string("unexpected character '") + c + "'", start);
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

class Parser {
 public:
  Parser(std::string_view text, Origin origin) : lexer_(text), origin_(origin) { advance(); }

  PredicatePtr parse() {
    PredicatePtr p = parse_expr();
    if (cur_.kind != Token::End) throw ParseError("trailing input after predicate", cur_.pos);
    return p;
  }

 private:
  void advance() { cur_ = lexer_.next(); }

  bool at_keyword(const char* kw) {
    return cur_.kind == Token::Ident && upper(cur_.text) == kw;
  }

  PredicatePtr parse_expr() {
    PredicatePtr lhs = parse_term();
    while (at_keyword("OR")) {
      advance();
      lhs = or_of(std::move(lhs), parse_term());
    }
    return lhs;
  }

  PredicatePtr parse_term() {
    PredicatePtr lhs = parse_factor();
    while (at_keyword("AND")) {
      advance();
      lhs = and_of(std::move(lhs), parse_factor());
    }
    return lhs;
  }

  PredicatePtr parse_factor() {
    if (at_keyword("NOT")) {
      advance();
      return not_of(parse_factor());
    }
    if (cur_.kind == Token::LParen) {
      advance();
      PredicatePtr inner = parse_expr();
      if (cur_.kind != Token::RParen) throw ParseError("expected ')'", cur_.pos);
      advance();
      return inner;
    }
    return parse_comparison();
  }

  PredicatePtr parse_comparison() {
    if (cur_.kind != Token::Ident) throw ParseError("expected attribute name", cur_.pos);
    std::string kw = upper(cur_.text);
    if (kw == "AND" || kw == "OR" || kw == "NOT") {
      throw ParseError("keyword '" + cur_.text + "' cannot be an attribute", cur_.pos);
    }
    std::string attribute = cur_.text;
    advance();
    if (cur_.kind != Token::Op) throw ParseError("expected comparison operator", cur_.pos);
    CmpOp op = parse_op(cur_.text, cur_.pos);
    std::size_t op_pos = cur_.pos;
    advance();
    Literal lit;
    if (cur_.kind == Token::Number) {
      lit = Decimal::parse(cur_.text);
    } else if (cur_.kind == Token::String) {
      if (is_ordering(op)) {
        throw ParseError("string literal not allowed with ordering operator", op_pos);
      }
      lit = cur_.text;
    } else {
      throw ParseError("expected literal after operator", cur_.pos);
    }
    advance();
    return leaf(SimpleExpression::make(std::move(attribute), op, std::move(lit), origin_));
  }

  static CmpOp parse_op(const std::string& text, std::size_t pos) {
    if (text == "<") return CmpOp::Lt;
    if (text == ">") return CmpOp::Gt;
    if (text == "<=") return CmpOp::Le;
    if (text == ">=") return CmpOp::Ge;
    if (text == "=") return CmpOp::Eq;
    if (text == "!=") return CmpOp::Ne;
    throw ParseError("unknown operator '" + text + "'", pos);
  }

  Lexer lexer_;
  Origin origin_;
  Token cur_{Token::End, "", 0};
};

}  // namespace

PredicatePtr parse_predicate(std::string_view text, Origin origin) {
  return Parser(text, origin).parse();
}

// ---------------------------------------------------------------------------
// NOT elimination
// ---------------------------------------------------------------------------

namespace {

CmpOp negate_op(CmpOp op) {
  switch (op) {
    case CmpOp::Gt: return CmpOp::Le;
    case CmpOp::Lt: return CmpOp::Ge;
    case CmpOp::Ge: return CmpOp::Lt;
    case CmpOp::Le: return CmpOp::Gt;
    case CmpOp::Eq: return CmpOp::Ne;
    case CmpOp::Ne: return CmpOp::Eq;
  }
  return op;
}

PredicatePtr negated(const PredicatePtr& p);

PredicatePtr eliminated(const PredicatePtr& p) {
  const auto& n = p->node();
  if (std::holds_alternative<SimpleExpression>(n)) return p;
  if (const auto* x = std::get_if<NotNode>(&n)) return negated(x->child);
  if (const auto* a = std::get_if<AndNode>(&n)) {
    return and_of(eliminated(a->lhs), eliminated(a->rhs));
  }
  const auto& o = std::get<OrNode>(n);
  return or_of(eliminated(o.lhs), eliminated(o.rhs));
}

PredicatePtr negated(const PredicatePtr& p) {
  const auto& n = p->node();
  if (const auto* s = std::get_if<SimpleExpression>(&n)) {
    SimpleExpression flipped = *s;
    flipped.op = negate_op(s->op);
    return leaf(std::move(flipped));
  }
  if (const auto* x = std::get_if<NotNode>(&n)) return eliminated(x->child);
  if (const auto* a = std::get_if<AndNode>(&n)) {
    return or_of(negated(a->lhs), negated(a->rhs));
  }
  const auto& o = std::get<OrNode>(n);
  return and_of(negated(o.lhs), negated(o.rhs));
}

}  // namespace

PredicatePtr eliminate_not(const PredicatePtr& p) { return eliminated(p); }

// ---------------------------------------------------------------------------
// DNF conversion
// ---------------------------------------------------------------------------

namespace {

// Postfix evaluation order: AND pops its right operand first and prefixes
// each of its conjuncts to each left conjunct; OR prepends the right
// operand's disjunct list. Reproduces the textbook stack algorithm exactly,
// including conjunct and disjunct ordering.
std::vector<Conjunct> dnf_of(const PredicatePtr& p, std::size_t cap) {
  const auto& n = p->node();
  if (const auto* s = std::get_if<SimpleExpression>(&n)) {
    return {Conjunct{*s}};
  }
  if (std::holds_alternative<NotNode>(n)) {
    throw std::logic_error("to_dnf requires a NOT-free predicate");
  }
  if (const auto* a = std::get_if<AndNode>(&n)) {
    std::vector<Conjunct> left = dnf_of(a->lhs, cap);
    std::vector<Conjunct> right = dnf_of(a->rhs, cap);
    if (left.size() > cap / right.size()) {
      throw AnalysisCapacityError("DNF disjunct cap exceeded");
    }
    std::vector<Conjunct> out;
    out.reserve(left.size() * right.size());
    for (const Conjunct& r : right) {
      for (const Conjunct& l : left) {
        Conjunct merged = r;
        merged.insert(merged.end(), l.begin(), l.end());
        out.push_back(std::move(merged));
      }
    }
    return out;
  }
  const auto& o = std::get<OrNode>(n);
  std::vector<Conjunct> left = dnf_of(o.lhs, cap);
  std::vector<Conjunct> right = dnf_of(o.rhs, cap);
  if (left.size() + right.size() > cap) {
    throw AnalysisCapacityError("DNF disjunct cap exceeded");
  }
  std::vector<Conjunct> out = std::move(right);
  out.insert(out.end(), left.begin(), left.end());
  return out;
}

}  // namespace

DnfPredicate to_dnf(const PredicatePtr& p, std::size_t max_disjuncts) {
  if (max_disjuncts == 0) throw AnalysisCapacityError("DNF disjunct cap exceeded");
  return DnfPredicate{dnf_of(p, max_disjuncts)};
}

// ---------------------------------------------------------------------------
// Pairwise NR/PR check
// ---------------------------------------------------------------------------

namespace {

// Value set denoted by one numeric comparison: a point, everything but a
// point, or a half-line.
struct NumSet {
  enum Kind { Point, NotPoint, Below, Above } kind;
  Decimal v;
  bool closed = false;  // Below/Above only
};

NumSet num_set_of(CmpOp op, const Decimal& v) {
  switch (op) {
    case CmpOp::Lt: return {NumSet::Below, v, false};
    case CmpOp::Le: return {NumSet::Below, v, true};
    case CmpOp::Gt: return {NumSet::Above, v, false};
    case CmpOp::Ge: return {NumSet::Above, v, true};
    case CmpOp::Eq: return {NumSet::Point, v, false};
    case CmpOp::Ne: return {NumSet::NotPoint, v, false};
  }
  return {NumSet::Point, v, false};
}

bool ray_contains(const NumSet& ray, const Decimal& x) {
  if (ray.kind == NumSet::Below) return ray.closed ? x <= ray.v : x < ray.v;
  return ray.closed ? x >= ray.v : x > ray.v;
}

bool num_intersection_empty(const NumSet& a, const NumSet& b) {
  if (a.kind == NumSet::NotPoint && b.kind == NumSet::NotPoint) return false;
  if (a.kind == NumSet::Point && b.kind == NumSet::Point) return !(a.v == b.v);
  if (a.kind == NumSet::Point || b.kind == NumSet::Point) {
    const NumSet& pt = a.kind == NumSet::Point ? a : b;
    const NumSet& other = a.kind == NumSet::Point ? b : a;
    if (other.kind == NumSet::NotPoint) return pt.v == other.v;
    return !ray_contains(other, pt.v);
  }
  if (a.kind == NumSet::NotPoint || b.kind == NumSet::NotPoint) return false;
  if (a.kind == b.kind) return false;  // same-direction rays always overlap
  const NumSet& below = a.kind == NumSet::Below ? a : b;
  const NumSet& above = a.kind == NumSet::Below ? b : a;
  if (above.v > below.v) return true;
  if (above.v < below.v) return false;
  return !(above.closed && below.closed);
}

// set(user) subset of set(policy)?
bool num_subset(const NumSet& user, const NumSet& policy) {
  switch (user.kind) {
    case NumSet::Point:
      switch (policy.kind) {
        case NumSet::Point: return user.v == policy.v;
        case NumSet::NotPoint: return !(user.v == policy.v);
        default: return ray_contains(policy, user.v);
      }
    case NumSet::NotPoint:
      // Only the identical co-point set contains "everything but v".
      return policy.kind == NumSet::NotPoint && policy.v == user.v;
    case NumSet::Below:
      if (policy.kind == NumSet::NotPoint) return !ray_contains(user, policy.v);
      if (policy.kind != NumSet::Below) return false;
      if (user.v < policy.v) return true;
      if (user.v > policy.v) return false;
      return policy.closed || !user.closed;
    case NumSet::Above:
      if (policy.kind == NumSet::NotPoint) return !ray_contains(user, policy.v);
      if (policy.kind != NumSet::Above) return false;
      if (user.v > policy.v) return true;
      if (user.v < policy.v) return false;
      return policy.closed || !user.closed;
  }
  return false;
}

bool str_intersection_empty(CmpOp op1, const std::string& v1, CmpOp op2,
                            const std::string& v2) {
  if (op1 == CmpOp::Eq && op2 == CmpOp::Eq) return v1 != v2;
  if (op1 == CmpOp::Eq && op2 == CmpOp::Ne) return v1 == v2;
  if (op1 == CmpOp::Ne && op2 == CmpOp::Eq) return v1 == v2;
  return false;  // != with != always overlaps
}

bool str_subset(CmpOp user_op, const std::string& user_v, CmpOp policy_op,
                const std::string& policy_v) {
  if (user_op == CmpOp::Eq) {
    return policy_op == CmpOp::Eq ? user_v == policy_v : user_v != policy_v;
  }
  return policy_op == CmpOp::Ne && user_v == policy_v;
}

}  // namespace

WarnKind check_two_simple(const SimpleExpression& s1, const SimpleExpression& s2) {
  if (s1.attribute != s2.attribute) return WarnKind::None;

  const bool str1 = is_string_literal(s1.literal);
  const bool str2 = is_string_literal(s2.literal);
  if (str1 != str2) {
    // Number against string on one attribute: positive constraints can never
    // both hold; pure exclusions are left alone.
    if (s1.op == CmpOp::Eq || s2.op == CmpOp::Eq) return WarnKind::NR;
    return WarnKind::None;
  }

  bool empty;
  bool user_subset_of_policy;
  const bool cross_origin = s1.origin != s2.origin;
  const SimpleExpression& policy = s1.origin == Origin::Policy ? s1 : s2;
  const SimpleExpression& user = s1.origin == Origin::Policy ? s2 : s1;
  if (str1) {
    empty = str_intersection_empty(s1.op, std::get<std::string>(s1.literal), s2.op,
                                   std::get<std::string>(s2.literal));
    user_subset_of_policy =
        str_subset(user.op, std::get<std::string>(user.literal), policy.op,
                   std::get<std::string>(policy.literal));
  } else {
    NumSet a = num_set_of(s1.op, std::get<Decimal>(s1.literal));
    NumSet b = num_set_of(s2.op, std::get<Decimal>(s2.literal));
    empty = num_intersection_empty(a, b);
    user_subset_of_policy = num_subset(num_set_of(user.op, std::get<Decimal>(user.literal)),
                                       num_set_of(policy.op, std::get<Decimal>(policy.literal)));
  }

  if (empty) return WarnKind::NR;
  if (cross_origin && !user_subset_of_policy) return WarnKind::PR;
  return WarnKind::None;
}

std::string to_string(WarnKind kind) {
  switch (kind) {
    case WarnKind::NR: return "NR";
    case WarnKind::PR: return "PR";
    case WarnKind::None: return "None";
  }
  return "?";
}

Warning analyze_merge(const PredicatePtr& policy_pred, const PredicatePtr& user_pred,
                      std::size_t max_disjuncts) {
  PredicatePtr combined = and_of(with_origin(policy_pred, Origin::Policy),
                                 with_origin(user_pred, Origin::User));
  DnfPredicate dnf = to_dnf(eliminate_not(combined), max_disjuncts);

  Warning warning;
  bool all_nr = true;
  bool all_marked = true;
  auto record = [&warning](const SimpleExpression& a, const SimpleExpression& b) {
    for (const auto& [wa, wb] : warning.witnesses) {
      if (wa == a && wb == b) return;
    }
    warning.witnesses.emplace_back(a, b);
  };

  for (const Conjunct& conjunct : dnf.disjuncts) {
    WarnKind mark = WarnKind::None;
    for (std::size_t i = 0; i < conjunct.size(); ++i) {
      for (std::size_t j = i + 1; j < conjunct.size(); ++j) {
        WarnKind k = check_two_simple(conjunct[i], conjunct[j]);
        if (k == WarnKind::None) continue;
        record(conjunct[i], conjunct[j]);
        if (k == WarnKind::NR) mark = WarnKind::NR;
        if (k == WarnKind::PR && mark == WarnKind::None) mark = WarnKind::PR;
      }
    }
    if (mark != WarnKind::NR) all_nr = false;
    if (mark == WarnKind::None) all_marked = false;
  }

  if (all_nr) {
    warning.kind = WarnKind::NR;
  } else if (all_marked) {
    warning.kind = WarnKind::PR;
  } else {
    warning.kind = WarnKind::None;
    warning.witnesses.clear();
  }

  if (warning.kind != WarnKind::None) {
    std::ostringstream msg;
    msg << (warning.kind == WarnKind::NR
                ? "merged condition can never pass a tuple; conflicting pairs: "
                : "policy constraints withhold tuples the query admits; pairs: ");
    for (std::size_t i = 0; i < warning.witnesses.size(); ++i) {
      if (i) msg << "; ";
      msg << to_string(warning.witnesses[i].first) << " vs "
          << to_string(warning.witnesses[i].second);
    }
    warning.explanation = msg.str();
  }
  return warning;
}

// ---------------------------------------------------------------------------
// Evaluation + satisfiability oracle
// ---------------------------------------------------------------------------

bool leaf_holds(const SimpleExpression& expr, const Literal& value) {
  const bool value_is_str = is_string_literal(value);
  const bool lit_is_str = is_string_literal(expr.literal);
  if (value_is_str != lit_is_str) {
    return expr.op == CmpOp::Ne;  // a value of another type is never equal
  }
  if (value_is_str) {
    const auto& v = std::get<std::string>(value);
    const auto& w = std::get<std::string>(expr.literal);
    if (expr.op == CmpOp::Eq) return v == w;
    if (expr.op == CmpOp::Ne) return v != w;
    return false;  // ordering over strings is excluded by construction
  }
  const Decimal& v = std::get<Decimal>(value);
  const Decimal& w = std::get<Decimal>(expr.literal);
  switch (expr.op) {
    case CmpOp::Lt: return v < w;
    case CmpOp::Gt: return v > w;
    case CmpOp::Le: return v <= w;
    case CmpOp::Ge: return v >= w;
    case CmpOp::Eq: return v == w;
    case CmpOp::Ne: return !(v == w);
  }
  return false;
}

bool evaluate_with(const PredicatePtr& p,
                   const std::function<bool(const SimpleExpression&)>& leaf_fn) {
  const auto& n = p->node();
  if (const auto* s = std::get_if<SimpleExpression>(&n)) return leaf_fn(*s);
  if (const auto* x = std::get_if<NotNode>(&n)) return !evaluate_with(x->child, leaf_fn);
  if (const auto* a = std::get_if<AndNode>(&n)) {
    return evaluate_with(a->lhs, leaf_fn) && evaluate_with(a->rhs, leaf_fn);
  }
  const auto& o = std::get<OrNode>(n);
  return evaluate_with(o.lhs, leaf_fn) || evaluate_with(o.rhs, leaf_fn);
}

bool evaluate(const PredicatePtr& p, const std::map<std::string, Literal>& assignment) {
  return evaluate_with(p, [&assignment](const SimpleExpression& s) {
    auto it = assignment.find(s.attribute);
    if (it == assignment.end()) {
      throw std::logic_error("no value for attribute '" + s.attribute + "'");
    }
    return leaf_holds(s, it->second);
  });
}

bool evaluate(const DnfPredicate& p, const std::map<std::string, Literal>& assignment) {
  for (const Conjunct& conjunct : p.disjuncts) {
    bool all = true;
    for (const SimpleExpression& s : conjunct) {
      auto it = assignment.find(s.attribute);
      if (it == assignment.end()) {
        throw std::logic_error("no value for attribute '" + s.attribute + "'");
      }
      if (!leaf_holds(s, it->second)) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

namespace {

// Candidates are drawn only from the literal types present on the attribute:
// the fragment types each attribute, and a foreign-type value would break the
// complement laws the NOT-conversion table relies on (x<=v / x>v are both
// false for a string x).
std::vector<Literal> candidate_values(const std::set<Decimal>& nums,
                                      const std::set<std::string>& strs) {
  std::vector<Literal> out;
  if (!nums.empty()) {
    std::vector<Decimal> sorted(nums.begin(), nums.end());
    out.emplace_back(sorted.front().minus_int(1));
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      out.emplace_back(sorted[i]);
      if (i + 1 < sorted.size()) out.emplace_back(Decimal::midpoint(sorted[i], sorted[i + 1]));
    }
    out.emplace_back(sorted.back().plus_int(1));
  }
  if (!strs.empty()) {
    for (const std::string& s : strs) out.emplace_back(s);
    std::string fresh = "z";
    while (strs.count(fresh)) fresh += 'z';
    out.emplace_back(std::move(fresh));
  }
  return out;
}

}  // namespace

SatResult sat_oracle(const PredicatePtr& p) {
  std::map<std::string, std::set<Decimal>> nums;
  std::map<std::string, std::set<std::string>> strs;
  std::function<void(const PredicatePtr&)> collect = [&](const PredicatePtr& q) {
    const auto& n = q->node();
    if (const auto* s = std::get_if<SimpleExpression>(&n)) {
      if (const auto* d = std::get_if<Decimal>(&s->literal)) {
        nums[s->attribute].insert(*d);
        strs[s->attribute];
      } else {
        strs[s->attribute].insert(std::get<std::string>(s->literal));
        nums[s->attribute];
      }
    } else if (const auto* x = std::get_if<NotNode>(&n)) {
      collect(x->child);
    } else if (const auto* a = std::get_if<AndNode>(&n)) {
      collect(a->lhs);
      collect(a->rhs);
    } else {
      const auto& o = std::get<OrNode>(n);
      collect(o.lhs);
      collect(o.rhs);
    }
  };
  collect(p);

  std::vector<std::string> attrs;
  std::vector<std::vector<Literal>> grids;
  for (const auto& [attr, values] : nums) {
    attrs.push_back(attr);
    grids.push_back(candidate_values(values, strs[attr]));
  }

  std::map<std::string, Literal> assignment;
  std::function<bool(std::size_t)> search = [&](std::size_t depth) -> bool {
    if (depth == attrs.size()) return evaluate(p, assignment);
    for (const Literal& candidate : grids[depth]) {
      assignment[attrs[depth]] = candidate;
      if (search(depth + 1)) return true;
    }
    assignment.erase(attrs[depth]);
    return false;
  };

  SatResult result;
  result.satisfiable = search(0);
  if (result.satisfiable) result.witness = assignment;
  return result;
}

}  // namespace streamgate
