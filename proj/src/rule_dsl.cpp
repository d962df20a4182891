// Copyright 2026 The CBF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cbf/rule_dsl.hpp"

#include <cctype>
#include <sstream>
#include <string>
#include <vector>

#include "cbf/error.hpp"

namespace cbf {
namespace {

struct Token {
  enum Type { Word, Number, LBrace, RBrace, Comma, Colon, Arrow, End } type;
  std::string text;
  int column;
};

class LineParser {
 public:
  LineParser(std::string_view line, int line_no, const Taxonomy& taxonomy)
      : line_no_(line_no), taxonomy_(taxonomy) {
    tokenize(line);
  }

  Rule parse(int priority) {
    Rule r;
    expect_word("rule");
    r.id = take(Token::Word, "rule id").text;
    take(Token::Colon, "':'");

    const Token status = take(Token::Word, "'mis' or 'ok'");
    if (status.text == "mis")
      r.subject_status = UnitStatus::MisClassified;
    else if (status.text == "ok")
      r.subject_status = UnitStatus::Classified;
    else
      fail(status, "expected 'mis' or 'ok', found '" + status.text + "'");
    r.subject_classes = class_set();

    const Token ante = take(Token::Word, "antecedent");
    if (ante.text == "surroundedBy")
      r.antecedent = {AntecedentKind::SurroundedBy, class_set()};
    else if (ante.text == "noNeighborOf")
      r.antecedent = {AntecedentKind::NoNeighborOf, class_set()};
    else if (ante.text == "neighborhoodContains")
      r.antecedent = {AntecedentKind::NeighborhoodContains, class_set()};
    else if (ante.text == "always")
      r.antecedent = {AntecedentKind::Unconditional, {}};
    else
      fail(ante, "unknown antecedent '" + ante.text + "'");

    take(Token::Arrow, "'=>'");
    const Token cons = take(Token::Word, "consequent");
    if (cons.text == "adoptSurroundClass") {
      r.consequent = {ConsequentKind::AdoptSurroundClass, 0};
    } else if (cons.text == "adoptMaxClass") {
      r.consequent = {ConsequentKind::AdoptMaxClass, 0};
    } else if (cons.text == "shadow") {
      const Token v = take(Token::Number, "'+1' or '-1'");
      if (v.text != "+1" && v.text != "-1") fail(v, "shadow takes '+1' or '-1'");
      r.consequent = {ConsequentKind::AssertShadow, v.text == "+1" ? 1 : -1};
    } else if (cons.text == "elevation") {
      const Token v = take(Token::Number, "'0', '1' or '2'");
      if (v.text != "0" && v.text != "1" && v.text != "2") fail(v, "elevation takes 0, 1 or 2");
      r.consequent = {ConsequentKind::AssertElevation, v.text[0] - '0'};
    } else {
      fail(cons, "unknown consequent '" + cons.text + "'");
    }
    if (peek().type != Token::End) fail(peek(), "unexpected '" + peek().text + "' after rule");

    r.kind = kind_for(r.consequent.kind);
    if (r.kind == RuleKind::IntraCorrection && r.subject_status != UnitStatus::MisClassified)
      fail(status, "correction consequents need a 'mis' subject");
    r.priority = priority;
    return r;
  }

 private:
  void tokenize(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
      const char c = s[i];
      const int col = int(i) + 1;
      if (c == '#') break;
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
      } else if (c == '{') {
        tokens_.push_back({Token::LBrace, "{", col});
        ++i;
      } else if (c == '}') {
        tokens_.push_back({Token::RBrace, "}", col});
        ++i;
      } else if (c == ',') {
        tokens_.push_back({Token::Comma, ",", col});
        ++i;
      } else if (c == ':') {
        tokens_.push_back({Token::Colon, ":", col});
        ++i;
      } else if (c == '=' && i + 1 < s.size() && s[i + 1] == '>') {
        tokens_.push_back({Token::Arrow, "=>", col});
        i += 2;
      } else if (c == '+' || c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t j = i + 1;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
        tokens_.push_back({Token::Number, std::string(s.substr(i, j - i)), col});
        i = j;
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t j = i + 1;
        while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' ||
                                s[j] == '-' || s[j] == '.'))
          ++j;
        tokens_.push_back({Token::Word, std::string(s.substr(i, j - i)), col});
        i = j;
      } else {
        throw Error(ErrorKind::Syntax, location(col) + ": unexpected character '" + std::string(1, c) + "'");
      }
    }
    tokens_.push_back({Token::End, "end of line", int(s.size()) + 1});
  }

  std::string location(int col) const {
    return "line " + std::to_string(line_no_) + ", column " + std::to_string(col);
  }

  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw Error(ErrorKind::Syntax, location(t.column) + ": " + msg);
  }

  const Token& peek() const { return tokens_[pos_]; }

  Token take(Token::Type type, const std::string& what) {
    const Token& t = peek();
    if (t.type != type) fail(t, "expected " + what + ", found '" + t.text + "'");
    ++pos_;
    return t;
  }

  void expect_word(const std::string& w) {
    const Token t = take(Token::Word, "'" + w + "'");
    if (t.text != w) fail(t, "expected '" + w + "', found '" + t.text + "'");
  }

  ClassId class_name() {
    const Token t = take(Token::Word, "class name");
    if (auto id = taxonomy_.find(t.text)) return *id;
    throw Error(ErrorKind::UnknownClass, location(t.column) + ": unknown class '" + t.text + "'");
  }

  std::vector<ClassId> class_set() {
    std::vector<ClassId> out;
    if (peek().type != Token::LBrace) {
      out.push_back(class_name());
      return out;
    }
    ++pos_;
    out.push_back(class_name());
    while (peek().type == Token::Comma) {
      ++pos_;
      out.push_back(class_name());
    }
    take(Token::RBrace, "',' or '}'");
    return out;
  }

  int line_no_;
  const Taxonomy& taxonomy_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

std::string set_text(const std::vector<ClassId>& set, const Taxonomy& t) {
  if (set.size() == 1) return t[set[0]].name;
  std::string s = "{";
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (i) s += ", ";
    s += t[set[i]].name;
  }
  return s + "}";
}

}  // namespace

RuleBase parse_rules(std::string_view text, TaxonomyPtr taxonomy) {
  if (!taxonomy) throw Error(ErrorKind::Taxonomy, "rule parsing needs a taxonomy");
  RuleBase base(taxonomy);
  int line_no = 0;
  int priority = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    LineParser probe(line, line_no, *taxonomy);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos &&
        line.substr(line.find_first_not_of(" \t\r"), 1) != "#") {
      Rule r = probe.parse(++priority);
      try {
        base.add(std::move(r));
      } catch (const Error& e) {
        throw Error(e.kind(), "line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  return base;
}

std::string serialize_rules(const RuleBase& rules) {
  if (!rules.taxonomy()) throw Error(ErrorKind::Taxonomy, "serializing rules needs a taxonomy");
  const Taxonomy& t = *rules.taxonomy();
  std::ostringstream os;
  for (const auto& r : rules.rules()) {
    os << "rule " << r.id << ": " << (r.subject_status == UnitStatus::MisClassified ? "mis " : "ok ")
       << set_text(r.subject_classes, t) << ' ';
    switch (r.antecedent.kind) {
      case AntecedentKind::SurroundedBy: os << "surroundedBy " << set_text(r.antecedent.classes, t); break;
      case AntecedentKind::NoNeighborOf: os << "noNeighborOf " << set_text(r.antecedent.classes, t); break;
      case AntecedentKind::NeighborhoodContains:
        os << "neighborhoodContains " << set_text(r.antecedent.classes, t);
        break;
      case AntecedentKind::Unconditional: os << "always"; break;
    }
    os << " => ";
    switch (r.consequent.kind) {
      case ConsequentKind::AdoptSurroundClass: os << "adoptSurroundClass"; break;
      case ConsequentKind::AdoptMaxClass: os << "adoptMaxClass"; break;
      case ConsequentKind::AssertShadow: os << "shadow " << (r.consequent.value > 0 ? "+1" : "-1"); break;
      case ConsequentKind::AssertElevation: os << "elevation " << r.consequent.value; break;
    }
    os << '\n';
  }
  return os.str();
}

std::string builtin_rules_text(const Taxonomy& taxonomy) {
  auto tax = std::make_shared<const Taxonomy>(taxonomy);
  RuleBase all = builtin_intra_rules(tax);
  all.append(builtin_extra_rules(tax));
  return serialize_rules(all);
}

}  // namespace cbf
