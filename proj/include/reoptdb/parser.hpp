#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include "reoptdb/query.hpp"

namespace reoptdb {

// Recursive-descent parser for the count-query dialect:
//
//   SELECT COUNT(*) FROM ident (, ident)* [WHERE pred (AND pred)*]
//   pred := ident.ident = integer | ident.ident = ident.ident
//
// Keywords are case-insensitive. Errors carry the 1-based character
// position. Disjunction, inequality operators, and self joins are rejected
// with targeted messages.
namespace detail {

struct Token {
  enum class Kind { Ident, Int, Symbol, End };
  Kind kind = Kind::End;
  std::string text;
  Value value = 0;
  std::size_t pos = 0;  // 1-based offset in the input
};

class Lexer {
 public:
  explicit Lexer(const std::string& input) : in_(input) {}

  Token next() {
    while (pos_ < in_.size() && std::isspace(static_cast<unsigned char>(in_[pos_]))) {
      ++pos_;
    }
    Token t;
    t.pos = pos_ + 1;
    if (pos_ >= in_.size()) return t;
    char c = in_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < in_.size() &&
             (std::isalnum(static_cast<unsigned char>(in_[pos_])) ||
              in_[pos_] == '_')) {
        ++pos_;
      }
      t.kind = Token::Kind::Ident;
      t.text = in_.substr(start, pos_ - start);
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && pos_ + 1 < in_.size() &&
         std::isdigit(static_cast<unsigned char>(in_[pos_ + 1])))) {
      std::size_t start = pos_;
      if (c == '-') ++pos_;
      while (pos_ < in_.size() &&
             std::isdigit(static_cast<unsigned char>(in_[pos_]))) {
        ++pos_;
      }
      t.kind = Token::Kind::Int;
      t.text = in_.substr(start, pos_ - start);
      try {
        t.value = std::stoll(t.text);
      } catch (const std::exception&) {
        throw UsageError("parse error at position " + std::to_string(t.pos) +
                         ": integer '" + t.text + "' out of range");
      }
      return t;
    }
    // Multi-character comparison operators are lexed whole so the error
    // message can name them.
    static const char* two_char[] = {"<=", ">=", "!=", "<>"};
    for (const char* op : two_char) {
      if (in_.compare(pos_, 2, op) == 0) {
        t.kind = Token::Kind::Symbol;
        t.text = op;
        pos_ += 2;
        return t;
      }
    }
    t.kind = Token::Kind::Symbol;
    t.text = std::string(1, c);
    ++pos_;
    return t;
  }

 private:
  const std::string& in_;
  std::size_t pos_ = 0;
};

inline std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

class Parser {
 public:
  explicit Parser(const std::string& input) : lexer_(input) { advance(); }

  QuerySpec parse() {
    expect_keyword("SELECT");
    expect_keyword("COUNT");
    expect_symbol("(");
    expect_symbol("*");
    expect_symbol(")");
    expect_keyword("FROM");

    QuerySpec q;
    q.relations.push_back(expect_ident("relation name"));
    while (is_symbol(",")) {
      advance();
      q.relations.push_back(expect_ident("relation name"));
    }
    for (std::size_t i = 0; i < q.relations.size(); ++i) {
      for (std::size_t j = i + 1; j < q.relations.size(); ++j) {
        if (q.relations[i] == q.relations[j]) {
          throw UsageError("parse error: relation '" + q.relations[i] +
                           "' listed twice (self joins are not supported)");
        }
      }
    }

    if (is_keyword("WHERE")) {
      advance();
      parse_predicate(q);
      while (true) {
        if (is_keyword("AND")) {
          advance();
          parse_predicate(q);
          continue;
        }
        if (is_keyword("OR")) {
          throw UsageError("parse error at position " +
                           std::to_string(tok_.pos) +
                           ": OR is not supported (conjunctions only)");
        }
        break;
      }
    }
    if (tok_.kind != Token::Kind::End) {
      throw UsageError("parse error at position " + std::to_string(tok_.pos) +
                       ": unexpected '" + tok_.text + "'");
    }
    q.canonicalize();
    return q;
  }

 private:
  void parse_predicate(QuerySpec& q) {
    ColumnRef lhs = parse_column(q);
    if (is_symbol("<") || is_symbol(">") || is_symbol("<=") ||
        is_symbol(">=") || is_symbol("!=") || is_symbol("<>")) {
      throw UsageError("parse error at position " + std::to_string(tok_.pos) +
                       ": operator '" + tok_.text +
                       "' is not supported (equality predicates only)");
    }
    expect_symbol("=");
    if (tok_.kind == Token::Kind::Int) {
      q.selections.push_back({lhs, tok_.value});
      advance();
      return;
    }
    ColumnRef rhs = parse_column(q);
    if (lhs.relation == rhs.relation) {
      throw UsageError(
          "parse error: predicate '" + lhs.text() + " = " + rhs.text() +
          "' compares columns of one relation (join predicates must span two)");
    }
    q.joins.push_back({lhs, rhs});
  }

  ColumnRef parse_column(const QuerySpec& q) {
    std::size_t pos = tok_.pos;
    std::string rel = expect_ident("relation name");
    expect_symbol(".");
    std::string col = expect_ident("column name");
    if (q.relation_index(rel) < 0) {
      throw UsageError("parse error at position " + std::to_string(pos) +
                       ": relation '" + rel + "' is not listed in FROM");
    }
    return {rel, col};
  }

  void advance() { tok_ = lexer_.next(); }

  bool is_keyword(const char* kw) const {
    return tok_.kind == Token::Kind::Ident && upper(tok_.text) == kw;
  }

  bool is_symbol(const char* s) const {
    return tok_.kind == Token::Kind::Symbol && tok_.text == s;
  }

  void expect_keyword(const char* kw) {
    if (!is_keyword(kw)) {
      throw UsageError("parse error at position " + std::to_string(tok_.pos) +
                       ": expected " + std::string(kw) + ", got '" + tok_.text +
                       "'");
    }
    advance();
  }

  void expect_symbol(const char* s) {
    if (!is_symbol(s)) {
      throw UsageError("parse error at position " + std::to_string(tok_.pos) +
                       ": expected '" + std::string(s) + "', got '" +
                       tok_.text + "'");
    }
    advance();
  }

  std::string expect_ident(const char* what) {
    if (tok_.kind != Token::Kind::Ident) {
      throw UsageError("parse error at position " + std::to_string(tok_.pos) +
                       ": expected " + std::string(what) + ", got '" +
                       tok_.text + "'");
    }
    std::string text = tok_.text;
    advance();
    return text;
  }

  Lexer lexer_;
  Token tok_;
};

}  // namespace detail

inline QuerySpec parse_query(const std::string& text) {
  return detail::Parser(text).parse();
}

}  // namespace reoptdb
