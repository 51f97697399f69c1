#include "optlab/parser.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace optlab {

const char* join_method_name(JoinMethod m) {
  switch (m) {
    case JoinMethod::NestLoop: return "nestloop";
    case JoinMethod::HashJoin: return "hashjoin";
    case JoinMethod::MergeJoin: return "mergejoin";
  }
  return "?";
}

namespace {

enum class TokKind { Ident, Number, String, Symbol, End };

struct Token {
  TokKind kind = TokKind::End;
  std::string text;   // identifiers lowercased; symbols verbatim
  size_t offset = 0;
  bool has_dot = false;  // numbers: decimal point present
};

const std::unordered_set<std::string>& reserved_words() {
  static const std::unordered_set<std::string> kReserved = {
      "select", "distinct", "from", "where", "group",  "by",    "order", "limit",
      "as",     "and",      "or",   "not",   "in",     "exists", "left",  "outer",
      "inner",  "join",     "on",   "asc",   "desc",   "date",   "interval", "sum",
      "count",  "min",      "max",  "day",   "month",  "year",   "having", "union"};
  return kReserved;
}

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  // Leading /*+ ... */ comment body, when present.
  std::optional<std::pair<std::string, size_t>> take_hint_comment() {
    skip_plain_space();
    if (pos_ + 2 < text_.size() && text_[pos_] == '/' && text_[pos_ + 1] == '*' && text_[pos_ + 2] == '+') {
      size_t start = pos_ + 3;
      size_t end = text_.find("*/", start);
      if (end == std::string::npos) throw ParseError("unterminated hint comment", pos_, {"*/"});
      pos_ = end + 2;
      return std::make_pair(text_.substr(start, end - start), start);
    }
    return std::nullopt;
  }

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space_and_comments();
      Token t;
      t.offset = pos_;
      if (pos_ >= text_.size()) {
        t.kind = TokKind::End;
        out.push_back(t);
        return out;
      }
      char c = text_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
          ++pos_;
        t.kind = TokKind::Ident;
        t.text = text_.substr(start, pos_ - start);
        std::transform(t.text.begin(), t.text.end(), t.text.begin(),
                       [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ + 1 < text_.size() && text_[pos_] == '.' &&
            std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
          t.has_dot = true;
          ++pos_;
          while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        }
        t.kind = TokKind::Number;
        t.text = text_.substr(start, pos_ - start);
      } else if (c == '\'') {
        ++pos_;
        std::string s;
        for (;;) {
          if (pos_ >= text_.size()) throw ParseError("unterminated string literal", t.offset, {"'"});
          if (text_[pos_] == '\'') {
            if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '\'') {
              s += '\'';
              pos_ += 2;
              continue;
            }
            ++pos_;
            break;
          }
          s += text_[pos_++];
        }
        t.kind = TokKind::String;
        t.text = std::move(s);
      } else {
        t.kind = TokKind::Symbol;
        static const char* kTwoChar[] = {"<=", ">=", "<>", "!="};
        bool matched = false;
        for (const char* tc : kTwoChar) {
          if (text_.compare(pos_, 2, tc) == 0) {
            t.text = tc;
            pos_ += 2;
            matched = true;
            break;
          }
        }
        if (!matched) {
          t.text = std::string(1, c);
          ++pos_;
        }
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void skip_plain_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void skip_space_and_comments() {
    for (;;) {
      skip_plain_space();
      if (pos_ + 1 < text_.size() && text_[pos_] == '-' && text_[pos_ + 1] == '-') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
        continue;
      }
      if (pos_ + 1 < text_.size() && text_[pos_] == '/' && text_[pos_ + 1] == '*') {
        size_t end = text_.find("*/", pos_ + 2);
        if (end == std::string::npos) throw ParseError("unterminated comment", pos_, {"*/"});
        pos_ = end + 2;
        continue;
      }
      return;
    }
  }

  const std::string& text_;
  size_t pos_ = 0;
};

std::vector<AstHint> parse_hint_body(const std::string& body, size_t body_offset) {
  std::vector<AstHint> hints;
  Lexer lex(body);
  std::vector<Token> toks = lex.run();
  size_t i = 0;
  while (toks[i].kind != TokKind::End) {
    const Token& m = toks[i];
    if (m.kind != TokKind::Ident)
      throw ParseError("expected hint method name", body_offset + m.offset,
                       {"NESTLOOP", "HASHJOIN", "MERGEJOIN"});
    AstHint h;
    if (m.text == "nestloop")
      h.method = JoinMethod::NestLoop;
    else if (m.text == "hashjoin")
      h.method = JoinMethod::HashJoin;
    else if (m.text == "mergejoin")
      h.method = JoinMethod::MergeJoin;
    else
      throw ParseError("unknown hint method '" + m.text + "'", body_offset + m.offset,
                       {"NESTLOOP", "HASHJOIN", "MERGEJOIN"});
    ++i;
    if (toks[i].kind != TokKind::Symbol || toks[i].text != "(")
      throw ParseError("expected '(' after hint method", body_offset + toks[i].offset, {"("});
    ++i;
    while (toks[i].kind == TokKind::Ident) {
      h.tables.push_back(toks[i].text);
      ++i;
    }
    if (toks[i].kind != TokKind::Symbol || toks[i].text != ")")
      throw ParseError("expected table name or ')' in hint", body_offset + toks[i].offset, {")"});
    ++i;
    if (h.tables.empty())
      throw ParseError("hint names no tables", body_offset + m.offset, {"table name"});
    hints.push_back(std::move(h));
  }
  return hints;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  AstSelectPtr run() {
    Lexer lex(text_);
    std::vector<AstHint> hints;
    if (auto hint = lex.take_hint_comment()) hints = parse_hint_body(hint->first, hint->second);
    toks_ = lex.run();
    AstSelectPtr sel = parse_select();
    sel->hints = std::move(hints);
    if (accept_symbol(";")) {
    }
    if (cur().kind != TokKind::End) fail({"end of input"});
    return sel;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(size_t n = 1) const { return toks_[std::min(pos_ + n, toks_.size() - 1)]; }
  void advance() { if (cur().kind != TokKind::End) ++pos_; }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    const Token& t = cur();
    std::string found = t.kind == TokKind::End ? "end of input" : "'" + t.text + "'";
    std::string msg = "syntax error at offset " + std::to_string(t.offset) + ": found " + found +
                      ", expected ";
    for (size_t i = 0; i < expected.size(); ++i) {
      if (i) msg += i + 1 == expected.size() ? " or " : ", ";
      msg += expected[i];
    }
    throw ParseError(msg, t.offset, std::move(expected));
  }

  bool at_keyword(const char* kw) const { return cur().kind == TokKind::Ident && cur().text == kw; }

  bool accept_keyword(const char* kw) {
    if (!at_keyword(kw)) return false;
    advance();
    return true;
  }

  void expect_keyword(const char* kw) {
    if (!accept_keyword(kw)) fail({std::string(kw)});
  }

  bool at_symbol(const char* s) const { return cur().kind == TokKind::Symbol && cur().text == s; }

  bool accept_symbol(const char* s) {
    if (!at_symbol(s)) return false;
    advance();
    return true;
  }

  void expect_symbol(const char* s) {
    if (!accept_symbol(s)) fail({std::string("'") + s + "'"});
  }

  std::string expect_name(const char* what) {
    if (cur().kind != TokKind::Ident || reserved_words().count(cur().text)) fail({what});
    std::string name = cur().text;
    advance();
    return name;
  }

  AstSelectPtr parse_select() {
    auto sel = std::make_unique<AstSelect>();
    expect_keyword("select");
    if (accept_keyword("distinct")) sel->distinct = true;
    do {
      sel->items.push_back(parse_select_item());
    } while (accept_symbol(","));
    expect_keyword("from");
    do {
      sel->from.push_back(parse_table_ref());
    } while (accept_symbol(","));
    if (accept_keyword("where")) sel->where = parse_expr();
    if (accept_keyword("group")) {
      expect_keyword("by");
      do {
        sel->group_by.push_back(parse_expr());
      } while (accept_symbol(","));
    }
    if (accept_keyword("order")) {
      expect_keyword("by");
      do {
        AstOrderItem item;
        item.expr = parse_expr();
        if (accept_keyword("desc"))
          item.desc = true;
        else
          accept_keyword("asc");
        sel->order_by.push_back(std::move(item));
      } while (accept_symbol(","));
    }
    if (accept_keyword("limit")) {
      if (cur().kind != TokKind::Number || cur().has_dot) fail({"integer"});
      sel->limit = std::stoll(cur().text);
      advance();
    }
    return sel;
  }

  AstSelectItem parse_select_item() {
    AstSelectItem item;
    if (at_symbol("*")) {
      auto star = std::make_unique<AstExpr>();
      star->op = AstExprOp::Star;
      star->offset = cur().offset;
      advance();
      item.expr = std::move(star);
      return item;
    }
    if (cur().kind == TokKind::Ident && !reserved_words().count(cur().text) &&
        peek().kind == TokKind::Symbol && peek().text == "." && peek(2).kind == TokKind::Symbol &&
        peek(2).text == "*") {
      auto star = std::make_unique<AstExpr>();
      star->op = AstExprOp::Star;
      star->offset = cur().offset;
      star->qualifier = cur().text;
      advance();
      advance();
      advance();
      item.expr = std::move(star);
      return item;
    }
    item.expr = parse_expr();
    if (accept_keyword("as")) {
      item.alias = expect_name("alias");
    } else if (cur().kind == TokKind::Ident && !reserved_words().count(cur().text)) {
      item.alias = cur().text;
      advance();
    }
    return item;
  }

  std::unique_ptr<AstTableRef> parse_table_ref() {
    auto left = parse_table_primary();
    for (;;) {
      AstJoinKind kind;
      if (accept_keyword("left")) {
        accept_keyword("outer");
        expect_keyword("join");
        kind = AstJoinKind::Left;
      } else if (at_keyword("inner") || at_keyword("join")) {
        accept_keyword("inner");
        expect_keyword("join");
        kind = AstJoinKind::Inner;
      } else {
        return left;
      }
      auto node = std::make_unique<AstTableRef>();
      node->offset = left->offset;
      node->is_join = true;
      node->join_kind = kind;
      node->left = std::move(left);
      node->right = parse_table_primary();
      expect_keyword("on");
      node->on_qual = parse_expr();
      left = std::move(node);
    }
  }

  std::unique_ptr<AstTableRef> parse_table_primary() {
    auto ref = std::make_unique<AstTableRef>();
    ref->offset = cur().offset;
    if (accept_symbol("(")) {
      ref->subquery = parse_select();
      expect_symbol(")");
      accept_keyword("as");
      ref->alias = expect_name("derived table alias");
      return ref;
    }
    ref->table_name = expect_name("table name");
    if (accept_keyword("as")) {
      ref->alias = expect_name("alias");
    } else if (cur().kind == TokKind::Ident && !reserved_words().count(cur().text)) {
      ref->alias = cur().text;
      advance();
    } else {
      ref->alias = ref->table_name;
    }
    return ref;
  }

  AstExprPtr parse_expr() { return parse_or(); }

  AstExprPtr parse_or() {
    AstExprPtr lhs = parse_and();
    while (at_keyword("or")) {
      size_t off = cur().offset;
      advance();
      auto node = std::make_unique<AstExpr>();
      node->op = AstExprOp::BinOp;
      node->bin = BinOpKind::Or;
      node->offset = off;
      node->children.push_back(std::move(lhs));
      node->children.push_back(parse_and());
      lhs = std::move(node);
    }
    return lhs;
  }

  AstExprPtr parse_and() {
    AstExprPtr lhs = parse_comparison();
    while (at_keyword("and")) {
      size_t off = cur().offset;
      advance();
      auto node = std::make_unique<AstExpr>();
      node->op = AstExprOp::BinOp;
      node->bin = BinOpKind::And;
      node->offset = off;
      node->children.push_back(std::move(lhs));
      node->children.push_back(parse_comparison());
      lhs = std::move(node);
    }
    return lhs;
  }

  AstExprPtr parse_comparison() {
    if (at_keyword("not")) {
      size_t off = cur().offset;
      advance();
      if (!at_keyword("exists")) fail({"exists"});
      AstExprPtr e = parse_exists();
      e->negated = true;
      e->offset = off;
      return e;
    }
    AstExprPtr lhs = parse_additive();
    static const struct { const char* sym; BinOpKind kind; } kCmp[] = {
        {"=", BinOpKind::Eq}, {"<>", BinOpKind::Ne}, {"!=", BinOpKind::Ne}, {"<=", BinOpKind::Le},
        {">=", BinOpKind::Ge}, {"<", BinOpKind::Lt}, {">", BinOpKind::Gt}};
    for (const auto& c : kCmp) {
      if (at_symbol(c.sym)) {
        size_t off = cur().offset;
        advance();
        auto node = std::make_unique<AstExpr>();
        node->op = AstExprOp::BinOp;
        node->bin = c.kind;
        node->offset = off;
        node->children.push_back(std::move(lhs));
        node->children.push_back(parse_additive());
        return node;
      }
    }
    bool negated = false;
    if (at_keyword("not") && peek().kind == TokKind::Ident && peek().text == "in") {
      advance();
      negated = true;
    }
    if (accept_keyword("in")) {
      expect_symbol("(");
      if (at_keyword("select")) {
        auto node = std::make_unique<AstExpr>();
        node->op = AstExprOp::InSubquery;
        node->negated = negated;
        node->offset = cur().offset;
        node->children.push_back(std::move(lhs));
        node->subquery = parse_select();
        expect_symbol(")");
        return node;
      }
      auto node = std::make_unique<AstExpr>();
      node->op = AstExprOp::InList;
      node->negated = negated;
      node->offset = cur().offset;
      node->children.push_back(std::move(lhs));
      do {
        node->children.push_back(parse_additive());
      } while (accept_symbol(","));
      expect_symbol(")");
      return node;
    }
    if (negated) fail({"in"});
    return lhs;
  }

  AstExprPtr parse_additive() {
    AstExprPtr lhs = parse_multiplicative();
    for (;;) {
      BinOpKind kind;
      if (at_symbol("+"))
        kind = BinOpKind::Add;
      else if (at_symbol("-"))
        kind = BinOpKind::Sub;
      else
        return lhs;
      size_t off = cur().offset;
      advance();
      auto node = std::make_unique<AstExpr>();
      node->op = AstExprOp::BinOp;
      node->bin = kind;
      node->offset = off;
      node->children.push_back(std::move(lhs));
      node->children.push_back(parse_multiplicative());
      lhs = std::move(node);
    }
  }

  AstExprPtr parse_multiplicative() {
    AstExprPtr lhs = parse_primary();
    while (at_symbol("*")) {
      size_t off = cur().offset;
      advance();
      auto node = std::make_unique<AstExpr>();
      node->op = AstExprOp::BinOp;
      node->bin = BinOpKind::Mul;
      node->offset = off;
      node->children.push_back(std::move(lhs));
      node->children.push_back(parse_primary());
      lhs = std::move(node);
    }
    return lhs;
  }

  AstExprPtr parse_exists() {
    auto node = std::make_unique<AstExpr>();
    node->op = AstExprOp::Exists;
    node->offset = cur().offset;
    expect_keyword("exists");
    expect_symbol("(");
    node->subquery = parse_select();
    expect_symbol(")");
    return node;
  }

  AstExprPtr make_number(const Token& t, bool negative) {
    auto node = std::make_unique<AstExpr>();
    node->op = AstExprOp::Literal;
    node->offset = t.offset;
    if (t.has_dot) {
      double v = std::stod(t.text);
      node->value = Datum::from_decimal(negative ? -v : v);
    } else {
      int64_t v = std::stoll(t.text);
      node->value = Datum::from_int(negative ? -v : v);
    }
    return node;
  }

  AstExprPtr parse_primary() {
    const Token& t = cur();
    if (t.kind == TokKind::Number) {
      advance();
      return make_number(t, false);
    }
    if (t.kind == TokKind::String) {
      auto node = std::make_unique<AstExpr>();
      node->op = AstExprOp::Literal;
      node->offset = t.offset;
      node->value = Datum::from_text(t.text);
      advance();
      return node;
    }
    if (at_symbol("-")) {
      advance();
      if (cur().kind == TokKind::Number) {
        const Token& num = cur();
        advance();
        return make_number(num, true);
      }
      auto node = std::make_unique<AstExpr>();
      node->op = AstExprOp::BinOp;
      node->bin = BinOpKind::Sub;
      node->offset = t.offset;
      auto zero = std::make_unique<AstExpr>();
      zero->op = AstExprOp::Literal;
      zero->value = Datum::from_int(0);
      node->children.push_back(std::move(zero));
      node->children.push_back(parse_primary());
      return node;
    }
    if (accept_symbol("(")) {
      if (at_keyword("select")) {
        auto node = std::make_unique<AstExpr>();
        node->op = AstExprOp::ScalarSubquery;
        node->offset = t.offset;
        node->subquery = parse_select();
        expect_symbol(")");
        return node;
      }
      AstExprPtr inner = parse_expr();
      expect_symbol(")");
      return inner;
    }
    if (at_keyword("exists")) return parse_exists();
    if (at_keyword("not")) {
      advance();
      if (!at_keyword("exists")) fail({"exists"});
      AstExprPtr e = parse_exists();
      e->negated = true;
      return e;
    }
    if (at_keyword("date")) {
      advance();
      if (cur().kind != TokKind::String) fail({"date string"});
      auto node = std::make_unique<AstExpr>();
      node->op = AstExprOp::Literal;
      node->offset = t.offset;
      node->value = Datum::from_date_days(parse_date_iso(cur().text));
      advance();
      return node;
    }
    if (at_keyword("interval")) {
      advance();
      if (cur().kind != TokKind::String) fail({"interval count string"});
      int64_t count = std::stoll(cur().text);
      advance();
      IntervalUnit unit;
      if (accept_keyword("day"))
        unit = IntervalUnit::Day;
      else if (accept_keyword("month"))
        unit = IntervalUnit::Month;
      else if (accept_keyword("year"))
        unit = IntervalUnit::Year;
      else
        fail({"day", "month", "year"});
      auto node = std::make_unique<AstExpr>();
      node->op = AstExprOp::Literal;
      node->offset = t.offset;
      node->value = Datum::from_interval(count, unit);
      return node;
    }
    static const struct { const char* kw; AggKind kind; } kAggs[] = {
        {"sum", AggKind::Sum}, {"count", AggKind::Count}, {"min", AggKind::Min}, {"max", AggKind::Max}};
    for (const auto& a : kAggs) {
      if (at_keyword(a.kw)) {
        advance();
        expect_symbol("(");
        auto node = std::make_unique<AstExpr>();
        node->op = AstExprOp::AggCall;
        node->agg = a.kind;
        node->offset = t.offset;
        if (at_symbol("*")) {
          if (a.kind != AggKind::Count) fail({"expression"});
          node->star_arg = true;
          advance();
        } else {
          node->children.push_back(parse_expr());
        }
        expect_symbol(")");
        return node;
      }
    }
    if (t.kind == TokKind::Ident && !reserved_words().count(t.text)) {
      auto node = std::make_unique<AstExpr>();
      node->op = AstExprOp::ColumnName;
      node->offset = t.offset;
      node->name = t.text;
      advance();
      if (accept_symbol(".")) {
        node->qualifier = node->name;
        node->name = expect_name("column name");
      }
      return node;
    }
    fail({"expression"});
  }

  const std::string& text_;
  std::vector<Token> toks_;
  size_t pos_ = 0;
};

}  // namespace

AstSelectPtr parse_query(const std::string& text) { return Parser(text).run(); }

}  // namespace optlab
