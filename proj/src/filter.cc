#include "kprov/filter.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>

#include "kprov/errors.h"

namespace kprov {

namespace {

std::optional<double> ParseNumber(const std::string& text) {
  if (text.empty()) return std::nullopt;
  double value = 0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

// <0, 0, >0 like strcmp.
int Compare(const std::string& lhs, const std::string& rhs) {
  auto a = ParseNumber(lhs);
  auto b = ParseNumber(rhs);
  if (a && b) {
    if (*a < *b) return -1;
    if (*a > *b) return 1;
    return 0;
  }
  return lhs.compare(rhs);
}

bool EvalClause(const FilterClause& clause, const Attributes& attrs) {
  auto it = attrs.find(clause.attribute);
  if (it == attrs.end()) return clause.op == FilterOp::kNe;
  const std::string& actual = it->second;
  switch (clause.op) {
    case FilterOp::kEq:
      return actual == clause.values.front();
    case FilterOp::kNe:
      return actual != clause.values.front();
    case FilterOp::kGe:
      return Compare(actual, clause.values.front()) >= 0;
    case FilterOp::kLe:
      return Compare(actual, clause.values.front()) <= 0;
    case FilterOp::kIn:
      return std::find(clause.values.begin(), clause.values.end(), actual) != clause.values.end();
  }
  return false;
}

class FilterScanner {
 public:
  explicit FilterScanner(std::string_view text) : text_(text) {}

  FilterExpr Parse() {
    FilterExpr expr;
    SkipSpace();
    if (AtEnd()) return expr;
    while (true) {
      expr.clauses.push_back(ParseClause());
      SkipSpace();
      if (AtEnd()) break;
      std::string word = ReadWord();
      if (word != "AND") Fail("expected AND, got '" + word + "'");
      SkipSpace();
      if (AtEnd()) Fail("dangling AND");
    }
    return expr;
  }

 private:
  FilterClause ParseClause() {
    FilterClause clause;
    clause.attribute = ReadName();
    if (clause.attribute.empty()) Fail("expected attribute name");
    SkipSpace();
    clause.op = ReadOp();
    SkipSpace();
    if (AtEnd()) Fail("missing value after operator");
    std::string value = ReadValue();
    if (clause.op == FilterOp::kIn) {
      size_t start = 0;
      while (true) {
        size_t bar = value.find('|', start);
        std::string item = value.substr(start, bar == std::string::npos ? bar : bar - start);
        if (item.empty()) Fail("empty element in IN set");
        clause.values.push_back(std::move(item));
        if (bar == std::string::npos) break;
        start = bar + 1;
      }
    } else {
      clause.values.push_back(std::move(value));
    }
    return clause;
  }

  static bool IsOpChar(char c) { return c == '=' || c == '!' || c == '<' || c == '>'; }

  std::string ReadName() {
    size_t start = pos_;
    while (!AtEnd() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           !IsOpChar(text_[pos_])) {
      ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string ReadWord() {
    size_t start = pos_;
    while (!AtEnd() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  FilterOp ReadOp() {
    if (AtEnd()) Fail("missing operator");
    if (IsOpChar(text_[pos_])) {
      size_t start = pos_;
      while (!AtEnd() && IsOpChar(text_[pos_])) ++pos_;
      std::string_view op = text_.substr(start, pos_ - start);
      if (op == "==") return FilterOp::kEq;
      if (op == "!=") return FilterOp::kNe;
      if (op == ">=") return FilterOp::kGe;
      if (op == "<=") return FilterOp::kLe;
      Fail("unknown operator '" + std::string(op) + "'");
    }
    std::string word = ReadWord();
    if (word == "IN") return FilterOp::kIn;
    Fail("unknown operator '" + word + "'");
  }

  std::string ReadValue() {
    if (text_[pos_] != '"') return ReadWord();
    ++pos_;
    std::string value;
    while (!AtEnd() && text_[pos_] != '"') {
      if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
      value.push_back(text_[pos_++]);
    }
    if (AtEnd()) Fail("unterminated quoted value");
    ++pos_;
    return value;
  }

  void SkipSpace() {
    while (!AtEnd() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool AtEnd() const { return pos_ >= text_.size(); }

  [[noreturn]] void Fail(const std::string& what) const {
    throw FilterSyntax("filter syntax error at offset " + std::to_string(pos_) + ": " + what);
  }

  std::string_view text_;
  size_t pos_ = 0;
};

std::string QuoteIfNeeded(const std::string& value) {
  bool plain = !value.empty() && value.front() != '"' &&
               std::none_of(value.begin(), value.end(),
                            [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
  if (plain) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

const char* FilterOpToken(FilterOp op) {
  switch (op) {
    case FilterOp::kEq:
      return "==";
    case FilterOp::kNe:
      return "!=";
    case FilterOp::kGe:
      return ">=";
    case FilterOp::kLe:
      return "<=";
    case FilterOp::kIn:
      return "IN";
  }
  return "?";
}

bool EvalFilter(const FilterExpr& expr, const Attributes& attrs) {
  return std::all_of(expr.clauses.begin(), expr.clauses.end(),
                     [&](const FilterClause& c) { return EvalClause(c, attrs); });
}

FilterExpr ParseFilter(std::string_view text) { return FilterScanner(text).Parse(); }

std::string FormatFilter(const FilterExpr& expr) {
  std::string out;
  for (const auto& clause : expr.clauses) {
    if (!out.empty()) out += " AND ";
    out += clause.attribute;
    out += ' ';
    out += FilterOpToken(clause.op);
    out += ' ';
    if (clause.op == FilterOp::kIn) {
      std::string joined;
      for (const auto& v : clause.values) {
        if (!joined.empty()) joined += '|';
        joined += v;
      }
      out += QuoteIfNeeded(joined);
    } else {
      out += QuoteIfNeeded(clause.values.front());
    }
  }
  return out;
}

}  // namespace kprov
