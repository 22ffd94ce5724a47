#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace kprov {

/// Job or machine attributes. Values are always strings; numeric
/// comparisons parse them on demand.
using Attributes = std::map<std::string, std::string>;

enum class FilterOp { kEq, kNe, kGe, kLe, kIn };

struct FilterClause {
  std::string attribute;
  FilterOp op = FilterOp::kEq;
  // Exactly one element unless op == kIn.
  std::vector<std::string> values;

  bool operator==(const FilterClause&) const = default;
};

/// Conjunction of clauses. No clauses means match-all.
struct FilterExpr {
  std::vector<FilterClause> clauses;

  bool operator==(const FilterExpr&) const = default;
  bool MatchesAll() const { return clauses.empty(); }
};

/// Pure evaluation. A missing attribute fails EQ/GE/LE/IN and satisfies NE.
/// GE/LE compare numerically when both sides parse as decimal numbers and
/// lexicographically otherwise.
bool EvalFilter(const FilterExpr& expr, const Attributes& attrs);

/// Grammar: clause ("AND" clause)*, clause := name OP value with
/// OP in {==, !=, >=, <=, IN}. IN takes a "|"-separated set. Values may be
/// double-quoted. Blank text yields match-all. Throws FilterSyntax.
FilterExpr ParseFilter(std::string_view text);

/// Canonical text form; ParseFilter(FormatFilter(e)) == e.
std::string FormatFilter(const FilterExpr& expr);

const char* FilterOpToken(FilterOp op);

}  // namespace kprov
