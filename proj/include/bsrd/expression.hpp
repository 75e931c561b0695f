#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace bsrd {

/// Arithmetic expression over named variables, used for user-defined
/// reaction systems and initial-data profiles.
///
/// Grammar (see README for the full description):
///   expr    := term (('+'|'-') term)*
///   term    := factor (('*'|'/') factor)*
///   factor  := ('-')* power
///   power   := atom ('^' factor)?          (right associative)
///   atom    := number | identifier | identifier '(' expr ')' | '(' expr ')'
/// The single built-in function is max0(x) = max(x, 0). Identifiers not
/// bound as variables resolve against the parameter table at parse time.
class Expression {
 public:
  /// Parses text against an ordered variable list; unknown identifiers
  /// are looked up in params and folded in as constants.
  static Expression parse(const std::string& text,
                          const std::vector<std::string>& variables,
                          const std::map<std::string, double>& params = {});

  double eval(const std::vector<double>& variable_values) const;
  double eval(const double* values, size_t count) const;

  const std::string& text() const { return text_; }

  struct Node;  // implementation detail, defined in expression.cpp

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

/// Thrown on parse failures, with position information in the message.
class ExpressionError : public std::runtime_error {
 public:
  explicit ExpressionError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bsrd
