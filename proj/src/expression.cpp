#include "bsrd/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace bsrd {

struct Expression::Node {
  enum class Kind { Constant, Variable, Add, Sub, Mul, Div, Pow, Neg, Max0 };
  Kind kind;
  double value = 0.0;  // Constant
  size_t index = 0;    // Variable
  std::shared_ptr<const Node> a, b;

  double eval(const double* vals, size_t count) const {
    switch (kind) {
      case Kind::Constant: return value;
      case Kind::Variable:
        if (index >= count) throw ExpressionError("variable index out of range");
        return vals[index];
      case Kind::Add: return a->eval(vals, count) + b->eval(vals, count);
      case Kind::Sub: return a->eval(vals, count) - b->eval(vals, count);
      case Kind::Mul: return a->eval(vals, count) * b->eval(vals, count);
      case Kind::Div: return a->eval(vals, count) / b->eval(vals, count);
      case Kind::Pow: return std::pow(a->eval(vals, count), b->eval(vals, count));
      case Kind::Neg: return -a->eval(vals, count);
      case Kind::Max0: return std::max(a->eval(vals, count), 0.0);
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr make_const(double v) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = Kind::Constant;
  n->value = v;
  return n;
}

NodePtr make_var(size_t idx) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = Kind::Variable;
  n->index = idx;
  return n;
}

class Parser {
 public:
  Parser(const std::string& text, const std::vector<std::string>& vars,
         const std::map<std::string, double>& params)
      : text_(text), vars_(vars), params_(params) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != text_.size())
      fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ExpressionError("expression error at position " + std::to_string(pos_) +
                          " in \"" + text_ + "\": " + msg);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  NodePtr expr() {
    NodePtr left = term();
    for (;;) {
      if (consume('+'))
        left = make(Kind::Add, left, term());
      else if (consume('-'))
        left = make(Kind::Sub, left, term());
      else
        return left;
    }
  }

  NodePtr term() {
    NodePtr left = factor();
    for (;;) {
      if (consume('*'))
        left = make(Kind::Mul, left, factor());
      else if (consume('/'))
        left = make(Kind::Div, left, factor());
      else
        return left;
    }
  }

  NodePtr factor() {
    if (consume('-')) return make(Kind::Neg, factor());
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (consume('^')) return make(Kind::Pow, base, factor());
    return base;
  }

  NodePtr atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    if (consume('(')) {
      NodePtr e = expr();
      if (!consume(')')) fail("missing ')'");
      return e;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    size_t end = 0;
    double v = 0.0;
    try {
      v = std::stod(text_.substr(pos_), &end);
    } catch (const std::exception&) {
      fail("malformed number");
    }
    pos_ += end;
    return make_const(v);
  }

  NodePtr identifier() {
    const size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string name = text_.substr(start, pos_ - start);
    if (peek() == '(') {
      if (name != "max0") fail("unknown function '" + name + "' (only max0 is available)");
      consume('(');
      NodePtr arg = expr();
      if (!consume(')')) fail("missing ')' after max0 argument");
      return make(Kind::Max0, arg);
    }
    for (size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i] == name) return make_var(i);
    auto it = params_.find(name);
    if (it != params_.end()) return make_const(it->second);
    fail("unknown identifier '" + name + "'");
  }

  const std::string& text_;
  const std::vector<std::string>& vars_;
  const std::map<std::string, double>& params_;
  size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text,
                             const std::vector<std::string>& variables,
                             const std::map<std::string, double>& params) {
  Expression e;
  e.text_ = text;
  e.root_ = Parser(text, variables, params).parse();
  return e;
}

double Expression::eval(const std::vector<double>& variable_values) const {
  return root_->eval(variable_values.data(), variable_values.size());
}

double Expression::eval(const double* values, size_t count) const {
  return root_->eval(values, count);
}

}  // namespace bsrd
